//! `pricer` command-line front end.
//!
//! Four subcommands wrap the engine: `plan` computes a policy for a scenario
//! file, `simulate` executes it through demand-change events, `compare` runs
//! both shortfall-distribution methods side by side, and `oracle` brute-forces
//! a price grid to benchmark the planner. Results land as CSV series and
//! plain-text reports in the output directory.
//!
//! Exit codes: 0 success, 1 input error (unreadable, unparsable, or invalid
//! scenario), 2 infeasible (reports are still written where possible),
//! 3 search budget exceeded.

pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use pricer_core::planner::{base, tvm};
use pricer_core::simulator;
use pricer_core::{
    build_grid, DemandModel, DistributionMethod, GridSpec, PlanResult, PlannerKind,
    PricingError, Scenario, SimulationResult,
};

#[derive(Debug, Parser)]
#[command(
    name = "pricer",
    version,
    about = "Finite-horizon pricing with sales and revenue commitments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a pricing plan and write the policy and trajectory series.
    Plan {
        /// Scenario file (TOML).
        file: PathBuf,
        /// Override the scenario's planner.
        #[arg(long, value_enum)]
        planner: Option<PlannerArg>,
        /// Override the scenario's shortfall distribution method.
        #[arg(long, value_enum)]
        distribution: Option<DistributionArg>,
        /// Output directory (created if missing).
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Execute a scenario through its demand-change events, replanning at each.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run both distribution methods on the same scenario and compare revenue.
    Compare {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Benchmark the planner against exhaustive grid enumeration.
    Oracle {
        file: PathBuf,
        /// Grid points per price axis.
        #[arg(long, default_value_t = 15)]
        grid: usize,
        /// Maximum number of price combinations to evaluate.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlannerArg {
    Base,
    Tvm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistributionArg {
    Headroom,
    Revshare,
}

/// Executes a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Plan {
            file,
            planner,
            distribution,
            out,
        } => cmd_plan(&file, planner, distribution, &out),
        Command::Simulate { file, out } => cmd_simulate(&file, &out),
        Command::Compare { file, out } => cmd_compare(&file, &out),
        Command::Oracle {
            file,
            grid,
            budget,
            out,
        } => cmd_oracle(&file, grid, budget, &out),
    }
}

const EXIT_OK: i32 = 0;
const EXIT_INPUT: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;
const EXIT_BUDGET: i32 = 3;

fn exit_code_for(err: &PricingError) -> i32 {
    match err.root_cause() {
        PricingError::BudgetExceeded { .. } => EXIT_BUDGET,
        PricingError::InvalidScenario(_) | PricingError::InvalidSchedule(_) => EXIT_INPUT,
        _ => EXIT_INFEASIBLE,
    }
}

fn load_scenario(file: &Path) -> Result<Scenario, i32> {
    scenario::load(file).map_err(|e| {
        eprintln!("{e}");
        match e {
            scenario::LoadError::Invalid { ref source, .. } => exit_code_for(source),
            _ => EXIT_INPUT,
        }
    })
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), i32> {
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(dir.join(name), content))
        .map_err(|e| {
            eprintln!("{}: {e}", dir.join(name).display());
            EXIT_INPUT
        })
}

fn demand_models(scenario: &Scenario) -> Vec<DemandModel> {
    scenario
        .groups
        .iter()
        .map(|g| DemandModel::constant(g.params, scenario.horizon))
        .collect()
}

/// Plans against the demand laws as configured at the start; events are the
/// simulator's business.
fn plan_scenario(scenario: &Scenario) -> Result<PlanResult, PricingError> {
    let models = demand_models(scenario);
    match scenario.planner {
        PlannerKind::Base => {
            base::plan(&scenario.schedule, &models, scenario.distribution)
        }
        PlannerKind::TimeValue => tvm::plan(
            &scenario.schedule,
            &models,
            &scenario.timevalue,
            scenario.distribution,
        ),
    }
}

fn output_grid(scenario: &Scenario, result: &PlanResult) -> Vec<f64> {
    let mut extras: Vec<f64> = scenario.schedule.times().to_vec();
    extras.extend(result.policy.breakpoints());
    build_grid(scenario.horizon, scenario.grid_step(), &extras)
}

fn cmd_plan(
    file: &Path,
    planner: Option<PlannerArg>,
    distribution: Option<DistributionArg>,
    out: &Path,
) -> i32 {
    let mut scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(p) = planner {
        scenario.planner = match p {
            PlannerArg::Base => PlannerKind::Base,
            PlannerArg::Tvm => PlannerKind::TimeValue,
        };
    }
    if let Some(d) = distribution {
        scenario.distribution = match d {
            DistributionArg::Headroom => DistributionMethod::Headroom,
            DistributionArg::Revshare => DistributionMethod::RevenueShare,
        };
    }
    // Overrides can break scenario-level rules (e.g. base + discounting).
    if let Err(e) = scenario.validate() {
        eprintln!("{}: {e}", file.display());
        return exit_code_for(&e);
    }

    let result = match plan_scenario(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            let report = format!("error: {e}\nfeasible: no\n");
            return match write_file(out, "constraints_report.txt", &report) {
                Ok(()) => exit_code_for(&e),
                Err(code) => code,
            };
        }
    };
    let models = demand_models(&scenario);
    let grid = output_grid(&scenario, &result);
    let traj = match result.policy.integrate(&models, &grid) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return exit_code_for(&e);
        }
    };
    let report = pricer_core::constraint_report(
        &scenario.schedule,
        &traj,
        scenario.schedule.default_tolerance(),
    );
    let k = scenario.groups.len();
    let all_ok = report.iter().all(|s| s.satisfied);
    let files = [
        ("policy.csv", output::policy_csv(&result.policy, k, &grid)),
        ("trajectory.csv", output::trajectory_csv(&traj, k)),
        (
            "constraints_report.txt",
            output::constraints_report(&report),
        ),
    ];
    for (name, content) in &files {
        if let Err(code) = write_file(out, name, content) {
            return code;
        }
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn write_simulation_outputs(
    out: &Path,
    scenario: &Scenario,
    result: &SimulationResult,
) -> Result<(), i32> {
    let k = scenario.groups.len();
    if let (Some(policy), Some(traj)) = (&result.policy, &result.trajectory) {
        write_file(out, "policy.csv", &output::policy_csv(policy, k, traj.grid()))?;
        write_file(out, "trajectory.csv", &output::trajectory_csv(traj, k))?;
    }
    let mut report = output::constraints_report(&result.report);
    report.push_str(&output::status_line(&result.status));
    write_file(out, "constraints_report.txt", &report)?;
    write_file(out, "replans.csv", &output::replans_csv(&result.replans))?;
    let rows = simulator::distribution_report(result);
    write_file(
        out,
        "distribution_report.csv",
        &output::distribution_csv(&rows),
    )?;
    Ok(())
}

fn cmd_simulate(file: &Path, out: &Path) -> i32 {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = match simulator::run(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return exit_code_for(&e);
        }
    };
    if let Err(code) = write_simulation_outputs(out, &scenario, &result) {
        return code;
    }
    let feasible = result.is_complete() && result.report.iter().all(|s| s.satisfied);
    if feasible {
        EXIT_OK
    } else {
        if let pricer_core::SimulationStatus::InfeasibleAt { time, error } =
            &result.status
        {
            eprintln!(
                "{}: infeasible at t={}: {error}",
                file.display(),
                output::fmt_sig(*time)
            );
        }
        EXIT_INFEASIBLE
    }
}

fn cmd_compare(file: &Path, out: &Path) -> i32 {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = match simulator::compare(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return exit_code_for(&e);
        }
    };
    let k = scenario.groups.len();
    for (name, side) in [
        ("headroom", &result.headroom),
        ("revshare", &result.revshare),
    ] {
        if let (Some(policy), Some(traj)) = (&side.policy, &side.trajectory) {
            let policy_csv = output::policy_csv(policy, k, traj.grid());
            let traj_csv = output::trajectory_csv(traj, k);
            if let Err(code) = write_file(out, &format!("policy_{name}.csv"), &policy_csv)
            {
                return code;
            }
            if let Err(code) =
                write_file(out, &format!("trajectory_{name}.csv"), &traj_csv)
            {
                return code;
            }
        }
    }
    let summary = output::compare_summary(
        result.headroom.final_revenue,
        result.revshare.final_revenue,
        result.delta_pct(),
    );
    if let Err(code) = write_file(out, "summary.txt", &summary) {
        return code;
    }
    if result.headroom.is_complete() && result.revshare.is_complete() {
        EXIT_OK
    } else {
        eprintln!("{}: at least one method run was infeasible", file.display());
        EXIT_INFEASIBLE
    }
}

fn cmd_oracle(file: &Path, grid: usize, budget: u64, out: &Path) -> i32 {
    let scenario = match load_scenario(file) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let spec = GridSpec {
        points: grid,
        price_ranges: scenario
            .groups
            .iter()
            .map(|g| (g.params.price_min, g.params.price_max))
            .collect(),
        budget,
        tolerance_override: None,
    };
    let models = demand_models(&scenario);
    let best = match pricer_core::oracle::best(
        &scenario.schedule,
        &models,
        &scenario.timevalue,
        &spec,
    ) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{}: {e}", file.display());
            return exit_code_for(&e);
        }
    };
    if let Err(code) = write_file(
        out,
        "oracle_best.csv",
        &output::oracle_best_csv(&best, scenario.schedule.times()),
    ) {
        return code;
    }
    let planned = match plan_scenario(&scenario) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: planner failed: {e}", file.display());
            return exit_code_for(&e);
        }
    };
    let report = output::gap_report(scenario.planner, planned.final_revenue(), &best);
    if let Err(code) = write_file(out, "gap_report.txt", &report) {
        return code;
    }
    EXIT_OK
}
