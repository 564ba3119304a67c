//! Randomized cross-checks of the planners against each other, against the
//! exhaustive oracle, and against structural invariants that hold for every
//! feasible scenario.

use pricer_core::constraints::ConstraintSchedule;
use pricer_core::demand::{DemandModel, LinearDemandParams};
use pricer_core::distribution::DistributionMethod;
use pricer_core::oracle::{self, GridSpec};
use pricer_core::planner::{base, tvm, StartState};
use pricer_core::policy::build_grid;
use pricer_core::timevalue::TimeValueSpec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draws a time-invariant demand law with a comfortable price band.
fn draw_params(rng: &mut ChaCha8Rng) -> LinearDemandParams {
    let a = rng.gen_range(80.0..400.0);
    let b = rng.gen_range(0.5..4.0);
    let scale = rng.gen_range(0.5..3.0);
    let choke = a / b;
    LinearDemandParams::new(a, b)
        .with_scale(scale)
        .with_price_bounds(0.0, choke)
}

/// Final-sales commitments sized so the even plan sits well inside the
/// achievable rate band.
fn draw_targets(rng: &mut ChaCha8Rng, params: &[LinearDemandParams], horizon: f64) -> Vec<f64> {
    params
        .iter()
        .map(|p| {
            let frac = rng.gen_range(0.15..0.75);
            frac * p.max_rate() * horizon
        })
        .collect()
}

fn no_floor_schedule(horizon: f64, finals: &[f64]) -> ConstraintSchedule {
    ConstraintSchedule::builder(horizon)
        .final_sales(finals)
        .build()
        .expect("schedule without floors is always valid")
}

/// A revenue floor at `window_end` that is above what the even plan earns but
/// safely inside what the groups can jointly add: the uplift is a modest
/// fraction of the aggregate spare revenue-rate capacity over the window.
fn feasible_floor(
    rng: &mut ChaCha8Rng,
    params: &[LinearDemandParams],
    plan: &pricer_core::planner::PlanResult,
    held: f64,
    window_end: f64,
) -> f64 {
    let headroom: f64 = params
        .iter()
        .enumerate()
        .map(|(g, p)| {
            let price = plan.policy.price(g, 0.0);
            (p.max_revenue_rate() - p.revenue_rate(price)).max(0.0)
        })
        .sum();
    held + rng.gen_range(0.3..0.9) * 0.25 * headroom * window_end
}

#[test]
fn no_floor_plans_hold_one_even_price_per_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let horizon = rng.gen_range(4.0..20.0);
        let k = rng.gen_range(1..=3);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let schedule = no_floor_schedule(horizon, &finals);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();

        let result = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .expect("unconstrained scenario must plan");

        for (g, target) in finals.iter().enumerate() {
            let segments = result.policy.segments(g);
            assert_eq!(
                segments.len(),
                1,
                "group {g} should hold a single constant price"
            );
            let p0 = result.policy.price(g, 0.0);
            let p1 = result.policy.price(g, horizon * 0.63);
            assert!((p0 - p1).abs() < 1e-12, "price must not move over time");

            let sold = result.predicted.final_sales(g);
            assert!(
                (sold - target).abs() <= 1e-9 * target.max(1.0),
                "group {g} sold {sold}, committed {target}"
            );
        }
    }
}

#[test]
fn floor_plans_break_only_at_checkpoint_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let horizon = 10.0;
    let times = [2.5, 5.0, 7.5];

    for round in 0..30 {
        let k = rng.gen_range(1..=2);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();

        // Price the floor off the even plan so the draw stays feasible: a few
        // percent above what holding the opening price earns by mid-horizon.
        let plain = base::plan(
            &no_floor_schedule(horizon, &finals),
            &models,
            DistributionMethod::Headroom,
        )
        .expect("unconstrained plan");
        let grid = build_grid(horizon, 0.25, &times);
        let traj = plain.policy.integrate(&models, &grid).expect("integrate");
        let held = traj.aggregate_revenue_at(5.0);
        let floor = feasible_floor(&mut rng, &params, &plain, held, 5.0);

        let schedule = ConstraintSchedule::builder(horizon)
            .interior_times(&times)
            .final_sales(&finals)
            .revenue_floor(5.0, floor)
            .build()
            .expect("schedule");

        let result = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .unwrap_or_else(|e| panic!("round {round}: floored plan failed: {e}"));

        for bp in result.policy.breakpoints() {
            let on_grid = times.iter().any(|t| (bp - t).abs() < 1e-9)
                || bp.abs() < 1e-9
                || (bp - horizon).abs() < 1e-9;
            assert!(on_grid, "round {round}: breakpoint {bp} off the checkpoint grid");
        }

        let traj = result
            .policy
            .integrate(&models, &build_grid(horizon, 0.25, &times))
            .expect("integrate");
        assert!(
            traj.aggregate_revenue_at(5.0) >= floor - 1e-6 * floor,
            "round {round}: repaired plan missed its own floor"
        );
        for (g, target) in finals.iter().enumerate() {
            let sold = traj.final_sales(g);
            assert!(
                (sold - target).abs() <= 1e-6 * target.max(1.0),
                "round {round}: group {g} final sales drifted"
            );
        }
    }
}

/// With every group committed to exact final sales under a time-invariant law
/// and no discounting, revenue decomposes as
/// `choke * S - (1 / (b * scale)) * integral(v^2)`, and the integral is
/// minimized by a constant rate. Floors therefore never raise total revenue.
#[test]
fn floors_never_raise_total_revenue() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let horizon = 10.0;
    let times = [2.5, 5.0, 7.5];

    for _ in 0..30 {
        let k = rng.gen_range(1..=2);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();

        let plain = base::plan(
            &no_floor_schedule(horizon, &finals),
            &models,
            DistributionMethod::Headroom,
        )
        .expect("unconstrained plan");
        let even_revenue = plain.final_revenue();

        let grid = build_grid(horizon, 0.25, &times);
        let traj = plain.policy.integrate(&models, &grid).expect("integrate");
        let held = traj.aggregate_revenue_at(5.0);
        let floor = feasible_floor(&mut rng, &params, &plain, held, 5.0);

        let schedule = ConstraintSchedule::builder(horizon)
            .interior_times(&times)
            .final_sales(&finals)
            .revenue_floor(5.0, floor)
            .build()
            .expect("schedule");
        let repaired = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .expect("floored plan");

        assert!(
            repaired.final_revenue() <= even_revenue + 1e-6 * even_revenue.max(1.0),
            "floor raised revenue: {} > {}",
            repaired.final_revenue(),
            even_revenue
        );
    }
}

#[test]
fn planner_never_beats_the_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let horizon = 10.0;
    let tv = TimeValueSpec::flat();

    for round in 0..10 {
        let k = rng.gen_range(1..=2);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();
        let schedule = ConstraintSchedule::builder(horizon)
            .interior_times(&[5.0])
            .final_sales(&finals)
            .build()
            .expect("schedule");

        let planned = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .expect("plan");

        // A tight band around the even price keeps the grid fine enough for
        // the oracle's tolerance to stay well below the planned revenue.
        let ranges: Vec<(f64, f64)> = (0..k)
            .map(|g| {
                let p = planned.policy.price(g, 0.0);
                (p - 6.0, p + 6.0)
            })
            .collect();
        let spec = GridSpec {
            points: 25,
            price_ranges: ranges,
            budget: 10_000_000,
            tolerance_override: None,
        };
        let best = oracle::best(&schedule, &models, &tv, &spec).expect("oracle");

        assert!(
            best.revenue + best.revenue_tolerance >= planned.final_revenue(),
            "round {round}: oracle {} (+{}) trails planner {}",
            best.revenue,
            best.revenue_tolerance,
            planned.final_revenue()
        );
    }
}

#[test]
fn flat_time_value_collapses_to_the_base_planner() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let horizon = 10.0;
    let times = [2.5, 5.0, 7.5];
    let tv = TimeValueSpec::flat();

    for round in 0..25 {
        let k = rng.gen_range(1..=2);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();

        let plain = base::plan(
            &no_floor_schedule(horizon, &finals),
            &models,
            DistributionMethod::Headroom,
        )
        .expect("unconstrained plan");
        let grid = build_grid(horizon, 0.25, &times);
        let traj = plain.policy.integrate(&models, &grid).expect("integrate");
        let held = traj.aggregate_revenue_at(5.0);
        let floor = feasible_floor(&mut rng, &params, &plain, held, 5.0);

        let schedule = ConstraintSchedule::builder(horizon)
            .interior_times(&times)
            .final_sales(&finals)
            .revenue_floor(5.0, floor)
            .build()
            .expect("schedule");

        let base_plan = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .expect("base plan");
        let tvm_plan = tvm::plan(&schedule, &models, &tv, DistributionMethod::Headroom)
            .expect("tvm plan");

        for g in 0..k {
            for t in [0.1, 2.0, 3.7, 5.2, 6.9, 8.4, 9.9] {
                let pb = base_plan.policy.price(g, t);
                let pt = tvm_plan.policy.price(g, t);
                assert!(
                    (pb - pt).abs() <= 1e-7 * pb.abs().max(1.0),
                    "round {round}: group {g} t={t}: base {pb} vs flat-tvm {pt}"
                );
            }
        }
        let rb = base_plan.final_revenue();
        let rt = tvm_plan.final_revenue();
        assert!(
            (rb - rt).abs() <= 1e-7 * rb.max(1.0),
            "round {round}: revenue diverged: {rb} vs {rt}"
        );
    }
}

#[test]
fn replanning_mid_flight_from_plan_state_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let horizon = 12.0;

    for _ in 0..20 {
        let k = rng.gen_range(1..=3);
        let params: Vec<_> = (0..k).map(|_| draw_params(&mut rng)).collect();
        let finals = draw_targets(&mut rng, &params, horizon);
        let schedule = no_floor_schedule(horizon, &finals);
        let models: Vec<_> = params
            .iter()
            .map(|p| DemandModel::constant(p.clone(), horizon))
            .collect();

        let original = base::plan(&schedule, &models, DistributionMethod::Headroom)
            .expect("plan");

        let mid = rng.gen_range(0.2 * horizon..0.8 * horizon);
        let grid = build_grid(horizon, 0.1, &[mid]);
        let traj = original.policy.integrate(&models, &grid).expect("integrate");
        let start = StartState {
            time: mid,
            sold: (0..k).map(|g| traj.sales_at(g, mid)).collect(),
            revenue: (0..k).map(|g| traj.revenue_at(g, mid)).collect(),
        };

        let resumed = base::plan_from(&schedule, &models, DistributionMethod::Headroom, start)
            .expect("replan from plan state");

        for g in 0..k {
            for t in [mid + 0.01, (mid + horizon) / 2.0, horizon - 0.01] {
                let p0 = original.policy.price(g, t);
                let p1 = resumed.policy.price(g, t);
                assert!(
                    (p0 - p1).abs() <= 1e-6 * p0.abs().max(1.0),
                    "group {g} t={t}: original {p0} vs resumed {p1}"
                );
            }
        }
    }
}
