//! Result serialization: CSV series and plain-text reports.
//!
//! Everything written here is deterministic: the same plan yields the same
//! bytes. Floating-point values are rendered with up to nine significant
//! digits, in plain notation for moderate magnitudes and scientific notation
//! otherwise, with trailing zeros trimmed.

use std::fmt::Write as _;

use pricer_core::{
    ConstraintKind, ConstraintStatus, DistributionMethod, DistributionRow,
    OracleBest, PlannerKind, PriceCurve, PricingPolicy, ReplanRecord,
    ReplanTrigger, SimulationStatus, Trajectory,
};

/// Formats with 9 significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string(); // covers -0.0
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let mut s = format!("{x:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        let mut s = format!("{x:.8e}");
        // "1.20000000e-7" -> "1.2e-7"
        if let Some(epos) = s.find('e') {
            let (mantissa, exponent) = s.split_at(epos);
            let mut m = mantissa.to_string();
            if m.contains('.') {
                while m.ends_with('0') {
                    m.pop();
                }
                if m.ends_with('.') {
                    m.pop();
                }
            }
            s = format!("{m}{exponent}");
        }
        s
    }
}

fn fmt_optional_group(group: Option<usize>) -> String {
    match group {
        Some(g) => g.to_string(),
        None => "-".to_string(),
    }
}

fn method_name(method: DistributionMethod) -> &'static str {
    match method {
        DistributionMethod::Headroom => "headroom",
        DistributionMethod::RevenueShare => "revshare",
    }
}

pub fn planner_name(kind: PlannerKind) -> &'static str {
    match kind {
        PlannerKind::Base => "base",
        PlannerKind::TimeValue => "tvm",
    }
}

/// `policy.csv`: one row per constant stretch, dense rows where the price
/// varies continuously. Sorted by group, then time.
pub fn policy_csv(policy: &PricingPolicy, num_groups: usize, grid: &[f64]) -> String {
    let mut out = String::from("t,group,price,posted_price\n");
    let horizon = policy.horizon();
    for group in 0..num_groups {
        for seg in policy.segments(group) {
            match seg.curve {
                PriceCurve::Constant(_) => {
                    push_policy_row(&mut out, policy, group, seg.start);
                }
                PriceCurve::Stationary { .. } => {
                    for &t in grid.iter().filter(|&&t| t >= seg.start && t < seg.end) {
                        push_policy_row(&mut out, policy, group, t);
                    }
                    if (seg.end - horizon).abs() <= 1e-12 * horizon.abs().max(1.0) {
                        push_policy_row(&mut out, policy, group, horizon);
                    }
                }
            }
        }
    }
    out
}

fn push_policy_row(out: &mut String, policy: &PricingPolicy, group: usize, t: f64) {
    let price = policy.price(group, t);
    let posted = policy.posted_price(group, t);
    let _ = writeln!(
        out,
        "{},{},{},{}",
        fmt_sig(t),
        group,
        fmt_sig(price),
        fmt_sig(posted)
    );
}

/// `trajectory.csv`: cumulative sales and weighted revenue per group plus the
/// aggregate, one row per grid time.
pub fn trajectory_csv(traj: &Trajectory, num_groups: usize) -> String {
    let mut out = String::from("t");
    for g in 0..num_groups {
        let _ = write!(out, ",sales_{g},revenue_{g}");
    }
    out.push_str(",aggregate_revenue\n");
    for &t in traj.grid() {
        let _ = write!(out, "{}", fmt_sig(t));
        for g in 0..num_groups {
            let _ = write!(
                out,
                ",{},{}",
                fmt_sig(traj.sales_at(g, t)),
                fmt_sig(traj.revenue_at(g, t))
            );
        }
        let _ = writeln!(out, ",{}", fmt_sig(traj.aggregate_revenue_at(t)));
    }
    out
}

/// `constraints_report.txt`: one line per commitment plus a verdict line.
pub fn constraints_report(report: &[ConstraintStatus]) -> String {
    let mut out = String::new();
    for status in report {
        let kind = match status.kind {
            ConstraintKind::IntermediateSales => "sales_floor",
            ConstraintKind::FinalSales => "final_sales",
            ConstraintKind::Revenue => "revenue_floor",
        };
        let _ = writeln!(
            out,
            "{kind} group={} time={} required={} attained={} satisfied={}",
            fmt_optional_group(status.group),
            fmt_sig(status.time),
            fmt_sig(status.required),
            fmt_sig(status.attained),
            if status.satisfied { "yes" } else { "no" }
        );
    }
    let all_ok = report.iter().all(|s| s.satisfied);
    let _ = writeln!(out, "feasible: {}", if all_ok { "yes" } else { "no" });
    out
}

/// `replans.csv`: one row per (planner invocation, group).
pub fn replans_csv(replans: &[ReplanRecord]) -> String {
    let mut out =
        String::from("time,trigger,event_group,group,old_price,new_price\n");
    for record in replans {
        let (trigger, event_group) = match record.trigger {
            ReplanTrigger::Initial => ("initial", "-".to_string()),
            ReplanTrigger::DemandChange { group } => {
                ("demand_change", group.to_string())
            }
        };
        for (g, (old, new)) in record
            .old_prices
            .iter()
            .zip(&record.new_prices)
            .enumerate()
        {
            let _ = writeln!(
                out,
                "{},{trigger},{event_group},{g},{},{}",
                fmt_sig(record.time),
                fmt_sig(*old),
                fmt_sig(*new)
            );
        }
    }
    out
}

/// `distribution_report.csv`: one row per (allocation, group).
pub fn distribution_csv(rows: &[DistributionRow]) -> String {
    let mut out = String::from(
        "plan_time,decision_time,target_time,method,shortfall,group,weight,share,equal_split\n",
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_sig(row.plan_time),
            fmt_sig(row.decision_time),
            fmt_sig(row.target_time),
            method_name(row.method),
            fmt_sig(row.shortfall),
            row.group,
            fmt_sig(row.weight),
            fmt_sig(row.share),
            if row.equal_split { "yes" } else { "no" }
        );
    }
    out
}

/// One status line for simulation outcomes, appended to reports.
pub fn status_line(status: &SimulationStatus) -> String {
    match status {
        SimulationStatus::Completed => "status: completed\n".to_string(),
        SimulationStatus::InfeasibleAt { time, error } => {
            format!("status: infeasible at t={} ({error})\n", fmt_sig(*time))
        }
    }
}

/// `summary.txt` for the method comparison.
pub fn compare_summary(
    headroom_revenue: Option<f64>,
    revshare_revenue: Option<f64>,
    delta_pct: Option<f64>,
) -> String {
    let fmt_opt = |v: Option<f64>| match v {
        Some(x) => fmt_sig(x),
        None => "--".to_string(),
    };
    format!(
        "headroom={} revshare={} delta_pct={}\n",
        fmt_opt(headroom_revenue),
        fmt_opt(revshare_revenue),
        fmt_opt(delta_pct)
    )
}

/// `oracle_best.csv`: the winning grid policy, one row per (group, window).
pub fn oracle_best_csv(best: &OracleBest, times: &[f64]) -> String {
    let mut out = String::from("group,window,start,end,price\n");
    for (group, prices) in best.prices.iter().enumerate() {
        for (w, &price) in prices.iter().enumerate() {
            let _ = writeln!(
                out,
                "{group},{w},{},{},{}",
                fmt_sig(times[w]),
                fmt_sig(times[w + 1]),
                fmt_sig(price)
            );
        }
    }
    out
}

/// `gap_report.txt`: enumeration result vs the planner's revenue.
pub fn gap_report(
    planner: PlannerKind,
    planner_revenue: f64,
    best: &OracleBest,
) -> String {
    let gap = best.revenue - planner_revenue;
    let gap_pct = if best.revenue.abs() > f64::EPSILON {
        100.0 * gap / best.revenue
    } else {
        0.0
    };
    format!(
        "planner={}\nplanner_revenue={}\noracle_revenue={}\ngap={}\ngap_pct={}\n\
         sales_tolerance={}\nrevenue_tolerance={}\nevaluated={}\nfeasible_count={}\n",
        planner_name(planner),
        fmt_sig(planner_revenue),
        fmt_sig(best.revenue),
        fmt_sig(gap),
        fmt_sig(gap_pct),
        fmt_sig(best.sales_tolerance),
        fmt_sig(best.revenue_tolerance),
        best.evaluated,
        best.feasible_count
    )
}
