//! Brute-force reference optimizer.
//!
//! Enumerates every combination of per-group, per-window constant prices on a
//! finite grid, keeps the combinations whose trajectories satisfy the
//! schedule, and returns the best by weighted revenue. Deliberately
//! independent of the planners: it only uses the demand law and straight
//! accumulation, so agreement between the two is meaningful evidence.
//!
//! Because a finite grid almost never hits a sales total exactly, commitments
//! are checked with grid-consistent tolerances: the final-sales equality is
//! relaxed to a band of `sales_tolerance` and floors get the analogous slack,
//! each derived from how much one grid step can move the quantity in
//! question. Tolerances can be overridden to compare runs across grids.

use crate::constraints::ConstraintSchedule;
use crate::demand::DemandModel;
use crate::error::PricingError;
use crate::policy::{PolicySegment, PriceCurve, PricingPolicy};
use crate::timevalue::TimeValueSpec;

/// Search space for [`best`]: one price axis per group per window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Grid points per axis (at least 2, endpoints included).
    pub points: usize,
    /// Inclusive price range per group.
    pub price_ranges: Vec<(f64, f64)>,
    /// Maximum number of combinations the search may evaluate.
    pub budget: u64,
    /// Overrides both derived tolerances when set (used to keep feasibility
    /// identical across nested grids).
    pub tolerance_override: Option<f64>,
}

/// Best feasible grid policy found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBest {
    /// Winning price per group per window.
    pub prices: Vec<Vec<f64>>,
    /// Aggregate weighted revenue at the horizon.
    pub revenue: f64,
    pub policy: PricingPolicy,
    /// Slack applied to sales commitments (band for the final equality).
    pub sales_tolerance: f64,
    /// Slack applied to revenue floors.
    pub revenue_tolerance: f64,
    pub evaluated: u64,
    pub feasible_count: u64,
}

/// Runs the enumeration. Fails upfront when the combination count exceeds the
/// budget, and with [`PricingError::NoFeasiblePolicy`] when no grid point
/// passes the schedule.
pub fn best(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    tv: &TimeValueSpec,
    grid: &GridSpec,
) -> Result<OracleBest, PricingError> {
    schedule.ensure_valid()?;
    let k = schedule.num_groups();
    if models.len() != k || grid.price_ranges.len() != k {
        return Err(PricingError::InvalidScenario(
            "oracle needs one demand model and one price range per group".to_string(),
        ));
    }
    if grid.points < 2 {
        return Err(PricingError::InvalidScenario(
            "price grid needs at least two points per axis".to_string(),
        ));
    }
    for (lo, hi) in &grid.price_ranges {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(PricingError::InvalidScenario(format!(
                "price range [{lo}, {hi}] is not a proper interval"
            )));
        }
    }
    let times = schedule.times();
    let windows = times.len() - 1;
    let axes = k * windows;
    let combos = (grid.points as u128)
        .checked_pow(axes as u32)
        .unwrap_or(u128::MAX);
    if combos > grid.budget as u128 {
        return Err(PricingError::BudgetExceeded {
            required: combos,
            budget: grid.budget,
        });
    }

    // Price ladder per group and per-(group, window, price) window totals.
    let n = grid.points;
    let ladders: Vec<Vec<f64>> = grid
        .price_ranges
        .iter()
        .map(|(lo, hi)| {
            (0..n)
                .map(|m| lo + (hi - lo) * (m as f64) / ((n - 1) as f64))
                .collect()
        })
        .collect();
    // sales[i][j][m], revenue[i][j][m]
    let mut sales = vec![vec![vec![0.0f64; n]; windows]; k];
    let mut revenue = vec![vec![vec![0.0f64; n]; windows]; k];
    for i in 0..k {
        for j in 0..windows {
            let (a, b) = (times[j], times[j + 1]);
            let mut cuts: Vec<f64> = vec![a];
            cuts.extend(
                models[i]
                    .change_times()
                    .into_iter()
                    .filter(|t| *t > a && *t < b),
            );
            cuts.push(b);
            for (m, &p) in ladders[i].iter().enumerate() {
                let mut ds = 0.0;
                let mut dr = 0.0;
                for piece in cuts.windows(2) {
                    let params = models[i].params_at(0.5 * (piece[0] + piece[1]));
                    let v = params.rate(p);
                    ds += v * (piece[1] - piece[0]);
                    dr += p * v * tv.zeta_integral(piece[0], piece[1]);
                }
                sales[i][j][m] = ds;
                revenue[i][j][m] = dr;
            }
        }
    }

    let (sales_tol, revenue_tol) = match grid.tolerance_override {
        Some(t) => (t, t),
        None => derived_tolerances(schedule, models, grid),
    };

    // Checkpoint metadata flattened for the hot loop.
    let sales_floors: Vec<(usize, usize, f64)> = (0..=windows)
        .flat_map(|j| {
            (0..k).filter_map(move |i| schedule.sales_floor(i, j).map(|f| (i, j, f)))
        })
        .collect();
    let revenue_floors: Vec<(usize, f64)> = (0..=windows)
        .filter_map(|j| schedule.revenue_floor(j).map(|f| (j, f)))
        .collect();
    let finals: Vec<f64> = (0..k).map(|i| schedule.final_sales(i)).collect();

    let mut indices = vec![0usize; axes];
    let mut best_revenue = f64::NEG_INFINITY;
    let mut best_combo: Option<Vec<usize>> = None;
    let mut feasible_count = 0u64;
    // Cumulative sales per group per checkpoint; aggregate revenue likewise.
    let mut cum_sales = vec![vec![0.0f64; windows + 1]; k];
    let mut window_revenue = vec![0.0f64; windows];
    let mut cum_revenue = vec![0.0f64; windows + 1];

    'combos: loop {
        window_revenue.iter_mut().for_each(|r| *r = 0.0);
        for i in 0..k {
            let row = &mut cum_sales[i];
            for j in 0..windows {
                let m = indices[i * windows + j];
                row[j + 1] = row[j] + sales[i][j][m];
                window_revenue[j] += revenue[i][j][m];
            }
        }
        for j in 0..windows {
            cum_revenue[j + 1] = cum_revenue[j] + window_revenue[j];
        }
        let feasible = sales_floors
            .iter()
            .all(|&(i, j, f)| cum_sales[i][j] >= f - sales_tol)
            && revenue_floors
                .iter()
                .all(|&(j, f)| cum_revenue[j] >= f - revenue_tol)
            && (0..k).all(|i| (cum_sales[i][windows] - finals[i]).abs() <= sales_tol);
        if feasible {
            feasible_count += 1;
            let total = cum_revenue[windows];
            if total > best_revenue {
                best_revenue = total;
                best_combo = Some(indices.clone());
            }
        }
        // Odometer advance, last axis fastest: ascending enumeration visits
        // lexicographically smaller price vectors first, so ties keep the
        // smallest vector.
        for axis in (0..axes).rev() {
            indices[axis] += 1;
            if indices[axis] < n {
                continue 'combos;
            }
            indices[axis] = 0;
        }
        break;
    }

    let Some(combo) = best_combo else {
        return Err(PricingError::NoFeasiblePolicy);
    };
    let prices: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..windows)
                .map(|j| ladders[i][combo[i * windows + j]])
                .collect()
        })
        .collect();
    let segments: Vec<Vec<PolicySegment>> = (0..k)
        .map(|i| {
            (0..windows)
                .map(|j| PolicySegment {
                    start: times[j],
                    end: times[j + 1],
                    curve: PriceCurve::Constant(prices[i][j]),
                })
                .collect()
        })
        .collect();
    let policy = PricingPolicy::new(schedule.horizon(), tv.clone(), segments);
    Ok(OracleBest {
        prices,
        revenue: best_revenue,
        policy,
        sales_tolerance: sales_tol,
        revenue_tolerance: revenue_tol,
        evaluated: combos as u64,
        feasible_count,
    })
}

/// How far one grid step can move a window's sales or weighted revenue, taken
/// as the worst case over groups and windows.
fn derived_tolerances(
    schedule: &ConstraintSchedule,
    models: &[DemandModel],
    grid: &GridSpec,
) -> (f64, f64) {
    let times = schedule.times();
    let max_dt = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    let mut sales_tol = 0.0f64;
    let mut revenue_tol = 0.0f64;
    for (i, (lo, hi)) in grid.price_ranges.iter().enumerate() {
        let step = (hi - lo) / ((grid.points - 1) as f64);
        // Worst-case demand sensitivity across the group's segments.
        let mut rate_sens = 0.0f64;
        let mut revenue_sens = 0.0f64;
        let mut probe_times: Vec<f64> = vec![0.0];
        probe_times.extend(models[i].change_times());
        for t in probe_times {
            let p = models[i].params_at(t);
            let sb = p.scale * p.slope;
            rate_sens = rate_sens.max(sb);
            // |d(p*v)/dp| = |scale*(intercept - 2*slope*p)| on the range.
            let at_lo = (p.scale * (p.intercept - 2.0 * p.slope * lo)).abs();
            let at_hi = (p.scale * (p.intercept - 2.0 * p.slope * hi)).abs();
            revenue_sens = revenue_sens.max(at_lo.max(at_hi));
        }
        sales_tol = sales_tol.max(step * rate_sens * max_dt);
        revenue_tol = revenue_tol.max(step * revenue_sens * max_dt);
    }
    (sales_tol, revenue_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSchedule;
    use crate::demand::LinearDemandParams;
    use crate::distribution::DistributionMethod;
    use crate::planner::base;

    fn models(horizon: f64) -> Vec<DemandModel> {
        vec![DemandModel::constant(
            LinearDemandParams::new(300.0, 2.0).with_price_bounds(0.0, 150.0),
            horizon,
        )]
    }

    fn simple_schedule() -> ConstraintSchedule {
        ConstraintSchedule::builder(10.0)
            .final_sales(&[550.0])
            .build()
            .unwrap()
    }

    fn spec(points: usize) -> GridSpec {
        GridSpec {
            points,
            price_ranges: vec![(90.0, 150.0)],
            budget: 10_000_000,
            tolerance_override: None,
        }
    }

    #[test]
    fn budget_gate_reports_required_count() {
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[5.0])
            .final_sales(&[550.0])
            .build()
            .unwrap();
        let mut g = spec(100);
        g.budget = 500;
        let err = best(&schedule, &models(10.0), &TimeValueSpec::flat(), &g).unwrap_err();
        match err {
            PricingError::BudgetExceeded { required, budget } => {
                assert_eq!(required, 10_000);
                assert_eq!(budget, 500);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_window_picks_best_price_in_band() {
        // Step 5 puts the sales band at 100 units; within it, 120 (600 sold,
        // revenue 72000) beats every other grid point.
        let got = best(
            &simple_schedule(),
            &models(10.0),
            &TimeValueSpec::flat(),
            &spec(13),
        )
        .unwrap();
        assert_eq!(got.prices, vec![vec![120.0]]);
        assert!((got.revenue - 72000.0).abs() < 1e-9);
        assert_eq!(got.evaluated, 13);
        assert!(got.feasible_count >= 2);
    }

    #[test]
    fn tie_breaks_to_lexicographically_smallest_vector() {
        // Two windows, symmetric demand: (120, 125) and (125, 120) deliver
        // identical sales and revenue. A tight override keeps only the exact
        // combinations, and ascending enumeration keeps the smaller vector.
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[5.0])
            .final_sales(&[550.0])
            .build()
            .unwrap();
        let mut g = spec(13);
        g.tolerance_override = Some(1e-6);
        let got = best(&schedule, &models(10.0), &TimeValueSpec::flat(), &g).unwrap();
        assert_eq!(got.prices, vec![vec![120.0, 125.0]]);
        assert!((got.revenue - 67250.0).abs() < 1e-9);
    }

    #[test]
    fn empty_feasible_set_is_an_error() {
        let mut g = spec(3);
        g.price_ranges = vec![(140.0, 150.0)];
        let err = best(
            &simple_schedule(),
            &models(10.0),
            &TimeValueSpec::flat(),
            &g,
        )
        .unwrap_err();
        assert_eq!(err, PricingError::NoFeasiblePolicy);
    }

    #[test]
    fn refining_a_nested_grid_never_hurts() {
        // 7 -> 13 points halves the step but keeps every coarse point; with
        // the tolerance pinned, the feasible set only grows. The coarse grid
        // can get within 50 units of the target (rate steps of 20 over two
        // 5-unit windows), so 60 keeps it non-empty.
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[5.0])
            .final_sales(&[550.0])
            .revenue_floor(5.0, 30000.0)
            .build()
            .unwrap();
        let tv = TimeValueSpec::flat();
        let mut coarse = spec(7);
        coarse.tolerance_override = Some(60.0);
        let mut fine = spec(13);
        fine.tolerance_override = Some(60.0);
        let lo = best(&schedule, &models(10.0), &tv, &coarse).unwrap();
        let hi = best(&schedule, &models(10.0), &tv, &fine).unwrap();
        assert!(hi.revenue >= lo.revenue - 1e-12);
    }

    #[test]
    fn oracle_never_trails_the_planner() {
        // The planner meets the final total exactly; the oracle gets a band,
        // so with a grid containing good prices it should do at least as well.
        let schedule = ConstraintSchedule::builder(10.0)
            .interior_times(&[4.0])
            .final_sales(&[550.0])
            .revenue_floor(4.0, 30000.0)
            .build()
            .unwrap();
        let ms = models(10.0);
        let tv = TimeValueSpec::flat();
        let planned = base::plan(&schedule, &ms, DistributionMethod::Headroom).unwrap();
        let searched = best(&schedule, &ms, &tv, &spec(41)).unwrap();
        assert!(
            searched.revenue >= planned.final_revenue() - 1e-9,
            "oracle {} vs planner {}",
            searched.revenue,
            planned.final_revenue()
        );
    }

    #[test]
    fn honors_demand_changes_inside_windows() {
        let shifted = vec![DemandModel::constant(
            LinearDemandParams::new(300.0, 2.0),
            10.0,
        )
        .with_change(2.0, LinearDemandParams::new(200.0, 2.0))];
        let schedule = ConstraintSchedule::builder(10.0)
            .final_sales(&[400.0])
            .build()
            .unwrap();
        let g = GridSpec {
            points: 201,
            price_ranges: vec![(50.0, 150.0)],
            budget: 1_000_000,
            tolerance_override: None,
        };
        let got = best(&schedule, &shifted, &TimeValueSpec::flat(), &g).unwrap();
        // At price p: 2*(300-2p) + 8*(200-2p) = 2200 - 20p = 400 => p = 90,
        // and revenue falls in p there, so the band's low end 89.5 wins.
        let p = got.prices[0][0];
        let sold = 2.0 * (300.0 - 2.0 * p) + 8.0 * (200.0 - 2.0 * p);
        assert!((sold - 400.0).abs() <= got.sales_tolerance + 1e-9);
        assert!((p - 89.5).abs() < 1e-9);
    }
}
