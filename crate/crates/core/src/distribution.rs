//! Splitting a revenue shortfall across pricing groups.
//!
//! When aggregate revenue under the current prices would undershoot an
//! upcoming floor, the gap `ΔR` has to be assigned to individual groups
//! before their prices can be recomputed. Two rules are supported:
//!
//! * **Headroom** — weight each group by how much extra revenue it could
//!   still produce over the window (its revenue-maximizing potential minus
//!   what current prices already deliver). Groups with no room get nothing,
//!   and the split is guaranteed to be individually attainable.
//! * **Revenue share** — weight each group by its share of revenue realized
//!   so far. Cheap to compute and stable, but blind to saturation: a group
//!   already near its revenue peak can be handed more than it can absorb,
//!   which then surfaces as an infeasible per-group target.

use crate::error::PricingError;

/// How a shortfall is split across groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionMethod {
    Headroom,
    RevenueShare,
}

impl DistributionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionMethod::Headroom => "headroom",
            DistributionMethod::RevenueShare => "revshare",
        }
    }
}

/// Per-group figures for one allocation decision, all over the same planning
/// window.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInput {
    /// Revenue each group delivers over the window at its current prices.
    pub expected: Vec<f64>,
    /// Revenue each group could deliver at its revenue-maximizing price.
    pub max_possible: Vec<f64>,
    /// Revenue each group has realized from the start of the horizon.
    pub cumulative: Vec<f64>,
    /// Aggregate gap `ΔR >= 0` that must be added on top of `expected`.
    pub shortfall: f64,
}

impl AllocationInput {
    fn check(&self) -> Result<(), PricingError> {
        let k = self.expected.len();
        if self.max_possible.len() != k || self.cumulative.len() != k {
            return Err(PricingError::InvalidScenario(
                "allocation inputs must have one entry per group".to_string(),
            ));
        }
        let all = self
            .expected
            .iter()
            .chain(&self.max_possible)
            .chain(&self.cumulative);
        for v in all {
            if !v.is_finite() {
                return Err(PricingError::InvalidScenario(
                    "allocation inputs must be finite".to_string(),
                ));
            }
        }
        if !(self.shortfall >= 0.0) {
            return Err(PricingError::InvalidScenario(format!(
                "shortfall must be non-negative, got {}",
                self.shortfall
            )));
        }
        Ok(())
    }
}

/// Result of splitting a shortfall.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub method: DistributionMethod,
    /// Normalized weights, summing to one when the shortfall is positive.
    pub weights: Vec<f64>,
    /// Absolute revenue added to each group's window target.
    pub shares: Vec<f64>,
    /// True when the revenue-share rule had nothing to normalize by and fell
    /// back to an even split.
    pub equal_split: bool,
}

/// Dispatches to the chosen rule.
pub fn allocate(
    method: DistributionMethod,
    input: &AllocationInput,
) -> Result<Allocation, PricingError> {
    match method {
        DistributionMethod::Headroom => allocate_headroom(input),
        DistributionMethod::RevenueShare => allocate_revenue_share(input),
    }
}

/// Splits the shortfall in proportion to remaining revenue headroom.
///
/// Each share is bounded by the group's own headroom, so every per-group
/// target stays attainable. Fails when the aggregate headroom cannot cover
/// the shortfall.
pub fn allocate_headroom(input: &AllocationInput) -> Result<Allocation, PricingError> {
    input.check()?;
    let headroom: Vec<f64> = input
        .expected
        .iter()
        .zip(&input.max_possible)
        .map(|(e, m)| (m - e).max(0.0))
        .collect();
    let total: f64 = headroom.iter().sum();
    let k = headroom.len();
    if input.shortfall <= 0.0 {
        return Ok(Allocation {
            method: DistributionMethod::Headroom,
            weights: normalize_or_zeros(&headroom, total),
            shares: vec![0.0; k],
            equal_split: false,
        });
    }
    // Tiny slack so a shortfall equal to the full headroom (up to round-off)
    // still allocates.
    if input.shortfall > total * (1.0 + 1e-12) + 1e-9 {
        return Err(PricingError::InfeasibleTarget {
            target: input.shortfall,
            max: total,
            shortfall: input.shortfall - total,
        });
    }
    let weights = normalize_or_zeros(&headroom, total);
    let shares = weights.iter().map(|w| w * input.shortfall).collect();
    Ok(Allocation {
        method: DistributionMethod::Headroom,
        weights,
        shares,
        equal_split: false,
    })
}

/// Splits the shortfall in proportion to revenue realized so far, falling
/// back to an even split when nothing has been sold yet.
pub fn allocate_revenue_share(input: &AllocationInput) -> Result<Allocation, PricingError> {
    input.check()?;
    let k = input.cumulative.len();
    let total: f64 = input.cumulative.iter().sum();
    let (weights, equal_split) = if total > 0.0 {
        (
            input.cumulative.iter().map(|r| r / total).collect(),
            false,
        )
    } else {
        (vec![1.0 / k as f64; k], true)
    };
    let shares = weights.iter().map(|w: &f64| w * input.shortfall).collect();
    Ok(Allocation {
        method: DistributionMethod::RevenueShare,
        weights,
        shares,
        equal_split,
    })
}

fn normalize_or_zeros(values: &[f64], total: f64) -> Vec<f64> {
    if total > 0.0 {
        values.iter().map(|v| v / total).collect()
    } else {
        vec![0.0; values.len()]
    }
}
