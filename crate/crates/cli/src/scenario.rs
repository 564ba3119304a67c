//! Scenario file format: a TOML document mirroring [`Scenario`] field for
//! field. Unknown keys are rejected, and every demand coefficient must be
//! spelled out — there are no built-in economic defaults. The time-value
//! section is the one optional block; leaving it out means flat weighting.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use pricer_core::{
    DemandChangeEvent, DistributionMethod, GroupSpec, LinearDemandParams,
    PlannerKind, PricingError, Scenario, ScheduleBuilder, TimeFunction,
    TimeValueSpec,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Why a scenario file could not be turned into a runnable [`Scenario`].
#[derive(Debug)]
pub enum LoadError {
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Syntax or schema error; the embedded message carries line and column.
    Parse {
        path: String,
        message: String,
    },
    /// Well-formed file describing an invalid scenario.
    Invalid {
        path: String,
        source: PricingError,
    },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, source } => write!(f, "{path}: {source}"),
            LoadError::Parse { path, message } => {
                write!(f, "{path}: {message}")
            }
            LoadError::Invalid { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    schema_version: u32,
    horizon: HorizonSection,
    planner: PlannerSection,
    groups: Vec<GroupSection>,
    constraints: ConstraintsSection,
    #[serde(default)]
    events: Vec<EventSection>,
    timevalue: Option<TimeValueSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonSection {
    t_end: f64,
    output_grid_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlannerSection {
    kind: PlannerKindField,
    distribution: DistributionField,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKindField {
    Base,
    Tvm,
}

impl From<PlannerKindField> for PlannerKind {
    fn from(v: PlannerKindField) -> Self {
        match v {
            PlannerKindField::Base => PlannerKind::Base,
            PlannerKindField::Tvm => PlannerKind::TimeValue,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionField {
    Headroom,
    Revshare,
}

impl From<DistributionField> for DistributionMethod {
    fn from(v: DistributionField) -> Self {
        match v {
            DistributionField::Headroom => DistributionMethod::Headroom,
            DistributionField::Revshare => DistributionMethod::RevenueShare,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSection {
    a: f64,
    b: f64,
    scale: f64,
    cap: Option<f64>,
    price_min: f64,
    price_max: f64,
    initial_price: f64,
    final_sales: f64,
    #[serde(default)]
    sales_floors: Vec<TimedValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimedValue {
    time: f64,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintsSection {
    /// Interior checkpoint times; the start and the horizon are implicit.
    times: Vec<f64>,
    #[serde(default)]
    revenue_floors: Vec<TimedValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSection {
    time: f64,
    group: usize,
    a: f64,
    b: f64,
    scale: f64,
    cap: Option<f64>,
    price_min: f64,
    price_max: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeValueSection {
    phi: TimeFunctionSection,
    kappa: TimeFunctionSection,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum TimeFunctionSection {
    Constant { value: f64 },
    Exponential { rate: f64 },
    Table { points: Vec<(f64, f64)> },
}

impl From<TimeFunctionSection> for TimeFunction {
    fn from(v: TimeFunctionSection) -> Self {
        match v {
            TimeFunctionSection::Constant { value } => TimeFunction::Constant(value),
            TimeFunctionSection::Exponential { rate } => {
                TimeFunction::Exponential { rate }
            }
            TimeFunctionSection::Table { points } => TimeFunction::Table(points),
        }
    }
}

fn params(
    a: f64,
    b: f64,
    scale: f64,
    cap: Option<f64>,
    price_min: f64,
    price_max: f64,
) -> LinearDemandParams {
    let mut p = LinearDemandParams::new(a, b)
        .with_scale(scale)
        .with_price_bounds(price_min, price_max);
    if let Some(c) = cap {
        p = p.with_cap(c);
    }
    p
}

/// Reads and fully validates a scenario file.
pub fn load(path: &Path) -> Result<Scenario, LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| LoadError::Parse {
        path: display.clone(),
        // toml's message already carries "at line L, column C".
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(LoadError::Parse {
            path: display,
            message: format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            ),
        });
    }
    let invalid = |source| LoadError::Invalid {
        path: display.clone(),
        source,
    };

    let horizon = file.horizon.t_end;
    let mut builder: ScheduleBuilder = pricer_core::ConstraintSchedule::builder(horizon)
        .interior_times(&file.constraints.times)
        .final_sales(
            &file
                .groups
                .iter()
                .map(|g| g.final_sales)
                .collect::<Vec<_>>(),
        );
    for (i, g) in file.groups.iter().enumerate() {
        for floor in &g.sales_floors {
            builder = builder.sales_floor(i, floor.time, floor.value);
        }
    }
    for floor in &file.constraints.revenue_floors {
        builder = builder.revenue_floor(floor.time, floor.value);
    }
    let schedule = builder.build().map_err(invalid)?;

    let groups = file
        .groups
        .iter()
        .map(|g| GroupSpec {
            params: params(g.a, g.b, g.scale, g.cap, g.price_min, g.price_max),
            initial_price: g.initial_price,
        })
        .collect();
    let events = file
        .events
        .iter()
        .map(|e| DemandChangeEvent {
            time: e.time,
            group: e.group,
            params: params(e.a, e.b, e.scale, e.cap, e.price_min, e.price_max),
        })
        .collect();
    let timevalue = match file.timevalue {
        None => TimeValueSpec::flat(),
        Some(tv) => TimeValueSpec::new(tv.phi.into(), tv.kappa.into()),
    };

    let scenario = Scenario {
        horizon,
        groups,
        schedule,
        timevalue,
        events,
        planner: file.planner.kind.into(),
        distribution: file.planner.distribution.into(),
        output_grid_step: file.horizon.output_grid_step,
    };
    scenario.validate().map_err(invalid)?;
    Ok(scenario)
}
