//! Component builders: turn physical parameters (panel data sheets, power
//! curves, residence schedules, failure/repair rates, hourly load series)
//! into the performance distributions the system model composes.
//!
//! Renewable sources accept two input modes: parametric (a fitted
//! Beta/Weibull density plus a power function, discretized on demand) and
//! direct table (state value, probability, power output per unit). Table
//! mode exists because published multi-state models are often given only as
//! rounded tables whose underlying parameters are not recoverable.

use std::io::BufRead;

use crate::check::{is_non_negative, is_positive, is_probability};
use crate::stochastic::{
    discretize, steady_state_general, steady_state_two_state, BetaParams, MarkovGenerator,
    SourceDensity, StochasticError, TwoStateRates, WeibullParams,
};
use crate::ugf::{StructureFunction, UFunction, UgfError};

#[derive(Debug, thiserror::Error)]
pub enum ComponentError {
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Ugf(#[from] UgfError),
    #[error("no power output mapped for source state {value}")]
    UnmappedState { value: f64 },
    #[error("EV residence hours are all zero")]
    AllResidenceZero,
    #[error("availability must lie in [0, 1], got {value}")]
    InvalidAvailability { value: f64 },
    #[error("invalid component spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("load series is empty")]
    EmptySeries,
    #[error("load series has {len} values but {n_states} states were requested")]
    SeriesShorterThanStates { len: usize, n_states: usize },
    #[error("line {line} of the load series is not a number: {content:?}")]
    CsvParse { line: usize, content: String },
    #[error("failed to read load series: {0}")]
    CsvIo(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Solar generator
// ---------------------------------------------------------------------------

/// Data-sheet parameters of one PV module, as used by the cell-temperature
/// power model in [`pv_module_power`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPanelParams {
    /// Voltage temperature coefficient, V/degC.
    pub k_v: f64,
    /// Current temperature coefficient, A/degC.
    pub k_i: f64,
    /// Short-circuit current, A.
    pub i_sc: f64,
    /// Open-circuit voltage, V.
    pub v_oc: f64,
    /// Current at the maximum power point, A.
    pub i_mpp: f64,
    /// Voltage at the maximum power point, V.
    pub v_mpp: f64,
    /// Nominal operating temperature, degC.
    pub n_ot: f64,
    /// Ambient temperature, degC.
    pub t_a: f64,
}

impl SolarPanelParams {
    /// Ratio of the maximum obtainable power to `V_oc * I_sc`.
    pub fn fill_factor(&self) -> f64 {
        (self.v_mpp * self.i_mpp) / (self.v_oc * self.i_sc)
    }

    fn validate(&self) -> Result<(), ComponentError> {
        if !is_positive(self.i_sc) || !is_positive(self.v_oc) {
            return Err(ComponentError::InvalidSpec {
                reason: "I_sc and V_oc must be positive".into(),
            });
        }
        let ff = self.fill_factor();
        if !(ff.is_finite() && ff > 0.0 && ff < 1.0) {
            return Err(ComponentError::InvalidSpec {
                reason: format!("fill factor {ff} must lie in (0, 1)"),
            });
        }
        Ok(())
    }
}

/// Power output of a single PV module at irradiance `s` (kW/m^2), in kW.
///
/// Cell temperature rises with irradiance, current scales with irradiance
/// and temperature, voltage drops with temperature; the product is clamped
/// below at zero so pathological parameter sets cannot produce negative
/// output.
pub fn pv_module_power(s: f64, panel: &SolarPanelParams) -> f64 {
    let t_c = panel.t_a + s * (panel.n_ot - 20.0) / 0.8;
    let i_y = s * (panel.i_sc + panel.k_i * (t_c - 25.0));
    let v_y = panel.v_oc - panel.k_v * t_c;
    let watts = panel.fill_factor() * v_y * i_y;
    watts.max(0.0) / 1000.0
}

/// One direct-table source state: the source level, its probability, and
/// the per-unit power output at that level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceState {
    pub value: f64,
    pub probability: f64,
    pub power_kw: f64,
}

/// Mechanical degradation/repair model of a unit: either explicit
/// failure/repair rates solved at steady state, or a direct availability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechModel {
    Rates(TwoStateRates),
    Availability(f64),
}

impl MechModel {
    /// Steady-state probability of the working state.
    pub fn availability(&self) -> Result<f64, ComponentError> {
        match self {
            MechModel::Rates(rates) => Ok(steady_state_two_state(rates)?.0),
            MechModel::Availability(a) => {
                if !is_probability(*a) {
                    return Err(ComponentError::InvalidAvailability { value: *a });
                }
                Ok(*a)
            }
        }
    }
}

/// Resolution of the solar mechanical model: one two-state block per
/// generator (all modules up or all down), or an independent two-state
/// model per module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MechGranularity {
    #[default]
    PerGenerator,
    PerModule,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolarSource {
    /// Beta-distributed irradiance on [0, 1], discretized into `n_states`,
    /// mapped through the panel power model.
    Parametric {
        irradiance: BetaParams,
        n_states: usize,
        panel: SolarPanelParams,
    },
    /// Direct (irradiance, probability, kW per module) rows.
    Table(Vec<SourceState>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolarGeneratorSpec {
    pub n_modules: u32,
    pub mech: MechModel,
    pub granularity: MechGranularity,
    pub source: SolarSource,
}

// ---------------------------------------------------------------------------
// Wind turbine
// ---------------------------------------------------------------------------

/// Piecewise-linear turbine power curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindCurveParams {
    pub cut_in: f64,
    pub rated_speed: f64,
    pub cut_out: f64,
    pub rated_kw: f64,
}

impl WindCurveParams {
    fn validate(&self) -> Result<(), ComponentError> {
        let ordered =
            0.0 <= self.cut_in && self.cut_in < self.rated_speed && self.rated_speed < self.cut_out;
        if !ordered {
            return Err(ComponentError::InvalidSpec {
                reason: format!(
                    "wind speeds must satisfy 0 <= cut_in < rated < cut_out, got {} / {} / {}",
                    self.cut_in, self.rated_speed, self.cut_out
                ),
            });
        }
        if !is_positive(self.rated_kw) {
            return Err(ComponentError::InvalidSpec {
                reason: "rated power must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Turbine output at wind speed `v`: zero below cut-in and at or above
/// cut-out, a linear ramp up to the rated speed, rated power on the
/// plateau.
pub fn wind_power(v: f64, curve: &WindCurveParams) -> f64 {
    if v < curve.cut_in || v >= curve.cut_out {
        0.0
    } else if v < curve.rated_speed {
        curve.rated_kw * (v - curve.cut_in) / (curve.rated_speed - curve.cut_in)
    } else {
        curve.rated_kw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindSource {
    /// Weibull wind speed discretized into `n_states` over
    /// `[0, max_speed]`, mapped through the power curve. When `max_speed`
    /// is not given it extends one interval past cut-out so the final state
    /// captures the shutdown region.
    Parametric {
        wind: WeibullParams,
        n_states: usize,
        max_speed: Option<f64>,
        curve: WindCurveParams,
    },
    /// Direct (speed, probability, kW per turbine) rows.
    Table(Vec<SourceState>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindTurbineSpec {
    pub mech: MechModel,
    pub source: WindSource,
}

// ---------------------------------------------------------------------------
// EV aggregation
// ---------------------------------------------------------------------------

/// Daily operation pattern of one EV: either residence hours in the
/// charging / disconnected / discharging states (occupancies are their
/// shares of the total), or the occupancy probabilities directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvOperationModel {
    ResidenceHours {
        charging: f64,
        disconnected: f64,
        discharging: f64,
    },
    Probabilities {
        charging: f64,
        disconnected: f64,
        discharging: f64,
    },
}

/// Mechanical resolution of the aggregation: one two-state block for the
/// whole fleet, or an independent two-state model per vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvGranularity {
    #[default]
    Aggregate,
    PerVehicle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvAggregationSpec {
    pub n_vehicles: u32,
    /// Absolute charge/discharge power of one vehicle, kW.
    pub unit_power_kw: f64,
    pub operation: EvOperationModel,
    pub mech: MechModel,
    pub granularity: EvGranularity,
}

impl EvAggregationSpec {
    fn validate(&self) -> Result<(), ComponentError> {
        if self.n_vehicles == 0 {
            return Err(ComponentError::InvalidSpec {
                reason: "EV aggregation needs at least one vehicle".into(),
            });
        }
        if !is_positive(self.unit_power_kw) {
            return Err(ComponentError::InvalidSpec {
                reason: "EV unit power must be positive".into(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Transformer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum TransformerModel {
    /// Working at rated power or failed at zero.
    TwoState(MechModel),
    /// General degradation chain; state `i` delivers
    /// `capacity_fractions[i] * rated_kw`.
    MultiState {
        generator: MarkovGenerator,
        capacity_fractions: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformerSpec {
    pub rated_kw: f64,
    pub model: TransformerModel,
}

// ---------------------------------------------------------------------------
// Load
// ---------------------------------------------------------------------------

/// Hourly load record aggregated into an `n_states`-level model.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec {
    pub hourly_kw: Vec<f64>,
    pub n_states: usize,
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Maps a source state value to a per-unit power output.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerMap {
    Panel(SolarPanelParams),
    WindCurve(WindCurveParams),
    /// Explicit (state value, kW) rows; lookups match state values exactly
    /// (within a relative epsilon).
    Table(Vec<(f64, f64)>),
}

impl PowerMap {
    pub fn power_at(&self, value: f64) -> Result<f64, ComponentError> {
        match self {
            PowerMap::Panel(panel) => Ok(pv_module_power(value, panel)),
            PowerMap::WindCurve(curve) => Ok(wind_power(value, curve)),
            PowerMap::Table(rows) => {
                let eps = 1e-9 * value.abs().max(1.0);
                rows.iter()
                    .find(|(v, _)| (v - value).abs() <= eps)
                    .map(|(_, p)| *p)
                    .ok_or(ComponentError::UnmappedState { value })
            }
        }
    }
}

/// Source-state distribution mapped through a power function: term `i`
/// carries the state probability at the state's power output. States whose
/// outputs coincide (below cut-in, past cut-out, on the rated plateau)
/// merge in collection.
pub fn source_ufunction(
    states: &[(f64, f64)],
    power: &PowerMap,
) -> Result<UFunction, ComponentError> {
    let mut pairs = Vec::with_capacity(states.len());
    for &(value, probability) in states {
        pairs.push((power.power_at(value)?, probability));
    }
    Ok(UFunction::new(pairs)?)
}

/// Binomial mechanical model of `n_units` independent identical two-state
/// units: `k` working units (probability `C(n,k) a^k (1-a)^(n-k)`) deliver
/// `k * per_unit_value`.
///
/// Panics if `availability` is outside [0, 1] or `n_units` is zero; those
/// are validated where user input enters.
pub fn mechanical_ufunction(n_units: u32, per_unit_value: f64, availability: f64) -> UFunction {
    assert!(n_units >= 1, "at least one unit required");
    assert!(
        (0.0..=1.0).contains(&availability),
        "availability must lie in [0, 1]"
    );
    let n = n_units as f64;
    let a = availability;
    let pairs: Vec<(f64, f64)> = if a == 0.0 {
        vec![(0.0, 1.0)]
    } else if a == 1.0 {
        vec![(n * per_unit_value, 1.0)]
    } else if n_units <= 60 {
        let mut coeff = 1.0_f64;
        (0..=n_units)
            .map(|k| {
                if k > 0 {
                    coeff *= (n - (k as f64 - 1.0)) / k as f64;
                }
                let p = coeff * a.powi(k as i32) * (1.0 - a).powi((n_units - k) as i32);
                (k as f64 * per_unit_value, p)
            })
            .collect()
    } else {
        // powi/C(n,k) overflow or underflow at this size; work in logs.
        let ln_a = a.ln();
        let ln_b = (1.0 - a).ln();
        let ln_fact = |x: u32| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
        (0..=n_units)
            .map(|k| {
                let ln_c = ln_fact(n_units) - ln_fact(k) - ln_fact(n_units - k);
                let p = (ln_c + k as f64 * ln_a + (n_units - k) as f64 * ln_b).exp();
                (k as f64 * per_unit_value, p)
            })
            .collect()
    };
    UFunction::new(pairs).expect("binomial mass is normalized")
}

/// Per-module power distribution of the (shared) solar resource.
pub fn solar_source_ufunction(spec: &SolarGeneratorSpec) -> Result<UFunction, ComponentError> {
    match &spec.source {
        SolarSource::Parametric {
            irradiance,
            n_states,
            panel,
        } => {
            panel.validate()?;
            let dist = discretize(&SourceDensity::Beta(*irradiance), *n_states, 1.0)?;
            let pairs: Vec<(f64, f64)> = dist.state_pairs().collect();
            source_ufunction(&pairs, &PowerMap::Panel(*panel))
        }
        SolarSource::Table(rows) => table_source_ufunction(rows),
    }
}

/// Mechanical distribution of one solar generator, in working-module counts.
pub fn solar_mech_ufunction(spec: &SolarGeneratorSpec) -> Result<UFunction, ComponentError> {
    if spec.n_modules == 0 {
        return Err(ComponentError::InvalidSpec {
            reason: "solar generator needs at least one module".into(),
        });
    }
    let a = spec.mech.availability()?;
    Ok(match spec.granularity {
        MechGranularity::PerGenerator => mechanical_ufunction(1, spec.n_modules as f64, a),
        MechGranularity::PerModule => mechanical_ufunction(spec.n_modules, 1.0, a),
    })
}

/// Per-turbine power distribution of the (shared) wind resource.
pub fn wind_source_ufunction(spec: &WindTurbineSpec) -> Result<UFunction, ComponentError> {
    match &spec.source {
        WindSource::Parametric {
            wind,
            n_states,
            max_speed,
            curve,
        } => {
            curve.validate()?;
            let max = max_speed.unwrap_or_else(|| {
                if *n_states > 1 {
                    // One interval past cut-out: the (n-1)th boundary lands
                    // exactly on cut_out.
                    curve.cut_out * *n_states as f64 / (*n_states as f64 - 1.0)
                } else {
                    4.0 * wind.scale
                }
            });
            let dist = discretize(&SourceDensity::Weibull(*wind), *n_states, max)?;
            let pairs: Vec<(f64, f64)> = dist.state_pairs().collect();
            source_ufunction(&pairs, &PowerMap::WindCurve(*curve))
        }
        WindSource::Table(rows) => table_source_ufunction(rows),
    }
}

/// Mechanical distribution of one wind turbine: 0 or 1 turbines working.
pub fn wind_mech_ufunction(spec: &WindTurbineSpec) -> Result<UFunction, ComponentError> {
    let a = spec.mech.availability()?;
    Ok(mechanical_ufunction(1, 1.0, a))
}

fn table_source_ufunction(rows: &[SourceState]) -> Result<UFunction, ComponentError> {
    if rows.is_empty() {
        return Err(ComponentError::InvalidSpec {
            reason: "source table is empty".into(),
        });
    }
    Ok(UFunction::new(
        rows.iter().map(|r| (r.power_kw, r.probability)),
    )?)
}

/// Operation distribution of one EV: charging draws `unit_power_kw`,
/// discharging delivers it, disconnected contributes nothing.
pub fn ev_operation_ufunction(spec: &EvAggregationSpec) -> Result<UFunction, ComponentError> {
    spec.validate()?;
    let p = spec.unit_power_kw;
    let (charging, disconnected, discharging) = match spec.operation {
        EvOperationModel::ResidenceHours {
            charging,
            disconnected,
            discharging,
        } => {
            for t in [charging, disconnected, discharging] {
                if !is_non_negative(t) {
                    return Err(ComponentError::InvalidSpec {
                        reason: format!("residence hours must be non-negative, got {t}"),
                    });
                }
            }
            let total = charging + disconnected + discharging;
            if total == 0.0 {
                return Err(ComponentError::AllResidenceZero);
            }
            (charging / total, disconnected / total, discharging / total)
        }
        EvOperationModel::Probabilities {
            charging,
            disconnected,
            discharging,
        } => (charging, disconnected, discharging),
    };
    Ok(UFunction::new([
        (-p, charging),
        (0.0, disconnected),
        (p, discharging),
    ])?)
}

/// Mechanical distribution of the aggregation, in functioning-vehicle
/// counts.
pub fn ev_mech_ufunction(spec: &EvAggregationSpec) -> Result<UFunction, ComponentError> {
    spec.validate()?;
    let a = spec.mech.availability()?;
    Ok(match spec.granularity {
        EvGranularity::Aggregate => mechanical_ufunction(1, spec.n_vehicles as f64, a),
        EvGranularity::PerVehicle => mechanical_ufunction(spec.n_vehicles, 1.0, a),
    })
}

/// Power distribution of the EV aggregation: per-vehicle operation output
/// scaled by the number of functioning vehicles.
pub fn ev_aggregation_ufunction(spec: &EvAggregationSpec) -> Result<UFunction, ComponentError> {
    let op = ev_operation_ufunction(spec)?;
    let mech = ev_mech_ufunction(spec)?;
    Ok(op.compose(&mech, StructureFunction::Times))
}

/// Power distribution of the transformer.
pub fn transformer_ufunction(spec: &TransformerSpec) -> Result<UFunction, ComponentError> {
    if !is_positive(spec.rated_kw) {
        return Err(ComponentError::InvalidSpec {
            reason: "transformer rated power must be positive".into(),
        });
    }
    match &spec.model {
        TransformerModel::TwoState(mech) => {
            let a = mech.availability()?;
            Ok(UFunction::new([(0.0, 1.0 - a), (spec.rated_kw, a)])?)
        }
        TransformerModel::MultiState {
            generator,
            capacity_fractions,
        } => {
            if capacity_fractions.len() != generator.n_states() {
                return Err(ComponentError::InvalidSpec {
                    reason: format!(
                        "{} capacity fractions for {} states",
                        capacity_fractions.len(),
                        generator.n_states()
                    ),
                });
            }
            if capacity_fractions
                .iter()
                .any(|f| !is_probability(*f))
            {
                return Err(ComponentError::InvalidSpec {
                    reason: "capacity fractions must lie in [0, 1]".into(),
                });
            }
            let pi = steady_state_general(generator)?;
            let pairs = capacity_fractions
                .iter()
                .zip(&pi)
                .map(|(f, &p)| (f * spec.rated_kw, p));
            Ok(UFunction::new(pairs)?)
        }
    }
}

/// Aggregated multi-state load model: the load range is split into
/// `n_states` equal intervals, each state takes the interval midpoint as
/// value and its share of the hourly samples as probability (the range
/// maximum counts into the top interval). Empty intervals are dropped.
///
/// A constant series collapses to a single deterministic state for any
/// requested state count.
pub fn load_ufunction(spec: &LoadSpec) -> Result<UFunction, ComponentError> {
    if spec.hourly_kw.is_empty() {
        return Err(ComponentError::EmptySeries);
    }
    if spec.n_states == 0 {
        return Err(ComponentError::InvalidSpec {
            reason: "load model needs at least one state".into(),
        });
    }
    if spec.hourly_kw.len() < spec.n_states {
        return Err(ComponentError::SeriesShorterThanStates {
            len: spec.hourly_kw.len(),
            n_states: spec.n_states,
        });
    }
    for &v in &spec.hourly_kw {
        if !is_non_negative(v) {
            return Err(ComponentError::InvalidSpec {
                reason: format!("load value {v} must be a non-negative number"),
            });
        }
    }
    let min = spec.hourly_kw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = spec
        .hourly_kw
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(UFunction::deterministic(min));
    }
    let n = spec.n_states;
    let width = (max - min) / n as f64;
    let mut counts = vec![0_u64; n];
    for &v in &spec.hourly_kw {
        let idx = (((v - min) / width) as usize).min(n - 1);
        counts[idx] += 1;
    }
    let total = spec.hourly_kw.len() as f64;
    let pairs = counts.iter().enumerate().map(|(i, &c)| {
        let value = min + (i as f64 + 0.5) * width;
        (value, c as f64 / total)
    });
    Ok(UFunction::new(pairs)?)
}

/// Reads an hourly load series: one kW value per line, LF or CRLF, with an
/// optional single header line.
pub fn read_load_csv(reader: impl BufRead) -> Result<Vec<f64>, ComponentError> {
    let mut values = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue, // header
            Err(_) => {
                return Err(ComponentError::CsvParse {
                    line: i + 1,
                    content: trimmed.to_string(),
                })
            }
        }
    }
    Ok(values)
}
