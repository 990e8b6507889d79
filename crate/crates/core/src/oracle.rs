//! Independent verification of the composed-distribution pipeline.
//!
//! [`enumerate_exact`] walks every joint state of the system (one shared
//! irradiance state, one shared wind state, per-fleet functioning-unit
//! counts, EV operation and mechanical states, transformer state, load
//! state), computes generation and load by direct physics, and accumulates
//! the loss probability and expected unserved power with compensated
//! summation. None of the distribution algebra is involved: power curves,
//! binomial unit counts, and occupancy fractions are evaluated here from
//! the specs directly, so an algebra bug cannot cancel itself out.
//!
//! [`monte_carlo`] samples the same joint space with a seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::components::{
    EvGranularity, EvOperationModel, MechGranularity, MechModel, SolarPanelParams, SolarSource,
    TransformerModel, WindCurveParams, WindSource,
};
use crate::stochastic::{discretize, steady_state_general, SourceDensity};
use crate::sum::Accumulator;
use crate::system::{LoadModel, SystemConfig};

/// Default bound on the joint-state count enumeration will walk.
pub const DEFAULT_STATE_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("joint space has {states} states, above the cap of {cap}")]
    SpaceTooLarge { states: u128, cap: u128 },
    #[error("cannot enumerate this config: {reason}")]
    InvalidConfig { reason: String },
}

/// Exact loss indices from full joint-state enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactIndices {
    pub loss_probability: f64,
    pub expected_unserved_kw: f64,
    /// Total probability over the joint space; 1 up to rounding.
    pub total_probability: f64,
    pub joint_states: u128,
}

/// Seeded sampling estimates of the same indices, with 95% normal-theory
/// confidence half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub loss_probability: f64,
    pub loss_ci95: f64,
    pub expected_unserved_kw: f64,
    pub unserved_ci95: f64,
    pub samples: u64,
    pub seed: u64,
}

/// One enumeration coordinate: `(probability, payload)` entries. Payloads
/// are per-unit powers, functioning-unit counts, or plain kW depending on
/// the axis.
type Axis = Vec<(f64, f64)>;

struct JointSpace {
    solar_source: Axis,
    solar_count: Axis,
    wind_source: Axis,
    wind_count: Axis,
    ev_operation: Axis,
    ev_count: Axis,
    transformer: Axis,
    load: Axis,
}

impl JointSpace {
    fn states(&self) -> u128 {
        [
            &self.solar_source,
            &self.solar_count,
            &self.wind_source,
            &self.wind_count,
            &self.ev_operation,
            &self.ev_count,
            &self.transformer,
            &self.load,
        ]
        .iter()
        .fold(1_u128, |acc, axis| {
            acc.saturating_mul(axis.len() as u128)
        })
    }
}

/// Enumerates with the default state cap.
pub fn enumerate_exact(config: &SystemConfig) -> Result<ExactIndices, OracleError> {
    enumerate_exact_with_cap(config, DEFAULT_STATE_CAP)
}

pub fn enumerate_exact_with_cap(
    config: &SystemConfig,
    cap: u128,
) -> Result<ExactIndices, OracleError> {
    let space = build_space(config)?;
    let states = space.states();
    if states > cap {
        return Err(OracleError::SpaceTooLarge { states, cap });
    }
    let strict = config.strict_loss;
    let mut total = Accumulator::new();
    let mut loss = Accumulator::new();
    let mut unserved = Accumulator::new();
    for &(p_si, module_kw) in &space.solar_source {
        for &(p_sc, modules) in &space.solar_count {
            let solar_kw = module_kw * modules;
            let p_solar = p_si * p_sc;
            for &(p_wi, turbine_kw) in &space.wind_source {
                for &(p_wc, turbines) in &space.wind_count {
                    let wind_kw = turbine_kw * turbines;
                    let p_sw = p_solar * p_wi * p_wc;
                    for &(p_eo, vehicle_kw) in &space.ev_operation {
                        for &(p_ec, vehicles) in &space.ev_count {
                            let ev_kw = vehicle_kw * vehicles;
                            let p_swe = p_sw * p_eo * p_ec;
                            for &(p_t, transformer_kw) in &space.transformer {
                                // Same association order as the pipeline's
                                // fold, so generation values agree bitwise.
                                let generation = ((solar_kw + wind_kw) + ev_kw) + transformer_kw;
                                let p_gen = p_swe * p_t;
                                for &(p_l, load_kw) in &space.load {
                                    let p = p_gen * p_l;
                                    total.add(p);
                                    let deficit = load_kw - generation;
                                    let lost =
                                        if strict { deficit > 0.0 } else { deficit >= 0.0 };
                                    if lost {
                                        loss.add(p);
                                        unserved.add(p * deficit);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(ExactIndices {
        loss_probability: loss.value(),
        expected_unserved_kw: unserved.value(),
        total_probability: total.value(),
        joint_states: states,
    })
}

/// Samples the joint space `n_samples` times with a ChaCha8 stream seeded
/// by `seed`; identical inputs reproduce identical estimates bit for bit.
pub fn monte_carlo(
    config: &SystemConfig,
    n_samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, OracleError> {
    if n_samples == 0 {
        return Err(OracleError::InvalidConfig {
            reason: "need at least one sample".into(),
        });
    }
    let space = build_space(config)?;
    let samplers: Vec<Sampler> = [
        &space.solar_source,
        &space.solar_count,
        &space.wind_source,
        &space.wind_count,
        &space.ev_operation,
        &space.ev_count,
        &space.transformer,
        &space.load,
    ]
    .iter()
    .map(|axis| Sampler::new(axis))
    .collect();

    let strict = config.strict_loss;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loss_count = 0_u64;
    let mut deficit_sum = Accumulator::new();
    let mut deficit_sq_sum = Accumulator::new();
    for _ in 0..n_samples {
        let draw: Vec<f64> = samplers.iter().map(|s| s.sample(&mut rng)).collect();
        let generation = ((draw[0] * draw[1] + draw[2] * draw[3]) + draw[4] * draw[5]) + draw[6];
        let deficit = draw[7] - generation;
        let lost = if strict { deficit > 0.0 } else { deficit >= 0.0 };
        if lost {
            loss_count += 1;
            deficit_sum.add(deficit);
            deficit_sq_sum.add(deficit * deficit);
        }
    }
    let n = n_samples as f64;
    let p = loss_count as f64 / n;
    let mean = deficit_sum.value() / n;
    let variance = if n_samples > 1 {
        ((deficit_sq_sum.value() - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        loss_probability: p,
        loss_ci95: 1.96 * (p * (1.0 - p) / n).sqrt(),
        expected_unserved_kw: mean,
        unserved_ci95: 1.96 * (variance / n).sqrt(),
        samples: n_samples,
        seed,
    })
}

struct Sampler {
    cumulative: Vec<f64>,
    payloads: Vec<f64>,
}

impl Sampler {
    fn new(axis: &Axis) -> Self {
        let mut running = 0.0;
        let cumulative = axis
            .iter()
            .map(|&(p, _)| {
                running += p;
                running
            })
            .collect();
        Self {
            cumulative,
            payloads: axis.iter().map(|&(_, v)| v).collect(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.gen();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.payloads.len() - 1);
        self.payloads[idx]
    }
}

// ---------------------------------------------------------------------------
// Axis construction: direct physics, no distribution algebra.
// ---------------------------------------------------------------------------

fn invalid(reason: impl Into<String>) -> OracleError {
    OracleError::InvalidConfig {
        reason: reason.into(),
    }
}

fn build_space(config: &SystemConfig) -> Result<JointSpace, OracleError> {
    let inactive = vec![(1.0, 0.0)];
    let (solar_source, solar_count) = match &config.solar {
        Some(fleet) if fleet.count > 0 => {
            let source = solar_source_axis(&fleet.spec.source)?;
            let a = availability_of(&fleet.spec.mech)?;
            let count = match fleet.spec.granularity {
                MechGranularity::PerGenerator => {
                    binomial_axis(fleet.count, a, fleet.spec.n_modules as f64)
                }
                MechGranularity::PerModule => {
                    binomial_axis(fleet.count * fleet.spec.n_modules, a, 1.0)
                }
            };
            (source, count)
        }
        _ => (inactive.clone(), inactive.clone()),
    };
    let (wind_source, wind_count) = match &config.wind {
        Some(fleet) if fleet.count > 0 => {
            let source = wind_source_axis(&fleet.spec.source)?;
            let a = availability_of(&fleet.spec.mech)?;
            (source, binomial_axis(fleet.count, a, 1.0))
        }
        _ => (inactive.clone(), inactive.clone()),
    };
    let (ev_operation, ev_count) = match &config.ev {
        Some(spec) => {
            let op = ev_operation_axis(&spec.operation, spec.unit_power_kw)?;
            let a = availability_of(&spec.mech)?;
            let count = match spec.granularity {
                EvGranularity::Aggregate => vec![(1.0 - a, 0.0), (a, spec.n_vehicles as f64)],
                EvGranularity::PerVehicle => binomial_axis(spec.n_vehicles, a, 1.0),
            };
            (op, count)
        }
        None => (inactive.clone(), inactive.clone()),
    };
    let transformer = match &config.transformer {
        Some(spec) => match &spec.model {
            TransformerModel::TwoState(mech) => {
                let a = availability_of(mech)?;
                vec![(1.0 - a, 0.0), (a, spec.rated_kw)]
            }
            TransformerModel::MultiState {
                generator,
                capacity_fractions,
            } => {
                let pi = steady_state_general(generator)
                    .map_err(|e| invalid(format!("transformer chain: {e}")))?;
                pi.iter()
                    .zip(capacity_fractions)
                    .map(|(&p, &f)| (p, f * spec.rated_kw))
                    .collect()
            }
        },
        None => inactive.clone(),
    };
    let load = match &config.load {
        LoadModel::Series(spec) => load_axis_from_series(&spec.hourly_kw, spec.n_states)?,
        LoadModel::Table(rows) => {
            let probs = normalized(rows.iter().map(|&(_, p)| p))?;
            rows.iter()
                .zip(probs)
                .map(|(&(v, _), p)| (p, v))
                .collect()
        }
    };
    let reachable = |mut axis: Axis| {
        axis.retain(|&(p, _)| p > 0.0);
        axis
    };
    Ok(JointSpace {
        solar_source: reachable(solar_source),
        solar_count: reachable(solar_count),
        wind_source: reachable(wind_source),
        wind_count: reachable(wind_count),
        ev_operation: reachable(ev_operation),
        ev_count: reachable(ev_count),
        transformer: reachable(transformer),
        load: reachable(load),
    })
}

fn availability_of(mech: &MechModel) -> Result<f64, OracleError> {
    match mech {
        MechModel::Availability(a) => {
            if !(a.is_finite() && (0.0..=1.0).contains(a)) {
                return Err(invalid(format!("availability {a} outside [0, 1]")));
            }
            Ok(*a)
        }
        MechModel::Rates(rates) => {
            let lambda = rates.time_unit.to_per_hour(rates.failure_rate);
            let mu = rates.time_unit.to_per_hour(rates.repair_rate);
            if lambda.is_nan() || mu.is_nan() || lambda < 0.0 || mu < 0.0 || lambda + mu == 0.0 {
                return Err(invalid("degenerate failure/repair rates"));
            }
            Ok(mu / (lambda + mu))
        }
    }
}

fn normalized(probs: impl Iterator<Item = f64>) -> Result<Vec<f64>, OracleError> {
    let probs: Vec<f64> = probs.collect();
    if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(invalid("probabilities must be non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-2 {
        return Err(invalid(format!("probabilities sum to {total}")));
    }
    Ok(probs.iter().map(|p| p / total).collect())
}

/// Binomial count distribution over `0..=n` functioning units, each worth
/// `unit` of payload. Evaluated in log space term by term.
fn binomial_axis(n: u32, a: f64, unit: f64) -> Axis {
    if a <= 0.0 {
        return vec![(1.0, 0.0)];
    }
    if a >= 1.0 {
        return vec![(1.0, n as f64 * unit)];
    }
    let ln_a = a.ln();
    let ln_b = (1.0 - a).ln();
    let ln_fact = |x: u32| statrs::function::gamma::ln_gamma(x as f64 + 1.0);
    (0..=n)
        .map(|k| {
            let ln_p = ln_fact(n) - ln_fact(k) - ln_fact(n - k)
                + k as f64 * ln_a
                + (n - k) as f64 * ln_b;
            (ln_p.exp(), k as f64 * unit)
        })
        .collect()
}

fn solar_source_axis(source: &SolarSource) -> Result<Axis, OracleError> {
    match source {
        SolarSource::Parametric {
            irradiance,
            n_states,
            panel,
        } => {
            let dist = discretize(&SourceDensity::Beta(*irradiance), *n_states, 1.0)
                .map_err(|e| invalid(format!("irradiance: {e}")))?;
            Ok(dist
                .state_pairs()
                .map(|(s, p)| (p, pv_power_kw(s, panel)))
                .collect())
        }
        SolarSource::Table(rows) => {
            let probs = normalized(rows.iter().map(|r| r.probability))?;
            Ok(rows
                .iter()
                .zip(probs)
                .map(|(r, p)| (p, r.power_kw))
                .collect())
        }
    }
}

fn wind_source_axis(source: &WindSource) -> Result<Axis, OracleError> {
    match source {
        WindSource::Parametric {
            wind,
            n_states,
            max_speed,
            curve,
        } => {
            let max = max_speed.unwrap_or_else(|| {
                if *n_states > 1 {
                    curve.cut_out * *n_states as f64 / (*n_states as f64 - 1.0)
                } else {
                    4.0 * wind.scale
                }
            });
            let dist = discretize(&SourceDensity::Weibull(*wind), *n_states, max)
                .map_err(|e| invalid(format!("wind speed: {e}")))?;
            Ok(dist
                .state_pairs()
                .map(|(v, p)| (p, turbine_power_kw(v, curve)))
                .collect())
        }
        WindSource::Table(rows) => {
            let probs = normalized(rows.iter().map(|r| r.probability))?;
            Ok(rows
                .iter()
                .zip(probs)
                .map(|(r, p)| (p, r.power_kw))
                .collect())
        }
    }
}

fn ev_operation_axis(operation: &EvOperationModel, unit_power_kw: f64) -> Result<Axis, OracleError> {
    let (charging, disconnected, discharging) = match *operation {
        EvOperationModel::ResidenceHours {
            charging,
            disconnected,
            discharging,
        } => {
            let total = charging + disconnected + discharging;
            if total <= 0.0 || total.is_nan() {
                return Err(invalid("EV residence hours sum to zero"));
            }
            (charging / total, disconnected / total, discharging / total)
        }
        EvOperationModel::Probabilities {
            charging,
            disconnected,
            discharging,
        } => {
            let p = normalized([charging, disconnected, discharging].into_iter())?;
            (p[0], p[1], p[2])
        }
    };
    Ok(vec![
        (charging, -unit_power_kw),
        (disconnected, 0.0),
        (discharging, unit_power_kw),
    ])
}

/// PV module output, written out from the cell-temperature model.
fn pv_power_kw(s: f64, p: &SolarPanelParams) -> f64 {
    let t_c = p.t_a + s * (p.n_ot - 20.0) / 0.8;
    let i_y = s * (p.i_sc + p.k_i * (t_c - 25.0));
    let v_y = p.v_oc - p.k_v * t_c;
    let ff = (p.v_mpp * p.i_mpp) / (p.v_oc * p.i_sc);
    (ff * v_y * i_y).max(0.0) / 1000.0
}

/// Turbine power curve, written out branch by branch.
fn turbine_power_kw(v: f64, c: &WindCurveParams) -> f64 {
    if v < c.cut_in || v >= c.cut_out {
        0.0
    } else if v < c.rated_speed {
        c.rated_kw * (v - c.cut_in) / (c.rated_speed - c.cut_in)
    } else {
        c.rated_kw
    }
}

/// Equal-width load aggregation, written out independently of the builder.
fn load_axis_from_series(series: &[f64], n_states: usize) -> Result<Axis, OracleError> {
    if series.is_empty() || n_states == 0 || series.len() < n_states {
        return Err(invalid("load series shorter than the state count"));
    }
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(invalid("load series contains non-finite values"));
    }
    if min == max {
        return Ok(vec![(1.0, min)]);
    }
    let width = (max - min) / n_states as f64;
    let mut counts = vec![0_u64; n_states];
    for &v in series {
        let idx = (((v - min) / width) as usize).min(n_states - 1);
        counts[idx] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            (
                c as f64 / series.len() as f64,
                min + (i as f64 + 0.5) * width,
            )
        })
        .collect())
}
