//! Randomized small system configurations, used to cross-validate the
//! composition pipeline against the enumeration oracle and to feed
//! benchmarks.
//!
//! Performance values are drawn from a 0.25-kW lattice so that every
//! generation level and load level is an exact binary fraction: composed
//! sums collide only when they are mathematically equal, which keeps
//! strict/non-strict tie handling identical between the pipeline and the
//! oracle.

use rand::Rng;

use crate::components::{
    EvAggregationSpec, EvGranularity, EvOperationModel, LoadSpec, MechGranularity, MechModel,
    SolarGeneratorSpec, SolarSource, SourceState, TransformerModel, TransformerSpec, WindSource,
    WindTurbineSpec,
};
use crate::stochastic::{MarkovGenerator, TwoStateRates};
use crate::system::{LoadModel, SolarFleet, SystemConfig, WindFleet};

fn lattice(rng: &mut impl Rng, lo_quarters: i32, hi_quarters: i32) -> f64 {
    rng.gen_range(lo_quarters..=hi_quarters) as f64 * 0.25
}

fn mech(rng: &mut impl Rng) -> MechModel {
    if rng.gen_bool(0.5) {
        MechModel::Availability(rng.gen_range(0..=20) as f64 * 0.05)
    } else {
        let failure = rng.gen_range(0..=8) as f64 * 0.25;
        let repair = rng.gen_range(1..=8) as f64 * 0.25;
        MechModel::Rates(TwoStateRates::per_hour(failure, repair))
    }
}

fn weights<const N: usize>(rng: &mut impl Rng) -> [f64; N] {
    let mut w = [0.0; N];
    for x in &mut w {
        *x = rng.gen_range(1..=8) as f64;
    }
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}

fn source_table(
    rng: &mut impl Rng,
    max_states: usize,
    max_power_quarters: i32,
) -> Vec<SourceState> {
    let n = rng.gen_range(1..=max_states);
    let mut rows: Vec<SourceState> = (0..n)
        .map(|i| SourceState {
            value: i as f64 + 1.0,
            probability: rng.gen_range(1..=8) as f64,
            power_kw: lattice(rng, 0, max_power_quarters),
        })
        .collect();
    let total: f64 = rows.iter().map(|r| r.probability).sum();
    for r in &mut rows {
        r.probability /= total;
    }
    rows
}

/// A random system whose components each have at most `max_states` source
/// or load states, small unit counts, and lattice-valued powers. Small
/// enough for exhaustive enumeration.
pub fn random_small_config(rng: &mut impl Rng, max_states: usize) -> SystemConfig {
    let solar = rng.gen_bool(0.8).then(|| SolarFleet {
        spec: SolarGeneratorSpec {
            n_modules: rng.gen_range(1..=3),
            mech: mech(rng),
            granularity: if rng.gen_bool(0.5) {
                MechGranularity::PerGenerator
            } else {
                MechGranularity::PerModule
            },
            source: SolarSource::Table(source_table(rng, max_states, 12)),
        },
        count: rng.gen_range(1..=3),
    });
    let wind = rng.gen_bool(0.8).then(|| WindFleet {
        spec: WindTurbineSpec {
            mech: mech(rng),
            source: WindSource::Table(source_table(rng, max_states, 20)),
        },
        count: rng.gen_range(1..=3),
    });
    let ev = rng.gen_bool(0.7).then(|| {
        let operation = if rng.gen_bool(0.5) {
            let mut hours = [0.0; 3];
            while hours.iter().sum::<f64>() == 0.0 {
                hours = [0; 3].map(|_| rng.gen_range(0..=6) as f64);
            }
            EvOperationModel::ResidenceHours {
                charging: hours[0],
                disconnected: hours[1],
                discharging: hours[2],
            }
        } else {
            let p = weights::<3>(rng);
            EvOperationModel::Probabilities {
                charging: p[0],
                disconnected: p[1],
                discharging: p[2],
            }
        };
        EvAggregationSpec {
            n_vehicles: rng.gen_range(1..=3),
            unit_power_kw: rng.gen_range(1..=8) as f64 * 0.5,
            operation,
            mech: mech(rng),
            granularity: if rng.gen_bool(0.5) {
                EvGranularity::Aggregate
            } else {
                EvGranularity::PerVehicle
            },
        }
    });
    let transformer = rng.gen_bool(0.9).then(|| {
        let rated_kw = rng.gen_range(4..=80) as f64 * 0.5;
        let model = if rng.gen_bool(0.7) {
            TransformerModel::TwoState(mech(rng))
        } else {
            let up = rng.gen_range(1..=8) as f64 * 0.5;
            let down = rng.gen_range(1..=8) as f64 * 0.5;
            let worse = rng.gen_range(1..=8) as f64 * 0.5;
            let back = rng.gen_range(1..=8) as f64 * 0.5;
            TransformerModel::MultiState {
                generator: MarkovGenerator::new(vec![
                    vec![0.0, down, 0.0],
                    vec![back, 0.0, worse],
                    vec![0.0, up, 0.0],
                ])
                .expect("valid chain"),
                capacity_fractions: vec![1.0, 0.5, 0.0],
            }
        };
        TransformerSpec { rated_kw, model }
    });
    let load = if rng.gen_bool(0.5) {
        let n = rng.gen_range(1..=max_states);
        let mut rows: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                (
                    i as f64 * 4.0 + lattice(rng, 0, 15),
                    rng.gen_range(1..=8) as f64,
                )
            })
            .collect();
        let total: f64 = rows.iter().map(|&(_, p)| p).sum();
        for (_, p) in &mut rows {
            *p /= total;
        }
        LoadModel::Table(rows)
    } else {
        let n = rng.gen_range(1..=max_states);
        let len = rng.gen_range(n.max(2)..=40);
        LoadModel::Series(LoadSpec {
            hourly_kw: (0..len).map(|_| lattice(rng, 0, 160)).collect(),
            n_states: n,
        })
    };
    SystemConfig {
        solar,
        wind,
        ev,
        transformer,
        load,
        horizon_hours: rng.gen_range(1..=8760),
        strict_loss: rng.gen_bool(0.5),
    }
}
