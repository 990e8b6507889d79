//! Input builders shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dgrel_core::{
    EvAggregationSpec, EvGranularity, EvOperationModel, LoadModel, MechGranularity, MechModel,
    SolarFleet, SolarGeneratorSpec, SolarSource, SourceState, SystemConfig, TransformerModel,
    TransformerSpec, UFunction, WindFleet, WindSource, WindTurbineSpec,
};

/// A dense distribution with `n` terms on the 0.5-kW grid.
pub fn gridded_ufunction(n: usize, seed: u64) -> UFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=32) as f64).collect();
    let total: f64 = weights.iter().sum();
    UFunction::new(
        weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i as f64 * 0.5, w / total)),
    )
    .expect("valid distribution")
}

/// A sparse distribution with `n` terms at irregular values.
pub fn sparse_ufunction(n: usize, seed: u64) -> UFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(-500.0..5000.0), rng.gen_range(1..=32) as f64))
        .collect();
    let total: f64 = weights.iter().map(|&(_, w)| w).sum();
    UFunction::new(weights.iter().map(|&(v, w)| (v, w / total))).expect("valid distribution")
}

fn rows(data: &[(f64, f64, f64)]) -> Vec<SourceState> {
    data.iter()
        .map(|&(value, probability, power_kw)| SourceState {
            value,
            probability,
            power_kw,
        })
        .collect()
}

/// The five-solar / five-wind / EV / transformer case study with its
/// ten-state load table.
pub fn case_study_config() -> SystemConfig {
    SystemConfig {
        solar: Some(SolarFleet {
            spec: SolarGeneratorSpec {
                n_modules: 1000,
                mech: MechModel::Availability(0.96),
                granularity: MechGranularity::PerGenerator,
                source: SolarSource::Table(rows(&[
                    (0.1, 0.59, 0.00825),
                    (0.3, 0.13, 0.024),
                    (0.5, 0.10, 0.0405),
                    (0.7, 0.08, 0.05625),
                    (0.9, 0.10, 0.072),
                ])),
            },
            count: 5,
        }),
        wind: Some(WindFleet {
            spec: WindTurbineSpec {
                mech: MechModel::Availability(0.96),
                source: WindSource::Table(rows(&[
                    (4.0, 0.39, 2.85),
                    (12.0, 0.47, 36.0),
                    (20.0, 0.12, 69.0),
                    (28.0, 0.011, 100.5),
                    (36.0, 0.003, 133.5),
                ])),
            },
            count: 5,
        }),
        ev: Some(EvAggregationSpec {
            n_vehicles: 25,
            unit_power_kw: 5.0,
            operation: EvOperationModel::Probabilities {
                charging: 0.13,
                disconnected: 0.83,
                discharging: 0.04,
            },
            mech: MechModel::Availability(0.99),
            granularity: EvGranularity::Aggregate,
        }),
        transformer: Some(TransformerSpec {
            rated_kw: 5000.0,
            model: TransformerModel::TwoState(MechModel::Availability(0.97)),
        }),
        load: LoadModel::Table(vec![
            (2045.0, 0.044),
            (2408.0, 0.137),
            (2773.0, 0.174),
            (3136.0, 0.131),
            (3500.0, 0.161),
            (3864.0, 0.124),
            (4227.0, 0.110),
            (4591.0, 0.088),
            (4955.0, 0.029),
            (5318.0, 0.004),
        ]),
        horizon_hours: 8736,
        strict_loss: true,
    }
}
