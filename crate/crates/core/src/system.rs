//! System assembly: fold component distributions into the system generation
//! model under the shared-source assumption and compute adequacy indices.
//!
//! Renewable fleets in one geographic area see the same resource, so a
//! fleet is composed as `source (x)_times [mech_1 (+)... mech_m]` rather
//! than as a product of per-generator models: one shared source state
//! scales the total number of functioning units.

use crate::components::{
    ev_aggregation_ufunction, load_ufunction, solar_mech_ufunction, solar_source_ufunction,
    transformer_ufunction, wind_mech_ufunction, wind_source_ufunction, ComponentError,
    EvAggregationSpec, LoadSpec, SolarGeneratorSpec, TransformerSpec, WindTurbineSpec,
};
use crate::ugf::{shortfall, StructureFunction, UFunction};

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("{component}: {source}")]
    Component {
        component: &'static str,
        source: ComponentError,
    },
    #[error("a renewable fleet needs at least one mechanical model")]
    EmptyMechList,
    #[error("assessment horizon must be at least one hour")]
    InvalidHorizon,
}

fn component_err(component: &'static str) -> impl Fn(ComponentError) -> SystemError {
    move |source| SystemError::Component { component, source }
}

/// Identical generators sharing one resource: `count` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarFleet {
    pub spec: SolarGeneratorSpec,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindFleet {
    pub spec: WindTurbineSpec,
    pub count: u32,
}

/// Load input: an hourly series to aggregate, or a ready-made
/// (value, probability) table.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadModel {
    Series(LoadSpec),
    Table(Vec<(f64, f64)>),
}

/// Full description of the distributed generation system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub solar: Option<SolarFleet>,
    pub wind: Option<WindFleet>,
    pub ev: Option<EvAggregationSpec>,
    pub transformer: Option<TransformerSpec>,
    pub load: LoadModel,
    pub horizon_hours: u32,
    /// Count a state pair as loss only when load strictly exceeds
    /// generation. Exact ties then count as served.
    pub strict_loss: bool,
}

/// Term counts of the assembled distributions (after like-term collection).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateCounts {
    pub solar: Option<usize>,
    pub wind: Option<usize>,
    pub ev: Option<usize>,
    pub transformer: Option<usize>,
    pub generation: usize,
    pub load: usize,
}

/// Assessment output: indices plus every intermediate distribution, so the
/// factored forms can be audited.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityReport {
    /// Expected hours per horizon with load above generation.
    pub lole_hours: f64,
    /// Expected unserved energy per horizon, kWh.
    pub eens_kwh: f64,
    pub loss_probability: f64,
    pub generation: UFunction,
    pub load: UFunction,
    pub solar: Option<UFunction>,
    pub wind: Option<UFunction>,
    pub ev: Option<UFunction>,
    pub transformer: Option<UFunction>,
    pub state_counts: StateCounts,
    pub horizon_hours: u32,
    pub strict_loss: bool,
}

/// Combines a fleet that shares one source: the mechanical models fold
/// under sum (functioning units add), then the shared per-unit source
/// output scales the total under product.
pub fn combined_renewables(
    source: &UFunction,
    mech: &[UFunction],
) -> Result<UFunction, SystemError> {
    let mut iter = mech.iter();
    let first = iter.next().ok_or(SystemError::EmptyMechList)?;
    let mut folded = first.clone();
    for m in iter {
        folded = folded.compose(m, StructureFunction::Plus);
    }
    Ok(source.compose(&folded, StructureFunction::Times))
}

/// Sum-composition of the four generation groups feeding the common bus.
pub fn system_generation(
    solar: &UFunction,
    wind: &UFunction,
    ev: &UFunction,
    transformer: &UFunction,
) -> UFunction {
    solar
        .compose(wind, StructureFunction::Plus)
        .compose(ev, StructureFunction::Plus)
        .compose(transformer, StructureFunction::Plus)
}

/// Loss of load expectation over the horizon, in hours.
pub fn lole(generation: &UFunction, load: &UFunction, horizon_hours: u32, strict: bool) -> f64 {
    horizon_hours as f64 * shortfall(generation, load, strict).loss_probability
}

/// Expected energy not supplied over the horizon, in kWh.
pub fn eens(generation: &UFunction, load: &UFunction, horizon_hours: u32, strict: bool) -> f64 {
    horizon_hours as f64 * shortfall(generation, load, strict).expected_unserved_kw
}

/// Runs the full pipeline: build each component distribution, assemble the
/// system generation model, and evaluate the adequacy indices against the
/// load model.
///
/// ```
/// use dgrel_core::{
///     assess, LoadModel, MechModel, SystemConfig, TransformerModel, TransformerSpec,
/// };
///
/// let config = SystemConfig {
///     solar: None,
///     wind: None,
///     ev: None,
///     transformer: Some(TransformerSpec {
///         rated_kw: 5000.0,
///         model: TransformerModel::TwoState(MechModel::Availability(0.97)),
///     }),
///     load: LoadModel::Table(vec![(2000.0, 0.6), (4500.0, 0.4)]),
///     horizon_hours: 8736,
///     strict_loss: true,
/// };
/// let report = assess(&config).unwrap();
/// // Load is served unless the transformer is down.
/// assert!((report.loss_probability - 0.03).abs() < 1e-12);
/// ```
pub fn assess(config: &SystemConfig) -> Result<ReliabilityReport, SystemError> {
    if config.horizon_hours == 0 {
        return Err(SystemError::InvalidHorizon);
    }

    let load = match &config.load {
        LoadModel::Series(spec) => load_ufunction(spec).map_err(component_err("load"))?,
        LoadModel::Table(rows) => load_table_ufunction(rows).map_err(component_err("load"))?,
    };

    let solar = match &config.solar {
        Some(fleet) if fleet.count > 0 => {
            let source = solar_source_ufunction(&fleet.spec).map_err(component_err("solar"))?;
            let mech = solar_mech_ufunction(&fleet.spec).map_err(component_err("solar"))?;
            let mechs = vec![mech; fleet.count as usize];
            Some(combined_renewables(&source, &mechs)?)
        }
        _ => None,
    };
    let wind = match &config.wind {
        Some(fleet) if fleet.count > 0 => {
            let source = wind_source_ufunction(&fleet.spec).map_err(component_err("wind"))?;
            let mech = wind_mech_ufunction(&fleet.spec).map_err(component_err("wind"))?;
            let mechs = vec![mech; fleet.count as usize];
            Some(combined_renewables(&source, &mechs)?)
        }
        _ => None,
    };
    let ev = config
        .ev
        .as_ref()
        .map(|spec| ev_aggregation_ufunction(spec).map_err(component_err("ev")))
        .transpose()?;
    let transformer = config
        .transformer
        .as_ref()
        .map(|spec| transformer_ufunction(spec).map_err(component_err("transformer")))
        .transpose()?;

    let zero = UFunction::deterministic(0.0);
    let generation = system_generation(
        solar.as_ref().unwrap_or(&zero),
        wind.as_ref().unwrap_or(&zero),
        ev.as_ref().unwrap_or(&zero),
        transformer.as_ref().unwrap_or(&zero),
    );

    let sf = shortfall(&generation, &load, config.strict_loss);
    let horizon = config.horizon_hours as f64;
    let state_counts = StateCounts {
        solar: solar.as_ref().map(UFunction::len),
        wind: wind.as_ref().map(UFunction::len),
        ev: ev.as_ref().map(UFunction::len),
        transformer: transformer.as_ref().map(UFunction::len),
        generation: generation.len(),
        load: load.len(),
    };
    Ok(ReliabilityReport {
        lole_hours: horizon * sf.loss_probability,
        eens_kwh: horizon * sf.expected_unserved_kw,
        loss_probability: sf.loss_probability,
        generation,
        load,
        solar,
        wind,
        ev,
        transformer,
        state_counts,
        horizon_hours: config.horizon_hours,
        strict_loss: config.strict_loss,
    })
}

fn load_table_ufunction(rows: &[(f64, f64)]) -> Result<UFunction, ComponentError> {
    if rows.is_empty() {
        return Err(ComponentError::EmptySeries);
    }
    if let Some(&(value, _)) = rows.iter().find(|&&(v, _)| v < 0.0 || v.is_nan()) {
        return Err(ComponentError::InvalidSpec {
            reason: format!("load level {value} must be non-negative"),
        });
    }
    Ok(UFunction::new(rows.iter().copied())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{
        mechanical_ufunction, EvGranularity, EvOperationModel, MechGranularity, MechModel,
        SolarSource, SourceState, TransformerModel, WindSource,
    };
    use crate::ugf::Term;

    fn table1_spec() -> SolarGeneratorSpec {
        SolarGeneratorSpec {
            n_modules: 1000,
            mech: MechModel::Availability(0.96),
            granularity: MechGranularity::PerGenerator,
            source: SolarSource::Table(
                [
                    (0.1, 0.59, 0.00825),
                    (0.3, 0.13, 0.024),
                    (0.5, 0.10, 0.0405),
                    (0.7, 0.08, 0.05625),
                    (0.9, 0.10, 0.072),
                ]
                .iter()
                .map(|&(value, probability, power_kw)| SourceState {
                    value,
                    probability,
                    power_kw,
                })
                .collect(),
            ),
        }
    }

    #[test]
    fn combined_solar_fleet_matches_case_study_shape() {
        let spec = table1_spec();
        let source = solar_source_ufunction(&spec).unwrap();
        let mech = solar_mech_ufunction(&spec).unwrap();
        let fleet = combined_renewables(&source, &vec![mech; 5]).unwrap();
        // 5 source states x 6 fleet states; the five zero-output states
        // collapse into one term, and 72 kW is hit twice (0.024 kW/module
        // x 3 blocks and 0.072 kW/module x 1 block), leaving 25 levels.
        assert_eq!(fleet.len(), 25);
        let t0 = fleet.terms()[0];
        assert_eq!(t0.value, 0.0);
        assert!((t0.probability - 0.04_f64.powi(5)).abs() < 1e-12);
        // One generator block up under the weakest irradiance state.
        let t1 = fleet.terms()[1];
        assert!((t1.value - 8.25).abs() < 1e-12);
        assert!((t1.probability - 0.59 * 5.0 * 0.96 * 0.04_f64.powi(4)).abs() < 1e-12);
        let top = fleet.terms()[24];
        assert!((top.value - 360.0).abs() < 1e-12);
        assert!((top.probability - 0.10 * 0.96_f64.powi(5)).abs() < 1e-12);
    }

    #[test]
    fn combined_wind_fleet_matches_case_study_shape() {
        let spec = WindTurbineSpec {
            mech: MechModel::Availability(0.96),
            source: WindSource::Table(
                [
                    (4.0, 0.39, 2.85),
                    (12.0, 0.47, 36.0),
                    (20.0, 0.12, 69.0),
                    (28.0, 0.011, 100.5),
                    (36.0, 0.003, 133.5),
                ]
                .iter()
                .map(|&(value, probability, power_kw)| SourceState {
                    value,
                    probability,
                    power_kw,
                })
                .collect(),
            ),
        };
        let source = crate::components::wind_source_ufunction(&spec).unwrap();
        let mech = crate::components::wind_mech_ufunction(&spec).unwrap();
        let fleet = combined_renewables(&source, &vec![mech; 5]).unwrap();
        // No value collisions here: 26 levels survive.
        assert_eq!(fleet.len(), 26);
        let top = fleet.terms()[25];
        assert_eq!(top.value, 667.5);
        // Table mass 0.994 renormalizes, so the top probability sits at
        // (0.003 / 0.994) * 0.96^5 rather than the raw 0.00245.
        assert!((top.probability - 0.003 / 0.994 * 0.96_f64.powi(5)).abs() < 1e-12);
        assert!((top.probability - 0.00245).abs() < 0.01 * 0.00245 + 1e-5);
    }

    #[test]
    fn combined_single_unit_full_availability_scales_source() {
        let source = UFunction::new([(1.5, 0.25), (4.0, 0.75)]).unwrap();
        let mech = mechanical_ufunction(1, 20.0, 1.0);
        let fleet = combined_renewables(&source, &[mech]).unwrap();
        assert_eq!(fleet.len(), 2);
        assert!((fleet.terms()[0].value - 30.0).abs() < 1e-12);
        assert!((fleet.terms()[1].value - 80.0).abs() < 1e-12);
    }

    #[test]
    fn combined_rejects_empty_mech_list() {
        let source = UFunction::deterministic(1.0);
        assert!(matches!(
            combined_renewables(&source, &[]),
            Err(SystemError::EmptyMechList)
        ));
    }

    #[test]
    fn generation_of_degenerate_inputs() {
        let z = UFunction::deterministic(0.0);
        let g = system_generation(&z, &z, &z, &z);
        assert_eq!(g.len(), 1);
        assert_eq!(g.terms()[0].value, 0.0);

        let a = UFunction::deterministic(120.0);
        let b = UFunction::deterministic(55.5);
        let g = system_generation(&a, &b, &z, &z);
        assert_eq!(g.len(), 1);
        assert!((g.terms()[0].value - 175.5).abs() < 1e-12);
    }

    #[test]
    fn lole_eens_deterministic_deficit() {
        let g = UFunction::deterministic(100.0);
        let l = UFunction::deterministic(200.0);
        assert_eq!(lole(&g, &l, 10, true), 10.0);
        assert_eq!(eens(&g, &l, 10, true), 1000.0);
    }

    #[test]
    fn lole_zero_when_generation_covers_peak() {
        let g = UFunction::new([(500.0, 0.5), (800.0, 0.5)]).unwrap();
        let l = UFunction::new([(100.0, 0.7), (400.0, 0.3)]).unwrap();
        assert_eq!(lole(&g, &l, 8736, true), 0.0);
        assert_eq!(eens(&g, &l, 8736, true), 0.0);
    }

    #[test]
    fn assess_adequate_transformer_only() {
        let config = SystemConfig {
            solar: None,
            wind: None,
            ev: None,
            transformer: Some(TransformerSpec {
                rated_kw: 6000.0,
                model: TransformerModel::TwoState(MechModel::Availability(1.0)),
            }),
            load: LoadModel::Table(vec![(2000.0, 0.5), (5500.0, 0.5)]),
            horizon_hours: 8736,
            strict_loss: true,
        };
        let report = assess(&config).unwrap();
        assert_eq!(report.lole_hours, 0.0);
        assert_eq!(report.eens_kwh, 0.0);
        assert_eq!(report.state_counts.generation, 1);
    }

    #[test]
    fn assess_transformer_availability_sets_loss() {
        let a = 0.93;
        let config = SystemConfig {
            solar: None,
            wind: None,
            ev: None,
            transformer: Some(TransformerSpec {
                rated_kw: 5000.0,
                model: TransformerModel::TwoState(MechModel::Availability(a)),
            }),
            load: LoadModel::Table(vec![(1000.0, 0.25), (3000.0, 0.5), (4500.0, 0.25)]),
            horizon_hours: 100,
            strict_loss: true,
        };
        let report = assess(&config).unwrap();
        assert!((report.loss_probability - (1.0 - a)).abs() < 1e-12);
        assert!((report.lole_hours - 100.0 * (1.0 - a)).abs() < 1e-9);
        // Unserved energy is the mean load, weighted by the outage
        // probability.
        let mean_load = 1000.0 * 0.25 + 3000.0 * 0.5 + 4500.0 * 0.25;
        assert!((report.eens_kwh - 100.0 * (1.0 - a) * mean_load).abs() < 1e-6);
    }

    #[test]
    fn assess_full_fleet_smoke() {
        let config = SystemConfig {
            solar: Some(SolarFleet {
                spec: table1_spec(),
                count: 5,
            }),
            wind: Some(WindFleet {
                spec: WindTurbineSpec {
                    mech: MechModel::Availability(0.96),
                    source: WindSource::Table(
                        [
                            (4.0, 0.39, 2.85),
                            (12.0, 0.47, 36.0),
                            (20.0, 0.12, 69.0),
                            (28.0, 0.011, 100.5),
                            (36.0, 0.003, 133.5),
                        ]
                        .iter()
                        .map(|&(value, probability, power_kw)| SourceState {
                            value,
                            probability,
                            power_kw,
                        })
                        .collect(),
                    ),
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
        };
        let report = assess(&config).unwrap();
        assert_eq!(report.state_counts.solar, Some(25));
        assert_eq!(report.state_counts.wind, Some(26));
        assert_eq!(report.state_counts.ev, Some(3));
        assert_eq!(report.state_counts.transformer, Some(2));
        assert!((report.generation.total_mass() - 1.0).abs() < 1e-12);
        // Loss is certain when the transformer is down (renewable peak
        // stays below the lowest load state), so its outage probability
        // floors the loss probability.
        assert!(report.loss_probability >= 0.03);
        assert!(report.lole_hours <= 8736.0);
        assert!((report.lole_hours - 8736.0 * report.loss_probability).abs() < 1e-9);
        assert_eq!(report.generation.min_value(), -125.0);
        assert_eq!(report.generation.max_value(), 6152.5);
    }

    #[test]
    fn assess_zero_count_fleet_is_absent() {
        let config = SystemConfig {
            solar: Some(SolarFleet {
                spec: table1_spec(),
                count: 0,
            }),
            wind: None,
            ev: None,
            transformer: Some(TransformerSpec {
                rated_kw: 6000.0,
                model: TransformerModel::TwoState(MechModel::Availability(1.0)),
            }),
            load: LoadModel::Table(vec![(5500.0, 1.0)]),
            horizon_hours: 8736,
            strict_loss: true,
        };
        let report = assess(&config).unwrap();
        assert_eq!(report.state_counts.solar, None);
        assert!(report.solar.is_none());
        assert_eq!(report.lole_hours, 0.0);
    }

    #[test]
    fn assess_reports_offending_component() {
        let config = SystemConfig {
            solar: None,
            wind: None,
            ev: Some(EvAggregationSpec {
                n_vehicles: 0,
                unit_power_kw: 5.0,
                operation: EvOperationModel::Probabilities {
                    charging: 0.13,
                    disconnected: 0.83,
                    discharging: 0.04,
                },
                mech: MechModel::Availability(0.99),
                granularity: EvGranularity::Aggregate,
            }),
            transformer: None,
            load: LoadModel::Table(vec![(100.0, 1.0)]),
            horizon_hours: 10,
            strict_loss: true,
        };
        match assess(&config) {
            Err(SystemError::Component { component, .. }) => assert_eq!(component, "ev"),
            other => panic!("expected component error, got {other:?}"),
        }
    }

    #[test]
    fn assess_no_generation_at_all() {
        let config = SystemConfig {
            solar: None,
            wind: None,
            ev: None,
            transformer: None,
            load: LoadModel::Table(vec![(100.0, 1.0)]),
            horizon_hours: 10,
            strict_loss: true,
        };
        let report = assess(&config).unwrap();
        assert_eq!(report.loss_probability, 1.0);
        assert_eq!(report.eens_kwh, 100.0 * 10.0);
        assert_eq!(report.generation.terms(), &[Term {
            value: 0.0,
            probability: 1.0
        }]);
    }
}
