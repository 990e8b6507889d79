//! Analytical multi-state adequacy assessment for distributed generation.
//!
//! A generation system is described as a set of multi-state components
//! (solar generators, wind turbines, an EV aggregation, a grid transformer,
//! and an aggregated load). Each component's random power output is held as
//! a sparse probability mass function over performance levels ([`UFunction`]),
//! components are combined with composition operators ([`StructureFunction`]),
//! and the resulting system generation and load distributions yield the
//! adequacy indices LOLE and EENS.
//!
//! The [`oracle`] module evaluates the same indices by exhaustive joint-state
//! enumeration (and optionally Monte Carlo sampling), bypassing the
//! distribution algebra entirely, so the two routes can be cross-checked.

pub mod components;
pub mod oracle;
pub mod stochastic;
pub mod synth;
pub mod system;
pub mod ugf;

mod check;
mod sum;

pub use components::{
    ev_aggregation_ufunction, ev_mech_ufunction, ev_operation_ufunction, load_ufunction,
    mechanical_ufunction, pv_module_power, read_load_csv, solar_mech_ufunction,
    solar_source_ufunction, source_ufunction, transformer_ufunction, wind_mech_ufunction,
    wind_power, wind_source_ufunction, ComponentError, EvAggregationSpec, EvGranularity,
    EvOperationModel, LoadSpec, MechGranularity, MechModel, PowerMap, SolarGeneratorSpec,
    SolarPanelParams, SolarSource, SourceState, TransformerModel, TransformerSpec,
    WindCurveParams, WindSource, WindTurbineSpec,
};
pub use stochastic::{
    discretize, fit_beta_moments, steady_state_general, steady_state_two_state, BetaParams,
    DiscretizedDistribution, MarkovGenerator, SourceDensity, StochasticError, TimeUnit,
    TwoStateRates, WeibullParams,
};
pub use system::{
    assess, combined_renewables, eens, lole, system_generation, LoadModel, ReliabilityReport,
    SolarFleet, StateCounts, SystemConfig, SystemError, WindFleet,
};
pub use ugf::{
    gridded_compose_plus, quantize_to_grid, shortfall, Shortfall, StructureFunction, Term,
    UFunction, UgfError,
};
