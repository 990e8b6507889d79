//! Versioned JSON system descriptions.
//!
//! The document mirrors [`SystemConfig`] section by section. Every rate
//! carries an explicit `per: "hour" | "year"`, sources come either as a
//! fitted density (`beta`/`weibull` + `n_states`) or as a direct
//! `[value, probability, power_kw]` table, and unknown keys anywhere are
//! rejected before any computation runs.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use dgrel_core::{
    read_load_csv, BetaParams, EvAggregationSpec, EvGranularity, EvOperationModel, LoadModel,
    LoadSpec, MarkovGenerator, MechGranularity, MechModel, SolarFleet, SolarGeneratorSpec,
    SolarPanelParams, SolarSource, SourceState, SystemConfig, TimeUnit, TransformerModel,
    TransformerSpec, TwoStateRates, WeibullParams, WindCurveParams, WindFleet, WindSource,
    WindTurbineSpec,
};

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON for schema version {SUPPORTED_VERSION}: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("unsupported config version {found} (this build reads version {SUPPORTED_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("invalid config: {reason}")]
    Invalid { reason: String },
}

fn invalid(reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        reason: reason.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    #[serde(default)]
    pub solar: Option<SolarSection>,
    #[serde(default)]
    pub wind: Option<WindSection>,
    #[serde(default)]
    pub ev: Option<EvSection>,
    #[serde(default)]
    pub transformer: Option<TransformerSection>,
    pub load: LoadSection,
    pub indices: IndicesSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolarSection {
    pub count: u32,
    pub modules_per_generator: u32,
    #[serde(default)]
    pub granularity: Option<SolarGranularityDoc>,
    pub mech: MechSection,
    pub source: SolarSourceSection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolarGranularityDoc {
    PerGenerator,
    PerModule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolarSourceSection {
    #[serde(default)]
    pub table: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub beta: Option<BetaDoc>,
    #[serde(default)]
    pub n_states: Option<usize>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub panel: Option<PanelDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDoc {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelDoc {
    pub k_v: f64,
    pub k_i: f64,
    pub i_sc: f64,
    pub v_oc: f64,
    pub i_mpp: f64,
    pub v_mpp: f64,
    pub n_ot: f64,
    pub t_a: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSection {
    pub count: u32,
    pub mech: MechSection,
    pub source: WindSourceSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindSourceSection {
    #[serde(default)]
    pub table: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub weibull: Option<WeibullDoc>,
    #[serde(default)]
    pub n_states: Option<usize>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub curve: Option<CurveDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeibullDoc {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub cut_in: f64,
    pub rated_speed: f64,
    pub cut_out: f64,
    pub rated_kw: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvSection {
    pub count: u32,
    pub unit_power_kw: f64,
    #[serde(default)]
    pub granularity: Option<EvGranularityDoc>,
    #[serde(default)]
    pub residence_hours: Option<OperationDoc>,
    #[serde(default)]
    pub operation_probs: Option<OperationDoc>,
    pub mech: MechSection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvGranularityDoc {
    Aggregate,
    PerVehicle,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationDoc {
    pub charging: f64,
    pub disconnected: f64,
    pub discharging: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerSection {
    pub rated_kw: f64,
    #[serde(default)]
    pub mech: Option<MechSection>,
    #[serde(default)]
    pub markov: Option<MarkovDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovDoc {
    pub rates: Vec<Vec<f64>>,
    pub capacity_fractions: Vec<f64>,
}

/// Two-state mechanical model: either explicit rates with a time base, or
/// a direct steady-state availability. Exactly one form must be present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechSection {
    #[serde(default)]
    pub failure_rate: Option<f64>,
    #[serde(default)]
    pub repair_rate: Option<f64>,
    #[serde(default)]
    pub per: Option<RateUnitDoc>,
    #[serde(default)]
    pub availability: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateUnitDoc {
    Hour,
    Year,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub hourly_kw: Option<Vec<f64>>,
    #[serde(default)]
    pub table: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub n_states: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicesSection {
    pub horizon_hours: u32,
    #[serde(default)]
    pub strict_loss: Option<bool>,
}

impl MechSection {
    fn to_model(&self, ctx: &str) -> Result<MechModel, ConfigError> {
        match (
            self.failure_rate,
            self.repair_rate,
            self.per,
            self.availability,
        ) {
            (Some(failure), Some(repair), Some(per), None) => {
                let time_unit = match per {
                    RateUnitDoc::Hour => TimeUnit::PerHour,
                    RateUnitDoc::Year => TimeUnit::PerYear,
                };
                Ok(MechModel::Rates(TwoStateRates {
                    failure_rate: failure,
                    repair_rate: repair,
                    time_unit,
                }))
            }
            (None, None, None, Some(a)) => Ok(MechModel::Availability(a)),
            (Some(_), Some(_), None, None) => Err(invalid(format!(
                "{ctx}.mech: rates need an explicit `per: \"hour\" | \"year\"`"
            ))),
            _ => Err(invalid(format!(
                "{ctx}.mech: give either failure_rate/repair_rate/per or availability"
            ))),
        }
    }
}

fn table_rows(table: &[[f64; 3]]) -> Vec<SourceState> {
    table
        .iter()
        .map(|row| SourceState {
            value: row[0],
            probability: row[1],
            power_kw: row[2],
        })
        .collect()
}

impl SolarSection {
    fn to_fleet(&self) -> Result<SolarFleet, ConfigError> {
        let source = match (&self.source.table, &self.source.beta) {
            (Some(table), None) => {
                let stray = [
                    self.source.n_states.map(|_| "n_states"),
                    self.source.max.map(|_| "max"),
                    self.source.panel.as_ref().map(|_| "panel"),
                ]
                .into_iter()
                .flatten()
                .next();
                if let Some(key) = stray {
                    return Err(invalid(format!(
                        "solar.source: `{key}` does not apply to table mode"
                    )));
                }
                SolarSource::Table(table_rows(table))
            }
            (None, Some(beta)) => {
                let n_states = self
                    .source
                    .n_states
                    .ok_or_else(|| invalid("solar.source: beta mode needs n_states"))?;
                let panel = self
                    .source
                    .panel
                    .as_ref()
                    .ok_or_else(|| invalid("solar.source: beta mode needs panel parameters"))?;
                if let Some(max) = self.source.max {
                    if max != 1.0 {
                        return Err(invalid(
                            "solar.source: irradiance is normalized, max must be 1",
                        ));
                    }
                }
                SolarSource::Parametric {
                    irradiance: BetaParams {
                        alpha: beta.alpha,
                        beta: beta.beta,
                    },
                    n_states,
                    panel: SolarPanelParams {
                        k_v: panel.k_v,
                        k_i: panel.k_i,
                        i_sc: panel.i_sc,
                        v_oc: panel.v_oc,
                        i_mpp: panel.i_mpp,
                        v_mpp: panel.v_mpp,
                        n_ot: panel.n_ot,
                        t_a: panel.t_a,
                    },
                }
            }
            _ => {
                return Err(invalid(
                    "solar.source: give exactly one of `table` or `beta`",
                ))
            }
        };
        Ok(SolarFleet {
            spec: SolarGeneratorSpec {
                n_modules: self.modules_per_generator,
                mech: self.mech.to_model("solar")?,
                granularity: match self.granularity {
                    Some(SolarGranularityDoc::PerModule) => MechGranularity::PerModule,
                    _ => MechGranularity::PerGenerator,
                },
                source,
            },
            count: self.count,
        })
    }
}

impl WindSection {
    fn to_fleet(&self) -> Result<WindFleet, ConfigError> {
        let source = match (&self.source.table, &self.source.weibull) {
            (Some(table), None) => {
                if self.source.n_states.is_some()
                    || self.source.max.is_some()
                    || self.source.curve.is_some()
                {
                    return Err(invalid(
                        "wind.source: n_states/max/curve do not apply to table mode",
                    ));
                }
                WindSource::Table(table_rows(table))
            }
            (None, Some(weibull)) => {
                let n_states = self
                    .source
                    .n_states
                    .ok_or_else(|| invalid("wind.source: weibull mode needs n_states"))?;
                let curve = self
                    .source
                    .curve
                    .as_ref()
                    .ok_or_else(|| invalid("wind.source: weibull mode needs a power curve"))?;
                WindSource::Parametric {
                    wind: WeibullParams {
                        shape: weibull.shape,
                        scale: weibull.scale,
                    },
                    n_states,
                    max_speed: self.source.max,
                    curve: WindCurveParams {
                        cut_in: curve.cut_in,
                        rated_speed: curve.rated_speed,
                        cut_out: curve.cut_out,
                        rated_kw: curve.rated_kw,
                    },
                }
            }
            _ => {
                return Err(invalid(
                    "wind.source: give exactly one of `table` or `weibull`",
                ))
            }
        };
        Ok(WindFleet {
            spec: WindTurbineSpec {
                mech: self.mech.to_model("wind")?,
                source,
            },
            count: self.count,
        })
    }
}

impl EvSection {
    fn to_spec(&self) -> Result<EvAggregationSpec, ConfigError> {
        let operation = match (&self.residence_hours, &self.operation_probs) {
            (Some(hours), None) => EvOperationModel::ResidenceHours {
                charging: hours.charging,
                disconnected: hours.disconnected,
                discharging: hours.discharging,
            },
            (None, Some(probs)) => EvOperationModel::Probabilities {
                charging: probs.charging,
                disconnected: probs.disconnected,
                discharging: probs.discharging,
            },
            _ => {
                return Err(invalid(
                    "ev: give exactly one of `residence_hours` or `operation_probs`",
                ))
            }
        };
        Ok(EvAggregationSpec {
            n_vehicles: self.count,
            unit_power_kw: self.unit_power_kw,
            operation,
            mech: self.mech.to_model("ev")?,
            granularity: match self.granularity {
                Some(EvGranularityDoc::PerVehicle) => EvGranularity::PerVehicle,
                _ => EvGranularity::Aggregate,
            },
        })
    }
}

impl TransformerSection {
    fn to_spec(&self) -> Result<TransformerSpec, ConfigError> {
        let model = match (&self.mech, &self.markov) {
            (Some(mech), None) => TransformerModel::TwoState(mech.to_model("transformer")?),
            (None, Some(markov)) => TransformerModel::MultiState {
                generator: MarkovGenerator::new(markov.rates.clone())
                    .map_err(|e| invalid(format!("transformer.markov: {e}")))?,
                capacity_fractions: markov.capacity_fractions.clone(),
            },
            _ => {
                return Err(invalid(
                    "transformer: give exactly one of `mech` or `markov`",
                ))
            }
        };
        Ok(TransformerSpec {
            rated_kw: self.rated_kw,
            model,
        })
    }
}

impl LoadSection {
    fn to_model(
        &self,
        base_dir: &Path,
        csv_override: Option<&Path>,
    ) -> Result<LoadModel, ConfigError> {
        if let Some(path) = csv_override {
            let n_states = self.n_states.ok_or_else(|| {
                invalid("load: n_states is required when reading an hourly series")
            })?;
            return Ok(LoadModel::Series(LoadSpec {
                hourly_kw: read_series(path)?,
                n_states,
            }));
        }
        let sources = self.csv.is_some() as u8
            + self.hourly_kw.is_some() as u8
            + self.table.is_some() as u8;
        if sources != 1 {
            return Err(invalid(
                "load: give exactly one of `csv`, `hourly_kw`, or `table`",
            ));
        }
        if let Some(rel) = &self.csv {
            let n_states = self.n_states.ok_or_else(|| {
                invalid("load: n_states is required when reading an hourly series")
            })?;
            let path = base_dir.join(rel);
            return Ok(LoadModel::Series(LoadSpec {
                hourly_kw: read_series(&path)?,
                n_states,
            }));
        }
        if let Some(series) = &self.hourly_kw {
            let n_states = self
                .n_states
                .ok_or_else(|| invalid("load: n_states is required with hourly_kw"))?;
            return Ok(LoadModel::Series(LoadSpec {
                hourly_kw: series.clone(),
                n_states,
            }));
        }
        let table = self.table.as_ref().expect("checked above");
        if self.n_states.is_some() {
            return Err(invalid("load: n_states does not apply to table mode"));
        }
        Ok(LoadModel::Table(
            table.iter().map(|row| (row[0], row[1])).collect(),
        ))
    }
}

fn read_series(path: &Path) -> Result<Vec<f64>, ConfigError> {
    let file = fs::File::open(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_load_csv(BufReader::new(file)).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Parses a config document without touching the filesystem.
pub fn parse_document(json: &str) -> Result<ConfigDocument, ConfigError> {
    let doc: ConfigDocument = serde_json::from_str(json)?;
    if doc.version != SUPPORTED_VERSION {
        return Err(ConfigError::UnsupportedVersion { found: doc.version });
    }
    Ok(doc)
}

/// Converts a parsed document into a system description. Relative CSV
/// paths resolve against `base_dir` (normally the config file's directory);
/// `load_csv_override` replaces whatever load source the document names.
pub fn build_system(
    doc: &ConfigDocument,
    base_dir: &Path,
    load_csv_override: Option<&Path>,
    strict_loss_override: Option<bool>,
) -> Result<SystemConfig, ConfigError> {
    Ok(SystemConfig {
        solar: doc.solar.as_ref().map(SolarSection::to_fleet).transpose()?,
        wind: doc.wind.as_ref().map(WindSection::to_fleet).transpose()?,
        ev: doc.ev.as_ref().map(EvSection::to_spec).transpose()?,
        transformer: doc
            .transformer
            .as_ref()
            .map(TransformerSection::to_spec)
            .transpose()?,
        load: doc.load.to_model(base_dir, load_csv_override)?,
        horizon_hours: doc.indices.horizon_hours,
        strict_loss: strict_loss_override
            .or(doc.indices.strict_loss)
            .unwrap_or(true),
    })
}

/// Reads, parses, and converts a config file in one step.
pub fn load_system(
    path: &Path,
    load_csv_override: Option<&Path>,
    strict_loss_override: Option<bool>,
) -> Result<SystemConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc = parse_document(&text)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    build_system(&doc, base_dir, load_csv_override, strict_loss_override)
}
