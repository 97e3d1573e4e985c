//! The on-disk scenario format: a single JSON document.
//!
//! Top-level keys are `classes[]`, `channel`, `energy`, `retransmission`,
//! `sinr_threshold_db` and `ack_model`. Every decibel quantity carries a
//! `_db`/`_dbm` suffix in its key and is converted to linear SI units while
//! parsing; the engine itself never sees decibels. Other keys carry plain SI
//! unit suffixes (`_hz`, `_s`, `_w`, `_j`, `_per_m2`) so a table row or a
//! config diff reads without a manual.
//!
//! Writing goes through the same structs. Decibel fields are printed through
//! [`pretty_db`], which snaps to the shortest decimal that converts back to
//! the exact in-memory watts value, so a scenario built from round decibel
//! figures (the usual case) round-trips through the file format losslessly
//! and stays human-readable.

use coex_core::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use coex_core::{
    AckModel, ApDownlink, CarrierDistribution, ChannelModel, EnergyModel, Fading,
    RetransmissionPolicy, Scenario, TechnologyClass, TruncationMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub classes: Vec<ClassFile>,
    pub channel: ChannelFile,
    pub energy: EnergyFile,
    pub retransmission: RetransmissionFile,
    pub sinr_threshold_db: f64,
    pub ack_model: AckFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub name: String,
    pub technology_id: String,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub carrier: CarrierFile,
    pub packet_time_s: f64,
    pub mean_inter_packet_time_s: f64,
    pub device_density_per_m2: f64,
    pub ap_density_per_m2: f64,
    pub orthogonal_channels: u32,
    pub orthogonal_codes: u32,
}

/// Carrier-frequency law. `kind` selects the variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CarrierFile {
    PointMass {
        frequency_hz: f64,
    },
    Uniform {
        f_min_hz: f64,
        f_max_hz: f64,
    },
    /// Piecewise-linear CDF through `[frequency_hz, cdf]` knots.
    TabulatedCdf {
        knots: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub pathloss_exponent: f64,
    pub fading: FadingFile,
    pub noise_density_dbm_per_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingFile {
    RayleighUnitMean,
    General { fractional_moment: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyFile {
    pub circuit_power_w: f64,
    pub pa_overhead: f64,
    pub rx_power_w: f64,
    pub active_time_s: f64,
    pub ack_time_s: f64,
    pub battery_capacity_j: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetransmissionFile {
    pub max_transmissions: u32,
    pub retry_wait_s: f64,
    pub truncation: TruncationFile,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationFile {
    Truncated,
    Conditional,
    FailureTail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AckFile {
    Ideal,
    FixedProbability { probability: f64 },
    FromApDensity { downlink: DownlinkFile },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DownlinkFile {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub carrier: CarrierFile,
    pub packet_time_s: f64,
    pub mean_inter_packet_time_s: f64,
}

/// Snaps a freshly computed decibel value to the shortest round decimal that
/// converts back to the exact linear value it came from.
///
/// `raw` is the mechanically converted figure (e.g. `watts_to_dbm(w)`), and
/// `back` the inverse conversion. Whenever the linear value was itself built
/// from a round decibel figure — 20 dBm, -174 dBm/Hz — some low-precision
/// decimal inverts exactly and is returned; otherwise `raw` is kept (and the
/// round trip may drift by one ulp, the best any decibel encoding can do).
fn pretty_db(raw: f64, original: f64, back: impl Fn(f64) -> f64) -> f64 {
    for decimals in [0, 3, 6, 9, 12] {
        let scale = 10f64.powi(decimals);
        let candidate = (raw * scale).round() / scale;
        if back(candidate).to_bits() == original.to_bits() {
            return candidate;
        }
    }
    raw
}

impl CarrierFile {
    fn to_model(&self) -> CarrierDistribution {
        match self {
            CarrierFile::PointMass { frequency_hz } => CarrierDistribution::PointMass {
                frequency: *frequency_hz,
            },
            CarrierFile::Uniform { f_min_hz, f_max_hz } => CarrierDistribution::Uniform {
                f_min: *f_min_hz,
                f_max: *f_max_hz,
            },
            CarrierFile::TabulatedCdf { knots } => CarrierDistribution::TabulatedCdf {
                knots: knots.clone(),
            },
        }
    }

    fn from_model(model: &CarrierDistribution) -> Self {
        match model {
            CarrierDistribution::PointMass { frequency } => CarrierFile::PointMass {
                frequency_hz: *frequency,
            },
            CarrierDistribution::Uniform { f_min, f_max } => CarrierFile::Uniform {
                f_min_hz: *f_min,
                f_max_hz: *f_max,
            },
            CarrierDistribution::TabulatedCdf { knots } => CarrierFile::TabulatedCdf {
                knots: knots.clone(),
            },
        }
    }
}

impl ScenarioFile {
    /// Converts the file form into the engine scenario (units only; semantic
    /// validation happens separately so every problem is reported at once).
    pub fn to_scenario(&self) -> Scenario {
        Scenario {
            classes: self
                .classes
                .iter()
                .map(|c| TechnologyClass {
                    name: c.name.clone(),
                    technology_id: c.technology_id.clone(),
                    tx_power: dbm_to_watts(c.tx_power_dbm),
                    bandwidth: c.bandwidth_hz,
                    carrier: c.carrier.to_model(),
                    packet_time: c.packet_time_s,
                    mean_inter_packet_time: c.mean_inter_packet_time_s,
                    device_density: c.device_density_per_m2,
                    ap_density: c.ap_density_per_m2,
                    orthogonal_channels: c.orthogonal_channels,
                    orthogonal_codes: c.orthogonal_codes,
                })
                .collect(),
            channel: ChannelModel {
                pathloss_exponent: self.channel.pathloss_exponent,
                fading: match self.channel.fading {
                    FadingFile::RayleighUnitMean => Fading::RayleighUnitMean,
                    FadingFile::General { fractional_moment } => {
                        Fading::General { fractional_moment }
                    }
                },
                noise_density: dbm_to_watts(self.channel.noise_density_dbm_per_hz),
            },
            energy: EnergyModel {
                circuit_power: self.energy.circuit_power_w,
                pa_overhead: self.energy.pa_overhead,
                rx_power: self.energy.rx_power_w,
                active_time: self.energy.active_time_s,
                ack_time: self.energy.ack_time_s,
                battery_capacity: self.energy.battery_capacity_j,
            },
            retransmission: RetransmissionPolicy {
                max_transmissions: self.retransmission.max_transmissions,
                retry_wait: self.retransmission.retry_wait_s,
                truncation: match self.retransmission.truncation {
                    TruncationFile::Truncated => TruncationMode::Truncated,
                    TruncationFile::Conditional => TruncationMode::Conditional,
                    TruncationFile::FailureTail => TruncationMode::FailureTail,
                },
            },
            sinr_threshold: db_to_linear(self.sinr_threshold_db),
            ack_model: match &self.ack_model {
                AckFile::Ideal => AckModel::Ideal,
                AckFile::FixedProbability { probability } => {
                    AckModel::FixedProbability(*probability)
                }
                AckFile::FromApDensity { downlink } => AckModel::FromApDensity(ApDownlink {
                    tx_power: dbm_to_watts(downlink.tx_power_dbm),
                    bandwidth: downlink.bandwidth_hz,
                    carrier: downlink.carrier.to_model(),
                    packet_time: downlink.packet_time_s,
                    mean_inter_packet_time: downlink.mean_inter_packet_time_s,
                }),
            },
        }
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            classes: s
                .classes
                .iter()
                .map(|c| ClassFile {
                    name: c.name.clone(),
                    technology_id: c.technology_id.clone(),
                    tx_power_dbm: pretty_db(watts_to_dbm(c.tx_power), c.tx_power, dbm_to_watts),
                    bandwidth_hz: c.bandwidth,
                    carrier: CarrierFile::from_model(&c.carrier),
                    packet_time_s: c.packet_time,
                    mean_inter_packet_time_s: c.mean_inter_packet_time,
                    device_density_per_m2: c.device_density,
                    ap_density_per_m2: c.ap_density,
                    orthogonal_channels: c.orthogonal_channels,
                    orthogonal_codes: c.orthogonal_codes,
                })
                .collect(),
            channel: ChannelFile {
                pathloss_exponent: s.channel.pathloss_exponent,
                fading: match s.channel.fading {
                    Fading::RayleighUnitMean => FadingFile::RayleighUnitMean,
                    Fading::General { fractional_moment } => {
                        FadingFile::General { fractional_moment }
                    }
                },
                noise_density_dbm_per_hz: pretty_db(
                    watts_to_dbm(s.channel.noise_density),
                    s.channel.noise_density,
                    dbm_to_watts,
                ),
            },
            energy: EnergyFile {
                circuit_power_w: s.energy.circuit_power,
                pa_overhead: s.energy.pa_overhead,
                rx_power_w: s.energy.rx_power,
                active_time_s: s.energy.active_time,
                ack_time_s: s.energy.ack_time,
                battery_capacity_j: s.energy.battery_capacity,
            },
            retransmission: RetransmissionFile {
                max_transmissions: s.retransmission.max_transmissions,
                retry_wait_s: s.retransmission.retry_wait,
                truncation: match s.retransmission.truncation {
                    TruncationMode::Truncated => TruncationFile::Truncated,
                    TruncationMode::Conditional => TruncationFile::Conditional,
                    TruncationMode::FailureTail => TruncationFile::FailureTail,
                },
            },
            sinr_threshold_db: pretty_db(
                linear_to_db(s.sinr_threshold),
                s.sinr_threshold,
                db_to_linear,
            ),
            ack_model: match &s.ack_model {
                AckModel::Ideal => AckFile::Ideal,
                AckModel::FixedProbability(p) => AckFile::FixedProbability { probability: *p },
                AckModel::FromApDensity(d) => AckFile::FromApDensity {
                    downlink: DownlinkFile {
                        tx_power_dbm: pretty_db(
                            watts_to_dbm(d.tx_power),
                            d.tx_power,
                            dbm_to_watts,
                        ),
                        bandwidth_hz: d.bandwidth,
                        carrier: CarrierFile::from_model(&d.carrier),
                        packet_time_s: d.packet_time,
                        mean_inter_packet_time_s: d.mean_inter_packet_time,
                    },
                },
            },
        }
    }
}

/// Maps an engine validation path (linear-unit field names) onto the file
/// format's suffixed key names, so errors point at the key the user typed.
fn file_key_path(engine_path: &str) -> String {
    const RENAMES: [(&str, &str); 16] = [
        ("tx_power", "tx_power_dbm"),
        ("bandwidth", "bandwidth_hz"),
        ("packet_time", "packet_time_s"),
        ("mean_inter_packet_time", "mean_inter_packet_time_s"),
        ("device_density", "device_density_per_m2"),
        ("ap_density", "ap_density_per_m2"),
        ("noise_density", "noise_density_dbm_per_hz"),
        ("sinr_threshold", "sinr_threshold_db"),
        ("circuit_power", "circuit_power_w"),
        ("rx_power", "rx_power_w"),
        ("active_time", "active_time_s"),
        ("ack_time", "ack_time_s"),
        ("battery_capacity", "battery_capacity_j"),
        ("retry_wait", "retry_wait_s"),
        ("f_min", "f_min_hz"),
        ("f_max", "f_max_hz"),
    ];
    let (prefix, last) = match engine_path.rfind('.') {
        Some(dot) => engine_path.split_at(dot + 1),
        None => ("", engine_path),
    };
    for (engine, file) in RENAMES {
        if last == engine {
            return format!("{prefix}{file}");
        }
    }
    engine_path.to_string()
}

/// Parses a scenario document, converting units and validating semantics.
/// The error message names the first offending key path.
pub fn parse_scenario_str(text: &str) -> CliResult<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("scenario parse error: {e}")))?;
    let scenario = file.to_scenario();
    let violations = coex_core::validate_scenario(&scenario);
    if !violations.is_empty() {
        let listed = violations
            .iter()
            .map(|v| format!("{}: {}", file_key_path(&v.path), v.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Input(format!(
            "invalid scenario ({} problem{}): {listed}",
            violations.len(),
            if violations.len() == 1 { "" } else { "s" },
        )));
    }
    Ok(scenario)
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &std::path::Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario_str(&text)
}

/// Serializes a scenario into the canonical pretty-printed file form.
pub fn scenario_to_json(s: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&ScenarioFile::from_scenario(s))
        .expect("scenario serialization cannot fail");
    text.push('\n');
    text
}
