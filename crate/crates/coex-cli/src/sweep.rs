//! Sweep specifications: which variable to scan and over which grid.
//!
//! The command-line grammar is `VAR:MIN:MAX:STEPS[:log|:linear]`, e.g.
//! `distance:10:500:50` or `device_density:1e-4:1e-1:25:log`.

use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

/// The quantity a sweep scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Device-to-serving-AP distance (m).
    Distance,
    /// Device density (1/m^2) applied to every class except the reference
    /// class, i.e. the interfering population is scaled.
    DeviceDensity,
    /// SINR decoding threshold, given in dB.
    SinrThreshold,
    /// Number of cooperating APs for joint reception; takes the leading
    /// entries of the `--mrc` geometry.
    ApCount,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Distance => "distance",
            SweepVar::DeviceDensity => "device_density",
            SweepVar::SinrThreshold => "sinr_threshold",
            SweepVar::ApCount => "ap_count",
        }
    }
}

/// Grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

/// A parsed sweep: variable, inclusive range, point count and spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    /// The grid values, `steps` points from `min` to `max` inclusive.
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        let t = |k: usize| k as f64 / (n - 1) as f64;
        (0..n)
            .map(|k| match self.scale {
                SweepScale::Linear => self.min + (self.max - self.min) * t(k),
                SweepScale::Log => {
                    (self.min.ln() + (self.max.ln() - self.min.ln()) * t(k)).exp()
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), String> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err("sweep bounds must be finite".into());
        }
        if self.min >= self.max {
            return Err(format!(
                "sweep min must be below max (got {}..{})",
                self.min, self.max
            ));
        }
        if self.steps < 2 {
            return Err(format!("sweep needs at least 2 steps (got {})", self.steps));
        }
        if self.scale == SweepScale::Log && self.min <= 0.0 {
            return Err("log-scaled sweeps need a positive min".into());
        }
        match self.var {
            SweepVar::Distance if self.min < 0.0 => {
                Err("distance sweeps cannot go negative".into())
            }
            SweepVar::DeviceDensity if self.min < 0.0 => {
                Err("device density cannot be negative".into())
            }
            SweepVar::ApCount if self.min < 1.0 => {
                Err("ap_count sweeps start at 1".into())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}:{}",
            self.var.name(),
            self.min,
            self.max,
            self.steps,
            match self.scale {
                SweepScale::Linear => "linear",
                SweepScale::Log => "log",
            }
        )
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!(
                "expected VAR:MIN:MAX:STEPS[:log|:linear], got '{text}'"
            ));
        }
        let var = match parts[0] {
            "distance" => SweepVar::Distance,
            "device_density" => SweepVar::DeviceDensity,
            "sinr_threshold" => SweepVar::SinrThreshold,
            "ap_count" => SweepVar::ApCount,
            other => {
                return Err(format!(
                    "unknown sweep variable '{other}' (expected distance, \
                     device_density, sinr_threshold or ap_count)"
                ))
            }
        };
        let num = |what: &str, s: &str| -> Result<f64, String> {
            s.parse::<f64>()
                .map_err(|_| format!("sweep {what} '{s}' is not a number"))
        };
        let min = num("min", parts[1])?;
        let max = num("max", parts[2])?;
        let steps = parts[3]
            .parse::<usize>()
            .map_err(|_| format!("sweep steps '{}' is not a positive integer", parts[3]))?;
        let scale = match parts.get(4) {
            None | Some(&"linear") => SweepScale::Linear,
            Some(&"log") => SweepScale::Log,
            Some(other) => return Err(format!("unknown sweep scale '{other}'")),
        };
        let spec = SweepSpec {
            var,
            min,
            max,
            steps,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Joint-reception geometry from the `--mrc` flag:
/// `"d1,d2,d3"` or `"d1,d2,d3;p1,p2,p3"`.
#[derive(Debug, Clone, PartialEq)]
pub struct MrcSpec {
    pub distances: Vec<f64>,
    pub availabilities: Vec<f64>,
}

impl FromStr for MrcSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut halves = text.splitn(2, ';');
        let parse_list = |part: &str, what: &str| -> Result<Vec<f64>, String> {
            part.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("mrc {what} '{v}' is not a number"))
                })
                .collect()
        };
        let distances = parse_list(halves.next().unwrap_or(""), "distance")?;
        if distances.is_empty() {
            return Err("mrc needs at least one AP distance".into());
        }
        let availabilities = match halves.next() {
            Some(p) => {
                let avail = parse_list(p, "availability")?;
                if avail.len() != distances.len() {
                    return Err(format!(
                        "mrc has {} distances but {} availabilities",
                        distances.len(),
                        avail.len()
                    ));
                }
                avail
            }
            None => vec![1.0; distances.len()],
        };
        Ok(MrcSpec {
            distances,
            availabilities,
        })
    }
}

impl MrcSpec {
    /// The joint-reception config over the first `count` APs.
    pub fn config_for(&self, count: usize) -> Result<coex_core::joint::JointReceptionConfig, CliError> {
        if count == 0 || count > self.distances.len() {
            return Err(CliError::Input(format!(
                "ap_count {count} outside the configured mrc geometry (1..={})",
                self.distances.len()
            )));
        }
        let mut cfg =
            coex_core::joint::JointReceptionConfig::new(self.distances[..count].to_vec());
        cfg.availabilities = self.availabilities[..count].to_vec();
        Ok(cfg)
    }
}
