use std::fmt;

use thiserror::Error;

/// A single validation finding, addressed by a JSON-pointer-ish path into the
/// scenario (e.g. `classes[1].packet_time`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {}", join_violations(.0))]
    InvalidScenario(Vec<Violation>),

    #[error("class index {index} out of range: scenario has {len} classes")]
    ClassIndex { index: usize, len: usize },

    #[error("argument {name}={value} outside its domain: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("the closed-form overlap ratio requires a uniform carrier law")]
    NotUniformLaw,

    #[error("uniform support [{f_min}, {f_max}] does not extend past the exclusion zone [{zone_lo}, {zone_hi}]")]
    OverlapPrecondition {
        f_min: f64,
        f_max: f64,
        zone_lo: f64,
        zone_hi: f64,
    },

    #[error("carrier law is random; pass an explicit carrier frequency for pointwise evaluation")]
    CarrierRequired,

    #[error("the Rayleigh closed form requires rayleigh-unit-mean fading")]
    NotRayleighFading,

    #[error(
        "quadrature did not reach the requested tolerance: residual {residual:.3e} > {tol:.3e}"
    )]
    QuadratureNoConvergence { residual: f64, tol: f64 },

    #[error(
        "SINR grid too coarse: grid_max {grid_max} must exceed the threshold {threshold}; \
         increase grid_max or leave it unset"
    )]
    GridMaxTooSmall { grid_max: f64, threshold: f64 },

    #[error("joint reception config: {0}")]
    JointConfig(String),

    #[error("sim config: {0}")]
    SimConfig(String),

    #[error("energy per report is not positive; battery lifetime undefined")]
    ZeroEnergy,
}

pub type Result<T> = std::result::Result<T, Error>;
