//! Analytic and Monte Carlo engines for coexistence KPIs of grant-free IoT
//! uplinks.
//!
//! The crate models populations of uncoordinated low-power devices as
//! independent Poisson fields, thinned by duty cycle, channel/code
//! orthogonality and spectral overlap, over a Rayleigh-faded power-law
//! channel. From that model it derives the key performance indicators of a
//! reference uplink at a given distance:
//!
//! * single-transmission success probability (closed form, carrier-averaged,
//!   or simulated),
//! * mean transmission attempts per report under a finite retry budget,
//! * expected report delay,
//! * energy per report and battery lifetime,
//! * success probability under joint reception by several access points with
//!   maximum-ratio combining.
//!
//! Every analytic expression has a Monte Carlo counterpart in
//! [`montecarlo`], driven by deterministic per-trial random streams so that
//! results are reproducible bit for bit regardless of the execution mode
//! (`parallel` feature, thread count).
//!
//! All quantities are linear SI units -- watts, hertz, seconds, metres --
//! with dB conversions confined to [`units`].

pub mod analytic;
pub mod error;
pub mod exec;
pub mod joint;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod overlap;
pub mod profiles;
pub mod units;

pub use error::{Error, Result, Violation};
pub use model::{
    validate_scenario, AckModel, ApDownlink, CarrierDistribution, ChannelModel, EnergyModel,
    Fading, KpiCi, KpiResult, Provenance, RetransmissionPolicy, Scenario, TechnologyClass,
    TruncationMode,
};
