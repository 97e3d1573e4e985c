//! Scenario model: technology classes, channel, energy and session policy.
//!
//! Everything is stored in linear SI units (watts, hertz, seconds, metres,
//! devices per square metre). Decibel conversion belongs to the caller; see
//! [`crate::units`].
//!
//! A [`Scenario`] bundles one or more [`TechnologyClass`] populations that
//! share a propagation channel. Every class is a homogeneous Poisson field of
//! uplink devices; one class at a time plays the role of the *reference* link
//! whose KPIs are evaluated, while all classes (including the reference's
//! own) contribute interference.

use rand::Rng;

use crate::error::{Error, Result, Violation};

/// Distribution of the carrier frequency a device picks for a transmission.
///
/// Carrier randomness models frequency hopping or uncoordinated channel
/// selection. The tabulated variant stores a piecewise-linear CDF, which is
/// enough to describe any histogram-style measurement of a hopping pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum CarrierDistribution {
    /// Every transmission uses the same centre frequency (Hz).
    PointMass { frequency: f64 },
    /// Centre frequency drawn uniformly from `[f_min, f_max]` (Hz).
    Uniform { f_min: f64, f_max: f64 },
    /// Piecewise-linear CDF through `(frequency, cdf)` knots. Knots must have
    /// strictly increasing frequencies and a non-decreasing CDF running from
    /// exactly 0 to exactly 1.
    TabulatedCdf { knots: Vec<(f64, f64)> },
}

/// One linear-density piece of a carrier law's PDF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdfSegment {
    pub lo: f64,
    pub hi: f64,
    /// Constant probability density (1/Hz) on `[lo, hi]`.
    pub density: f64,
}

impl CarrierDistribution {
    /// Smallest interval containing all probability mass.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::PointMass { frequency } => (*frequency, *frequency),
            Self::Uniform { f_min, f_max } => (*f_min, *f_max),
            Self::TabulatedCdf { knots } => (knots[0].0, knots[knots.len() - 1].0),
        }
    }

    /// Returns the carrier frequency if the law is degenerate.
    pub fn point_mass(&self) -> Option<f64> {
        match self {
            Self::PointMass { frequency } => Some(*frequency),
            _ => None,
        }
    }

    /// Cumulative distribution function, P(F <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::PointMass { frequency } => {
                if x >= *frequency {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { f_min, f_max } => ((x - f_min) / (f_max - f_min)).clamp(0.0, 1.0),
            Self::TabulatedCdf { knots } => {
                if x <= knots[0].0 {
                    return 0.0;
                }
                if x >= knots[knots.len() - 1].0 {
                    return 1.0;
                }
                // First knot strictly beyond x; x lies in [knots[k-1], knots[k]).
                let k = knots.partition_point(|&(f, _)| f <= x);
                let (f0, c0) = knots[k - 1];
                let (f1, c1) = knots[k];
                c0 + (c1 - c0) * (x - f0) / (f1 - f0)
            }
        }
    }

    /// Draws a carrier frequency.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::PointMass { frequency } => *frequency,
            Self::Uniform { f_min, f_max } => rng.gen_range(*f_min..=*f_max),
            Self::TabulatedCdf { knots } => {
                let u: f64 = rng.gen();
                // Inverse-CDF over the piecewise-linear knots; flat pieces
                // carry no mass and are skipped by the strict comparison.
                let k = knots.partition_point(|&(_, c)| c < u).max(1);
                let (f0, c0) = knots[k - 1];
                let (f1, c1) = knots[k.min(knots.len() - 1)];
                if c1 <= c0 {
                    f0
                } else {
                    f0 + (f1 - f0) * (u - c0) / (c1 - c0)
                }
            }
        }
    }

    /// Piecewise-constant density representation, for quadrature over the
    /// carrier law. Zero-density pieces are dropped; a point mass yields no
    /// segments (use [`Self::point_mass`] first).
    pub fn pdf_segments(&self) -> Vec<PdfSegment> {
        match self {
            Self::PointMass { .. } => Vec::new(),
            Self::Uniform { f_min, f_max } => vec![PdfSegment {
                lo: *f_min,
                hi: *f_max,
                density: 1.0 / (f_max - f_min),
            }],
            Self::TabulatedCdf { knots } => knots
                .windows(2)
                .filter(|w| w[1].1 > w[0].1)
                .map(|w| PdfSegment {
                    lo: w[0].0,
                    hi: w[1].0,
                    density: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
                })
                .collect(),
        }
    }

    fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        match self {
            Self::PointMass { frequency } => {
                if !frequency.is_finite() || *frequency <= 0.0 {
                    out.push(Violation::new(
                        format!("{path}.frequency"),
                        "carrier frequency must be finite and positive",
                    ));
                }
            }
            Self::Uniform { f_min, f_max } => {
                if !f_min.is_finite() || !f_max.is_finite() || *f_min <= 0.0 {
                    out.push(Violation::new(
                        path,
                        "uniform carrier bounds must be finite and positive",
                    ));
                } else if f_min >= f_max {
                    out.push(Violation::new(
                        path,
                        "uniform carrier law needs f_min < f_max (use a point mass for a fixed carrier)",
                    ));
                }
            }
            Self::TabulatedCdf { knots } => {
                if knots.len() < 2 {
                    out.push(Violation::new(path, "tabulated CDF needs at least two knots"));
                    return;
                }
                if knots.iter().any(|&(f, c)| !f.is_finite() || !c.is_finite()) {
                    out.push(Violation::new(path, "tabulated CDF knots must be finite"));
                    return;
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    out.push(Violation::new(
                        path,
                        "tabulated CDF frequencies must be strictly increasing",
                    ));
                }
                if knots.windows(2).any(|w| w[1].1 < w[0].1) {
                    out.push(Violation::new(path, "tabulated CDF must be non-decreasing"));
                }
                if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 1.0 {
                    out.push(Violation::new(
                        path,
                        "tabulated CDF must start at exactly 0 and end at exactly 1",
                    ));
                }
            }
        }
    }
}

/// A homogeneous population of uplink devices sharing one radio technology.
#[derive(Debug, Clone, PartialEq)]
pub struct TechnologyClass {
    /// Free-form label used in reports.
    pub name: String,
    /// Technologies with equal ids share an orthogonal channel/code grid;
    /// different ids collide whenever their spectra overlap.
    pub technology_id: String,
    /// Transmit power (W).
    pub tx_power: f64,
    /// Occupied bandwidth per transmission (Hz).
    pub bandwidth: f64,
    /// Carrier frequency law.
    pub carrier: CarrierDistribution,
    /// On-air time of one packet (s).
    pub packet_time: f64,
    /// Mean time between packet starts of one device (s).
    pub mean_inter_packet_time: f64,
    /// Device density (1/m^2).
    pub device_density: f64,
    /// Access-point density of this class (1/m^2); used by the
    /// acknowledgement model.
    pub ap_density: f64,
    /// Number of orthogonal frequency channels inside the technology.
    pub orthogonal_channels: u32,
    /// Number of orthogonal codes (e.g. spreading factors) per channel.
    pub orthogonal_codes: u32,
}

impl TechnologyClass {
    /// Fraction of time a single device of this class is on air.
    pub fn duty_cycle(&self) -> f64 {
        self.packet_time / self.mean_inter_packet_time
    }

    fn validate(&self, k: usize, out: &mut Vec<Violation>) {
        let p = |field: &str| format!("classes[{k}].{field}");
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !pos(self.tx_power) {
            out.push(Violation::new(p("tx_power"), "must be finite and positive"));
        }
        if !pos(self.bandwidth) {
            out.push(Violation::new(p("bandwidth"), "must be finite and positive"));
        }
        if !pos(self.packet_time) {
            out.push(Violation::new(p("packet_time"), "must be finite and positive"));
        }
        if !self.mean_inter_packet_time.is_finite()
            || self.mean_inter_packet_time < self.packet_time
        {
            out.push(Violation::new(
                p("mean_inter_packet_time"),
                "must be finite and at least the packet time (duty cycle at most one)",
            ));
        }
        if !nonneg(self.device_density) {
            out.push(Violation::new(
                p("device_density"),
                "must be finite and non-negative",
            ));
        }
        if !nonneg(self.ap_density) {
            out.push(Violation::new(p("ap_density"), "must be finite and non-negative"));
        }
        if self.orthogonal_channels == 0 {
            out.push(Violation::new(p("orthogonal_channels"), "must be at least 1"));
        }
        if self.orthogonal_codes == 0 {
            out.push(Violation::new(p("orthogonal_codes"), "must be at least 1"));
        }
        self.carrier.validate(&p("carrier"), out);
    }
}

/// Small-scale fading model of the shared channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fading {
    /// Unit-mean Rayleigh power fading (exponential power gains). Admits the
    /// sinc-form closed expressions and is the only model the Monte Carlo
    /// engine samples from.
    RayleighUnitMean,
    /// Any unit-mean fading law, summarized by the fractional moment
    /// `E[h^sigma]` at `sigma = 2 / pathloss_exponent`. The value must be
    /// precomputed for the scenario's pathloss exponent.
    General { fractional_moment: f64 },
}

/// Large-scale propagation and receiver noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    /// Pathloss exponent; must exceed 2 so interference moments exist.
    pub pathloss_exponent: f64,
    pub fading: Fading,
    /// One-sided noise power spectral density (W/Hz).
    pub noise_density: f64,
}

impl ChannelModel {
    /// The interference tail exponent `sigma = 2 / alpha` in (0, 1).
    pub fn sigma(&self) -> f64 {
        2.0 / self.pathloss_exponent
    }

    fn validate(&self, out: &mut Vec<Violation>) {
        if !self.pathloss_exponent.is_finite() || self.pathloss_exponent <= 2.0 {
            out.push(Violation::new(
                "channel.pathloss_exponent",
                "must be finite and greater than 2 (interference moments diverge otherwise)",
            ));
        }
        if !self.noise_density.is_finite() || self.noise_density < 0.0 {
            out.push(Violation::new(
                "channel.noise_density",
                "must be finite and non-negative",
            ));
        }
        if let Fading::General { fractional_moment } = self.fading {
            if !fractional_moment.is_finite() || fractional_moment <= 0.0 {
                out.push(Violation::new(
                    "channel.fading.fractional_moment",
                    "must be finite and positive",
                ));
            }
        }
    }
}

/// Power draw and timing of one report cycle, for the battery-lifetime KPI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Baseline circuit power while active (W).
    pub circuit_power: f64,
    /// Power-amplifier drain coefficient: the transmit chain draws
    /// `pa_overhead * tx_power` on top of the circuit power.
    pub pa_overhead: f64,
    /// Receiver power while listening for an acknowledgement (W).
    pub rx_power: f64,
    /// Wake-up / measurement time before the first transmission (s).
    pub active_time: f64,
    /// Acknowledgement listening time after each transmission (s).
    pub ack_time: f64,
    /// Usable battery energy (J).
    pub battery_capacity: f64,
}

impl EnergyModel {
    fn validate(&self, out: &mut Vec<Violation>) {
        let nonneg: [(&str, f64); 5] = [
            ("circuit_power", self.circuit_power),
            ("pa_overhead", self.pa_overhead),
            ("rx_power", self.rx_power),
            ("active_time", self.active_time),
            ("ack_time", self.ack_time),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                out.push(Violation::new(
                    format!("energy.{name}"),
                    "must be finite and non-negative",
                ));
            }
        }
        if !self.battery_capacity.is_finite() || self.battery_capacity <= 0.0 {
            out.push(Violation::new(
                "energy.battery_capacity",
                "must be finite and positive",
            ));
        }
    }
}

/// How the truncated retransmission sums treat the attempt budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationMode {
    /// Raw truncated sums over attempts `1..=max_transmissions`. The terms
    /// beyond the budget are simply dropped, so the mean attempt count can
    /// fall below one at low success probability. This matches the classical
    /// closed forms and is the default.
    #[default]
    Truncated,
    /// Truncated sums renormalized by the probability that the session
    /// succeeds within the budget, i.e. moments conditional on success.
    Conditional,
    /// Truncated sums plus an explicit failure term that charges the full
    /// budget of `max_transmissions` attempts when every attempt fails. This
    /// is the physically conservative choice for energy accounting.
    FailureTail,
}

/// Retransmission budget and pacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetransmissionPolicy {
    /// Maximum number of transmission attempts per report (>= 1).
    pub max_transmissions: u32,
    /// Idle wait between an attempt's ack window and the next attempt (s).
    pub retry_wait: f64,
    pub truncation: TruncationMode,
}

impl RetransmissionPolicy {
    fn validate(&self, out: &mut Vec<Violation>) {
        if self.max_transmissions == 0 {
            out.push(Violation::new(
                "retransmission.max_transmissions",
                "must be at least 1",
            ));
        }
        if !self.retry_wait.is_finite() || self.retry_wait < 0.0 {
            out.push(Violation::new(
                "retransmission.retry_wait",
                "must be finite and non-negative",
            ));
        }
    }
}

/// Downlink parameters of the serving access points, used when the
/// acknowledgement success probability is computed rather than given.
#[derive(Debug, Clone, PartialEq)]
pub struct ApDownlink {
    /// AP transmit power (W).
    pub tx_power: f64,
    /// Downlink bandwidth (Hz).
    pub bandwidth: f64,
    /// Downlink carrier law.
    pub carrier: CarrierDistribution,
    /// On-air time of one acknowledgement (s).
    pub packet_time: f64,
    /// Mean time between downlink transmissions per AP (s).
    pub mean_inter_packet_time: f64,
}

/// Acknowledgement channel model.
#[derive(Debug, Clone, PartialEq)]
pub enum AckModel {
    /// Acknowledgements always arrive.
    Ideal,
    /// Fixed acknowledgement success probability.
    FixedProbability(f64),
    /// Acknowledgement success computed as the downlink success probability
    /// from the serving AP at the uplink distance, with the reference class's
    /// other APs (density `ap_density`) as the interferer field.
    FromApDensity(ApDownlink),
}

impl AckModel {
    fn validate(&self, out: &mut Vec<Violation>) {
        match self {
            Self::Ideal => {}
            Self::FixedProbability(p) => {
                if !p.is_finite() || !(0.0..=1.0).contains(p) {
                    out.push(Violation::new(
                        "ack_model.probability",
                        "must lie in [0, 1]",
                    ));
                }
            }
            Self::FromApDensity(d) => {
                let pos = |v: f64| v.is_finite() && v > 0.0;
                if !pos(d.tx_power) {
                    out.push(Violation::new(
                        "ack_model.downlink.tx_power",
                        "must be finite and positive",
                    ));
                }
                if !pos(d.bandwidth) {
                    out.push(Violation::new(
                        "ack_model.downlink.bandwidth",
                        "must be finite and positive",
                    ));
                }
                if !pos(d.packet_time) {
                    out.push(Violation::new(
                        "ack_model.downlink.packet_time",
                        "must be finite and positive",
                    ));
                }
                if !d.mean_inter_packet_time.is_finite()
                    || d.mean_inter_packet_time < d.packet_time
                {
                    out.push(Violation::new(
                        "ack_model.downlink.mean_inter_packet_time",
                        "must be finite and at least the packet time",
                    ));
                }
                d.carrier.validate("ack_model.downlink.carrier", out);
            }
        }
    }
}

/// A complete coexistence scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub classes: Vec<TechnologyClass>,
    pub channel: ChannelModel,
    pub energy: EnergyModel,
    pub retransmission: RetransmissionPolicy,
    /// SINR decoding threshold (linear, > 0).
    pub sinr_threshold: f64,
    pub ack_model: AckModel,
}

impl Scenario {
    /// Returns `Err(InvalidScenario)` listing every violation, or `Ok(())`.
    pub fn validated(&self) -> Result<()> {
        let violations = validate_scenario(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(violations))
        }
    }

    /// Class accessor with a descriptive out-of-range error.
    pub fn class(&self, j: usize) -> Result<&TechnologyClass> {
        self.classes.get(j).ok_or(Error::ClassIndex {
            index: j,
            len: self.classes.len(),
        })
    }
}

/// Checks every structural invariant and returns the list of violations
/// (empty when the scenario is valid). Engine entry points call this through
/// [`Scenario::validated`]; it is public so front-ends can report all
/// problems at once.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.classes.is_empty() {
        out.push(Violation::new(
            "classes",
            "at least one technology class is required",
        ));
    }
    for (k, class) in s.classes.iter().enumerate() {
        class.validate(k, &mut out);
    }
    s.channel.validate(&mut out);
    s.energy.validate(&mut out);
    s.retransmission.validate(&mut out);
    if !s.sinr_threshold.is_finite() || s.sinr_threshold <= 0.0 {
        out.push(Violation::new(
            "sinr_threshold",
            "must be finite and positive (linear scale)",
        ));
    }
    s.ack_model.validate(&mut out);
    out
}

/// Probability that a random transmission of an interferer from class `i`
/// both is on air during the reference packet of class `j` and lands on the
/// reference link's channel/code resource.
///
/// The temporal part is the interferer's duty cycle `T_i / mean_ipt_i`. The
/// resource part is 1 between different technologies (only spectral overlap
/// separates them, handled elsewhere), and `1 / (channels * codes)` within a
/// technology, where an interferer picks its channel and code uniformly.
pub fn time_activity_factor(s: &Scenario, i: usize, j: usize) -> Result<f64> {
    let interferer = s.class(i)?;
    let reference = s.class(j)?;
    let orthogonality = if interferer.technology_id == reference.technology_id {
        1.0 / (interferer.orthogonal_channels as f64 * interferer.orthogonal_codes as f64)
    } else {
        1.0
    };
    Ok(orthogonality * interferer.duty_cycle())
}

/// Which engine produced a KPI row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

/// 95%-style half-widths for the stochastic KPIs; only Monte Carlo results
/// carry them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KpiCi {
    pub success_probability: f64,
    pub mean_transmissions: f64,
    pub expected_delay: f64,
    pub energy_per_report: f64,
    pub battery_lifetime: f64,
}

/// The full KPI set for one (class, distance) query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpiResult {
    /// Probability that a single transmission attempt is decoded and, where
    /// the acknowledgement model is non-ideal, acknowledged.
    pub success_probability: f64,
    /// Mean number of transmission attempts per report, under the scenario's
    /// truncation mode.
    pub mean_transmissions: f64,
    /// Expected report delay (s).
    pub expected_delay: f64,
    /// Expected energy drawn from the battery per report (J).
    pub energy_per_report: f64,
    /// Expected battery lifetime (s).
    pub battery_lifetime: f64,
    pub provenance: Provenance,
    pub ci: Option<KpiCi>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_scenario() -> Scenario {
        Scenario {
            classes: vec![
                TechnologyClass {
                    name: "alpha".into(),
                    technology_id: "tech-a".into(),
                    tx_power: 0.1,
                    bandwidth: 125e3,
                    carrier: CarrierDistribution::PointMass { frequency: 868.1e6 },
                    packet_time: 1.0,
                    mean_inter_packet_time: 1.0 / 0.21,
                    device_density: 2.5e-3,
                    ap_density: 1e-5,
                    orthogonal_channels: 3,
                    orthogonal_codes: 7,
                },
                TechnologyClass {
                    name: "beta".into(),
                    technology_id: "tech-b".into(),
                    tx_power: 0.025,
                    bandwidth: 125e3,
                    carrier: CarrierDistribution::Uniform {
                        f_min: 867.475e6,
                        f_max: 868.725e6,
                    },
                    packet_time: 1.0,
                    mean_inter_packet_time: 100.0,
                    device_density: 1e-2,
                    ap_density: 1e-5,
                    orthogonal_channels: 1,
                    orthogonal_codes: 1,
                },
            ],
            channel: ChannelModel {
                pathloss_exponent: 4.0,
                fading: Fading::RayleighUnitMean,
                noise_density: 3.98e-21,
            },
            energy: EnergyModel {
                circuit_power: 0.1,
                pa_overhead: 0.7,
                rx_power: 0.1,
                active_time: 2.0,
                ack_time: 1.0,
                battery_capacity: 4000.0,
            },
            retransmission: RetransmissionPolicy {
                max_transmissions: 7,
                retry_wait: 1.0,
                truncation: TruncationMode::Truncated,
            },
            sinr_threshold: 1.9952623149688795,
            ack_model: AckModel::Ideal,
        }
    }

    #[test]
    fn valid_scenario_has_no_violations() {
        assert_eq!(validate_scenario(&small_scenario()), Vec::new());
        assert!(small_scenario().validated().is_ok());
    }

    #[test]
    fn violations_point_at_fields() {
        let mut s = small_scenario();
        s.classes[1].packet_time = 200.0; // exceeds the 100 s reporting period
        s.channel.pathloss_exponent = 2.0;
        s.sinr_threshold = -1.0;
        let violations = validate_scenario(&s);
        let paths: Vec<&str> = violations.iter().map(|v| v.path.as_str()).collect();
        assert!(paths.contains(&"classes[1].mean_inter_packet_time"));
        assert!(paths.contains(&"channel.pathloss_exponent"));
        assert!(paths.contains(&"sinr_threshold"));
        assert_eq!(violations.len(), 3);
        match s.validated() {
            Err(Error::InvalidScenario(v)) => assert_eq!(v.len(), 3),
            other => panic!("expected InvalidScenario, got {other:?}"),
        }
    }

    #[test]
    fn empty_class_list_is_rejected() {
        let mut s = small_scenario();
        s.classes.clear();
        let violations = validate_scenario(&s);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].path, "classes");
    }

    #[test]
    fn tabulated_cdf_is_validated() {
        let mut s = small_scenario();
        s.classes[0].carrier = CarrierDistribution::TabulatedCdf {
            knots: vec![(868.0e6, 0.0), (868.2e6, 0.9)],
        };
        let violations = validate_scenario(&s);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].message.contains("end at exactly 1"));
    }

    #[test]
    fn activity_factor_reference_values() {
        let s = small_scenario();
        // Same class: duty cycle 0.21 spread over 3 channels x 7 codes.
        assert_relative_eq!(
            time_activity_factor(&s, 0, 0).unwrap(),
            0.01,
            max_relative = 1e-12
        );
        // Cross-technology: plain duty cycle of the interferer.
        assert_relative_eq!(
            time_activity_factor(&s, 1, 0).unwrap(),
            0.01,
            max_relative = 1e-12
        );
        // Reference from the other side: class 0 interfering class 1 uses
        // class 0's full duty cycle because the technologies differ.
        assert_relative_eq!(
            time_activity_factor(&s, 0, 1).unwrap(),
            0.21,
            max_relative = 1e-12
        );
        assert!(matches!(
            time_activity_factor(&s, 5, 0),
            Err(Error::ClassIndex { index: 5, len: 2 })
        ));
    }

    #[test]
    fn uniform_cdf_and_support() {
        let law = CarrierDistribution::Uniform {
            f_min: 100.0,
            f_max: 300.0,
        };
        assert_eq!(law.support(), (100.0, 300.0));
        assert_eq!(law.cdf(50.0), 0.0);
        assert_relative_eq!(law.cdf(200.0), 0.5);
        assert_eq!(law.cdf(400.0), 1.0);
        assert_eq!(law.point_mass(), None);
    }

    #[test]
    fn tabulated_cdf_interpolates_knots() {
        let law = CarrierDistribution::TabulatedCdf {
            knots: vec![(0.0, 0.0), (10.0, 0.25), (20.0, 0.25), (40.0, 1.0)],
        };
        assert_eq!(law.cdf(-1.0), 0.0);
        assert_relative_eq!(law.cdf(5.0), 0.125);
        assert_relative_eq!(law.cdf(15.0), 0.25); // flat piece carries no mass
        assert_relative_eq!(law.cdf(30.0), 0.625);
        assert_eq!(law.cdf(40.0), 1.0);

        let segments = law.pdf_segments();
        assert_eq!(segments.len(), 2); // flat piece dropped
        let total: f64 = segments
            .iter()
            .map(|s| s.density * (s.hi - s.lo))
            .sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn sampling_respects_support_and_mass() {
        let law = CarrierDistribution::TabulatedCdf {
            knots: vec![(0.0, 0.0), (10.0, 0.25), (20.0, 0.25), (40.0, 1.0)],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let mut below_10 = 0u32;
        let mut in_dead_zone = 0u32;
        for _ in 0..n {
            let f = law.sample(&mut rng);
            assert!((0.0..=40.0).contains(&f));
            if f <= 10.0 {
                below_10 += 1;
            }
            if f > 10.0 && f < 20.0 {
                in_dead_zone += 1;
            }
        }
        // P(F <= 10) = 0.25; binomial std error ~ 0.003.
        let frac = f64::from(below_10) / n as f64;
        assert!((frac - 0.25).abs() < 0.015, "P(F<=10) estimate {frac}");
        assert_eq!(in_dead_zone, 0, "zero-density piece must never be sampled");
    }

    #[test]
    fn point_mass_sampling_is_degenerate() {
        let law = CarrierDistribution::PointMass { frequency: 868.1e6 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(law.sample(&mut rng), 868.1e6);
        assert_eq!(law.point_mass(), Some(868.1e6));
        assert_eq!(law.cdf(868.1e6), 1.0);
        assert_eq!(law.cdf(868.1e6 - 1.0), 0.0);
        assert!(law.pdf_segments().is_empty());
    }

    proptest! {
        #[test]
        fn activity_factor_is_scale_invariant(
            t in 0.001..10.0f64,
            ratio in 1.0..1000.0f64,
            scale in 0.01..100.0f64,
        ) {
            let mut s = small_scenario();
            s.classes[1].packet_time = t;
            s.classes[1].mean_inter_packet_time = t * ratio;
            let base = time_activity_factor(&s, 1, 0).unwrap();
            s.classes[1].packet_time = t * scale;
            s.classes[1].mean_inter_packet_time = t * ratio * scale;
            let scaled = time_activity_factor(&s, 1, 0).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-12 * base);
        }

        #[test]
        fn activity_factor_is_a_probability(
            t in 0.001..10.0f64,
            ratio in 1.0..1000.0f64,
            channels in 1u32..16,
            codes in 1u32..16,
        ) {
            let mut s = small_scenario();
            s.classes[0].packet_time = t;
            s.classes[0].mean_inter_packet_time = t * ratio;
            s.classes[0].orthogonal_channels = channels;
            s.classes[0].orthogonal_codes = codes;
            let xi = time_activity_factor(&s, 0, 0).unwrap();
            prop_assert!(xi > 0.0 && xi <= 1.0);
        }

        #[test]
        fn uniform_cdf_is_monotone(
            lo in 1.0..100.0f64,
            width in 0.1..100.0f64,
            a in -50.0..250.0f64,
            b in -50.0..250.0f64,
        ) {
            let law = CarrierDistribution::Uniform { f_min: lo, f_max: lo + width };
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(law.cdf(x) <= law.cdf(y));
            prop_assert!((0.0..=1.0).contains(&law.cdf(x)));
        }
    }
}
