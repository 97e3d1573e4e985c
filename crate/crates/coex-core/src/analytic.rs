//! Closed-form KPI engine.
//!
//! Under Rayleigh (or moment-summarized general) fading, a Poisson field of
//! interferers with thinning by time activity and spectral overlap yields a
//! success probability of the form
//!
//! ```text
//! P_sc(gamma) = exp(-c1 * gamma - c2 * gamma^sigma),   sigma = 2 / alpha
//! ```
//!
//! where the `c1` term is the noise contribution of the reference link at
//! distance `d` and `c2` collects every interferer class's density, activity
//! factor, mean spectral overlap and power ratio, together with the fading
//! fractional moment. All higher-level KPIs -- retransmission counts, delay,
//! energy, battery lifetime -- reduce to evaluations of this curve.
//!
//! The session KPIs support three truncation conventions for the finite
//! attempt budget; see [`TruncationMode`] for the exact sums.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    time_activity_factor, AckModel, ChannelModel, EnergyModel, Fading, KpiResult, Provenance,
    Scenario, TechnologyClass, TruncationMode,
};
use crate::numerics::{adaptive_simpson, gamma, sinc, QuadOpts};
use crate::overlap::{expected_overlap_ratio, OverlapQuery};

/// The two-coefficient SINR survival curve of a single link:
/// `ccdf(x) = exp(-noise_coeff * x - interference_coeff * x^sigma)`.
///
/// Shared by the pointwise success probability, the carrier-averaged success
/// probability and the per-access-point CCDFs of joint reception.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SuccessCurve {
    pub noise_coeff: f64,
    pub interference_coeff: f64,
    pub sigma: f64,
}

impl SuccessCurve {
    /// P(SINR > x); equals 1 at x <= 0.
    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        (-(self.noise_coeff * x + self.interference_coeff * x.powf(self.sigma))).exp()
    }
}

/// The scalar multiplying every interferer term: the fading fractional
/// moment combined with the tail gamma factor, `m_sigma * Gamma(1 - sigma)`.
/// For Rayleigh fading the product collapses to `1 / sinc(sigma)` via the
/// reflection identity; that form is used as the canonical evaluation path.
pub(crate) fn interference_factor(channel: &ChannelModel) -> f64 {
    let sigma = channel.sigma();
    match channel.fading {
        Fading::RayleighUnitMean => 1.0 / sinc(sigma),
        Fading::General { fractional_moment } => fractional_moment * gamma(1.0 - sigma),
    }
}

fn check_distance(d: f64) -> Result<()> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::Domain {
            name: "distance",
            value: d,
            constraint: "must be finite and non-negative",
        });
    }
    Ok(())
}

fn check_threshold(gamma_th: f64) -> Result<()> {
    if !gamma_th.is_finite() || gamma_th <= 0.0 {
        return Err(Error::Domain {
            name: "sinr_threshold",
            value: gamma_th,
            constraint: "must be finite and positive (linear scale)",
        });
    }
    Ok(())
}

/// Resolves the reference carrier for pointwise evaluation: an explicit
/// frequency wins; otherwise the class's law must be a point mass.
fn resolve_carrier(class: &TechnologyClass, carrier: Option<f64>) -> Result<f64> {
    match carrier {
        Some(f) => {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::Domain {
                    name: "carrier",
                    value: f,
                    constraint: "must be finite and positive",
                });
            }
            Ok(f)
        }
        None => class.carrier.point_mass().ok_or(Error::CarrierRequired),
    }
}

/// Builds the SINR survival curve of class `j` at link distance `d` with the
/// reference carrier fixed at `f_j`, using `factor` as the interferer fading
/// scalar.
pub(crate) fn success_curve(
    s: &Scenario,
    j: usize,
    d: f64,
    f_j: f64,
    factor: f64,
) -> Result<SuccessCurve> {
    let class = s.class(j)?;
    let sigma = s.channel.sigma();
    let alpha = s.channel.pathloss_exponent;
    let noise_power = s.channel.noise_density * class.bandwidth;
    let noise_coeff = d.powf(alpha) * noise_power / class.tx_power;
    let mut interference_coeff = 0.0;
    for (i, interferer) in s.classes.iter().enumerate() {
        if interferer.device_density == 0.0 {
            continue;
        }
        let xi = time_activity_factor(s, i, j)?;
        let upsilon = expected_overlap_ratio(&OverlapQuery {
            ref_carrier: f_j,
            ref_bandwidth: class.bandwidth,
            int_bandwidth: interferer.bandwidth,
            int_carrier: interferer.carrier.clone(),
        })?;
        if upsilon == 0.0 {
            continue;
        }
        interference_coeff += xi
            * interferer.device_density
            * PI
            * (upsilon * interferer.tx_power / class.tx_power).powf(sigma)
            * factor
            * d
            * d;
    }
    Ok(SuccessCurve {
        noise_coeff,
        interference_coeff,
        sigma,
    })
}

/// Success probability of one transmission of class `j` at distance `d` and
/// threshold `gamma_th`, with the interferer fading handled through its
/// fractional moment `E[h^sigma] * Gamma(1 - sigma)`. Works for any unit-mean
/// fading law whose moment is known; Rayleigh fading uses
/// `E[h^sigma] = Gamma(1 + sigma)`.
///
/// `carrier` fixes the reference carrier; pass `None` for a point-mass law.
pub fn success_probability_general(
    s: &Scenario,
    j: usize,
    d: f64,
    gamma_th: f64,
    carrier: Option<f64>,
) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    check_threshold(gamma_th)?;
    let f_j = resolve_carrier(s.class(j)?, carrier)?;
    let sigma = s.channel.sigma();
    let moment = match s.channel.fading {
        Fading::RayleighUnitMean => gamma(1.0 + sigma),
        Fading::General { fractional_moment } => fractional_moment,
    };
    let factor = moment * gamma(1.0 - sigma);
    Ok(success_curve(s, j, d, f_j, factor)?.ccdf(gamma_th))
}

/// Success probability under Rayleigh fading in its compact sinc form, where
/// `Gamma(1 + sigma) * Gamma(1 - sigma)` collapses to `1 / sinc(sigma)`.
/// Errors if the scenario's fading is not Rayleigh.
pub fn success_probability_rayleigh(
    s: &Scenario,
    j: usize,
    d: f64,
    gamma_th: f64,
    carrier: Option<f64>,
) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    check_threshold(gamma_th)?;
    if s.channel.fading != Fading::RayleighUnitMean {
        return Err(Error::NotRayleighFading);
    }
    let f_j = resolve_carrier(s.class(j)?, carrier)?;
    let factor = 1.0 / sinc(s.channel.sigma());
    Ok(success_curve(s, j, d, f_j, factor)?.ccdf(gamma_th))
}

/// Success probability averaged over the reference class's own carrier law.
///
/// For a point-mass law this is the pointwise value; otherwise the pointwise
/// success probability is integrated against the carrier density piece by
/// piece with adaptive Simpson quadrature (absolute tolerance 1e-8).
pub fn success_probability_avg(s: &Scenario, j: usize, d: f64, gamma_th: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    check_threshold(gamma_th)?;
    success_probability_avg_unchecked(s, j, d, gamma_th)
}

/// Engine-internal variant without re-validation, for call sites that have
/// already validated the scenario (KPI assembly, acknowledgement model).
pub(crate) fn success_probability_avg_unchecked(
    s: &Scenario,
    j: usize,
    d: f64,
    gamma_th: f64,
) -> Result<f64> {
    let class = s.class(j)?;
    let factor = interference_factor(&s.channel);
    if let Some(f_j) = class.carrier.point_mass() {
        return Ok(success_curve(s, j, d, f_j, factor)?.ccdf(gamma_th));
    }
    let mut total = 0.0;
    for segment in class.carrier.pdf_segments() {
        let mass = segment.density * (segment.hi - segment.lo);
        let opts = QuadOpts {
            // Split the 1e-8 global budget across pieces by their mass.
            abs_tol: 1e-8 * mass.max(1e-3),
            ..QuadOpts::default()
        };
        let integrand = |f: f64| match success_curve(s, j, d, f, factor) {
            Ok(curve) => segment.density * curve.ccdf(gamma_th),
            Err(_) => f64::NAN, // surfaces as a quadrature failure
        };
        total += adaptive_simpson(integrand, segment.lo, segment.hi, &opts)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Probability that the acknowledgement of a successful transmission is
/// received, per the scenario's [`AckModel`].
///
/// For [`AckModel::FromApDensity`] the downlink is treated as a link of the
/// given parameters over the same channel and threshold, interfered by the
/// reference class's *other* access points (density `ap_density`) which
/// transmit downlink traffic with the same parameters; orthogonality within
/// the downlink is not modelled (a colliding AP always counts).
pub fn ack_success_probability(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    ack_success_probability_unchecked(s, j, d)
}

pub(crate) fn ack_success_probability_unchecked(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    match &s.ack_model {
        AckModel::Ideal => Ok(1.0),
        AckModel::FixedProbability(p) => Ok(*p),
        AckModel::FromApDensity(downlink) => {
            let class = s.class(j)?;
            let downlink_class = TechnologyClass {
                name: "ap-downlink".into(),
                technology_id: "ap-downlink".into(),
                tx_power: downlink.tx_power,
                bandwidth: downlink.bandwidth,
                carrier: downlink.carrier.clone(),
                packet_time: downlink.packet_time,
                mean_inter_packet_time: downlink.mean_inter_packet_time,
                device_density: class.ap_density,
                ap_density: 0.0,
                orthogonal_channels: 1,
                orthogonal_codes: 1,
            };
            let synthetic = Scenario {
                classes: vec![downlink_class],
                channel: s.channel,
                energy: s.energy,
                retransmission: s.retransmission,
                sinr_threshold: s.sinr_threshold,
                ack_model: AckModel::Ideal,
            };
            success_probability_avg_unchecked(&synthetic, 0, d, s.sinr_threshold)
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            name,
            value: p,
            constraint: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn check_max_tx(max_tx: u32) -> Result<()> {
    if max_tx == 0 {
        return Err(Error::Domain {
            name: "max_transmissions",
            value: 0.0,
            constraint: "must be at least 1",
        });
    }
    Ok(())
}

/// P(success within `n` attempts) = 1 - (1-q)^n, computed stably.
fn success_within(q: f64, n: f64) -> f64 {
    -f64::exp_m1(n * f64::ln_1p(-q))
}

/// The raw truncated mean attempt count, `sum_{k=1}^{n} k q (1-q)^(k-1)`.
///
/// Realistic budgets evaluate the sum directly (Kahan-compensated; every
/// term is positive, so the result is reference-exact to a couple of ulps).
/// The closed form `(1 - x^n)/q - n x^n` is reserved for astronomically
/// large budgets: it subtracts two ~n-sized quantities whose true difference
/// is ~q n^2 / 2, so as q -> 0 it loses all significant digits (and can even
/// go negative). In that regime, with u = -n ln(1-q), r = -ln(1-q)/q and
/// phi(u) = (1 - e^{-u})/u, the sum equals
///
/// ```text
/// n * [ (phi(u) - e^{-u})  +  (r - 1) * phi(u) ]
/// ```
///
/// and both bracketed pieces have cancellation-free power series used when
/// u is small.
fn truncated_mean_attempts(q: f64, n: f64) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    if n <= 10_000.0 {
        let x = 1.0 - q;
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut xpow = 1.0;
        let mut k = 1.0;
        while k <= n {
            let term = k * q * xpow;
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            xpow *= x;
            k += 1.0;
        }
        return sum.min(n);
    }
    let u = -(n * f64::ln_1p(-q));
    if u >= 1e-3 {
        let s = -f64::exp_m1(-u);
        return (s / q - n * (-u).exp()).clamp(0.0, n);
    }
    // Reaching here needs q < 1e-7, so both series converge to full
    // precision within the retained terms.
    // phi(u) - e^{-u}: the u^k coefficient is (-1)^{k+1} k / (k+1)!.
    let mut bracket = 0.0;
    let mut upow = 1.0;
    let mut factorial = 1.0; // (k+1)!
    for k in 1..=8u32 {
        upow *= u;
        factorial *= f64::from(k + 1);
        let term = f64::from(k) / factorial * upow;
        bracket += if k % 2 == 1 { term } else { -term };
    }
    // r - 1 = q/2 + q^2/3 + q^3/4 + ...
    let mut r_minus_1 = 0.0;
    let mut qpow = 1.0;
    for k in 2..=6u32 {
        qpow *= q;
        r_minus_1 += qpow / f64::from(k);
    }
    let phi = 1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0;
    (n * (bracket + r_minus_1 * phi)).clamp(0.0, n)
}

/// Mean number of transmission attempts per report when each attempt
/// independently succeeds (and stops the session) with probability `q`,
/// under a budget of `max_tx` attempts and the given truncation convention.
pub fn mean_transmissions_from_q(q: f64, max_tx: u32, mode: TruncationMode) -> Result<f64> {
    check_probability("q", q)?;
    check_max_tx(max_tx)?;
    let n = f64::from(max_tx);
    // The clamps only ever absorb last-ulp rounding; the conditional and
    // failure-tail means lie in [1, n] and the truncated mean in [0, n] by
    // construction.
    Ok(match mode {
        TruncationMode::Truncated => truncated_mean_attempts(q, n),
        TruncationMode::Conditional => {
            if q == 0.0 {
                // Limit of the conditional mean as q -> 0: attempts become
                // uniform over 1..=n given the (vanishing) success event.
                0.5 * (n + 1.0)
            } else {
                (truncated_mean_attempts(q, n) / success_within(q, n)).clamp(1.0, n)
            }
        }
        TruncationMode::FailureTail => {
            if q == 0.0 {
                n
            } else {
                // Truncated sum plus n (1-q)^n collapses to (1 - (1-q)^n)/q.
                (success_within(q, n) / q).clamp(1.0, n)
            }
        }
    })
}

/// Expected report delay when each attempt takes `t_packet` on air and
/// consecutive attempts are separated by `t_wait`, the per-attempt decoding
/// probability is `p`, and at most `max_tx` attempts are made.
///
/// Delay counts time to the first successful decode; the acknowledgement
/// path plays no role here (an unacknowledged but decoded report has already
/// been delivered -- the ack channel only drives extra attempts and energy).
pub fn expected_delay_from_p(
    p: f64,
    t_packet: f64,
    t_wait: f64,
    max_tx: u32,
    mode: TruncationMode,
) -> Result<f64> {
    check_probability("p", p)?;
    check_max_tx(max_tx)?;
    for (name, v) in [("t_packet", t_packet), ("t_wait", t_wait)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Domain {
                name,
                value: v,
                constraint: "must be finite and non-negative",
            });
        }
    }
    let n = f64::from(max_tx);
    // sum over k of (k t_packet + (k-1) t_wait) p x^(k-1)
    //   = (t_packet + t_wait) * truncated_mean - t_wait * P(success within n),
    // non-negative by construction; max(0) absorbs last-ulp rounding.
    let base = ((t_packet + t_wait) * truncated_mean_attempts(p, n)
        - t_wait * success_within(p, n))
    .max(0.0);
    Ok(match mode {
        TruncationMode::Truncated => base,
        TruncationMode::Conditional => {
            if p == 0.0 {
                (t_packet + t_wait) * 0.5 * (n + 1.0) - t_wait
            } else {
                base / success_within(p, n)
            }
        }
        TruncationMode::FailureTail => {
            let tail_prob = (n * f64::ln_1p(-p)).exp(); // (1-p)^n
            base + (n * t_packet + (n - 1.0) * t_wait) * tail_prob
        }
    })
}

/// Mean attempts per report of class `j` at distance `d`: the per-attempt
/// stop probability is the decoding success times the acknowledgement
/// success.
pub fn mean_transmissions(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    let p = success_probability_avg_unchecked(s, j, d, s.sinr_threshold)?;
    let p_ack = ack_success_probability_unchecked(s, j, d)?;
    mean_transmissions_from_q(
        p * p_ack,
        s.retransmission.max_transmissions,
        s.retransmission.truncation,
    )
}

/// Expected report delay (s) of class `j` at distance `d`.
pub fn expected_delay(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    let p = success_probability_avg_unchecked(s, j, d, s.sinr_threshold)?;
    expected_delay_from_p(
        p,
        s.class(j)?.packet_time,
        s.retransmission.retry_wait,
        s.retransmission.max_transmissions,
        s.retransmission.truncation,
    )
}

/// Energy drawn per report cycle given the mean attempt count: wake-up, the
/// attempts themselves (circuit plus amplifier drain), inter-attempt waits
/// with their ack listening, and the final ack window.
pub fn energy_from_mean_attempts(
    energy: &EnergyModel,
    tx_power: f64,
    t_packet: f64,
    t_wait: f64,
    mean_attempts: f64,
) -> f64 {
    let tx_drain = (energy.circuit_power + energy.pa_overhead * tx_power) * t_packet;
    let per_gap = energy.circuit_power * t_wait + energy.rx_power * energy.ack_time;
    energy.circuit_power * energy.active_time
        + tx_drain * mean_attempts
        + per_gap * (mean_attempts - 1.0)
        + energy.rx_power * energy.ack_time
}

/// Expected energy per report (J) of class `j` at distance `d`.
pub fn energy_per_report(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    let nbar = mean_transmissions(s, j, d)?;
    Ok(energy_from_mean_attempts(
        &s.energy,
        s.class(j)?.tx_power,
        s.class(j)?.packet_time,
        s.retransmission.retry_wait,
        nbar,
    ))
}

/// Expected battery lifetime (s): the battery sustains
/// `battery_capacity / energy_per_report` reports spaced by the class's mean
/// inter-packet time.
pub fn battery_lifetime(s: &Scenario, j: usize, d: f64) -> Result<f64> {
    s.validated()?;
    check_distance(d)?;
    let energy = energy_per_report(s, j, d)?;
    if energy <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(s.energy.battery_capacity * s.class(j)?.mean_inter_packet_time / energy)
}

/// All analytic KPIs of class `j` at distance `d` in one evaluation of the
/// success curve.
pub fn analytic_kpis(s: &Scenario, j: usize, d: f64) -> Result<KpiResult> {
    s.validated()?;
    check_distance(d)?;
    let class = s.class(j)?;
    let p = success_probability_avg_unchecked(s, j, d, s.sinr_threshold)?;
    let p_ack = ack_success_probability_unchecked(s, j, d)?;
    let policy = &s.retransmission;
    let nbar = mean_transmissions_from_q(p * p_ack, policy.max_transmissions, policy.truncation)?;
    let delay = expected_delay_from_p(
        p,
        class.packet_time,
        policy.retry_wait,
        policy.max_transmissions,
        policy.truncation,
    )?;
    let energy = energy_from_mean_attempts(
        &s.energy,
        class.tx_power,
        class.packet_time,
        policy.retry_wait,
        nbar,
    );
    if energy <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(KpiResult {
        success_probability: p * p_ack,
        mean_transmissions: nbar,
        expected_delay: delay,
        energy_per_report: energy,
        battery_lifetime: s.energy.battery_capacity * class.mean_inter_packet_time / energy,
        provenance: Provenance::Analytic,
        ci: None,
    })
}
