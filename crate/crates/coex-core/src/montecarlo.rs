//! Monte-Carlo engine: snapshot success, full session simulation, and joint
//! (MRC) reception, all validated against the closed forms.
//!
//! # Reproducibility
//!
//! Every estimator derives one ChaCha8 stream per trial from the user seed
//! and a per-estimator tag: the base RNG is seeded with
//! `splitmix64(seed ^ TAG)` and the trial index selects the stream. Trials
//! are therefore mutually independent, independent across estimators sharing
//! a seed, and every estimate is bit-identical whether trials run
//! sequentially or data-parallel, in any order.
//!
//! # Sampling model
//!
//! Each snapshot draws, per interfering class, a Poisson number of points
//! uniformly in a disc of radius [`SimConfig::region_radius`] around the
//! receiver (the interferer field thinned by the class' activity factor),
//! i.i.d. unit-mean Rayleigh fading (exponential power) on every link, and
//! evaluates the SINR at the receiver. Far-field truncation at the default
//! radius `max(1000, 10 d)` biases the success probability by less than the
//! Monte-Carlo noise at the trial counts used here; widen the region to
//! check.
//!
//! Spectral overlap enters either through the expected overlap ratio (the
//! same per-class constant the closed forms use; the default) or by drawing
//! each interferer's carrier and applying the realized overlap
//! ([`OverlapWeighting::Sampled`]). The two agree when carriers are
//! deterministic; under random carrier laws the sampled variant captures the
//! overlap fluctuations that the closed forms replace by their mean, and the
//! fractional-moment inequality makes it systematically more optimistic.

use rand::distributions::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;

use crate::analytic::{ack_success_probability, energy_from_mean_attempts};
use crate::error::{Error, Result};
use crate::exec::map_collect;
use crate::joint::JointReceptionConfig;
use crate::model::{
    time_activity_factor, CarrierDistribution, Fading, Provenance, Scenario, TechnologyClass,
};
use crate::overlap::{deterministic_overlap, expected_overlap_ratio, OverlapQuery};

/// How interferer spectral overlap is weighted in snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapWeighting {
    /// Scale every interferer by its class' expected overlap ratio; matches
    /// the averaging the closed forms perform.
    #[default]
    Expected,
    /// Draw each interferer's carrier from its class law and weight by the
    /// realized overlap with the reference receiver's band.
    Sampled,
}

/// Knobs shared by every Monte-Carlo estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Number of independent trials (snapshots or sessions).
    pub trials: u64,
    /// Root seed; equal seeds give bit-identical results.
    pub seed: u64,
    /// Interferer field radius around the receiver (m); `None` selects
    /// `max(1000, 10 * distance)`.
    pub region_radius: Option<f64>,
    /// Run trials in antithetic pairs (common random numbers with
    /// complemented bits) and estimate the error from pair means. Requires
    /// an even trial count.
    pub antithetic: bool,
    /// For session simulation: freeze interferer positions and carriers
    /// across a session's retransmissions instead of redrawing a fresh
    /// snapshot per attempt (fading is always redrawn).
    pub frozen_topology: bool,
    /// Spectral-overlap weighting for interferers.
    pub overlap_weighting: OverlapWeighting,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 42,
            region_radius: None,
            antithetic: false,
            frozen_topology: false,
            overlap_weighting: OverlapWeighting::Expected,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::SimConfig("trials must be at least 1".into()));
        }
        if self.antithetic && self.trials % 2 != 0 {
            return Err(Error::SimConfig(
                "antithetic sampling needs an even trial count".into(),
            ));
        }
        if let Some(r) = self.region_radius {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::SimConfig(
                    "region_radius must be finite and positive".into(),
                ));
            }
        }
        Ok(())
    }

    fn radius_for(&self, d: f64) -> f64 {
        self.region_radius.unwrap_or_else(|| (10.0 * d).max(1000.0))
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    /// Binary-outcome estimate with an Agresti-Coull standard error, which
    /// stays honest near 0 and 1 where the plug-in error collapses to zero.
    pub fn from_binary(successes: u64, trials: u64) -> Self {
        let n = trials as f64;
        let shrunk = (successes as f64 + 2.0) / (n + 4.0);
        Self {
            mean: successes as f64 / n,
            std_error: (shrunk * (1.0 - shrunk) / (n + 4.0)).sqrt(),
            trials,
        }
    }

    /// Sample-mean estimate from real-valued per-trial outcomes.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
            trials: samples.len() as u64,
        }
    }

    /// Estimate from antithetic pairs: the error comes from the variance of
    /// the pair means, which is what the negative within-pair correlation
    /// actually reduces.
    fn from_pairs(outcomes: &[f64]) -> Self {
        let pair_means: Vec<f64> = outcomes
            .chunks_exact(2)
            .map(|p| 0.5 * (p[0] + p[1]))
            .collect();
        let mut est = Self::from_samples(&pair_means);
        est.trials = outcomes.len() as u64;
        est
    }

    fn from_real_outcomes(outcomes: &[f64], antithetic: bool) -> Self {
        if antithetic {
            Self::from_pairs(outcomes)
        } else {
            Self::from_samples(outcomes)
        }
    }

    fn from_binary_outcomes(outcomes: &[f64], antithetic: bool) -> Self {
        if antithetic {
            Self::from_pairs(outcomes)
        } else {
            let successes = outcomes.iter().map(|x| *x as u64).sum();
            Self::from_binary(successes, outcomes.len() as u64)
        }
    }
}

/// SplitMix64 finalizer; decorrelates structured seed/tag inputs.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Bit-complementing RNG wrapper: the antithetic partner of a stream.
///
/// Complementing every output bit maps a uniform u64 to another uniform u64
/// and, through the standard float conversion, `u` to approximately `1 - u`,
/// giving negatively correlated uniforms without touching the sampling code.
struct Antithetic<R: RngCore>(R);

impl<R: RngCore> RngCore for Antithetic<R> {
    fn next_u32(&mut self) -> u32 {
        !self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        !self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest);
        for b in dest.iter_mut() {
            *b = !*b;
        }
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)?;
        for b in dest.iter_mut() {
            *b = !*b;
        }
        Ok(())
    }
}

/// Per-trial RNG: stream `trial` of the tagged base generator. Antithetic
/// mode puts the pair (2k, 2k+1) on stream k with the odd member
/// bit-complemented.
fn trial_rng(seed: u64, tag: u64, trial: u64, antithetic: bool) -> Box<dyn RngCore> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ tag));
    if antithetic {
        rng.set_stream(trial / 2);
        if trial % 2 == 1 {
            return Box::new(Antithetic(rng));
        }
    } else {
        rng.set_stream(trial);
    }
    Box::new(rng)
}

const TAG_SNAPSHOT: u64 = 0x534e_4150;
const TAG_SESSION: u64 = 0x5345_5353;
const TAG_MRC: u64 = 0x4d52_4321;

/// Uniform point in a disc of the given radius centred on the origin.
fn sample_disc_point<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    [r * theta.cos(), r * theta.sin()]
}

/// Poisson point process of the given intensity (points / m^2) on a disc.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, radius: f64, rng: &mut R) -> Vec<[f64; 2]> {
    let mean = intensity * std::f64::consts::PI * radius * radius;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive finite mean").sample(rng) as usize;
    (0..count).map(|_| sample_disc_point(radius, rng)).collect()
}

/// Unit-mean exponential draw (Rayleigh fading power) via inverse CDF.
fn exp_fade<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // gen::<f64>() is uniform on [0, 1); flipping to (0, 1] avoids ln(0).
    -(1.0 - rng.gen::<f64>()).ln()
}

fn pathloss(r_sq: f64, alpha: f64) -> f64 {
    // r^-alpha as (r^2)^(-alpha/2); even alpha uses exact integer powers.
    let half = alpha / 2.0;
    if half.fract() == 0.0 {
        r_sq.powi(half as i32).recip()
    } else {
        r_sq.powf(-half)
    }
}

fn require_rayleigh(s: &Scenario) -> Result<()> {
    match s.channel.fading {
        Fading::RayleighUnitMean => Ok(()),
        Fading::General { .. } => Err(Error::NotRayleighFading),
    }
}

fn check_gamma(gamma_th: f64) -> Result<()> {
    if !gamma_th.is_finite() || gamma_th <= 0.0 {
        return Err(Error::Domain {
            name: "gamma_th",
            value: gamma_th,
            constraint: "must be finite and positive (linear scale)",
        });
    }
    Ok(())
}

/// Overlap weight of one interferer class, resolved per trial.
enum WeightSource {
    /// Expected weighting with a deterministic reference carrier.
    Const(f64),
    /// Expected weighting with a random reference carrier: the expectation
    /// over the interferer carrier, tabulated over the reference carrier's
    /// support and interpolated at the realized reference carrier.
    Table(WeightTable),
    /// Sampled weighting: realize the interferer carrier each time.
    Sampled,
}

struct WeightTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl WeightTable {
    fn build(
        reference: &TechnologyClass,
        interferer: &TechnologyClass,
        nodes: usize,
    ) -> Result<Self> {
        let (lo, hi) = reference.carrier.support();
        let step = if hi > lo {
            (hi - lo) / (nodes - 1) as f64
        } else {
            1.0
        };
        let mut values = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let f_ref = lo + k as f64 * step;
            values.push(expected_overlap_ratio(&OverlapQuery {
                ref_carrier: f_ref,
                ref_bandwidth: reference.bandwidth,
                int_bandwidth: interferer.bandwidth,
                int_carrier: interferer.carrier.clone(),
            })?);
        }
        Ok(Self { lo, step, values })
    }

    fn eval(&self, f_ref: f64) -> f64 {
        let t = (f_ref - self.lo) / self.step;
        let k = (t.floor() as usize).min(self.values.len() - 2);
        let frac = (t - k as f64).clamp(0.0, 1.0);
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }
}

/// Everything fixed across trials for one class of interferers.
struct ClassDraw {
    poisson: Option<Poisson<f64>>,
    tx_power: f64,
    carrier: CarrierDistribution,
    bandwidth: f64,
    weight: WeightSource,
}

impl ClassDraw {
    /// Per-interferer overlap weight for this trial; Sampled mode consumes
    /// one carrier draw from the stream.
    fn weight<R: Rng + ?Sized>(
        &self,
        reference: &TechnologyClass,
        f_ref: f64,
        rng: &mut R,
    ) -> f64 {
        match &self.weight {
            WeightSource::Const(w) => *w,
            WeightSource::Table(t) => t.eval(f_ref),
            WeightSource::Sampled => {
                let f_i = self.carrier.sample(rng);
                deterministic_overlap(f_ref, reference.bandwidth, f_i, self.bandwidth)
                    / reference.bandwidth
            }
        }
    }

    /// Overlap weight given an already-realized interferer carrier (used on
    /// the frozen-topology path, where the carrier persists across attempts).
    fn weight_at(&self, reference: &TechnologyClass, f_ref: f64, f_i: f64) -> f64 {
        match &self.weight {
            WeightSource::Const(w) => *w,
            WeightSource::Table(t) => t.eval(f_ref),
            WeightSource::Sampled => {
                deterministic_overlap(f_ref, reference.bandwidth, f_i, self.bandwidth)
                    / reference.bandwidth
            }
        }
    }
}

fn class_draws(s: &Scenario, j: usize, radius: f64, cfg: &SimConfig) -> Result<Vec<ClassDraw>> {
    let reference = s.class(j)?;
    let ref_carrier_fixed = reference.carrier.point_mass();
    let mut draws = Vec::with_capacity(s.classes.len());
    for (i, class) in s.classes.iter().enumerate() {
        let xi = time_activity_factor(s, i, j)?;
        let mean = xi * class.device_density * std::f64::consts::PI * radius * radius;
        let poisson = if mean > 0.0 {
            Some(Poisson::new(mean).map_err(|_| {
                Error::SimConfig(format!("class {i}: non-finite interferer mean {mean}"))
            })?)
        } else {
            None
        };
        let weight = match cfg.overlap_weighting {
            OverlapWeighting::Sampled => WeightSource::Sampled,
            OverlapWeighting::Expected => match ref_carrier_fixed {
                Some(f_j) => WeightSource::Const(expected_overlap_ratio(&OverlapQuery {
                    ref_carrier: f_j,
                    ref_bandwidth: reference.bandwidth,
                    int_bandwidth: class.bandwidth,
                    int_carrier: class.carrier.clone(),
                })?),
                None => WeightSource::Table(WeightTable::build(reference, class, 1025)?),
            },
        };
        draws.push(ClassDraw {
            poisson,
            tx_power: class.tx_power,
            carrier: class.carrier.clone(),
            bandwidth: class.bandwidth,
            weight,
        });
    }
    Ok(draws)
}

/// One realized interference field seen at the origin: draws counts,
/// positions, carriers and fades, and accumulates received power. Stops as
/// soon as `budget` is exceeded — the verdict is already decided, and
/// per-trial streams make the skipped draws invisible to other trials.
fn draw_interference<R: Rng + ?Sized>(
    draws: &[ClassDraw],
    reference: &TechnologyClass,
    f_ref: f64,
    alpha: f64,
    radius: f64,
    budget: f64,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for draw in draws {
        let Some(poisson) = &draw.poisson else { continue };
        let count = poisson.sample(rng) as usize;
        for _ in 0..count {
            let p = sample_disc_point(radius, rng);
            let r_sq = p[0] * p[0] + p[1] * p[1];
            if r_sq == 0.0 {
                return f64::INFINITY;
            }
            let w = draw.weight(reference, f_ref, rng);
            let fade = exp_fade(rng);
            if w == 0.0 {
                continue;
            }
            total += w * draw.tx_power * fade * pathloss(r_sq, alpha);
            if total > budget {
                return total;
            }
        }
    }
    total
}

/// Pre-resolved quantities shared by all trials of one estimator call.
struct SnapshotPlan {
    draws: Vec<ClassDraw>,
    radius: f64,
    alpha: f64,
    noise: f64,
    signal_power: f64,
    d: f64,
}

fn snapshot_plan(s: &Scenario, j: usize, d: f64, cfg: &SimConfig) -> Result<SnapshotPlan> {
    s.validated()?;
    cfg.validate()?;
    require_rayleigh(s)?;
    if !d.is_finite() || d < 0.0 {
        return Err(Error::Domain {
            name: "d",
            value: d,
            constraint: "must be finite and non-negative",
        });
    }
    let radius = cfg.radius_for(d);
    let reference = s.class(j)?;
    Ok(SnapshotPlan {
        draws: class_draws(s, j, radius, cfg)?,
        radius,
        alpha: s.channel.pathloss_exponent,
        noise: s.channel.noise_density * reference.bandwidth,
        signal_power: reference.tx_power,
        d,
    })
}

/// One snapshot: whether the reference uplink's SINR clears `gamma_th`.
fn snapshot_trial<R: Rng + ?Sized>(
    plan: &SnapshotPlan,
    reference: &TechnologyClass,
    gamma_th: f64,
    rng: &mut R,
) -> bool {
    let f_ref = reference.carrier.sample(rng);
    if plan.d == 0.0 {
        // Zero-distance uplink: unbounded received power dwarfs any finite
        // interference; deciding here avoids inf * 0 pathologies.
        return true;
    }
    let signal = plan.signal_power * exp_fade(rng) * plan.d.powf(-plan.alpha);
    let budget = signal / gamma_th - plan.noise;
    if budget < 0.0 {
        // Even zero interference cannot save this fade draw.
        return false;
    }
    let interference = draw_interference(
        &plan.draws,
        reference,
        f_ref,
        plan.alpha,
        plan.radius,
        budget,
        rng,
    );
    interference <= budget
}

/// Monte-Carlo estimate of the snapshot success probability
/// `P(SINR > gamma_th)` for a class-`j` uplink at distance `d`.
pub fn snapshot_success(
    s: &Scenario,
    j: usize,
    d: f64,
    gamma_th: f64,
    cfg: &SimConfig,
) -> Result<Estimate> {
    check_gamma(gamma_th)?;
    let plan = snapshot_plan(s, j, d, cfg)?;
    let reference = s.class(j)?;
    let outcomes = map_collect(cfg.trials as usize, |t| {
        let mut rng = trial_rng(cfg.seed, TAG_SNAPSHOT, t as u64, cfg.antithetic);
        snapshot_trial(&plan, reference, gamma_th, &mut rng) as u8 as f64
    });
    Ok(Estimate::from_binary_outcomes(&outcomes, cfg.antithetic))
}

/// Joint statistics of one simulated session batch.
///
/// `attempts_*` and `delay_*` expose the three truncation conventions the
/// closed forms support, measured directly on the simulated sessions:
/// `*_all` averages every session (failure tail included), `*_conditional`
/// averages delivered sessions only (NaN with zero trials when nothing was
/// delivered), and `*_truncated` zero-weights failed sessions.
#[derive(Debug, Clone)]
pub struct SessionStats {
    pub trials: u64,
    /// Probability the session delivers (some attempt decodes and its ACK
    /// arrives) within the transmission budget.
    pub session_success: Estimate,
    pub attempts_all: Estimate,
    pub attempts_conditional: Estimate,
    pub attempts_truncated: Estimate,
    pub delay_all: Estimate,
    pub delay_conditional: Estimate,
    pub delay_truncated: Estimate,
    /// Physical energy per report, from the realized attempt counts.
    pub energy_per_report: Estimate,
    /// Battery lifetime implied by the mean energy per report; the error is
    /// propagated by the delta method.
    pub battery_lifetime: Estimate,
    pub provenance: Provenance,
}

/// A session's frozen interference topology: interferer positions (kept as
/// pathloss) and carriers persist across the session's attempts; fading and
/// the reference carrier are redrawn per attempt.
struct FrozenField {
    /// Per interferer: (pathloss, class index, carrier frequency).
    interferers: Vec<(f64, usize, f64)>,
}

impl FrozenField {
    fn draw<R: Rng + ?Sized>(plan: &SnapshotPlan, rng: &mut R) -> Self {
        let mut interferers = Vec::new();
        for (ci, draw) in plan.draws.iter().enumerate() {
            let Some(poisson) = &draw.poisson else { continue };
            let count = poisson.sample(rng) as usize;
            for _ in 0..count {
                let p = sample_disc_point(plan.radius, rng);
                let r_sq = p[0] * p[0] + p[1] * p[1];
                let loss = if r_sq == 0.0 {
                    f64::INFINITY
                } else {
                    pathloss(r_sq, plan.alpha)
                };
                let f_i = draw.carrier.sample(rng);
                interferers.push((loss, ci, f_i));
            }
        }
        Self { interferers }
    }

    fn attempt_decodes<R: Rng + ?Sized>(
        &self,
        plan: &SnapshotPlan,
        reference: &TechnologyClass,
        gamma_th: f64,
        rng: &mut R,
    ) -> bool {
        let f_ref = reference.carrier.sample(rng);
        if plan.d == 0.0 {
            return true;
        }
        let signal = plan.signal_power * exp_fade(rng) * plan.d.powf(-plan.alpha);
        let budget = signal / gamma_th - plan.noise;
        if budget < 0.0 {
            return false;
        }
        let mut total = 0.0;
        for (loss, ci, f_i) in &self.interferers {
            let fade = exp_fade(rng);
            let w = plan.draws[*ci].weight_at(reference, f_ref, *f_i);
            total += w * plan.draws[*ci].tx_power * fade * loss;
            if total > budget {
                return false;
            }
        }
        total <= budget
    }
}

/// Simulate full sessions: up to `max_transmissions` attempts, each decoded
/// against a fresh (or frozen-topology) interference snapshot, each decode
/// acknowledged with the scenario's ACK probability.
///
/// Delay counts transmission attempts plus the retry waits between them up
/// to the first *decoded* attempt — the closed-form convention, where the
/// delay KPI tracks time to first decode while the ACK gates retries,
/// delivery, and energy.
pub fn simulate_session(s: &Scenario, j: usize, d: f64, cfg: &SimConfig) -> Result<SessionStats> {
    let gamma_th = s.sinr_threshold;
    let plan = snapshot_plan(s, j, d, cfg)?;
    let reference = s.class(j)?;
    let p_ack = ack_success_probability(s, j, d)?;
    let max_tx = s.retransmission.max_transmissions.max(1);
    let t_packet = reference.packet_time;
    let t_wait = s.retransmission.retry_wait;

    // Per-trial record: (delivered, attempts used, first decoded attempt).
    let records = map_collect(cfg.trials as usize, |t| {
        let mut rng = trial_rng(cfg.seed, TAG_SESSION, t as u64, cfg.antithetic);
        let frozen = if cfg.frozen_topology {
            Some(FrozenField::draw(&plan, &mut rng))
        } else {
            None
        };
        let mut delivered = false;
        let mut attempts = 0u32;
        let mut first_decode: Option<u32> = None;
        for _ in 0..max_tx {
            attempts += 1;
            let decoded = match &frozen {
                Some(field) => field.attempt_decodes(&plan, reference, gamma_th, &mut rng),
                None => snapshot_trial(&plan, reference, gamma_th, &mut rng),
            };
            if decoded {
                if first_decode.is_none() {
                    first_decode = Some(attempts);
                }
                if rng.gen::<f64>() < p_ack {
                    delivered = true;
                    break;
                }
            }
        }
        (delivered, attempts, first_decode)
    });

    let mut success = Vec::with_capacity(records.len());
    let mut attempts_all = Vec::with_capacity(records.len());
    let mut attempts_trunc = Vec::with_capacity(records.len());
    let mut attempts_cond = Vec::new();
    let mut delay_all = Vec::with_capacity(records.len());
    let mut delay_trunc = Vec::with_capacity(records.len());
    let mut delay_cond = Vec::new();
    let mut energy = Vec::with_capacity(records.len());
    for (delivered, attempts, first_decode) in &records {
        let a = f64::from(*attempts);
        success.push(f64::from(u8::from(*delivered)));
        attempts_all.push(a);
        // Delay to first decode; a session that never decodes contributes
        // its full dwell in the all-sessions average.
        let decode_attempt = f64::from(first_decode.unwrap_or(*attempts));
        let dwell = decode_attempt * t_packet + (decode_attempt - 1.0) * t_wait;
        delay_all.push(dwell);
        if *delivered {
            attempts_cond.push(a);
            attempts_trunc.push(a);
            delay_cond.push(dwell);
            delay_trunc.push(dwell);
        } else {
            attempts_trunc.push(0.0);
            delay_trunc.push(0.0);
        }
        energy.push(energy_from_mean_attempts(
            &s.energy,
            reference.tx_power,
            t_packet,
            t_wait,
            a,
        ));
    }

    let energy_est = Estimate::from_real_outcomes(&energy, cfg.antithetic);
    if energy_est.mean <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let scale = s.energy.battery_capacity * reference.mean_inter_packet_time;
    let lifetime = Estimate {
        mean: scale / energy_est.mean,
        // First-order (delta-method) error propagation through x -> 1/x.
        std_error: scale * energy_est.std_error / (energy_est.mean * energy_est.mean),
        trials: energy_est.trials,
    };

    let cond_or_empty = |v: &[f64]| -> Estimate {
        if v.is_empty() {
            Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                trials: 0,
            }
        } else {
            Estimate::from_samples(v)
        }
    };

    Ok(SessionStats {
        trials: cfg.trials,
        session_success: Estimate::from_binary_outcomes(&success, cfg.antithetic),
        attempts_all: Estimate::from_real_outcomes(&attempts_all, cfg.antithetic),
        attempts_conditional: cond_or_empty(&attempts_cond),
        attempts_truncated: Estimate::from_real_outcomes(&attempts_trunc, cfg.antithetic),
        delay_all: Estimate::from_real_outcomes(&delay_all, cfg.antithetic),
        delay_conditional: cond_or_empty(&delay_cond),
        delay_truncated: Estimate::from_real_outcomes(&delay_trunc, cfg.antithetic),
        energy_per_report: energy_est,
        battery_lifetime: lifetime,
        provenance: Provenance::MonteCarlo,
    })
}

/// How interferer fields relate across the cooperating APs in MRC snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceCorrelation {
    /// One interferer point process seen by every AP — the physical picture
    /// when the APs are close together, and the default.
    #[default]
    Shared,
    /// Each AP sees an independently drawn interferer field; matches the
    /// independence assumption of the convolution bound.
    IndependentPerAp,
}

/// Monte-Carlo estimate of MRC joint-reception success,
/// `P(sum over available APs of SINR_m > gamma_th)`.
///
/// AP availability is drawn per trial as a Bernoulli with the configured
/// probability (the closed form instead scales each branch's SINR
/// deterministically; the two conventions coincide at availabilities of 0
/// and 1). Desired-link and interferer fades are independent across APs,
/// while the interferer *positions* follow `correlation`. All APs observe
/// the device from their own distance but share the origin-centred
/// interferer geometry — the co-located-AP abstraction the convolution
/// bound also uses.
pub fn snapshot_mrc_success(
    s: &Scenario,
    jr: &JointReceptionConfig,
    j: usize,
    gamma_th: f64,
    cfg: &SimConfig,
    correlation: InterferenceCorrelation,
) -> Result<Estimate> {
    check_gamma(gamma_th)?;
    s.validated()?;
    cfg.validate()?;
    jr.validate()?;
    require_rayleigh(s)?;
    let d_max = jr.ap_distances.iter().fold(0.0_f64, |a, b| a.max(*b));
    let radius = cfg.radius_for(d_max);
    let reference = s.class(j)?;
    let draws = class_draws(s, j, radius, cfg)?;
    let alpha = s.channel.pathloss_exponent;
    let noise = s.channel.noise_density * reference.bandwidth;

    let outcomes = map_collect(cfg.trials as usize, |t| {
        let mut rng = trial_rng(cfg.seed, TAG_MRC, t as u64, cfg.antithetic);
        let f_ref = reference.carrier.sample(&mut rng);

        // Availability mask for this trial.
        let available: Vec<bool> = jr
            .availabilities
            .iter()
            .map(|p| rng.gen::<f64>() < *p)
            .collect();

        // Shared mode realizes one field of (effective power, position)
        // pairs up front; per-AP fades are drawn inside the AP loop.
        let shared_field: Option<Vec<(f64, f64)>> = match correlation {
            InterferenceCorrelation::Shared => {
                let mut field = Vec::new();
                for draw in &draws {
                    let Some(poisson) = &draw.poisson else { continue };
                    let count = poisson.sample(&mut rng) as usize;
                    for _ in 0..count {
                        let p = sample_disc_point(radius, &mut rng);
                        let r_sq = p[0] * p[0] + p[1] * p[1];
                        let w = draw.weight(reference, f_ref, &mut rng);
                        field.push((w * draw.tx_power, r_sq));
                    }
                }
                Some(field)
            }
            InterferenceCorrelation::IndependentPerAp => None,
        };

        let mut h = 0.0;
        for (m, d_m) in jr.ap_distances.iter().enumerate() {
            if !available[m] {
                continue;
            }
            let signal = reference.tx_power * exp_fade(&mut rng) * d_m.powf(-alpha);
            let interference = match &shared_field {
                Some(field) => {
                    let mut total = 0.0;
                    for (power_w, r_sq) in field {
                        if *r_sq == 0.0 {
                            total = f64::INFINITY;
                            break;
                        }
                        total += power_w * exp_fade(&mut rng) * pathloss(*r_sq, alpha);
                    }
                    total
                }
                None => draw_interference(
                    &draws,
                    reference,
                    f_ref,
                    alpha,
                    radius,
                    f64::INFINITY,
                    &mut rng,
                ),
            };
            h += signal / (noise + interference);
            if h > gamma_th {
                // Remaining branches can only add; the verdict is decided.
                break;
            }
        }
        f64::from(u8::from(h > gamma_th))
    });
    Ok(Estimate::from_binary_outcomes(&outcomes, cfg.antithetic))
}
