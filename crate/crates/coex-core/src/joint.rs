//! Joint reception across several access points with maximum-ratio
//! combining.
//!
//! When `M` access points at distances `d_1..d_M` hear the same uplink, MRC
//! of the per-AP branches is modelled (as an upper bound) by summing the
//! per-AP SINRs, each weighted by the AP's availability:
//!
//! ```text
//! H = sum_m p_av_m * SINR_m,     success = P(H > gamma_th)
//! ```
//!
//! Treating the branch SINRs as independent -- the bound's assumption; real
//! branches share the interferer field, and the Monte Carlo engine measures
//! that gap -- the distribution of `H` is the convolution of the per-branch
//! laws. Each branch law comes from the closed-form survival curve, scaled by
//! `p_av` (an availability of 0.5 halves the effective SINR contribution;
//! zero-availability branches are unit point masses at 0 and are skipped).
//!
//! Note the deliberate asymmetry with [`crate::montecarlo::snapshot_mrc_success`]:
//! the closed form scales each branch deterministically by `p_av`, while the
//! simulator draws Bernoulli availability per trial. The two coincide at
//! `p_av` of 0 or 1 (the usual configurations); for fractional availability
//! they model different physical stories and are both exposed on purpose.
//!
//! # Discretization
//!
//! Branch laws are binned on a regular SINR grid of `grid_points` centers
//! `0, dx, 2 dx, ..., grid_max` with exact bin masses (CCDF differences at
//! bin edges), convolved by FFT, and the success probability is read off as
//! one minus the mass at or below the threshold. Mass beyond `grid_max` is
//! never lost: it simply stays out of the convolved below-threshold sum,
//! which is exact because `grid_max >= 2 * gamma_th` guarantees any
//! off-grid branch already clears the threshold on its own. The scheme
//! converges at first order in `dx`; the default 2^14 points keep the error
//! near 1e-4 for the scenarios in the test suite.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::analytic::{interference_factor, success_curve, SuccessCurve};
use crate::error::{Error, Result};
use crate::model::Scenario;

/// Geometry and tuning for joint reception.
#[derive(Debug, Clone, PartialEq)]
pub struct JointReceptionConfig {
    /// Distances from the device to each cooperating AP (m).
    pub ap_distances: Vec<f64>,
    /// Per-AP availability weights in [0, 1].
    pub availabilities: Vec<f64>,
    /// Number of grid points for the convolution (>= 1024).
    pub grid_points: usize,
    /// Upper edge of the SINR grid (linear). `None` picks an upper edge by
    /// doubling from `2 * gamma_th` until every branch's off-grid tail is
    /// below 1e-6, capped at `64 * gamma_th`.
    pub grid_max: Option<f64>,
}

impl JointReceptionConfig {
    /// Config with unit availabilities and default grid tuning.
    pub fn new(ap_distances: Vec<f64>) -> Self {
        let availabilities = vec![1.0; ap_distances.len()];
        Self {
            ap_distances,
            availabilities,
            grid_points: 1 << 14,
            grid_max: None,
        }
    }

    /// Number of cooperating APs.
    pub fn ap_count(&self) -> usize {
        self.ap_distances.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ap_distances.is_empty() {
            return Err(Error::JointConfig("at least one AP is required".into()));
        }
        if self.ap_distances.len() != self.availabilities.len() {
            return Err(Error::JointConfig(format!(
                "{} distances but {} availabilities",
                self.ap_distances.len(),
                self.availabilities.len()
            )));
        }
        if self
            .ap_distances
            .iter()
            .any(|d| !d.is_finite() || *d <= 0.0)
        {
            return Err(Error::JointConfig(
                "AP distances must be finite and positive".into(),
            ));
        }
        if self
            .availabilities
            .iter()
            .any(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::JointConfig(
                "availabilities must lie in [0, 1]".into(),
            ));
        }
        if self.grid_points < 1 << 10 {
            return Err(Error::JointConfig(format!(
                "grid_points = {} is below the minimum of 1024",
                self.grid_points
            )));
        }
        if let Some(gm) = self.grid_max {
            if !gm.is_finite() || gm <= 0.0 {
                return Err(Error::JointConfig(
                    "grid_max must be finite and positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// CCDF of one AP's availability-weighted SINR contribution,
/// `P(p_av * SINR_m > x)`, with the reference carrier fixed.
///
/// Evaluates the single-link survival curve at the scaled threshold
/// `x / p_av`; `x = 0` returns 1, and a zero availability makes the
/// contribution a point mass at zero (CCDF 0 for any positive `x`).
pub fn per_ap_sinr_ccdf(
    s: &Scenario,
    j: usize,
    d_m: f64,
    p_av: f64,
    x: f64,
    carrier: Option<f64>,
) -> Result<f64> {
    s.validated()?;
    if !d_m.is_finite() || d_m <= 0.0 {
        return Err(Error::Domain {
            name: "d_m",
            value: d_m,
            constraint: "must be finite and positive",
        });
    }
    if !p_av.is_finite() || !(0.0..=1.0).contains(&p_av) {
        return Err(Error::Domain {
            name: "p_av",
            value: p_av,
            constraint: "must lie in [0, 1]",
        });
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain {
            name: "x",
            value: x,
            constraint: "must be finite and non-negative",
        });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if p_av == 0.0 {
        return Ok(0.0);
    }
    let f_j = match carrier {
        Some(f) => f,
        None => s
            .class(j)?
            .carrier
            .point_mass()
            .ok_or(Error::CarrierRequired)?,
    };
    let factor = interference_factor(&s.channel);
    Ok(success_curve(s, j, d_m, f_j, factor)?.ccdf(x / p_av))
}

/// One FFT plan pair reused across all pairwise convolutions of a call.
struct ConvolutionKernel {
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    size: usize,
}

impl ConvolutionKernel {
    fn new(grid_points: usize) -> Self {
        // Pairwise linear convolution of two length-G vectors needs at least
        // 2G - 1 room to avoid circular wrap-around into the retained head.
        let size = (2 * grid_points).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            fft: planner.plan_fft_forward(size),
            ifft: planner.plan_fft_inverse(size),
            size,
        }
    }

    /// First `a.len()` coefficients of the linear convolution `a * b`.
    fn convolve_trunc(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut fa: Vec<Complex<f64>> = (0..self.size)
            .map(|k| Complex::new(a.get(k).copied().unwrap_or(0.0), 0.0))
            .collect();
        let mut fb: Vec<Complex<f64>> = (0..self.size)
            .map(|k| Complex::new(b.get(k).copied().unwrap_or(0.0), 0.0))
            .collect();
        self.fft.process(&mut fa);
        self.fft.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(fb.iter()) {
            *x *= *y;
        }
        self.ifft.process(&mut fa);
        let scale = 1.0 / self.size as f64;
        // Probability masses cannot be negative; clamp FFT roundoff noise.
        (0..n).map(|k| (fa[k].re * scale).max(0.0)).collect()
    }
}

/// Exact bin masses of one branch on the grid `0, dx, ..., (g-1) dx`.
///
/// Bin k covers `((k - 1/2) dx, (k + 1/2) dx]`; masses are CCDF differences,
/// so they telescope and the off-grid tail is exactly
/// `ccdf((g - 1/2) dx)` -- it is intentionally left out of the vector (see
/// the module docs on overflow accounting).
fn branch_masses(curve: &SuccessCurve, p_av: f64, dx: f64, grid_points: usize) -> Vec<f64> {
    let ccdf = |x: f64| curve.ccdf(x / p_av);
    let mut masses = Vec::with_capacity(grid_points);
    masses.push(1.0 - ccdf(0.5 * dx));
    for k in 1..grid_points {
        let lo = (k as f64 - 0.5) * dx;
        let hi = (k as f64 + 0.5) * dx;
        masses.push((ccdf(lo) - ccdf(hi)).max(0.0));
    }
    masses
}

fn default_grid_max(curves: &[(SuccessCurve, f64)], gamma_th: f64) -> f64 {
    let cap = 64.0 * gamma_th;
    let mut upper = 2.0 * gamma_th;
    while upper < cap {
        let worst_tail = curves
            .iter()
            .map(|(curve, p_av)| curve.ccdf(upper / p_av))
            .fold(0.0, f64::max);
        if worst_tail < 1e-6 {
            break;
        }
        upper *= 2.0;
    }
    upper.min(cap)
}

/// MRC success probability at a fixed reference carrier.
fn mrc_at_carrier(
    s: &Scenario,
    cfg: &JointReceptionConfig,
    j: usize,
    gamma_th: f64,
    f_j: f64,
) -> Result<f64> {
    let factor = interference_factor(&s.channel);
    let mut curves: Vec<(SuccessCurve, f64)> = Vec::with_capacity(cfg.ap_count());
    for (d_m, p_av) in cfg.ap_distances.iter().zip(cfg.availabilities.iter()) {
        if *p_av == 0.0 {
            continue; // unit point mass at 0: the convolution identity
        }
        curves.push((success_curve(s, j, *d_m, f_j, factor)?, *p_av));
    }
    if curves.is_empty() {
        // Every AP unavailable: H = 0 < gamma_th surely.
        return Ok(0.0);
    }
    let grid_max = match cfg.grid_max {
        Some(gm) => {
            if gm <= gamma_th {
                return Err(Error::GridMaxTooSmall {
                    grid_max: gm,
                    threshold: gamma_th,
                });
            }
            gm.max(2.0 * gamma_th)
        }
        None => default_grid_max(&curves, gamma_th),
    };
    let g = cfg.grid_points;
    let dx = grid_max / (g - 1) as f64;

    let kernel = ConvolutionKernel::new(g);
    let mut dist = branch_masses(&curves[0].0, curves[0].1, dx, g);
    for (curve, p_av) in curves.iter().skip(1) {
        let masses = branch_masses(curve, *p_av, dx, g);
        dist = kernel.convolve_trunc(&dist, &masses);
    }

    // P(H <= gamma_th): bins whose center is at or below the threshold. All
    // truncated-away convolution terms sit above grid_max >= 2 gamma_th and
    // therefore count toward success automatically.
    let k_max = (gamma_th / dx).floor() as usize;
    let below: f64 = dist.iter().take(k_max.min(g - 1) + 1).sum();
    Ok((1.0 - below).clamp(0.0, 1.0))
}

/// Success probability of joint reception by the configured APs with
/// maximum-ratio combining, `P(sum_m p_av_m SINR_m > gamma_th)`, under the
/// independent-branch convolution bound.
///
/// A random reference carrier law is averaged by fixed-panel Simpson
/// quadrature over the law's density pieces (the integrand is one full
/// convolution per node, so the adaptive scheme would be needlessly
/// expensive; 32 panels per piece keeps the quadrature error far below the
/// grid discretization error).
pub fn mrc_success_probability(
    s: &Scenario,
    cfg: &JointReceptionConfig,
    j: usize,
    gamma_th: f64,
) -> Result<f64> {
    s.validated()?;
    cfg.validate()?;
    if !gamma_th.is_finite() || gamma_th <= 0.0 {
        return Err(Error::Domain {
            name: "gamma_th",
            value: gamma_th,
            constraint: "must be finite and positive (linear scale)",
        });
    }
    let class = s.class(j)?;
    if let Some(f_j) = class.carrier.point_mass() {
        return mrc_at_carrier(s, cfg, j, gamma_th, f_j);
    }
    let mut total = 0.0;
    for segment in class.carrier.pdf_segments() {
        let panels = 32;
        let h = (segment.hi - segment.lo) / panels as f64;
        // Composite Simpson over the segment.
        let mut acc = 0.0;
        for p in 0..panels {
            let a = segment.lo + p as f64 * h;
            let m = a + 0.5 * h;
            let b = a + h;
            let fa = mrc_at_carrier(s, cfg, j, gamma_th, a)?;
            let fm = mrc_at_carrier(s, cfg, j, gamma_th, m)?;
            let fb = mrc_at_carrier(s, cfg, j, gamma_th, b)?;
            acc += h / 6.0 * (fa + 4.0 * fm + fb);
        }
        total += segment.density * acc;
    }
    Ok(total.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::success_probability_avg;
    use crate::model::{CarrierDistribution, Fading};
    use crate::profiles::reference_scenario;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn three_ap_config(d: f64) -> JointReceptionConfig {
        JointReceptionConfig::new(vec![d, 1.5 * d, 2.0 * d])
    }

    /// Scenario with no interferers and no fading complications beyond
    /// Rayleigh: branch SINRs are independent exponentials with known rates,
    /// so the MRC distribution has a hypoexponential closed form.
    fn noise_only_scenario() -> Scenario {
        let mut s = reference_scenario();
        s.classes.truncate(1);
        s.classes[0].device_density = 0.0;
        s
    }

    #[test]
    fn config_validation() {
        let mut cfg = three_ap_config(50.0);
        assert!(cfg.validate().is_ok());
        cfg.availabilities.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = three_ap_config(50.0);
        cfg.grid_points = 512;
        assert!(cfg.validate().is_err());
        let mut cfg = three_ap_config(50.0);
        cfg.availabilities[1] = 1.5;
        assert!(cfg.validate().is_err());
        let cfg = JointReceptionConfig::new(vec![]);
        assert!(cfg.validate().is_err());
        let mut cfg = three_ap_config(50.0);
        cfg.grid_max = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn per_ap_ccdf_matches_single_link_at_unit_availability() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        for d in [20.0, 60.0, 150.0] {
            let ccdf = per_ap_sinr_ccdf(&s, 0, d, 1.0, g, None).unwrap();
            let direct = success_probability_avg(&s, 0, d, g).unwrap();
            assert_relative_eq!(ccdf, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn per_ap_ccdf_availability_scaling() {
        let s = reference_scenario();
        let x = s.sinr_threshold;
        // Half availability halves the effective SINR.
        let half = per_ap_sinr_ccdf(&s, 0, 60.0, 0.5, x, None).unwrap();
        let unit_at_double = per_ap_sinr_ccdf(&s, 0, 60.0, 1.0, 2.0 * x, None).unwrap();
        assert_relative_eq!(half, unit_at_double, max_relative = 1e-12);
        // Degenerate cases.
        assert_eq!(per_ap_sinr_ccdf(&s, 0, 60.0, 0.0, x, None).unwrap(), 0.0);
        assert_eq!(per_ap_sinr_ccdf(&s, 0, 60.0, 0.0, 0.0, None).unwrap(), 1.0);
        assert_eq!(per_ap_sinr_ccdf(&s, 0, 60.0, 1.0, 0.0, None).unwrap(), 1.0);
        assert!(per_ap_sinr_ccdf(&s, 0, 60.0, 1.2, x, None).is_err());
        assert!(per_ap_sinr_ccdf(&s, 0, -3.0, 1.0, x, None).is_err());
    }

    /// Independently computed by high-resolution numerical convolution
    /// (2^20-point grid) of the three branch laws for the reference scenario
    /// with APs at (d, 1.5d, 2d).
    #[test]
    fn mrc_reference_values() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        for (d, expected) in [
            (30.0, 0.9593804025492326),
            (60.0, 0.501233859477074),
            (100.0, 0.06676976666742251),
        ] {
            let got = mrc_success_probability(&s, &three_ap_config(d), 0, g).unwrap();
            assert!(
                (got - expected).abs() <= 3e-3,
                "d = {d}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn single_ap_reduces_to_closed_form() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        for d in [30.0, 60.0, 120.0] {
            let cfg = JointReceptionConfig::new(vec![d]);
            let joint = mrc_success_probability(&s, &cfg, 0, g).unwrap();
            let single = success_probability_avg(&s, 0, d, g).unwrap();
            assert!(
                (joint - single).abs() <= 2e-3,
                "d = {d}: joint {joint} vs single {single}"
            );
        }
    }

    #[test]
    fn convergence_is_at_least_first_order() {
        // The per-threshold error oscillates with the grid alignment of the
        // threshold, so measure the mean error over several thresholds: a
        // 16x grid refinement must cut it by far more than 2x for a
        // first-order scheme.
        let s = reference_scenario();
        let g = s.sinr_threshold;
        let thresholds = [0.6 * g, 0.8 * g, g, 1.3 * g, 1.7 * g];
        let mean_err = |exp: u32| -> f64 {
            let mut cfg = JointReceptionConfig::new(vec![60.0]);
            cfg.grid_points = 1usize << exp;
            thresholds
                .iter()
                .map(|&t| {
                    let exact = success_probability_avg(&s, 0, 60.0, t).unwrap();
                    let joint = mrc_success_probability(&s, &cfg, 0, t).unwrap();
                    (joint - exact).abs()
                })
                .sum::<f64>()
                / thresholds.len() as f64
        };
        let coarse = mean_err(11);
        let fine = mean_err(15);
        assert!(
            fine <= coarse / 2.0 + 1e-6,
            "16x refinement: coarse err {coarse}, fine err {fine}"
        );
        assert!(fine <= 5e-4, "fine-grid error too large: {fine}");
    }

    #[test]
    fn hypoexponential_no_interference_reference_value() {
        // Distances far enough that noise dominates: each branch SINR is
        // exponential with rate gamma_noise = d^alpha N / P. The MRC sum's
        // survival probability at the threshold has a hypoexponential closed
        // form, evaluated independently to high precision.
        let s = noise_only_scenario();
        let g = s.sinr_threshold;
        let cfg = JointReceptionConfig::new(vec![3000.0, 4500.0, 6000.0]);
        let got = mrc_success_probability(&s, &cfg, 0, g).unwrap();
        assert!(
            (got - 0.58858480364204694).abs() <= 2e-3,
            "hypoexponential reference: got {got}"
        );
        // And the single-AP branch agrees with the plain exponential.
        let single = success_probability_avg(&s, 0, 3000.0, g).unwrap();
        assert_relative_eq!(single, 0.44742008525143322, max_relative = 1e-10);
    }

    #[test]
    fn explicit_grid_max_applies_and_validates() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        let mut cfg = three_ap_config(60.0);
        cfg.grid_max = Some(0.5 * g);
        assert!(matches!(
            mrc_success_probability(&s, &cfg, 0, g),
            Err(Error::GridMaxTooSmall { .. })
        ));
        cfg.grid_max = Some(40.0 * g);
        let explicit = mrc_success_probability(&s, &cfg, 0, g).unwrap();
        let auto = mrc_success_probability(&s, &three_ap_config(60.0), 0, g).unwrap();
        assert!(
            (explicit - auto).abs() <= 5e-3,
            "explicit {explicit} vs auto {auto}"
        );
    }

    #[test]
    fn zero_availability_aps_are_inert() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        let mut cfg = three_ap_config(60.0);
        cfg.availabilities = vec![1.0, 0.0, 0.0];
        let masked = mrc_success_probability(&s, &cfg, 0, g).unwrap();
        let single = mrc_success_probability(&s, &JointReceptionConfig::new(vec![60.0]), 0, g)
            .unwrap();
        assert_relative_eq!(masked, single, max_relative = 1e-12);

        let mut all_off = three_ap_config(60.0);
        all_off.availabilities = vec![0.0, 0.0, 0.0];
        assert_eq!(mrc_success_probability(&s, &all_off, 0, g).unwrap(), 0.0);
    }

    #[test]
    fn random_reference_carrier_is_averaged() {
        // Make the reference class carrier random; the MRC result must land
        // between the fixed-carrier extremes over the support.
        let mut s = reference_scenario();
        s.classes[0].carrier = CarrierDistribution::Uniform {
            f_min: 868.0e6,
            f_max: 868.2e6,
        };
        let g = s.sinr_threshold;
        let mut cfg = JointReceptionConfig::new(vec![60.0, 90.0]);
        cfg.grid_points = 1 << 11; // keep the averaged run cheap
        let avg = mrc_success_probability(&s, &cfg, 0, g).unwrap();
        let lo = mrc_at_carrier(&s, &cfg, 0, g, 868.0e6).unwrap();
        let mid = mrc_at_carrier(&s, &cfg, 0, g, 868.1e6).unwrap();
        let hi = mrc_at_carrier(&s, &cfg, 0, g, 868.2e6).unwrap();
        let min = lo.min(mid).min(hi);
        let max = lo.max(mid).max(hi);
        assert!(
            (min - 1e-9..=max + 1e-9).contains(&avg),
            "avg {avg} outside [{min}, {max}]"
        );
    }

    #[test]
    fn mrc_dominates_single_ap() {
        let s = reference_scenario();
        let g = s.sinr_threshold;
        for d in [15.0, 40.0, 80.0, 150.0, 300.0] {
            let joint = mrc_success_probability(&s, &three_ap_config(d), 0, g).unwrap();
            let single = success_probability_avg(&s, 0, d, g).unwrap();
            assert!(
                joint + 2e-3 >= single,
                "d = {d}: MRC {joint} must dominate single-AP {single}"
            );
        }
    }

    #[test]
    fn general_fading_moment_is_honored() {
        // The convolution path must dispatch through the same fading factor
        // as the single-link engine.
        let mut s = reference_scenario();
        s.channel.fading = Fading::General {
            fractional_moment: 1.1,
        };
        let g = s.sinr_threshold;
        let cfg = JointReceptionConfig::new(vec![60.0]);
        let joint = mrc_success_probability(&s, &cfg, 0, g).unwrap();
        let single = success_probability_avg(&s, 0, 60.0, g).unwrap();
        assert!((joint - single).abs() <= 2e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn adding_an_ap_never_hurts(
            d in 20.0..200.0f64,
            extra in 1.0..3.0f64,
        ) {
            let s = reference_scenario();
            let g = s.sinr_threshold;
            let two = JointReceptionConfig::new(vec![d, 1.5 * d]);
            let three = JointReceptionConfig::new(vec![d, 1.5 * d, extra * d]);
            let p2 = mrc_success_probability(&s, &two, 0, g).unwrap();
            let p3 = mrc_success_probability(&s, &three, 0, g).unwrap();
            // Allow the grid-resolution error bound.
            prop_assert!(p3 + 2e-3 >= p2, "2 APs: {p2}, 3 APs: {p3}");
        }

        #[test]
        fn mrc_is_a_probability_and_decreases_with_distance(
            d in 10.0..250.0f64,
        ) {
            let s = reference_scenario();
            let g = s.sinr_threshold;
            let near = mrc_success_probability(&s, &three_ap_config(d), 0, g).unwrap();
            let far = mrc_success_probability(&s, &three_ap_config(d * 1.5), 0, g).unwrap();
            prop_assert!((0.0..=1.0).contains(&near));
            prop_assert!(far <= near + 2e-3);
        }
    }
}
