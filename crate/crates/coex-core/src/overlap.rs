//! Spectral overlap between a reference transmission and interferers.
//!
//! An interferer contributes only the fraction of its power that falls into
//! the reference receiver's passband. With both spectra modelled as ideal
//! rectangles, the overlapped bandwidth between a reference at carrier `f1`
//! with bandwidth `w1` and an interferer at `f2` with `w2` is
//!
//! ```text
//! V = max(0, min(f1 + w1/2, f2 + w2/2) - max(f1 - w1/2, f2 - w2/2))
//! ```
//!
//! and the *overlap ratio* seen by the reference is `V / w1`. When the
//! interferer's carrier is random, `V` is a random variable; this module
//! provides its CDF, its mean ratio (by quadrature over the carrier law), and
//! the well-known closed form for a uniform carrier law that is wide enough
//! to slide the interferer completely across the reference channel.

use crate::error::{Error, Result};
use crate::model::CarrierDistribution;
use crate::numerics::{adaptive_simpson, QuadOpts};

/// Overlapped bandwidth (Hz) between two fixed rectangular spectra.
pub fn deterministic_overlap(f1: f64, w1: f64, f2: f64, w2: f64) -> f64 {
    let lo = (f1 - 0.5 * w1).max(f2 - 0.5 * w2);
    let hi = (f1 + 0.5 * w1).min(f2 + 0.5 * w2);
    (hi - lo).max(0.0)
}

/// A reference receiver paired with one interferer class's carrier law.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapQuery {
    /// Reference carrier frequency (Hz).
    pub ref_carrier: f64,
    /// Reference bandwidth (Hz).
    pub ref_bandwidth: f64,
    /// Interferer bandwidth (Hz).
    pub int_bandwidth: f64,
    /// Interferer carrier law.
    pub int_carrier: CarrierDistribution,
}

impl OverlapQuery {
    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("ref_carrier", self.ref_carrier),
            ("ref_bandwidth", self.ref_bandwidth),
            ("int_bandwidth", self.int_bandwidth),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain {
                    name: match name {
                        "ref_carrier" => "ref_carrier",
                        "ref_bandwidth" => "ref_bandwidth",
                        _ => "int_bandwidth",
                    },
                    value: v,
                    constraint: "must be finite and positive",
                });
            }
        }
        Ok(())
    }

    /// Largest possible overlap: both spectra cannot share more than the
    /// narrower bandwidth.
    pub fn max_overlap(&self) -> f64 {
        self.ref_bandwidth.min(self.int_bandwidth)
    }
}

/// CDF of the overlapped bandwidth, `P(V <= x)` for `x` in
/// `[0, min(w1, w2)]`.
///
/// The overlap drops below `x` exactly when the interferer carrier leaves the
/// window `(f1 - (w1+w2)/2 + x, f1 + (w1+w2)/2 - x)`, so for a continuous
/// carrier law with CDF `G`:
///
/// ```text
/// G_V(x) = 1 - G(f1 + (w1+w2)/2 - x) + G(f1 - (w1+w2)/2 + x)
/// ```
///
/// A point-mass law is handled as the deterministic indicator instead, since
/// the expression above is ambiguous exactly on the atom.
pub fn overlap_cdf(query: &OverlapQuery, x: f64) -> Result<f64> {
    query.check()?;
    let max = query.max_overlap();
    if !x.is_finite() || x < 0.0 || x > max {
        return Err(Error::Domain {
            name: "x",
            value: x,
            constraint: "overlap CDF argument must lie in [0, min(w1, w2)]",
        });
    }
    if let Some(f2) = query.int_carrier.point_mass() {
        let v = deterministic_overlap(query.ref_carrier, query.ref_bandwidth, f2, query.int_bandwidth);
        return Ok(if v <= x { 1.0 } else { 0.0 });
    }
    let half_span = 0.5 * (query.ref_bandwidth + query.int_bandwidth);
    let g = |f: f64| query.int_carrier.cdf(f);
    Ok(1.0 - g(query.ref_carrier + half_span - x) + g(query.ref_carrier - half_span + x))
}

/// Mean overlap ratio `E[V] / w1`, integrating the overlap survival function
/// over the interferer carrier law with adaptive quadrature (absolute
/// tolerance 1e-9 on the ratio).
pub fn expected_overlap_ratio(query: &OverlapQuery) -> Result<f64> {
    query.check()?;
    if let Some(f2) = query.int_carrier.point_mass() {
        let v = deterministic_overlap(query.ref_carrier, query.ref_bandwidth, f2, query.int_bandwidth);
        return Ok(v / query.ref_bandwidth);
    }
    let max = query.max_overlap();
    let half_span = 0.5 * (query.ref_bandwidth + query.int_bandwidth);
    // E[V] = integral over [0, max] of P(V > x) dx; the survival function is
    // a difference of carrier-CDF evaluations, piecewise linear for the laws
    // supported here, so Simpson converges quickly between kinks.
    let survival = |x: f64| {
        query.int_carrier.cdf(query.ref_carrier + half_span - x)
            - query.int_carrier.cdf(query.ref_carrier - half_span + x)
    };
    let opts = QuadOpts {
        abs_tol: 1e-9 * query.ref_bandwidth,
        ..QuadOpts::default()
    };
    let mean_overlap = adaptive_simpson(survival, 0.0, max, &opts)?;
    // Quadrature roundoff can leave a tiny negative or above-one residue.
    Ok((mean_overlap / query.ref_bandwidth).clamp(0.0, 1.0))
}

/// Closed-form mean overlap ratio for a uniform interferer carrier law,
/// `w2 / (f_max - f_min)`.
///
/// Valid only while the carrier support extends beyond the full-overlap
/// window on both sides (`f_max > f1 + (w1+w2)/2` and
/// `f_min < f1 - (w1+w2)/2`), i.e. the interferer can slide completely past
/// the reference channel in either direction. Outside that regime the
/// expression is wrong -- it can even exceed one -- so this returns an error
/// instead; use [`expected_overlap_ratio`] there.
pub fn uniform_overlap_ratio(query: &OverlapQuery) -> Result<f64> {
    query.check()?;
    let CarrierDistribution::Uniform { f_min, f_max } = query.int_carrier else {
        return Err(Error::NotUniformLaw);
    };
    let half_span = 0.5 * (query.ref_bandwidth + query.int_bandwidth);
    let zone_lo = query.ref_carrier - half_span;
    let zone_hi = query.ref_carrier + half_span;
    if f_max <= zone_hi || f_min >= zone_lo {
        return Err(Error::OverlapPrecondition {
            f_min,
            f_max,
            zone_lo,
            zone_hi,
        });
    }
    Ok(query.int_bandwidth / (f_max - f_min))
}
