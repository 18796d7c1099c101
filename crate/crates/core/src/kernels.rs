//! Heat kernels on Euclidean space and on Euclidean cones.
//!
//! Two-dimensional cones use the classical angular expansion
//! `h = (2θt)^{-1} e^{-(r²+r'²)/4t} Σ_k ε_k I_{2πk/θ}(rr'/2t) cos(2πkΔφ/θ)`,
//! summed in exponentially scaled form. For radial data on any `N`-cone the
//! Bessel-process kernel is enough.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spaces::{ConePoint, ConeSpace, SpaceDescriptor, Space};
use crate::special::{gamma, scaled_any_order};

/// Relative size of the certified tail at which the angular series stops.
pub const SERIES_TOL: f64 = 1e-14;
const MAX_SERIES_TERMS: usize = 200_000;
/// Below this Bessel argument the radial kernel uses its two-term expansion.
const SMALL_Z: f64 = 1e-6;
/// Exponent beyond which kernel entries are zero in f64.
const NEGLIGIBLE_EXPONENT: f64 = 745.0;

/// A kernel value together with how the series producing it was truncated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub value: f64,
    pub space: SpaceDescriptor,
    pub x: ConePoint,
    pub y: ConePoint,
    pub t: f64,
    pub series_terms_used: usize,
    pub truncation_error_bound: f64,
    pub converged: bool,
}

/// `(4πt)^{-n/2} e^{-d²/4t}`.
pub fn euclidean_kernel(n: u32, d: f64, t: f64) -> f64 {
    (4.0 * PI * t).powf(-0.5 * n as f64) * (-d * d / (4.0 * t)).exp()
}

/// Heat kernel between the tip and a point at distance `r`.
pub fn tip_kernel(cone: &ConeSpace, r: f64, s: f64) -> f64 {
    (4.0 * PI * s).powf(-0.5 * cone.dim()) * (-r * r / (4.0 * s)).exp() / cone.avr()
}

/// Largest value of the heat kernel at time `t`, attained on the diagonal
/// at the tip.
pub fn kernel_supremum(cone: &ConeSpace, t: f64) -> f64 {
    tip_kernel(cone, 0.0, t)
}

/// Kernel of the Bessel process of dimension `N`, with respect to
/// `r'^{N-1} dr'`. The cone kernel averaged over the cross-section is this
/// divided by `sigma`.
pub fn radial_kernel(dim: f64, r: f64, rp: f64, t: f64) -> Result<f64> {
    if !(dim > 1.0 && dim.is_finite()) {
        return Err(invalid(format!("radial kernel needs N > 1, got {dim}")));
    }
    if !(r >= 0.0 && rp >= 0.0 && t > 0.0) || !(r.is_finite() && rp.is_finite() && t.is_finite()) {
        return Err(invalid("radial kernel needs r, r' >= 0 and t > 0"));
    }
    let gap = (r - rp) * (r - rp) / (4.0 * t);
    if gap > NEGLIGIBLE_EXPONENT {
        return Ok(0.0);
    }
    let nu = 0.5 * dim - 1.0;
    let z = r * rp / (2.0 * t);
    if z < SMALL_Z {
        let lead = 2.0 * (4.0 * t).powf(-0.5 * dim) / gamma(0.5 * dim);
        return Ok(lead * (-(r * r + rp * rp) / (4.0 * t)).exp() * (1.0 + z * z / (4.0 * (nu + 1.0))));
    }
    let bessel = scaled_any_order(nu, z)?;
    Ok((r * rp).powf(-nu) * (-gap).exp() * bessel / (2.0 * t))
}

/// Full heat kernel of a two-dimensional cone.
pub fn carslaw_kernel(cone: &ConeSpace, x: ConePoint, y: ConePoint, t: f64) -> Result<KernelEval> {
    let theta = cone.theta().ok_or_else(|| {
        Error::Domain(format!("the angular series needs a 2-D cone, N = {}", cone.dim()))
    })?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    if !(x.r >= 0.0 && y.r >= 0.0) {
        return Err(invalid("radial coordinates must be non-negative"));
    }
    let eval = |value, terms, bound, converged| KernelEval {
        value,
        space: Space::Cone(*cone).descriptor(),
        x,
        y,
        t,
        series_terms_used: terms,
        truncation_error_bound: bound,
        converged,
    };
    let gap = (x.r - y.r) * (x.r - y.r) / (4.0 * t);
    let prefactor = (-gap).exp() / (2.0 * theta * t);
    let z = x.r * y.r / (2.0 * t);
    if z == 0.0 || prefactor == 0.0 {
        let value = prefactor * (-z).exp();
        return Ok(eval(value, 1, 0.0, true));
    }
    let spacing = 2.0 * PI / theta;
    let dphi = x.phi - y.phi;
    let mut previous = scaled_any_order(0.0, z)?;
    let mut sum = previous;
    let mut quiet = 0;
    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        let term = scaled_any_order(kf * spacing, z)?;
        sum += 2.0 * term * (kf * spacing * dphi).cos();
        if term == 0.0 {
            return Ok(eval((prefactor * sum).max(0.0), k + 1, 0.0, true));
        }
        // ν ↦ I_ν(z) is log-concave, so term ratios only shrink further out
        let ratio = term / previous;
        let tail = if ratio < 1.0 { 2.0 * term * ratio / (1.0 - ratio) } else { f64::INFINITY };
        let scale = sum.abs().max(f64::MIN_POSITIVE / prefactor.max(1e-300));
        if tail < SERIES_TOL * scale {
            quiet += 1;
            if quiet == 3 {
                let value = (prefactor * sum).max(0.0);
                return Ok(eval(value, k + 1, prefactor * tail, true));
            }
        } else {
            quiet = 0;
        }
        previous = term;
    }
    Err(Error::NonConvergence(format!(
        "angular series did not certify its tail within {MAX_SERIES_TERMS} terms (z = {z})"
    )))
}

/// Result of comparing a cone kernel with its two-sided Gaussian bounds.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianBoundReport {
    pub eps: f64,
    pub samples: usize,
    /// Worst `h·m(B_√t(x))·e^{d²/((4+ε)t)}` over the sample.
    pub upper_ratio: f64,
    /// Worst `e^{-d²/((4-ε)t)} / (h·m(B_√t(x)))` over the sample.
    pub lower_ratio: f64,
    /// Smallest `C ≥ 1` satisfying both inequalities on the sample.
    pub constant: f64,
    pub finite: bool,
}

/// Evaluates the two-sided Gaussian bound on explicit `(x, y, t)` triples.
pub fn gaussian_bound_on(
    cone: &ConeSpace,
    eps: f64,
    samples: &[(ConePoint, ConePoint, f64)],
) -> Result<GaussianBoundReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    let mut upper: f64 = 0.0;
    let mut lower: f64 = 0.0;
    for &(x, y, t) in samples {
        let h = carslaw_kernel(cone, x, y, t)?.value;
        if h <= 0.0 {
            return Err(Error::NonConvergence(format!("kernel underflow at t = {t}")));
        }
        let d = cone.distance(x, y)?;
        let ball = cone.ball_volume(x, t.sqrt())?;
        upper = upper.max(h * ball * (d * d / ((4.0 + eps) * t)).exp());
        lower = lower.max((-d * d / ((4.0 - eps) * t)).exp() / (h * ball));
    }
    let constant = upper.max(lower).max(1.0);
    Ok(GaussianBoundReport {
        eps,
        samples: samples.len(),
        upper_ratio: upper,
        lower_ratio: lower,
        constant,
        finite: constant.is_finite(),
    })
}

/// Samples `samples` triples with `r, r' ∈ [0, 4]`, `t ∈ [0.1, 10]`
/// log-uniform and `d²/4t ≤ 10`, where the angular series keeps full
/// relative accuracy, then runs [`gaussian_bound_on`].
pub fn gaussian_bound_check(cone: &ConeSpace, eps: f64, samples: usize) -> Result<GaussianBoundReport> {
    let theta = cone.theta().ok_or_else(|| Error::Domain("Gaussian bound check needs a 2-D cone".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a75_6e67);
    let mut triples = Vec::with_capacity(samples);
    while triples.len() < samples {
        let x = ConePoint::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..theta));
        let y = ConePoint::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..theta));
        let t = 10f64.powf(rng.gen_range(-1.0..1.0));
        let d = cone.distance(x, y)?;
        if d * d / (4.0 * t) <= 10.0 {
            triples.push((x, y, t));
        }
    }
    gaussian_bound_on(cone, eps, &triples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_values() {
        assert!((euclidean_kernel(2, 0.0, 1.0) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((euclidean_kernel(1, 0.0, 0.25) - PI.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn tip_values() {
        let half = ConeSpace::planar(PI).unwrap();
        assert!((tip_kernel(&half, 0.0, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let plane = ConeSpace::planar(2.0 * PI).unwrap();
        for (r, s) in [(0.0, 1.0), (1.3, 0.4), (5.0, 2.0)] {
            assert!((tip_kernel(&plane, r, s) - euclidean_kernel(2, r, s)).abs() < 1e-16);
        }
    }

    #[test]
    fn radial_kernel_symmetric_and_limits() {
        for dim in [1.5, 2.0, 3.0, 4.7] {
            for (r, rp, t) in [(0.3, 1.2, 0.5), (2.0, 0.0, 1.0), (4.0, 3.5, 0.1)] {
                let a = radial_kernel(dim, r, rp, t).unwrap();
                let b = radial_kernel(dim, rp, r, t).unwrap();
                assert!(a > 0.0 && (a - b).abs() <= 1e-14 * a);
            }
            // continuity across the small-argument switch
            let below = radial_kernel(dim, 1e-4, 1.0, 50.0).unwrap();
            let above = radial_kernel(dim, 1e-3, 1.0, 50.0).unwrap();
            assert!((below / above - 1.0).abs() < 1e-6);
        }
        assert_eq!(radial_kernel(2.0, 0.0, 80.0, 0.5).unwrap(), 0.0);
        assert!(radial_kernel(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn carslaw_tip_and_flat() {
        let cone = ConeSpace::planar(1.3).unwrap();
        for (r, t) in [(0.0, 1.0), (0.7, 0.2), (3.0, 4.0)] {
            let h = carslaw_kernel(&cone, ConePoint::TIP, ConePoint::new(r, 0.4), t).unwrap();
            assert!((h.value - tip_kernel(&cone, r, t)).abs() < 1e-14 * h.value);
        }
        let plane = ConeSpace::planar(2.0 * PI).unwrap();
        let (x, y) = (ConePoint::new(1.0, 0.2), ConePoint::new(1.5, 2.0));
        let h = carslaw_kernel(&plane, x, y, 0.7).unwrap();
        let d = plane.distance(x, y).unwrap();
        assert!(h.converged);
        assert!((h.value - euclidean_kernel(2, d, 0.7)).abs() < 1e-12 * h.value);
        assert!(h.truncation_error_bound < 1e-12 * h.value);
    }

    #[test]
    fn carslaw_needs_planar_cone() {
        let cone = ConeSpace::new(3.0, 2.0).unwrap();
        assert!(matches!(
            carslaw_kernel(&cone, ConePoint::TIP, ConePoint::TIP, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gaussian_bound_finite() {
        let cone = ConeSpace::planar(2.0).unwrap();
        let report = gaussian_bound_check(&cone, 1.0, 40).unwrap();
        assert!(report.finite && report.constant >= 1.0 && report.constant < 50.0);
    }
}
