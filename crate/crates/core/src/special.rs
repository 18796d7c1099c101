//! Modified Bessel function of the first kind for real order, and the
//! log-Gamma function it needs.
//!
//! All evaluation happens on the exponentially scaled function
//! `e^{-x} I_ν(x)`. Small arguments use the power series; orders `ν ≥ 50` use
//! the uniform (Debye) expansion; the remaining large-argument, small-order
//! region starts the Debye expansion at two orders above 50 and runs the
//! three-term recurrence downwards, the stable direction for `I_ν`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

const DEBYE_MIN_ORDER: f64 = 50.0;
const SERIES_MAX_ARG: f64 = 20.0;
const DEBYE_TERMS: usize = 14;
const SERIES_MAX_TERMS: usize = 2000;

pub fn ln_gamma(x: f64) -> f64 {
    match half_integer_gamma(x) {
        Some(g) => g.ln(),
        None => statrs::function::gamma::ln_gamma(x),
    }
}

pub fn gamma(x: f64) -> f64 {
    half_integer_gamma(x).unwrap_or_else(|| statrs::function::gamma::gamma(x))
}

/// Exact products for positive integer and half-integer arguments, where
/// dimensions usually land.
fn half_integer_gamma(x: f64) -> Option<f64> {
    let twice = 2.0 * x;
    if !(twice.fract() == 0.0 && x > 0.0 && x <= 60.0) {
        return None;
    }
    let (mut acc, mut k) = if (twice as u64).is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while k < x {
        acc *= k;
        k += 1.0;
    }
    Some(acc)
}

/// `I_ν(x)`, or `e^{-x} I_ν(x)` when `scaled` is set.
pub fn bessel_i(nu: f64, x: f64, scaled: bool) -> Result<f64> {
    let s = bessel_i_scaled(nu, x)?;
    if scaled {
        return Ok(s);
    }
    let v = s * x.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence(format!(
            "I_{nu}({x}) overflows; use the scaled form"
        )))
    }
}

/// `e^{-x} I_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(invalid(format!("Bessel order must be finite and >= 0, got {nu}")));
    }
    scaled_any_order(nu, x)
}

/// Same as [`bessel_i_scaled`] for orders in `(-1, 0)` too, which radial
/// kernels of dimension `1 < N < 2` need. Requires `x > 0` when `ν < 0`.
pub(crate) fn scaled_any_order(nu: f64, x: f64) -> Result<f64> {
    if !(nu > -1.0 && nu.is_finite()) || (nu < 0.0 && x == 0.0) {
        return Err(invalid(format!("Bessel order {nu} unsupported at argument {x}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(invalid(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if nu >= DEBYE_MIN_ORDER {
        return Ok(debye_scaled(nu, x));
    }
    if x <= SERIES_MAX_ARG {
        return series_scaled(nu, x);
    }
    Ok(recurrence_scaled(nu, x))
}

fn series_scaled(nu: f64, x: f64) -> Result<f64> {
    let quarter_sq = 0.25 * x * x;
    let mut term = (nu * (0.5 * x).ln() - ln_gamma(nu + 1.0) - x).exp();
    let mut sum = term;
    for k in 0..SERIES_MAX_TERMS {
        let k = k as f64;
        term *= quarter_sq / ((k + 1.0) * (k + 1.0 + nu));
        sum += term;
        if term <= 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(format!(
        "power series for I_{nu}({x}) did not converge in {SERIES_MAX_TERMS} terms"
    )))
}

fn recurrence_scaled(nu: f64, x: f64) -> f64 {
    let steps = (DEBYE_MIN_ORDER - nu).ceil().max(0.0) as usize;
    let top = nu + steps as f64;
    let mut upper = debye_scaled(top + 1.0, x);
    let mut current = debye_scaled(top, x);
    for j in (0..steps).rev() {
        // I_{μ-1} = I_{μ+1} + (2μ/x) I_μ with μ = nu + j + 1
        let mu = nu + j as f64 + 1.0;
        let lower = upper + (2.0 * mu / x) * current;
        upper = current;
        current = lower;
    }
    current
}

/// Debye polynomials `u_k(t)` in ascending coefficient order.
fn debye_polynomials() -> &'static [Vec<f64>] {
    static POLYS: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut polys: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..DEBYE_TERMS - 1 {
            let u = &polys[k];
            let mut next = vec![0.0; u.len() + 3];
            // ½ t² (1 - t²) u'(t)
            for (j, &c) in u.iter().enumerate().skip(1) {
                let d = c * j as f64;
                next[j + 1] += 0.5 * d;
                next[j + 3] -= 0.5 * d;
            }
            // ⅛ ∫₀ᵗ (1 - 5s²) u(s) ds
            for (j, &c) in u.iter().enumerate() {
                next[j + 1] += 0.125 * c / (j as f64 + 1.0);
                next[j + 3] -= 0.625 * c / (j as f64 + 3.0);
            }
            polys.push(next);
        }
        polys
    })
}

fn debye_scaled(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let sq = (1.0 + z * z).sqrt();
    let t = 1.0 / sq;
    let eta_minus_z = 1.0 / (sq + z) + z.ln() - sq.ln_1p();
    let mut sum = 0.0;
    let mut nu_pow = 1.0;
    for poly in debye_polynomials() {
        let value = poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        sum += value / nu_pow;
        nu_pow *= nu;
    }
    (nu * eta_minus_z).exp() / ((2.0 * PI * nu).sqrt() * sq.sqrt()) * sum
}
