//! Bakry's flow argument: an exponent `p(t)` and a gauge `m(t)` chosen so
//! that `V(t) = e^{-m(t)} ‖H_t f‖_{p(t)}` never increases, closed by the
//! sharp logarithmic Sobolev inequality.

use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use serde::Serialize;

use crate::constants::{Exponent, ExponentPair};
use crate::error::{invalid, Error, Result};
use crate::semigroup::{apply_heat, dirichlet_energy, entropy, ln_lp_norm, lp_norm, RadialFunction};
use crate::spaces::SpaceDescriptor;

/// Exponents beyond this are clamped when evaluating `‖·‖_{p(t)}`.
pub const EXPONENT_CAP: f64 = 1e3;

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `Φ(s) = (N/2) log(2 s AVR^{-2/N} / (Nπe))`.
pub fn phi(s: f64, dim: f64, avr: f64) -> f64 {
    0.5 * dim * (2.0 * s / (dim * PI * E)).ln() - avr.ln()
}

pub fn phi_prime(s: f64, dim: f64) -> f64 {
    0.5 * dim / s
}

/// `v(s) = λ s² / (s - 1)`.
pub fn v_opt(s: f64, lambda: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid(format!("v(s) needs s > 1, got {s}")));
    }
    Ok(lambda * s * s / (s - 1.0))
}

/// `λ = (N / 8t)(1/p - 1/q)`: the flow started at `p` reaches `q` at `t`.
pub fn lambda_for(pair: ExponentPair, dim: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    Ok(dim / (8.0 * t) * pair.gap())
}

/// `t(λ) = (N / 8λ)(1/p - 1/q)`.
pub fn t_of_lambda(lambda: f64, pair: ExponentPair, dim: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(dim / (8.0 * lambda) * pair.gap())
}

/// End of the admissible interval, `T_λ = N / (8λp)`.
pub fn t_lambda(lambda: f64, p: f64, dim: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(dim / (8.0 * lambda * p))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be positive, got {lambda}")))
    }
}

fn check_window(t: f64, lambda: f64, p: f64, dim: f64) -> Result<()> {
    let end = t_lambda(lambda, p, dim)?;
    if !(t >= 0.0) || t >= end {
        return Err(Error::Domain(format!("t = {t} outside [0, T_lambda = {end})")));
    }
    Ok(())
}

/// `p(t) = N p / (N - 8λpt)`.
pub fn p_of_t(t: f64, lambda: f64, p: f64, dim: f64) -> Result<f64> {
    check_window(t, lambda, p, dim)?;
    Ok(dim * p / (dim - 8.0 * lambda * p * t))
}

/// The gauge `m(t)` of the optimal flow, in closed form.
pub fn m_of_t(t: f64, lambda: f64, p: f64, dim: f64, avr: f64) -> Result<f64> {
    let pt = p_of_t(t, lambda, p, dim)?;
    let (a, at) = (1.0 / p, 1.0 / pt);
    // log(p^{1/p} (1-1/p)^{1-1/p}) = -a log a + (1-a) log(1-a)
    let g = |x: f64| -xlogx(x) + xlogx(1.0 - x);
    let log_arg = (2.0 * lambda / (dim * PI)).ln() - 2.0 / dim * avr.ln();
    Ok(0.5 * dim * (log_arg * (a - at) + g(a) - g(at)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub p: f64,
    pub m: f64,
    pub v: f64,
}

/// `V(t)` sampled along the flow, with the checks made on it.
#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub space: SpaceDescriptor,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub dim: f64,
    pub avr: f64,
    pub p_start: f64,
    pub t_target: f64,
    pub t_lambda: f64,
    pub samples: Vec<FlowSample>,
    /// Largest `(V(t_{k+1}) - V(t_k)) / V(0)`; non-positive for a
    /// monotone run.
    pub max_increase: f64,
    /// Worst residual of the two flow ODEs by central differences.
    pub ode_residual: f64,
    pub exponent_capped: bool,
}

impl FlowTrace {
    /// `V(t_target) / V(0)`.
    pub fn final_ratio(&self) -> f64 {
        self.samples.last().unwrap().v / self.samples[0].v
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_increase <= slack
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,m,V\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", s.t, s.p, s.m, s.v);
        }
        out
    }
}

/// Runs the flow from `f` with `λ` chosen so that `p(t_target) = q`, on
/// `steps` equal time steps. Errors when `V` increases by more than
/// `1e-8 V(0)`.
pub fn integrate_flow(f: &RadialFunction, pair: ExponentPair, t_target: f64, steps: usize) -> Result<FlowTrace> {
    let (Exponent::Finite(p), Exponent::Finite(q)) = (pair.p(), pair.q()) else {
        return Err(invalid("the flow needs finite exponents"));
    };
    if !(p >= 2.0 && p < q) {
        return Err(invalid(format!("the flow needs 2 <= p < q, got ({p}, {q})")));
    }
    if steps < 2 {
        return Err(invalid("need at least two flow steps"));
    }
    if !f.is_non_negative() || f.values().iter().all(|&v| v == 0.0) {
        return Err(invalid("the flow needs non-negative, non-zero data"));
    }
    let model = f.model();
    let (dim, avr) = (model.dim(), model.avr());
    let lambda = lambda_for(pair, dim, t_target)?;
    let end = t_lambda(lambda, p, dim)?;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut capped = false;
    for k in 0..=steps {
        let t = t_target * k as f64 / steps as f64;
        // p(t_target) = q in exact arithmetic
        let pt = if k == steps { q } else { p_of_t(t, lambda, p, dim)? };
        let m = if k == 0 { 0.0 } else { m_of_t(t.min(t_target), lambda, p, dim, avr)? };
        let ft = if k == 0 { f.clone() } else { apply_heat(f, t)? };
        if pt > EXPONENT_CAP {
            capped = true;
        }
        let norm = ln_lp_norm(&ft, Exponent::Finite(pt.min(EXPONENT_CAP)))?;
        samples.push(FlowSample { t, p: pt, m, v: (norm - m).exp() });
    }
    let v0 = samples[0].v;
    let max_increase = samples.windows(2).map(|w| (w[1].v - w[0].v) / v0).fold(f64::NEG_INFINITY, f64::max);
    let ode_residual = ode_residual(lambda, p, dim, avr, t_target)?;
    let trace = FlowTrace {
        space: model.descriptor(),
        lambda,
        dim,
        avr,
        p_start: p,
        t_target,
        t_lambda: end,
        samples,
        max_increase,
        ode_residual,
        exponent_capped: capped,
    };
    if !trace.is_monotone(1e-8) {
        return Err(Error::NonConvergence(format!(
            "V increased by {:.3e} V(0); the grid does not resolve this run",
            trace.max_increase
        )));
    }
    Ok(trace)
}

/// Checks `m' = p'/p² (Φ(v(p)) - N/2)` and `N / (8 v(p)) = (p-1)/p'` by
/// central differences of the closed forms at interior points.
fn ode_residual(lambda: f64, p: f64, dim: f64, avr: f64, t_target: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 1..10 {
        let t = t_target * k as f64 / 10.0;
        let h = 1e-5 * t_target;
        let dp = (p_of_t(t + h, lambda, p, dim)? - p_of_t(t - h, lambda, p, dim)?) / (2.0 * h);
        let dm = (m_of_t(t + h, lambda, p, dim, avr)? - m_of_t(t - h, lambda, p, dim, avr)?) / (2.0 * h);
        let pt = p_of_t(t, lambda, p, dim)?;
        let v = v_opt(pt, lambda)?;
        let first = dp / (pt * pt) * (phi(v, dim, avr) - 0.5 * dim);
        let second = (pt - 1.0) / dp;
        worst = worst
            .max((dm - first).abs() / first.abs().max(1.0))
            .max((dim / (8.0 * v) - second).abs() / second.abs().max(1.0));
    }
    Ok(worst)
}

/// Both sides of the non-normalised sharp log-Sobolev inequality.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogSobolevReport {
    /// `Ent(u²) / ‖u‖²`.
    pub lhs: f64,
    /// `Φ(∫|∇u|² / ‖u‖²)`.
    pub rhs: f64,
    pub deficit: f64,
    pub energy: f64,
    pub l2_squared: f64,
}

pub fn logsobolev_check(u: &RadialFunction) -> Result<LogSobolevReport> {
    let model = u.model();
    let l2 = lp_norm(u, Exponent::Finite(2.0))?.powi(2);
    if l2 == 0.0 {
        return Err(invalid("log-Sobolev check needs u != 0"));
    }
    let energy = dirichlet_energy(u)?;
    let ent = entropy(&u.map(|v| v * v))?;
    let lhs = ent / l2;
    let rhs = phi(energy / l2, model.dim(), model.avr());
    Ok(LogSobolevReport { lhs, rhs, deficit: rhs - lhs, energy, l2_squared: l2 })
}

/// The tangent form `Ent(u²) ≤ ‖u‖²(Φ(v) - N/2) + (N/2v) ∫|∇u|²` at one `v`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearizedLogSobolevReport {
    pub v: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

pub fn linearized_logsobolev_check(u: &RadialFunction, v: f64) -> Result<LinearizedLogSobolevReport> {
    if !(v > 0.0) {
        return Err(invalid(format!("v must be positive, got {v}")));
    }
    let model = u.model();
    let dim = model.dim();
    let l2 = lp_norm(u, Exponent::Finite(2.0))?.powi(2);
    let energy = dirichlet_energy(u)?;
    let lhs = entropy(&u.map(|x| x * x))?;
    let rhs = l2 * (phi(v, dim, model.avr()) - 0.5 * dim) + 0.5 * dim / v * energy;
    Ok(LinearizedLogSobolevReport { v, lhs, rhs, slack: rhs - lhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ln_sharp_bound, SharpBoundInputs};

    fn pair(p: f64, q: f64) -> ExponentPair {
        ExponentPair::from_f64(p, q).unwrap()
    }

    #[test]
    fn phi_zero_and_slope() {
        let (n, avr): (f64, f64) = (2.0, 0.5);
        let s0 = n * PI * E * avr.powf(2.0 / n) / 2.0;
        assert!(phi(s0, n, avr).abs() < 1e-14);
        let h = 1e-5;
        let fd = (phi(3.0 + h, n, avr) - phi(3.0 - h, n, avr)) / (2.0 * h);
        assert!((fd - phi_prime(3.0, n)).abs() < 1e-8);
    }

    #[test]
    fn v_and_exponent_curve() {
        assert_eq!(v_opt(2.0, 1.0).unwrap(), 4.0);
        assert!(v_opt(1.0, 1.0).is_err());
        let lam = 1.0 / 16.0;
        assert_eq!(p_of_t(0.0, lam, 2.0, 2.0).unwrap(), 2.0);
        assert!((p_of_t(1.0, lam, 2.0, 2.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(t_lambda(lam, 2.0, 2.0).unwrap(), 2.0);
        assert!(matches!(p_of_t(2.0, lam, 2.0, 2.0), Err(Error::Domain(_))));
        assert_eq!(m_of_t(0.0, lam, 2.0, 2.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn gauge_reaches_sharp_bound() {
        let pr = pair(2.0, 4.0);
        let lam = lambda_for(pr, 2.0, 1.0).unwrap();
        assert!((lam - 1.0 / 16.0).abs() < 1e-17);
        let t = t_of_lambda(lam, pr, 2.0).unwrap();
        let m = m_of_t(t, lam, 2.0, 2.0, 0.5).unwrap();
        let sharp = ln_sharp_bound(&SharpBoundInputs::new(pr, 2.0, 0.5, 1.0).unwrap());
        assert!((m - sharp).abs() < 1e-12);
    }

    #[test]
    fn ode_identities_hold() {
        assert!(ode_residual(0.07, 2.5, 3.0, 0.4, 1.3).unwrap() < 1e-6);
    }
}
