//! `L^p → L^q` operator norms of the heat semigroup: closed forms on cones,
//! numerical estimates on any radial model, and the traces and identities
//! built on them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::constants::{omega, optimal_a, sharp_bound, Exponent, ExponentPair, SharpBoundInputs};
use crate::error::{invalid, Error, Result};
use crate::kernels::{carslaw_kernel, radial_kernel, tip_kernel};
use crate::semigroup::{ln_lp_norm, ln_lp_norm_values, RadialFunction, RadialModel};
use crate::spaces::{ConePoint, ConeSpace, Space, SpaceDescriptor};

/// `C(X, d, m, p, q, t)` on a cone.
pub fn sharp_constant_cone(cone: &ConeSpace, pair: ExponentPair, t: f64) -> Result<f64> {
    Ok(sharp_bound(&SharpBoundInputs::new(pair, cone.dim(), cone.avr(), t)?))
}

/// The right-hand side of the sharp bound for any space with the given
/// dimension and AVR.
pub fn sharp_bound_for(space: &Space, pair: ExponentPair, t: f64) -> Result<f64> {
    Ok(sharp_bound(&SharpBoundInputs::new(pair, space.dim(), space.avr(), t)?))
}

fn cone_of(model: &RadialModel) -> Result<ConeSpace> {
    match model.space() {
        Space::Cone(c) => Ok(c),
        Space::Surface(_) => Err(Error::Domain("this operation needs a cone".into())),
    }
}

/// The extremal Gaussian `h(tip, ·, a t)`, `a = q(p-1)/(q-p)`.
pub fn extremizer(model: &RadialModel, pair: ExponentPair, t: f64) -> Result<RadialFunction> {
    let cone = cone_of(model)?;
    if pair.p() == Exponent::Finite(1.0) {
        return Err(Error::Domain("no extremizer exists for p = 1".into()));
    }
    let s = optimal_a(pair)? * t;
    Ok(model.sample(|r| tip_kernel(&cone, r, s)))
}

/// A cone model whose grid resolves every Gaussian the power iteration at
/// `(pair, t)` produces.
pub fn cone_model_for(cone: ConeSpace, pair: ExponentPair, t: f64, points: usize) -> Result<RadialModel> {
    let widest = match optimal_a(pair) {
        Ok(a) => (a + 1.0) * t,
        Err(_) => 2.0 * t,
    };
    RadialModel::cone(cone, widest, points)
}

/// `‖H_t f‖_q / ‖f‖_p`.
pub fn norm_ratio(f: &RadialFunction, pair: ExponentPair, t: f64) -> Result<f64> {
    let g = crate::semigroup::apply_heat(f, t)?;
    Ok((ln_lp_norm(&g, pair.q())? - ln_lp_norm(f, pair.p())?).exp())
}

/// How a [`NormEstimate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// `sup h` over the diagonal.
    KernelSupremum,
    /// `sup_y ‖h(·, y, t)‖_r` with `r = q` or `p'`.
    KernelColumnNorm,
    /// Boyd's nonlinear power iteration.
    PowerIteration,
    /// `p = q`: best ratio over widening Gaussians, a lower bound for 1.
    DiagonalLadder,
}

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub monotone_slack: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { max_iterations: 500, rel_tol: 1e-10, monotone_slack: 1e-12 }
    }
}

/// A numerical value of `‖H_t‖_{p,q}` on the radial functions of a model.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub pair: ExponentPair,
    pub t: f64,
    pub iterations: usize,
    /// Relative change in the last iteration (0 for closed characterisations).
    pub residual: f64,
    pub method: NormMethod,
    /// Relative spread `(max - min) / max` of the power iteration over
    /// several start functions; set only off cones, where convergence to
    /// the global maximiser is not guaranteed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_spread: Option<f64>,
    #[serde(skip)]
    pub extremal: Option<RadialFunction>,
}

/// Estimates `‖H_t‖_{p,q}`. Boundary exponents use the kernel
/// characterisations at the tip or pole, where the kernel peaks; interior
/// exponents run the power iteration from the extremal Gaussian on cones
/// and from `e^{-r²}` elsewhere.
pub fn estimate_operator_norm(
    model: &RadialModel,
    pair: ExponentPair,
    t: f64,
    opts: NormOptions,
) -> Result<NormEstimate> {
    let done = |value, method| NormEstimate {
        value,
        pair,
        t,
        iterations: 0,
        residual: 0.0,
        method,
        start_spread: None,
        extremal: None,
    };
    let p1 = pair.p() == Exponent::Finite(1.0);
    let q_inf = pair.q().is_infinite();
    if pair.is_diagonal() {
        return diagonal_ladder(model, pair, t);
    }
    if p1 && q_inf {
        return Ok(done(kernel_supremum_estimate(model, t)?, NormMethod::KernelSupremum));
    }
    if p1 || q_inf {
        let r = if p1 { pair.q() } else { pair.p().conjugate() };
        let column = pole_column(model, t)?;
        let value = ln_lp_norm_values(&column, model.weights(), r)?.exp();
        return Ok(done(value, NormMethod::KernelColumnNorm));
    }
    if model.is_cone() {
        return power_iteration(extremizer(model, pair, t)?, pair, t, opts);
    }
    multi_start(model, pair, t, opts)
}

/// Power iteration from `e^{-r²}` and three further positive profiles; keeps
/// the best run and records how far the runs disagree.
fn multi_start(model: &RadialModel, pair: ExponentPair, t: f64, opts: NormOptions) -> Result<NormEstimate> {
    let starts = [
        model.sample(|r| (-r * r).exp()),
        model.sample(|r| (-r * r / (4.0 * t)).exp()),
        model.sample(|r| (-r * r / (16.0 * t)).exp()),
        model.sample(|r| (1.0 + r * r).powi(-2)),
    ];
    let runs = starts
        .into_iter()
        .map(|f| power_iteration(f, pair, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let low = runs.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    let mut best = runs.into_iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("four runs");
    best.start_spread = Some((best.value - low) / best.value);
    Ok(best)
}

fn kernel_supremum_estimate(model: &RadialModel, t: f64) -> Result<f64> {
    match model.space() {
        Space::Cone(cone) => {
            let mut best = radial_kernel(cone.dim(), 0.0, 0.0, t)?;
            for &r in model.nodes() {
                best = best.max(radial_kernel(cone.dim(), r, r, t)?);
            }
            Ok(best / cone.sigma())
        }
        Space::Surface(_) => model.pole_diagonal(t),
    }
}

/// `h(o, r_i, t)` at the model nodes.
fn pole_column(model: &RadialModel, t: f64) -> Result<Vec<f64>> {
    match model.space() {
        Space::Cone(cone) => model
            .nodes()
            .iter()
            .map(|&r| Ok(radial_kernel(cone.dim(), 0.0, r, t)? / cone.sigma()))
            .collect(),
        Space::Surface(_) => {
            let prop = model.propagator(t)?;
            Ok((0..model.len()).map(|j| prop.kernel(0, j)).collect())
        }
    }
}

fn diagonal_ladder(model: &RadialModel, pair: ExponentPair, t: f64) -> Result<NormEstimate> {
    let mut best: f64 = 0.0;
    let mut s = t;
    let mut tried = 0;
    while 4.0 * s * 12.0 < model.radius() * model.radius() && tried < 40 {
        let f = model.sample(|r| (-r * r / (4.0 * s)).exp());
        best = best.max(norm_ratio(&f, pair, t)?);
        s *= 2.0;
        tried += 1;
    }
    Ok(NormEstimate {
        value: best,
        pair,
        t,
        iterations: tried,
        residual: 0.0,
        method: NormMethod::DiagonalLadder,
        start_spread: None,
        extremal: None,
    })
}

fn positive_power(values: &[f64], exponent: f64) -> Vec<f64> {
    let peak = values.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v.max(0.0) / peak).powf(exponent)).collect()
}

/// Boyd's iteration `f ← (H_t (H_t f)^{q-1})^{1/(p-1)}`, normalised in
/// `L^p`; the ratio `‖H_t f‖_q` never decreases for positive kernels.
pub fn power_iteration(
    start: RadialFunction,
    pair: ExponentPair,
    t: f64,
    opts: NormOptions,
) -> Result<NormEstimate> {
    let (Exponent::Finite(p), Exponent::Finite(q)) = (pair.p(), pair.q()) else {
        return Err(invalid("power iteration needs finite exponents"));
    };
    if p <= 1.0 {
        return Err(invalid("power iteration needs p > 1"));
    }
    if !start.is_non_negative() || start.values().iter().all(|&v| v == 0.0) {
        return Err(invalid("power iteration needs non-negative, non-zero start data"));
    }
    let model = start.model().clone();
    let prop = model.propagator(t)?;
    let weights = model.weights();
    let normalise = |v: Vec<f64>| -> Result<Vec<f64>> {
        let ln = ln_lp_norm_values(&v, weights, pair.p())?;
        let scale = (-ln).exp();
        Ok(v.into_iter().map(|x| x * scale).collect())
    };
    let mut f = normalise(start.into_values())?;
    let mut g = prop.apply_values(&f);
    let mut ratio = ln_lp_norm_values(&g, weights, pair.q())?.exp();
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let h = prop.apply_values(&positive_power(&g, q - 1.0));
        let next = normalise(positive_power(&h, 1.0 / (p - 1.0)))?;
        let next_g = prop.apply_values(&next);
        let next_ratio = ln_lp_norm_values(&next_g, weights, pair.q())?.exp();
        if next_ratio < ratio * (1.0 - opts.monotone_slack) {
            return Err(Error::NonConvergence(format!(
                "power iteration ratio decreased from {ratio} to {next_ratio}; grid too coarse"
            )));
        }
        residual = (next_ratio - ratio).abs() / next_ratio;
        f = next;
        g = next_g;
        ratio = next_ratio;
        if residual < opts.rel_tol {
            return Ok(NormEstimate {
                value: ratio,
                pair,
                t,
                iterations: it,
                residual,
                method: NormMethod::PowerIteration,
                start_spread: None,
                extremal: Some(model.function(f)?),
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "power iteration stalled at relative change {residual} after {} iterations",
        opts.max_iterations
    )))
}

/// One JSON record comparing an estimate with the sharp bound.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub space: SpaceDescriptor,
    pub p: Exponent,
    pub q: Exponent,
    pub t: f64,
    pub estimate: f64,
    pub sharp: f64,
    /// `(sharp - estimate) / sharp`.
    pub gap: f64,
    pub iterations: usize,
    pub method: NormMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_spread: Option<f64>,
}

impl NormReport {
    pub fn new(model: &RadialModel, est: &NormEstimate) -> Result<Self> {
        let sharp = sharp_bound_for(&model.space(), est.pair, est.t)?;
        Ok(NormReport {
            space: model.descriptor(),
            p: est.pair.p(),
            q: est.pair.q(),
            t: est.t,
            estimate: est.value,
            sharp,
            gap: (sharp - est.value) / sharp,
            iterations: est.iterations,
            method: est.method,
            start_spread: est.start_spread,
        })
    }
}

/// Estimates on successively finer discretisations.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementLevel {
    pub nodes: usize,
    pub estimate: f64,
    /// `|estimate - previous level|`; `NaN` on the first level.
    pub change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementReport {
    pub levels: Vec<RefinementLevel>,
    pub sharp: f64,
    /// Change between the two finest levels.
    pub grid_tolerance: f64,
    /// `sharp - finest estimate`.
    pub gap: f64,
}

/// Runs [`estimate_operator_norm`] on each model of `ladder`, coarse to fine.
pub fn refinement_study(ladder: &[RadialModel], pair: ExponentPair, t: f64) -> Result<RefinementReport> {
    let first = ladder.first().ok_or_else(|| invalid("empty refinement ladder"))?;
    let sharp = sharp_bound_for(&first.space(), pair, t)?;
    let mut levels: Vec<RefinementLevel> = Vec::new();
    for model in ladder {
        let est = estimate_operator_norm(model, pair, t, NormOptions::default())?.value;
        let change = levels.last().map_or(f64::NAN, |l| (est - l.estimate).abs());
        levels.push(RefinementLevel { nodes: model.len(), estimate: est, change });
    }
    let last = levels.last().unwrap();
    Ok(RefinementReport {
        grid_tolerance: if levels.len() > 1 { last.change } else { f64::NAN },
        gap: sharp - last.estimate,
        sharp,
        levels,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaledNormSample {
    pub t: f64,
    pub estimate: f64,
    /// `(4πt)^{(N/2)(1/p-1/q)} · estimate`.
    pub scaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaledNormTrace {
    pub space: SpaceDescriptor,
    pub pair: ExponentPair,
    pub samples: Vec<ScaledNormSample>,
    /// `M^{N/2} AVR^{1/q-1/p}`, the value on a cone with the same AVR.
    pub cone_value: f64,
    pub max_relative_deviation: f64,
    pub non_decreasing: bool,
}

impl ScaledNormTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,estimate,scaled\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", s.t, s.estimate, s.scaled);
        }
        out
    }

    pub fn last_relative_deviation(&self) -> f64 {
        let last = self.samples.last().map_or(f64::NAN, |s| s.scaled);
        (last - self.cone_value).abs() / self.cone_value
    }
}

/// Normalised norms along increasing `times`.
pub fn scaled_norm_trace(model: &RadialModel, pair: ExponentPair, times: &[f64]) -> Result<ScaledNormTrace> {
    if times.is_empty() || times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("times must be non-empty and increasing"));
    }
    let space = model.space();
    let exponent = 0.5 * space.dim() * pair.gap();
    let cone_value = sharp_bound_for(&space, pair, 1.0 / (4.0 * PI))?;
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let estimate = estimate_operator_norm(model, pair, t, NormOptions::default())?.value;
        samples.push(ScaledNormSample { t, estimate, scaled: (4.0 * PI * t).powf(exponent) * estimate });
    }
    let max_relative_deviation = samples
        .iter()
        .map(|s| (s.scaled - cone_value).abs() / cone_value)
        .fold(0.0, f64::max);
    let non_decreasing = samples.windows(2).all(|w| w[1].scaled >= w[0].scaled * (1.0 - 1e-12));
    Ok(ScaledNormTrace { space: model.descriptor(), pair, samples, cone_value, max_relative_deviation, non_decreasing })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwoSidedBound {
    pub t: f64,
    /// `1 / inf_x ν_{x,N}`.
    pub lower: f64,
    /// `(4πt)^{N/2} C(1, ∞, t)`.
    pub middle: f64,
    /// `1 / AVR`.
    pub upper: f64,
    pub holds: bool,
}

/// Checks `1/inf ν ≤ (4πt)^{N/2} ‖H_t‖_{1,∞} ≤ 1/AVR`, allowing `tol`
/// relative slack on each side.
pub fn two_sided_bound_check(model: &RadialModel, t: f64, tol: f64) -> Result<TwoSidedBound> {
    let space = model.space();
    let inf_density = match space {
        Space::Cone(c) => c.inf_volume_density(),
        Space::Surface(_) => 1.0,
    };
    let pair = ExponentPair::new(Exponent::Finite(1.0), Exponent::Infinity)?;
    let c = estimate_operator_norm(model, pair, t, NormOptions::default())?.value;
    let middle = (4.0 * PI * t).powf(0.5 * space.dim()) * c;
    let lower = 1.0 / inf_density;
    let upper = 1.0 / space.avr();
    Ok(TwoSidedBound {
        t,
        lower,
        middle,
        upper,
        holds: middle >= lower * (1.0 - tol) && middle <= upper * (1.0 + tol),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiSample {
    pub t: f64,
    pub kernel: f64,
    /// `m(B_√t(z)) h(x, y, t)`.
    pub volume_scaled: f64,
    /// `t^{N/2} h(x, y, t)`.
    pub time_scaled: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiTrace {
    pub space: SpaceDescriptor,
    pub samples: Vec<LiSample>,
    /// `ω_N / (4π)^{N/2}`.
    pub volume_limit: f64,
    /// `AVR^{-1} / (4π)^{N/2}`.
    pub time_limit: f64,
    pub volume_error: f64,
    pub time_error: f64,
}

impl LiTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,h,volume_scaled,time_scaled\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", s.t, s.kernel, s.volume_scaled, s.time_scaled);
        }
        out
    }
}

/// Large-time behaviour of `h(x, y, t)` for fixed points. Two-dimensional
/// cones use the angular series; surfaces support the pole only.
pub fn li_limit_trace(
    model_or_space: LiTarget<'_>,
    x: ConePoint,
    y: ConePoint,
    z: ConePoint,
    times: &[f64],
) -> Result<LiTrace> {
    if times.is_empty() {
        return Err(invalid("need at least one time"));
    }
    let (space, samples) = match model_or_space {
        LiTarget::Cone(cone) => {
            let mut out = Vec::new();
            for &t in times {
                let h = carslaw_kernel(&cone, x, y, t)?.value;
                let ball = cone.ball_volume(z, t.sqrt())?;
                out.push(LiSample { t, kernel: h, volume_scaled: ball * h, time_scaled: t * h });
            }
            (Space::Cone(cone), out)
        }
        LiTarget::Surface(model) => {
            if !(x.is_tip() && y.is_tip() && z.is_tip()) {
                return Err(Error::Domain("surface traces are available at the pole only".into()));
            }
            let Space::Surface(s) = model.space() else {
                return Err(Error::Domain("expected a surface model".into()));
            };
            let mut out = Vec::new();
            for &t in times {
                let h = model.pole_diagonal(t)?;
                out.push(LiSample { t, kernel: h, volume_scaled: s.ball_area(t.sqrt()) * h, time_scaled: t * h });
            }
            (model.space(), out)
        }
    };
    let dim = space.dim();
    let volume_limit = omega(dim) / (4.0 * PI).powf(0.5 * dim);
    let time_limit = 1.0 / (space.avr() * (4.0 * PI).powf(0.5 * dim));
    let last = samples.last().unwrap();
    Ok(LiTrace {
        space: space.descriptor(),
        volume_error: (last.volume_scaled - volume_limit).abs() / volume_limit,
        time_error: (last.time_scaled - time_limit).abs() / time_limit,
        samples,
        volume_limit,
        time_limit,
    })
}

/// Where [`li_limit_trace`] evaluates the kernel.
#[derive(Debug, Clone, Copy)]
pub enum LiTarget<'a> {
    Cone(ConeSpace),
    Surface(&'a RadialModel),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RescalingCheck {
    pub r: f64,
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub relative_error: f64,
}

/// `C(X, r d, τ m, p, q, t) = τ^{1/q-1/p} C(X, d, m, p, q, r^{-2} t)`, both
/// sides from the closed form.
pub fn rescaling_identity_check(
    cone: &ConeSpace,
    pair: ExponentPair,
    t: f64,
    r: f64,
    tau: f64,
) -> Result<RescalingCheck> {
    let rescaled = cone.rescaled(r, tau)?;
    let lhs = sharp_constant_cone(&rescaled, pair, t)?;
    let rhs = tau.powf(-pair.gap()) * sharp_constant_cone(cone, pair, t / (r * r))?;
    Ok(RescalingCheck { r, tau, lhs, rhs, relative_error: (lhs - rhs).abs() / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: f64, q: f64) -> ExponentPair {
        ExponentPair::from_f64(p, q).unwrap()
    }

    #[test]
    fn closed_form_instances() {
        let half = ConeSpace::planar(PI).unwrap();
        let c = sharp_constant_cone(&half, pair(1.0, f64::INFINITY), 1.0).unwrap();
        assert!((c - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(sharp_constant_cone(&half, pair(3.0, 3.0), 0.2).unwrap(), 1.0);
    }

    #[test]
    fn boundary_norm_on_half_plane() {
        let half = ConeSpace::planar(PI).unwrap();
        let model = RadialModel::cone(half, 2.0, 256).unwrap();
        let est = estimate_operator_norm(&model, pair(1.0, f64::INFINITY), 1.0, NormOptions::default()).unwrap();
        assert_eq!(est.method, NormMethod::KernelSupremum);
        assert!((est.value - 2.0 / (4.0 * PI)).abs() < 1e-12);
        // (1, q): column norm of the tip kernel equals the closed form
        let est = estimate_operator_norm(&model, pair(1.0, 3.0), 1.0, NormOptions::default()).unwrap();
        let sharp = sharp_constant_cone(&half, pair(1.0, 3.0), 1.0).unwrap();
        assert!((est.value / sharp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn power_iteration_on_half_plane() {
        let half = ConeSpace::planar(PI).unwrap();
        let pr = pair(2.0, 4.0);
        let model = cone_model_for(half, pr, 1.0, 1024).unwrap();
        let est = estimate_operator_norm(&model, pr, 1.0, NormOptions::default()).unwrap();
        let sharp = sharp_constant_cone(&half, pr, 1.0).unwrap();
        assert!(est.value <= sharp * (1.0 + 1e-9));
        assert!((est.value / sharp - 1.0).abs() < 1e-6, "{} vs {sharp}", est.value);
    }

    #[test]
    fn extremizer_rejects_p_one() {
        let model = RadialModel::cone(ConeSpace::planar(PI).unwrap(), 2.0, 128).unwrap();
        assert!(extremizer(&model, pair(1.0, 2.0), 1.0).is_err());
    }

    #[test]
    fn rescaling_trivial_and_avr_invariant() {
        let half = ConeSpace::planar(PI).unwrap();
        let id = rescaling_identity_check(&half, pair(2.0, 4.0), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(id.lhs, id.rhs);
        let c = rescaling_identity_check(&half, pair(2.0, 4.0), 1.0, 2.0, 4.0).unwrap();
        assert!(c.relative_error < 1e-12);
    }

    #[test]
    fn li_tip_trace_is_constant() {
        let half = ConeSpace::planar(PI).unwrap();
        let tr = li_limit_trace(LiTarget::Cone(half), ConePoint::TIP, ConePoint::TIP, ConePoint::TIP, &[0.5, 3.0, 40.0])
            .unwrap();
        for s in &tr.samples {
            assert!((s.volume_scaled - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn surface_power_iteration_reports_start_agreement() {
        let surface = crate::spaces::SurfaceSpace::new(0.5).unwrap();
        let model = RadialModel::surface(surface, 1.0, Default::default()).unwrap();
        let pr = pair(2.0, 4.0);
        let est = estimate_operator_norm(&model, pr, 1.0, NormOptions::default()).unwrap();
        let spread = est.start_spread.expect("multi-start on surfaces");
        assert!(spread < 1e-6, "starts disagree by {spread}");
        let report = NormReport::new(&model, &est).unwrap();
        assert!(report.estimate <= report.sharp, "{report:?}");
        assert!(serde_json::to_string(&report).unwrap().contains("start_spread"));
    }
}
