//! The heat semigroup acting on radial functions.
//!
//! A [`RadialModel`] couples a space with a discretisation of its radial
//! direction. Every model reduces the semigroup at time `t` to a symmetric
//! kernel matrix `h(r_i, r_j, t)` plus measure weights `μ_j`, so
//! `(H_t f)(r_i) = Σ_j h_ij μ_j f_j`.
//!
//! On cones the matrix is the exact Bessel-process kernel sampled at
//! Gauss–Legendre nodes. On surfaces of revolution it is the exact
//! exponential of a vertex-centred finite-volume Laplacian, which keeps the
//! discrete semigroup positive and self-adjoint at every `t`; a
//! Crank–Nicolson march of the same operator is available as a cross-check.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::Exponent;
use crate::error::{invalid, Error, Result};
use crate::kernels::{euclidean_kernel, radial_kernel};
use crate::quadrature::{differentiation_matrix, CompositeRule, gauss_legendre};
use crate::spaces::{ConeSpace, RadialGrid, Space, SpaceDescriptor, SurfaceSpace, PANEL_ORDER};

/// Values below this are treated as exact zeros by the entropy.
pub const ENTROPY_FLOOR: f64 = 1e-300;
/// Kernel matrices kept per model.
const CACHE_SLOTS: usize = 24;

/// Mesh controls for surfaces of revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceResolution {
    /// Width of the first cell at the pole.
    pub first_cell: f64,
    /// Ratio of consecutive cell widths.
    pub growth: f64,
}

impl Default for SurfaceResolution {
    fn default() -> Self {
        SurfaceResolution { first_cell: 5e-3, growth: 1.01 }
    }
}

impl SurfaceResolution {
    /// Halves the first cell and takes the square root of the growth ratio.
    pub fn refined(self) -> Self {
        SurfaceResolution { first_cell: 0.5 * self.first_cell, growth: self.growth.sqrt() }
    }
}

#[derive(Debug)]
struct SurfaceMesh {
    surface: SurfaceSpace,
    /// Free nodes; the Dirichlet node at `radius` is dropped.
    nodes: Vec<f64>,
    mass: Vec<f64>,
    /// `conductance[i]` couples nodes `i` and `i + 1`; the last entry
    /// couples the last free node to the boundary.
    conductance: Vec<f64>,
    radius: f64,
    eigen: OnceLock<(Vec<f64>, DMatrix<f64>)>,
}

impl SurfaceMesh {
    fn new(surface: SurfaceSpace, radius: f64, res: SurfaceResolution) -> Result<Self> {
        if !(res.first_cell > 0.0 && res.growth >= 1.0 && res.growth < 1.5) {
            return Err(invalid("surface mesh needs first_cell > 0 and growth in [1, 1.5)"));
        }
        let mut all = vec![0.0];
        let mut width = res.first_cell;
        while *all.last().unwrap() < radius {
            all.push(all.last().unwrap() + width);
            width *= res.growth;
        }
        if all.len() > 20_000 {
            return Err(invalid(format!("surface mesh would need {} nodes", all.len())));
        }
        let radius = *all.last().unwrap();
        let free = all.len() - 1;
        let mid: Vec<f64> = all.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut mass = Vec::with_capacity(free);
        for i in 0..free {
            let lo = if i == 0 { 0.0 } else { mid[i - 1] };
            mass.push(surface.ball_area(mid[i]) - surface.ball_area(lo));
        }
        let conductance = (0..free)
            .map(|i| 2.0 * PI * surface.profile(mid[i]) / (all[i + 1] - all[i]))
            .collect();
        all.truncate(free);
        Ok(SurfaceMesh { surface, nodes: all, mass, conductance, radius, eigen: OnceLock::new() })
    }

    /// Eigenpairs of `M^{-1/2} S M^{-1/2}`.
    fn eigen(&self) -> &(Vec<f64>, DMatrix<f64>) {
        self.eigen.get_or_init(|| {
            let n = self.nodes.len();
            let mut a = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                let left = if i > 0 { self.conductance[i - 1] } else { 0.0 };
                a[(i, i)] = (left + self.conductance[i]) / self.mass[i];
                if i + 1 < n {
                    let off = -self.conductance[i] / (self.mass[i] * self.mass[i + 1]).sqrt();
                    a[(i, i + 1)] = off;
                    a[(i + 1, i)] = off;
                }
            }
            let eig = SymmetricEigen::new(a);
            (eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect(), eig.eigenvectors)
        })
    }

    fn kernel_matrix(&self, t: f64) -> Vec<f64> {
        let (values, vectors) = self.eigen();
        let n = self.nodes.len();
        let decay: Vec<f64> = values.iter().map(|&l| (-t * l).exp()).collect();
        let scale: Vec<f64> = self.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let mut scaled = vectors.clone();
        for (k, d) in decay.iter().enumerate() {
            let s = d.sqrt();
            scaled.column_mut(k).scale_mut(s);
        }
        let product = &scaled * scaled.transpose();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // e^{-tA} of an M-matrix is entrywise non-negative; negative
                // entries are eigenvector rounding
                out[i * n + j] = (product[(i, j)] * scale[i] * scale[j]).max(0.0);
            }
        }
        out
    }
}

#[derive(Debug)]
enum Discretisation {
    Cone { cone: ConeSpace, grid: RadialGrid },
    Surface(SurfaceMesh),
}

/// Kernel matrices keyed by time. Cones on one grid share theirs, since the
/// radial kernel does not depend on the cross-section.
type KernelCache = Mutex<Vec<(u64, Arc<Vec<f64>>)>>;

#[derive(Debug)]
struct ModelInner {
    disc: Discretisation,
    weights: Vec<f64>,
    /// Factor turning cached matrix entries into `h` for the model measure.
    kernel_scale: f64,
    cache: Arc<KernelCache>,
}

/// A space together with its radial discretisation. Cheap to clone.
#[derive(Debug, Clone)]
pub struct RadialModel(Arc<ModelInner>);

/// `H_t` on a model: symmetric kernel samples plus the model's weights.
#[derive(Debug)]
pub struct Propagator {
    t: f64,
    n: usize,
    kernel: Arc<Vec<f64>>,
    scale: f64,
    weights: Vec<f64>,
}

impl Propagator {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `h(r_i, r_j, t)` with respect to the model measure.
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        self.scale * self.kernel[i * self.n + j]
    }

    pub fn apply_values(&self, f: &[f64]) -> Vec<f64> {
        let weighted: Vec<f64> = f.iter().zip(&self.weights).map(|(a, b)| self.scale * a * b).collect();
        self.kernel
            .par_chunks(self.n)
            .map(|row| row.iter().zip(&weighted).map(|(k, g)| k * g).sum())
            .collect()
    }
}

impl RadialModel {
    /// Cone discretised on a calibrated grid of `points` nodes covering
    /// times up to `t_max`.
    pub fn cone(cone: ConeSpace, t_max: f64, points: usize) -> Result<Self> {
        let grid = RadialGrid::new(cone.dim(), t_max, points)?;
        Ok(Self::cone_on_grid(cone, grid))
    }

    pub fn cone_on_grid(cone: ConeSpace, grid: RadialGrid) -> Self {
        assert_eq!(cone.dim(), grid.dim(), "grid dimension must match the cone");
        let weights = grid.weights().iter().map(|w| w * cone.sigma()).collect();
        Self::from_parts(Discretisation::Cone { cone, grid }, weights, 1.0 / cone.sigma(), Arc::default())
    }

    /// The same grid carrying another cone of the same dimension; kernel
    /// matrices already computed are shared.
    pub fn with_cone(&self, cone: ConeSpace) -> Result<Self> {
        match &self.0.disc {
            Discretisation::Cone { grid, .. } if grid.dim() == cone.dim() => {
                let weights = grid.weights().iter().map(|w| w * cone.sigma()).collect();
                let disc = Discretisation::Cone { cone, grid: grid.clone() };
                Ok(Self::from_parts(disc, weights, 1.0 / cone.sigma(), self.0.cache.clone()))
            }
            _ => Err(Error::GridMismatch),
        }
    }

    /// Surface discretised out to `R = max(11.4 sqrt(t_max), 8)`, where the
    /// Gaussian tail at `t_max` is below `1e-14`.
    pub fn surface(surface: SurfaceSpace, t_max: f64, res: SurfaceResolution) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid(format!("t_max must be positive, got {t_max}")));
        }
        let radius = (11.4 * t_max.sqrt()).max(8.0);
        let mesh = SurfaceMesh::new(surface, radius, res)?;
        let weights = mesh.mass.clone();
        Ok(Self::from_parts(Discretisation::Surface(mesh), weights, 1.0, Arc::default()))
    }

    /// Model for any [`Space`], using `points` for cones and the default
    /// mesh for surfaces.
    pub fn for_space(space: Space, t_max: f64, points: usize) -> Result<Self> {
        match space {
            Space::Cone(c) => Self::cone(c, t_max, points),
            Space::Surface(s) => Self::surface(s, t_max, SurfaceResolution::default()),
        }
    }

    fn from_parts(disc: Discretisation, weights: Vec<f64>, kernel_scale: f64, cache: Arc<KernelCache>) -> Self {
        RadialModel(Arc::new(ModelInner { disc, weights, kernel_scale, cache }))
    }

    pub fn space(&self) -> Space {
        match &self.0.disc {
            Discretisation::Cone { cone, .. } => Space::Cone(*cone),
            Discretisation::Surface(m) => Space::Surface(m.surface),
        }
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        self.space().descriptor()
    }

    pub fn dim(&self) -> f64 {
        self.space().dim()
    }

    pub fn avr(&self) -> f64 {
        self.space().avr()
    }

    pub fn nodes(&self) -> &[f64] {
        match &self.0.disc {
            Discretisation::Cone { grid, .. } => grid.nodes(),
            Discretisation::Surface(m) => &m.nodes,
        }
    }

    /// Measure of each node's share of the space.
    pub fn weights(&self) -> &[f64] {
        &self.0.weights
    }

    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    pub fn radius(&self) -> f64 {
        match &self.0.disc {
            Discretisation::Cone { grid, .. } => grid.radius(),
            Discretisation::Surface(m) => m.radius,
        }
    }

    pub fn is_cone(&self) -> bool {
        matches!(self.0.disc, Discretisation::Cone { .. })
    }

    pub fn same_as(&self, other: &RadialModel) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> RadialFunction {
        let values = self.nodes().iter().map(|&r| f(r)).collect();
        RadialFunction { model: self.clone(), values }
    }

    pub fn function(&self, values: Vec<f64>) -> Result<RadialFunction> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("radial function values must be finite"));
        }
        Ok(RadialFunction { model: self.clone(), values })
    }

    /// `H_t` on this model, cached per `t`. On cones the grid must pass
    /// its Gaussian calibration at `t`.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("time must be positive, got {t}")));
        }
        let n = self.len();
        let make = |kernel| Propagator {
            t,
            n,
            kernel,
            scale: self.0.kernel_scale,
            weights: self.0.weights.clone(),
        };
        let key = t.to_bits();
        if let Some((_, k)) = self.0.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(make(k.clone()));
        }
        let kernel = match &self.0.disc {
            Discretisation::Cone { cone, grid } => {
                grid.calibrate(t)?;
                cone_kernel_matrix(cone.dim(), grid.nodes(), t)?
            }
            Discretisation::Surface(mesh) => {
                if t > 0.0 && (-mesh.radius * mesh.radius / (4.0 * t)).exp() > 1e-12 {
                    return Err(Error::Calibration {
                        t,
                        error: (-mesh.radius * mesh.radius / (4.0 * t)).exp(),
                        tolerance: 1e-12,
                    });
                }
                mesh.kernel_matrix(t)
            }
        };
        let kernel = Arc::new(kernel);
        let mut cache = self.0.cache.lock().unwrap();
        if cache.len() >= CACHE_SLOTS {
            cache.remove(0);
        }
        cache.push((key, kernel.clone()));
        Ok(make(kernel))
    }

    /// `h(o, o, t)` at the tip or pole.
    pub fn pole_diagonal(&self, t: f64) -> Result<f64> {
        match &self.0.disc {
            Discretisation::Cone { cone, .. } => Ok(crate::kernels::tip_kernel(cone, 0.0, t)),
            Discretisation::Surface(mesh) => {
                let (values, vectors) = mesh.eigen();
                let sum: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| (-t * l).exp() * vectors[(0, k)] * vectors[(0, k)])
                    .sum();
                Ok(sum / mesh.mass[0])
            }
        }
    }

    /// Crank–Nicolson evolution of the surface operator with `steps` steps,
    /// the first two replaced by backward-Euler half steps to damp the
    /// stiff modes of rough data.
    pub fn crank_nicolson(&self, f: &RadialFunction, t: f64, steps: usize) -> Result<RadialFunction> {
        let Discretisation::Surface(mesh) = &self.0.disc else {
            return Err(Error::Domain("Crank-Nicolson is only used on surfaces".into()));
        };
        self.check(f)?;
        if !(t > 0.0) || steps < 2 {
            return Err(invalid("need t > 0 and at least two steps"));
        }
        let dt = t / steps as f64;
        let mut u = f.values.clone();
        for _ in 0..2 {
            u = implicit_step(mesh, &u, 0.5 * dt, 0.0)?;
        }
        for _ in 1..steps {
            u = implicit_step(mesh, &u, 0.5 * dt, 0.5 * dt)?;
        }
        Ok(RadialFunction { model: self.clone(), values: u })
    }

    fn check(&self, f: &RadialFunction) -> Result<()> {
        if self.same_as(&f.model) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Radial derivative at the nodes: spectral on each Gauss–Legendre panel
    /// for cones, centred differences for surfaces.
    pub fn derivative(&self, u: &RadialFunction) -> Result<Vec<f64>> {
        self.check(u)?;
        match &self.0.disc {
            Discretisation::Cone { grid, .. } => {
                let mut out = vec![0.0; u.values.len()];
                let (x, _) = gauss_legendre(PANEL_ORDER);
                let d = differentiation_matrix(&x);
                for range in grid.panels() {
                    let scale = 2.0 / (grid.nodes()[range.end - 1] - grid.nodes()[range.start])
                        * (x[PANEL_ORDER - 1] - x[0])
                        / 2.0;
                    let vals = &u.values[range.clone()];
                    for (a, out) in out[range.clone()].iter_mut().enumerate() {
                        let row = &d[a * PANEL_ORDER..(a + 1) * PANEL_ORDER];
                        *out = scale * row.iter().zip(vals).map(|(d, v)| d * v).sum::<f64>();
                    }
                }
                Ok(out)
            }
            Discretisation::Surface(mesh) => {
                let r = &mesh.nodes;
                let n = r.len();
                let at = |i: usize| if i < n { u.values[i] } else { 0.0 };
                let rr = |i: usize| if i < n { r[i] } else { mesh.radius };
                Ok((0..n)
                    .map(|i| if i == 0 { 0.0 } else { (at(i + 1) - at(i - 1)) / (rr(i + 1) - rr(i - 1)) })
                    .collect())
            }
        }
    }
}

/// Radial kernel samples, with respect to `r^{N-1} dr`.
fn cone_kernel_matrix(dim: f64, nodes: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = nodes.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| radial_kernel(dim, nodes[i], nodes[j], t))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    Ok(out)
}

/// Solves `(M + a S) u' = (M - b S) u`; `a` must keep the system diagonally
/// dominant, which it always does for positive conductances.
fn implicit_step(mesh: &SurfaceMesh, u: &[f64], a: f64, b: f64) -> Result<Vec<f64>> {
    let n = u.len();
    let c = &mesh.conductance;
    let left = |i: usize| if i > 0 { c[i - 1] } else { 0.0 };
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let s_u = (left(i) + c[i]) * u[i]
            - if i > 0 { c[i - 1] * u[i - 1] } else { 0.0 }
            - if i + 1 < n { c[i] * u[i + 1] } else { 0.0 };
        rhs[i] = mesh.mass[i] * u[i] - b * s_u;
    }
    let diag: Vec<f64> = (0..n).map(|i| mesh.mass[i] + a * (left(i) + c[i])).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| -a * c[i]).collect();
    for i in 0..n {
        let offs = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        if diag[i] < offs {
            return Err(Error::NonConvergence(format!(
                "implicit step lost diagonal dominance at node {i}"
            )));
        }
    }
    // Thomas algorithm
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - off[i - 1] * cp[i - 1];
        cp[i] = if i + 1 < n { off[i] / denom } else { 0.0 };
        dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    Ok(x)
}

/// A function of the radial coordinate sampled on a model's nodes.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    model: RadialModel,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn model(&self) -> &RadialModel {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialFunction {
        RadialFunction { model: self.model.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> RadialFunction {
        self.map(|v| c * v)
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `∫ f dm`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.model.weights()).map(|(v, w)| v * w).sum()
    }
}

/// `H_t f`.
pub fn apply_heat(f: &RadialFunction, t: f64) -> Result<RadialFunction> {
    let prop = f.model.propagator(t)?;
    Ok(RadialFunction { model: f.model.clone(), values: prop.apply_values(&f.values) })
}

/// `log ‖f‖_p`, evaluated relative to `max |f|` so large exponents stay
/// finite. `-∞` for the zero function.
pub fn ln_lp_norm(f: &RadialFunction, p: Exponent) -> Result<f64> {
    ln_lp_norm_values(&f.values, f.model.weights(), p)
}

pub(crate) fn ln_lp_norm_values(values: &[f64], weights: &[f64], p: Exponent) -> Result<f64> {
    let p = match p {
        Exponent::Infinity => None,
        Exponent::Finite(p) if p >= 1.0 => Some(p),
        Exponent::Finite(p) => return Err(invalid(format!("norm exponent must be >= 1, got {p}"))),
    };
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let Some(p) = p else { return Ok(peak.ln()) };
    let sum: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v.abs() / peak).powf(p))
        .sum();
    Ok(peak.ln() + sum.ln() / p)
}

/// `‖f‖_p` with respect to the model measure.
pub fn lp_norm(f: &RadialFunction, p: Exponent) -> Result<f64> {
    Ok(ln_lp_norm(f, p)?.exp())
}

/// `∫ u log u dm - (∫ u dm) log(∫ u dm)`.
pub fn entropy(u: &RadialFunction) -> Result<f64> {
    if !u.is_non_negative() {
        return Err(invalid("entropy needs a non-negative function"));
    }
    let mut ulogu = 0.0;
    let mut mass = 0.0;
    for (&v, &w) in u.values.iter().zip(u.model.weights()) {
        if v >= ENTROPY_FLOOR {
            ulogu += w * v * v.ln();
            mass += w * v;
        }
    }
    Ok(if mass > 0.0 { ulogu - mass * mass.ln() } else { 0.0 })
}

/// `∫ |u'|² dm`. Surfaces use the discrete energy of the finite-volume
/// operator, so it matches the generator exactly.
pub fn dirichlet_energy(u: &RadialFunction) -> Result<f64> {
    match &u.model.0.disc {
        Discretisation::Cone { .. } => {
            let du = u.model.derivative(u)?;
            Ok(du.iter().zip(u.model.weights()).map(|(d, w)| w * d * d).sum())
        }
        Discretisation::Surface(mesh) => {
            let v = &u.values;
            let n = v.len();
            Ok((0..n)
                .map(|i| {
                    let next = if i + 1 < n { v[i + 1] } else { 0.0 };
                    mesh.conductance[i] * (next - v[i]).powi(2)
                })
                .sum())
        }
    }
}

/// One row of an energy trace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergySample {
    pub s: f64,
    pub energy: f64,
    pub log_energy: f64,
    /// Chord minus value of `log E` at interior times; `NaN` at the ends.
    pub convexity_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub space: SpaceDescriptor,
    pub samples: Vec<EnergySample>,
    pub min_slack: f64,
    pub non_increasing: bool,
    pub positive: bool,
}

impl EnergyTrace {
    pub fn is_log_convex(&self, tol: f64) -> bool {
        self.min_slack >= -tol
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,E,logE,convexity_slack\n");
        for r in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", r.s, r.energy, r.log_energy, r.convexity_slack);
        }
        out
    }
}

/// `E(s) = ‖H_s f‖²₂` along increasing `times` with the midpoint convexity
/// slack of `log E`.
pub fn energy_log_convexity_trace(f: &RadialFunction, times: &[f64]) -> Result<EnergyTrace> {
    if times.len() < 3 || times.windows(2).any(|w| !(w[0] < w[1])) || times[0] <= 0.0 {
        return Err(invalid("need at least three increasing positive times"));
    }
    let energies = times
        .iter()
        .map(|&s| Ok(lp_norm(&apply_heat(f, s)?, Exponent::Finite(2.0))?.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    let logs: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let mut samples = Vec::with_capacity(times.len());
    let mut min_slack = f64::INFINITY;
    for i in 0..times.len() {
        let slack = if i == 0 || i + 1 == times.len() {
            f64::NAN
        } else {
            let (a, b, c) = (times[i - 1], times[i], times[i + 1]);
            let chord = ((c - b) * logs[i - 1] + (b - a) * logs[i + 1]) / (c - a);
            chord - logs[i]
        };
        if slack.is_finite() {
            min_slack = min_slack.min(slack);
        }
        samples.push(EnergySample { s: times[i], energy: energies[i], log_energy: logs[i], convexity_slack: slack });
    }
    Ok(EnergyTrace {
        space: f.model.descriptor(),
        samples,
        min_slack,
        non_increasing: energies.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
        positive: energies.iter().all(|&e| e > 0.0),
    })
}

/// Outcome of convolving a Gaussian with the Euclidean heat kernel.
#[derive(Debug, Clone, Serialize)]
pub struct FourierGaussianReport {
    pub alpha0: f64,
    pub t0: f64,
    pub n: u32,
    pub beta: f64,
    pub beta_expected: f64,
    pub amplitude: f64,
    pub amplitude_expected: f64,
    pub fit_residual: f64,
    pub passed: bool,
}

/// Convolves `e^{-α₀|x|²}` with the heat kernel of `R^n` by direct
/// quadrature and fits `A e^{-β|x|²}` to the result by least squares in
/// `log`.
pub fn fourier_gaussian_check(alpha0: f64, t0: f64, n: u32) -> Result<FourierGaussianReport> {
    if !(alpha0 > 0.0 && t0 > 0.0) {
        return Err(invalid("alpha0 and t0 must be positive"));
    }
    let width = (1.0 / alpha0).sqrt().max((4.0 * t0).sqrt());
    let evaluate = |x: f64| -> f64 {
        match n {
            1 => {
                let rule = CompositeRule::new(-40.0 * width, 40.0 * width, 200, 20);
                rule.integrate(|y| euclidean_kernel(1, x - y, t0) * (-alpha0 * y * y).exp())
            }
            _ => {
                let rule = CompositeRule::new(-16.0 * width, 16.0 * width, 48, 20);
                let inner: Vec<f64> = rule
                    .nodes
                    .iter()
                    .map(|&y2| euclidean_kernel(1, y2, t0) * (-alpha0 * y2 * y2).exp())
                    .collect();
                let mut total = 0.0;
                for (&y1, &w1) in rule.nodes.iter().zip(&rule.weights) {
                    let a = euclidean_kernel(1, x - y1, t0) * (-alpha0 * y1 * y1).exp();
                    let b: f64 = inner.iter().zip(&rule.weights).map(|(v, w)| v * w).sum();
                    total += w1 * a * b;
                }
                total
            }
        }
    };
    if n != 1 && n != 2 {
        return Err(invalid(format!("the Fourier check covers n = 1, 2, got {n}")));
    }
    let xs: Vec<f64> = (0..25).map(|i| 0.125 * i as f64 * width).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| evaluate(x).ln()).collect();
    // least squares for log y = log A - β x²
    let m = xs.len() as f64;
    let u: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let (su, sy) = (u.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let suu: f64 = u.iter().map(|v| v * v).sum();
    let suy: f64 = u.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let slope = (m * suy - su * sy) / (m * suu - su * su);
    let intercept = (sy - slope * su) / m;
    let fit_residual = u
        .iter()
        .zip(&ys)
        .map(|(a, b)| (intercept + slope * a - b).abs())
        .fold(0.0, f64::max);
    let beta_expected = alpha0 / (1.0 + 4.0 * alpha0 * t0);
    let amplitude_expected = (1.0 + 4.0 * alpha0 * t0).powf(-0.5 * n as f64);
    Ok(FourierGaussianReport {
        alpha0,
        t0,
        n,
        beta: -slope,
        beta_expected,
        amplitude: intercept.exp(),
        amplitude_expected,
        fit_residual,
        passed: fit_residual <= 1e-6,
    })
}
