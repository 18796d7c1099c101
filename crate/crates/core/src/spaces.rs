//! Model spaces: Euclidean cones `C(Z)` with measure `r^{N-1} dr ⊗ m_Z`,
//! a family of smooth non-negatively curved surfaces of revolution, and
//! the radial quadrature grids used to discretise functions on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::omega;
use crate::error::{invalid, Error, Result};
use crate::quadrature::CompositeRule;
use crate::special::gamma;

/// Points per Gauss–Legendre panel of a [`RadialGrid`].
pub const PANEL_ORDER: usize = 16;
/// Relative tolerance of the Gaussian self-calibration of a grid.
pub const GRID_CALIBRATION_TOL: f64 = 1e-10;

/// An `N`-Euclidean cone, described by its dimension and the total measure
/// `sigma` of its cross-section. Only the asymptotic volume ratio
/// `sigma / (N ω_N)` enters the heat-flow constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpace {
    dim: f64,
    sigma: f64,
}

/// Polar coordinates on a cone; `phi` only matters for two-dimensional cones
/// and is read modulo the cone angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub phi: f64,
}

impl ConePoint {
    pub const TIP: ConePoint = ConePoint { r: 0.0, phi: 0.0 };

    pub fn new(r: f64, phi: f64) -> Self {
        ConePoint { r, phi }
    }

    pub fn is_tip(&self) -> bool {
        self.r == 0.0
    }
}

impl ConeSpace {
    pub fn new(dim: f64, sigma: f64) -> Result<Self> {
        if !(dim.is_finite() && dim > 1.0) {
            return Err(invalid(format!("cone dimension must exceed 1, got {dim}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!("cross-section measure must be positive, got {sigma}")));
        }
        let cone = ConeSpace { dim, sigma };
        if cone.avr() > 1.0 + 1e-12 {
            return Err(invalid(format!(
                "cross-section measure {sigma} gives AVR {} > 1",
                cone.avr()
            )));
        }
        Ok(cone)
    }

    /// Two-dimensional cone over a circle of length `theta ∈ (0, 2π]`.
    pub fn planar(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 2.0 * PI * (1.0 + 1e-15)) {
            return Err(invalid(format!("cone angle must lie in (0, 2pi], got {theta}")));
        }
        Ok(ConeSpace { dim: 2.0, sigma: theta.min(2.0 * PI) })
    }

    /// `R^N` viewed as the cone over the unit sphere.
    pub fn euclidean(dim: f64) -> Result<Self> {
        if dim == 2.0 {
            return Self::planar(2.0 * PI);
        }
        Self::new(dim, dim * omega(dim))
    }

    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_planar(&self) -> bool {
        self.dim == 2.0
    }

    /// Cone angle of a two-dimensional cone.
    pub fn theta(&self) -> Option<f64> {
        self.is_planar().then_some(self.sigma)
    }

    pub fn avr(&self) -> f64 {
        if self.is_planar() {
            self.sigma / (2.0 * PI)
        } else {
            self.sigma / (self.dim * omega(self.dim))
        }
    }

    /// `m(B_r(tip)) = sigma r^N / N`.
    pub fn ball_volume_tip(&self, r: f64) -> f64 {
        self.sigma * r.powf(self.dim) / self.dim
    }

    /// The cone carrying the metric `r·d` and the measure `tau·m`.
    pub fn rescaled(&self, r: f64, tau: f64) -> Result<Self> {
        if !(r > 0.0 && tau > 0.0) {
            return Err(invalid("rescaling factors must be positive"));
        }
        Ok(ConeSpace { dim: self.dim, sigma: self.sigma * tau / r.powf(self.dim) })
    }

    fn require_planar(&self) -> Result<f64> {
        self.theta().ok_or_else(|| {
            Error::Domain(format!(
                "two-point geometry is only available on 2-D cones (N = {})",
                self.dim
            ))
        })
    }

    /// Circular angular separation in `[0, theta/2]`.
    pub fn angular_separation(&self, x: ConePoint, y: ConePoint) -> Result<f64> {
        let theta = self.require_planar()?;
        let d = (x.phi - y.phi).abs().rem_euclid(theta);
        Ok(d.min(theta - d))
    }

    pub fn distance(&self, x: ConePoint, y: ConePoint) -> Result<f64> {
        let delta = self.angular_separation(x, y)?;
        if delta < PI {
            let d2 = x.r * x.r + y.r * y.r - 2.0 * x.r * y.r * delta.cos();
            Ok(d2.max(0.0).sqrt())
        } else {
            Ok(x.r + y.r)
        }
    }

    /// `m(B_ρ(x))` on a 2-D cone, by quadrature of the angular measure of
    /// each distance circle around the tip.
    pub fn ball_volume(&self, center: ConePoint, radius: f64) -> Result<f64> {
        let theta = self.require_planar()?;
        if radius <= 0.0 {
            return Ok(0.0);
        }
        let r = center.r;
        if r == 0.0 {
            return Ok(self.ball_volume_tip(radius));
        }
        // Angular measure of {φ' : d(x, (s, φ')) < ρ}.
        let arc = |s: f64| -> f64 {
            if s <= 0.0 {
                return theta;
            }
            let c = (r * r + s * s - radius * radius) / (2.0 * r * s);
            let delta_star = c.clamp(-1.0, 1.0).acos();
            2.0 * delta_star.min(0.5 * theta)
        };
        // Breakpoints where the integrand has kinks.
        let mut breaks = vec![0.0, (r - radius).abs(), r + radius];
        if theta < 2.0 * PI {
            // δ* = θ/2 ⇔ s² - 2 r s cos(θ/2) + r² - ρ² = 0
            let c = (0.5 * theta).cos();
            let disc = r * r * c * c - (r * r - radius * radius);
            if disc >= 0.0 {
                for root in [r * c - disc.sqrt(), r * c + disc.sqrt()] {
                    if root > 0.0 && root < r + radius {
                        breaks.push(root);
                    }
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut total = 0.0;
        for seg in breaks.windows(2) {
            if seg[1] - seg[0] <= 0.0 {
                continue;
            }
            let rule = CompositeRule::new(seg[0], seg[1], 64, PANEL_ORDER);
            total += rule.integrate(|s| s * arc(s));
        }
        Ok(total)
    }

    /// Volume density `lim m(B_r(x)) / (ω_N r^N)` as `r → 0`.
    pub fn volume_density(&self, x: ConePoint) -> f64 {
        if x.is_tip() {
            self.avr()
        } else {
            1.0
        }
    }

    /// Infimum of the volume density, attained at the tip.
    pub fn inf_volume_density(&self) -> f64 {
        self.avr().min(1.0)
    }
}

/// Surface of revolution with profile `φ(r) = c r + (1-c)(1 - e^{-r})`:
/// no angle defect at the pole (`φ'(0) = 1`), Gauss curvature
/// `-φ''/φ ≥ 0`, asymptotic slope `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpace {
    c: f64,
}

impl SurfaceSpace {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(invalid(format!("asymptotic slope must lie in (0, 1], got {c}")));
        }
        Ok(SurfaceSpace { c })
    }

    pub fn slope(&self) -> f64 {
        self.c
    }

    pub fn profile(&self, r: f64) -> f64 {
        self.c * r - (1.0 - self.c) * (-r).exp_m1()
    }

    pub fn profile_derivative(&self, r: f64) -> f64 {
        self.c + (1.0 - self.c) * (-r).exp()
    }

    pub fn profile_second_derivative(&self, r: f64) -> f64 {
        -(1.0 - self.c) * (-r).exp()
    }

    /// `-φ''/φ`. Since `φ''(0) = c - 1`, it blows up like `(1-c)/r` at the
    /// pole: the metric is `C^{1,1}` there, with no angle defect.
    pub fn gauss_curvature(&self, r: f64) -> f64 {
        if r == 0.0 {
            return if self.c == 1.0 { 0.0 } else { f64::INFINITY };
        }
        -self.profile_second_derivative(r) / self.profile(r)
    }

    /// `∫₀^r φ`.
    pub fn profile_integral(&self, r: f64) -> f64 {
        // r - 1 + e^{-r} = r + expm1(-r)
        0.5 * self.c * r * r + (1.0 - self.c) * (r + (-r).exp_m1())
    }

    /// Area of the geodesic ball of radius `r` around the pole.
    pub fn ball_area(&self, r: f64) -> f64 {
        2.0 * PI * self.profile_integral(r)
    }

    /// `area(B_r) / (π r²)`, non-increasing in `r` by Bishop–Gromov.
    pub fn area_ratio(&self, r: f64) -> f64 {
        self.ball_area(r) / (PI * r * r)
    }

    pub fn avr(&self) -> f64 {
        self.c
    }

    /// Numerical asymptotic volume ratio: area ratio at `r` and `2r` with
    /// one Richardson step in `1/r`, plus the difference from `c`.
    pub fn avr_numeric(&self, r: f64) -> (f64, f64) {
        let rule = CompositeRule::new(0.0, 2.0 * r, 2048, PANEL_ORDER);
        let half = CompositeRule::new(0.0, r, 1024, PANEL_ORDER);
        let area = |rule: &CompositeRule, radius: f64| {
            2.0 * rule.integrate(|s| self.profile(s)) / (radius * radius)
        };
        let coarse = area(&half, r);
        let fine = area(&rule, 2.0 * r);
        let estimate = 2.0 * fine - coarse;
        (estimate, (estimate - self.c).abs())
    }
}

/// Nodes and weights for `∫₀^R f(r) r^{N-1} dr`: composite Gauss–Legendre
/// panels of [`PANEL_ORDER`] points on `[0, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: f64,
    radius: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Truncation radius `12 sqrt(t_max) max(1, sqrt N)`; the grid is
    /// rejected if the Gaussian self-calibration fails at `t_max`.
    pub fn new(dim: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid(format!("t_max must be positive, got {t_max}")));
        }
        let radius = 12.0 * t_max.sqrt() * dim.sqrt().max(1.0);
        let grid = Self::with_radius(dim, radius, points)?;
        grid.calibrate(t_max)?;
        Ok(grid)
    }

    /// Grid on `[0, radius]` without calibration.
    pub fn with_radius(dim: f64, radius: f64, points: usize) -> Result<Self> {
        if !(dim.is_finite() && dim >= 1.0) {
            return Err(invalid(format!("grid dimension must be >= 1, got {dim}")));
        }
        if points < 64 {
            return Err(invalid(format!("a radial grid needs at least 64 points, got {points}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!("grid radius must be positive, got {radius}")));
        }
        let panels = points.div_ceil(PANEL_ORDER);
        let rule = CompositeRule::new(0.0, radius, panels, PANEL_ORDER);
        let weights = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&r, &w)| w * r.powf(dim - 1.0))
            .collect();
        Ok(RadialGrid { dim, radius, nodes: rule.nodes, weights })
    }

    pub fn dim(&self) -> f64 {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }

    /// Relative error of `∫ e^{-r²/4t} r^{N-1} dr` against
    /// `½ (4t)^{N/2} Γ(N/2)`; errors out above [`GRID_CALIBRATION_TOL`].
    pub fn calibrate(&self, t: f64) -> Result<f64> {
        let exact = 0.5 * (4.0 * t).powf(0.5 * self.dim) * gamma(0.5 * self.dim);
        let got = self.integrate(|r| (-r * r / (4.0 * t)).exp());
        let error = ((got - exact) / exact).abs();
        if error > GRID_CALIBRATION_TOL || !error.is_finite() {
            return Err(Error::Calibration { t, error, tolerance: GRID_CALIBRATION_TOL });
        }
        Ok(error)
    }

    /// Panel index ranges, for panel-local operations.
    pub(crate) fn panels(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.nodes.len() / PANEL_ORDER).map(|p| p * PANEL_ORDER..(p + 1) * PANEL_ORDER)
    }
}

/// JSON description of a space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceDescriptor {
    Cone {
        #[serde(rename = "N")]
        dim: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Surface {
        c: f64,
    },
    Euclidean {
        #[serde(rename = "N")]
        dim: f64,
    },
}

/// A validated space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    Cone(ConeSpace),
    Surface(SurfaceSpace),
}

impl Space {
    pub fn dim(&self) -> f64 {
        match self {
            Space::Cone(c) => c.dim(),
            Space::Surface(_) => 2.0,
        }
    }

    pub fn avr(&self) -> f64 {
        match self {
            Space::Cone(c) => c.avr(),
            Space::Surface(s) => s.avr(),
        }
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        match self {
            Space::Cone(c) if c.is_planar() => {
                SpaceDescriptor::Cone { dim: 2.0, theta: c.theta(), sigma: None }
            }
            Space::Cone(c) => SpaceDescriptor::Cone { dim: c.dim(), theta: None, sigma: Some(c.sigma()) },
            Space::Surface(s) => SpaceDescriptor::Surface { c: s.slope() },
        }
    }
}

impl TryFrom<SpaceDescriptor> for Space {
    type Error = Error;

    fn try_from(d: SpaceDescriptor) -> Result<Self> {
        match d {
            SpaceDescriptor::Cone { dim, theta: Some(theta), sigma } => {
                if dim != 2.0 {
                    return Err(invalid("theta is only meaningful for N = 2 cones"));
                }
                if sigma.is_some_and(|s| s != theta) {
                    return Err(invalid("theta and sigma disagree for a 2-D cone"));
                }
                Ok(Space::Cone(ConeSpace::planar(theta)?))
            }
            SpaceDescriptor::Cone { dim, theta: None, sigma: Some(sigma) } => {
                Ok(Space::Cone(ConeSpace::new(dim, sigma)?))
            }
            SpaceDescriptor::Cone { dim, theta: None, sigma: None }
            | SpaceDescriptor::Euclidean { dim } => Ok(Space::Cone(ConeSpace::euclidean(dim)?)),
            SpaceDescriptor::Surface { c } => Ok(Space::Surface(SurfaceSpace::new(c)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_avr_values() {
        assert_eq!(ConeSpace::planar(2.0 * PI).unwrap().avr(), 1.0);
        assert_eq!(ConeSpace::planar(PI).unwrap().avr(), 0.5);
        let c3 = ConeSpace::new(3.0, 4.0 * PI).unwrap();
        assert!((c3.avr() - 1.0).abs() < 1e-14);
        assert!(ConeSpace::planar(7.0).is_err());
        assert!(ConeSpace::new(3.0, 20.0).is_err());
        assert!(ConeSpace::new(1.0, 1.0).is_err());
    }

    #[test]
    fn tip_ball_volume() {
        let cone = ConeSpace::planar(PI).unwrap();
        assert_eq!(cone.ball_volume_tip(0.0), 0.0);
        assert!((cone.ball_volume_tip(2.0) - 2.0 * PI).abs() < 1e-14);
        for r in [0.1, 1.0, 7.5] {
            let ratio = cone.ball_volume_tip(r) / (omega(2.0) * r * r);
            assert!((ratio - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn planar_distance() {
        let plane = ConeSpace::planar(2.0 * PI).unwrap();
        let d = plane.distance(ConePoint::new(1.0, 0.0), ConePoint::new(1.0, PI)).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        let d = plane.distance(ConePoint::TIP, ConePoint::new(2.5, 1.0)).unwrap();
        assert_eq!(d, 2.5);
        let half = ConeSpace::planar(PI).unwrap();
        let d = half.distance(ConePoint::new(1.0, 0.0), ConePoint::new(1.0, 0.5 * PI)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        // φ is read modulo the cone angle
        let d2 = half.distance(ConePoint::new(1.0, 0.0), ConePoint::new(1.0, 2.5 * PI)).unwrap();
        assert!((d - d2).abs() < 1e-14);
        assert!(ConeSpace::new(3.0, 1.0).unwrap().distance(ConePoint::TIP, ConePoint::TIP).is_err());
    }

    #[test]
    fn ball_volume_off_tip() {
        let plane = ConeSpace::planar(2.0 * PI).unwrap();
        let v = plane.ball_volume(ConePoint::new(3.0, 1.0), 1.5).unwrap();
        assert!((v - PI * 2.25).abs() < 1e-5);
        // a ball around x that does not reach the tip is a flat disk
        let cone = ConeSpace::planar(PI).unwrap();
        let v = cone.ball_volume(ConePoint::new(3.0, 0.0), 1.0).unwrap();
        assert!((v - PI).abs() < 1e-5);
        // radius far beyond r: approaches the tip ball
        let big = cone.ball_volume(ConePoint::new(0.01, 0.0), 50.0).unwrap();
        assert!((big / cone.ball_volume_tip(50.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn surface_profile() {
        let s = SurfaceSpace::new(0.5).unwrap();
        assert_eq!(s.profile(0.0), 0.0);
        assert!((s.profile_derivative(0.0) - 1.0).abs() < 1e-15);
        for r in [0.0, 0.5, 3.0, 40.0] {
            assert!(s.profile_second_derivative(r) <= 0.0);
            assert!(s.gauss_curvature(r) >= 0.0);
        }
        assert!((s.gauss_curvature(1e-8) * 1e-8 - 0.5).abs() < 1e-6);
        assert_eq!(SurfaceSpace::new(1.0).unwrap().gauss_curvature(0.0), 0.0);
        assert!((s.profile(1e6) / 1e6 - 0.5).abs() < 1e-6);
        assert!(SurfaceSpace::new(0.0).is_err());
        assert!(SurfaceSpace::new(1.2).is_err());
    }

    #[test]
    fn surface_avr_limit() {
        for c in [1.0, 0.5, 0.2] {
            let s = SurfaceSpace::new(c).unwrap();
            assert_eq!(s.avr(), c);
            let (est, err) = s.avr_numeric(1e3);
            assert!(err < 1e-4, "c = {c}: {est}");
        }
    }

    #[test]
    fn grid_moments() {
        let g2 = RadialGrid::new(2.0, 1.0, 512).unwrap();
        assert!((g2.integrate(|r| (-r * r).exp()) - 0.5).abs() < 1e-12);
        let g3 = RadialGrid::new(3.0, 1.0, 512).unwrap();
        assert!((g3.integrate(|r| (-r * r).exp()) - PI.sqrt() / 4.0).abs() < 1e-10);
        let measure: f64 = g3.weights().iter().sum();
        let exact = g3.radius().powi(3) / 3.0;
        assert!(((measure - exact) / exact).abs() < 1e-12);
        assert!(RadialGrid::new(2.0, 1.0, 32).is_err());
        assert_eq!(g2.len(), 512);
        assert!(g2.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_calibration_fails_when_underresolved() {
        let g = RadialGrid::new(2.0, 100.0, 64).unwrap();
        assert!(matches!(g.calibrate(1e-4), Err(Error::Calibration { .. })));
    }

    #[test]
    fn descriptor_json() {
        let d: SpaceDescriptor = serde_json::from_str(r#"{"kind":"cone","N":2,"theta":3.0}"#).unwrap();
        let space = Space::try_from(d).unwrap();
        assert!((space.avr() - 3.0 / (2.0 * PI)).abs() < 1e-15);
        let d: SpaceDescriptor = serde_json::from_str(r#"{"kind":"surface","c":0.5}"#).unwrap();
        assert_eq!(Space::try_from(d).unwrap().avr(), 0.5);
        let d: SpaceDescriptor = serde_json::from_str(r#"{"kind":"euclidean","N":3}"#).unwrap();
        assert!((Space::try_from(d).unwrap().avr() - 1.0).abs() < 1e-14);
        let bad: SpaceDescriptor = serde_json::from_str(r#"{"kind":"cone","N":3,"theta":3.0}"#).unwrap();
        assert!(Space::try_from(bad).is_err());
        let round = serde_json::to_string(&space.descriptor()).unwrap();
        assert_eq!(round, r#"{"kind":"cone","N":2.0,"theta":3.0}"#);
    }
}
