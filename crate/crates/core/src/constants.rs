//! Closed-form constants: the exponent constant `M(p, q)`, the sharp
//! hypercontractivity bound, and the Gaussian extremizer parameters.
//!
//! Exponents are handled through their reciprocals `1/p`, `1/q`, which keeps
//! `∞` exact (`1/∞ = 0`) and turns the limiting conventions for `M` into
//! ordinary evaluations of `x ↦ x ln x` with `0 ln 0 = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::special::{gamma, ln_gamma};

/// Reciprocal gaps below this are treated as `p = q`.
pub const EQUAL_EXPONENT_EPS: f64 = 1e-15;

/// An extended real exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(invalid(format!("exponent must lie in [1, inf], got {p}")))
        }
    }

    /// `1/p`, exact zero at infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| invalid(format!("cannot parse exponent {s:?}")))?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// An admissible pair `1 ≤ p ≤ q ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct ExponentPair {
    p: Exponent,
    q: Exponent,
}

#[derive(Deserialize)]
struct RawPair {
    p: Exponent,
    q: Exponent,
}

impl TryFrom<RawPair> for ExponentPair {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        ExponentPair::new(raw.p, raw.q)
    }
}

impl ExponentPair {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        if let Exponent::Finite(v) = p {
            Exponent::finite(v)?;
        }
        if let Exponent::Finite(v) = q {
            Exponent::finite(v)?;
        }
        if p.reciprocal() < q.reciprocal() {
            return Err(invalid(format!("need p <= q, got p = {p}, q = {q}")));
        }
        Ok(ExponentPair { p, q })
    }

    /// Pair of finite-or-infinite floats; `f64::INFINITY` maps to `∞`.
    pub fn from_f64(p: f64, q: f64) -> Result<Self> {
        ExponentPair::new(Exponent::finite(p)?, Exponent::finite(q)?)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    /// `1/p - 1/q ≥ 0`, snapped to zero below [`EQUAL_EXPONENT_EPS`].
    pub fn gap(&self) -> f64 {
        let g = self.p.reciprocal() - self.q.reciprocal();
        if g < EQUAL_EXPONENT_EPS {
            0.0
        } else {
            g
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.gap() == 0.0
    }

    /// The dual pair `(q', p')`.
    pub fn dual(&self) -> ExponentPair {
        ExponentPair { p: self.q.conjugate(), q: self.p.conjugate() }
    }

    /// `1 < p < q < ∞`, the regime of the equality theory.
    pub fn is_strict_interior(&self) -> bool {
        matches!((self.p, self.q), (Exponent::Finite(p), Exponent::Finite(_)) if p > 1.0)
            && !self.is_diagonal()
    }

    fn require_strict_interior(&self) -> Result<(f64, f64)> {
        if !self.is_strict_interior() {
            return Err(Error::Domain(format!(
                "extremizer parameters need 1 < p < q < inf, got ({}, {})",
                self.p, self.q
            )));
        }
        Ok((self.p.reciprocal(), self.q.reciprocal()))
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln M(p, q)`.
pub fn ln_m_constant(pair: ExponentPair) -> f64 {
    if pair.is_diagonal() {
        return 0.0;
    }
    let a = pair.p.reciprocal();
    let b = pair.q.reciprocal();
    // p^{1/p} = e^{-a ln a}, (1-1/p)^{1-1/p} = e^{(1-a) ln(1-a)}
    (-xlogx(a) + xlogx(1.0 - a)) - (-xlogx(b) + xlogx(1.0 - b)) + xlogx(a - b)
}

/// The constant `M(p, q)` with its limiting conventions at `p = 1`, `p = q`
/// and `q = ∞`.
pub fn m_constant(pair: ExponentPair) -> f64 {
    ln_m_constant(pair).exp()
}

/// Volume of the unit ball in dimension `dim`, `π^{N/2} / Γ(N/2 + 1)`.
pub fn omega(dim: f64) -> f64 {
    if dim <= 100.0 {
        PI.powf(0.5 * dim) / gamma(0.5 * dim + 1.0)
    } else {
        (0.5 * dim * PI.ln() - ln_gamma(0.5 * dim + 1.0)).exp()
    }
}

/// Inputs of the sharp bound, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpBoundInputs {
    pub pair: ExponentPair,
    #[serde(rename = "N")]
    pub dim: f64,
    pub avr: f64,
    pub t: f64,
}

impl SharpBoundInputs {
    pub fn new(pair: ExponentPair, dim: f64, avr: f64, t: f64) -> Result<Self> {
        if !(dim.is_finite() && dim > 1.0) {
            return Err(invalid(format!("dimension must exceed 1, got {dim}")));
        }
        if !(avr > 0.0 && avr <= 1.0) {
            return Err(invalid(format!("AVR must lie in (0, 1], got {avr}")));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("time must be positive, got {t}")));
        }
        Ok(SharpBoundInputs { pair, dim, avr, t })
    }
}

/// `ln` of the sharp bound, see [`sharp_bound`].
pub fn ln_sharp_bound(inputs: &SharpBoundInputs) -> f64 {
    let gap = inputs.pair.gap();
    if gap == 0.0 {
        return 0.0;
    }
    let half = 0.5 * inputs.dim;
    half * ln_m_constant(inputs.pair) - gap * inputs.avr.ln() - half * gap * (4.0 * PI * inputs.t).ln()
}

/// `M(p,q)^{N/2} AVR^{1/q-1/p} (4πt)^{-(N/2)(1/p-1/q)}`; exactly 1 when `p = q`.
pub fn sharp_bound(inputs: &SharpBoundInputs) -> f64 {
    ln_sharp_bound(inputs).exp()
}

/// Gaussian rate `α₀` of the unique extremizer `e^{-α₀ d²(x₀,·)}` at time `t0`.
pub fn extremizer_alpha(pair: ExponentPair, t0: f64) -> Result<f64> {
    let (a, b) = pair.require_strict_interior()?;
    check_time(t0)?;
    // p/(p-1) = 1/(1 - 1/p)
    Ok((a - b) / (4.0 * t0 * (1.0 - a)))
}

/// Gaussian rate `β₀` of `H_{t0} f` for the extremizer `f`.
pub fn extremizer_beta(pair: ExponentPair, t0: f64) -> Result<f64> {
    let (a, b) = pair.require_strict_interior()?;
    check_time(t0)?;
    Ok((a - b) / (4.0 * t0 * (1.0 - b)))
}

/// `t̃ = t0 q(p-1)/(q-p)`: the extremizer is the tip kernel at time `t̃`.
pub fn gaussian_time_shift(pair: ExponentPair, t0: f64) -> Result<f64> {
    pair.require_strict_interior()?;
    check_time(t0)?;
    Ok(t0 * optimal_a(pair)?)
}

/// Maximiser `a_max = q(p-1)/(q-p)` of [`profile_ratio`]; `p - 1` when `q = ∞`.
pub fn optimal_a(pair: ExponentPair) -> Result<f64> {
    let a = pair.p.reciprocal();
    let b = pair.q.reciprocal();
    if a >= 1.0 || pair.is_diagonal() {
        return Err(Error::Domain(format!(
            "optimal time factor needs 1 < p < q, got ({}, {})",
            pair.p, pair.q
        )));
    }
    Ok((1.0 - a) / (a - b))
}

/// `h(a) = (1+a)^{1/q-1} / a^{1/p-1}`, the ratio maximised by the extremizer
/// time factor.
pub fn profile_ratio(pair: ExponentPair, a: f64) -> f64 {
    let rp = pair.p.reciprocal();
    let rq = pair.q.reciprocal();
    ((rq - 1.0) * a.ln_1p() - (rp - 1.0) * a.ln()).exp()
}

/// The value `h(a_max)` must attain:
/// `(1-1/p)^{1-1/p} (1-1/q)^{-(1-1/q)} (1/p-1/q)^{1/p-1/q}`.
pub fn profile_ratio_target(pair: ExponentPair) -> f64 {
    let a = pair.p.reciprocal();
    let b = pair.q.reciprocal();
    (xlogx(1.0 - a) - xlogx(1.0 - b) + xlogx(a - b)).exp()
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("time must be positive, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: f64, q: f64) -> ExponentPair {
        ExponentPair::from_f64(p, q).unwrap()
    }

    #[test]
    fn m_limiting_conventions() {
        assert_eq!(m_constant(pair(2.0, 2.0)), 1.0);
        assert_eq!(m_constant(pair(1.0, f64::INFINITY)), 1.0);
        let q: f64 = 3.0;
        assert!((m_constant(pair(1.0, q)) - q.powf(-1.0 / q)).abs() < 1e-15);
        let p: f64 = 3.0;
        let expect = (1.0 - 1.0 / p).powf(1.0 - 1.0 / p);
        assert!((m_constant(pair(p, f64::INFINITY)) - expect).abs() < 1e-15);
    }

    #[test]
    fn pair_validation() {
        assert!(ExponentPair::from_f64(4.0, 2.0).is_err());
        assert!(ExponentPair::from_f64(0.5, 2.0).is_err());
        assert!(ExponentPair::from_f64(f64::NAN, 2.0).is_err());
        assert!(ExponentPair::from_f64(f64::INFINITY, f64::INFINITY).is_ok());
        let dual = pair(2.0, 4.0).dual();
        assert_eq!(dual.p(), Exponent::Finite(4.0 / 3.0));
        assert_eq!(dual.q(), Exponent::Finite(2.0));
        assert_eq!(pair(1.0, f64::INFINITY).dual(), pair(1.0, f64::INFINITY));
    }

    #[test]
    fn omega_small_dimensions() {
        assert!((omega(1.0) - 2.0).abs() < 1e-14);
        assert!((omega(2.0) - PI).abs() < 1e-14);
        assert!((omega(3.0) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn sharp_bound_instances() {
        let diag = SharpBoundInputs::new(pair(3.0, 3.0), 2.7, 0.3, 5.0).unwrap();
        assert_eq!(sharp_bound(&diag), 1.0);
        let ultra = SharpBoundInputs::new(pair(1.0, f64::INFINITY), 2.0, 1.0, 1.0 / (4.0 * PI)).unwrap();
        assert!((sharp_bound(&ultra) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn input_validation() {
        assert!(SharpBoundInputs::new(pair(1.0, 2.0), 1.0, 0.5, 1.0).is_err());
        assert!(SharpBoundInputs::new(pair(1.0, 2.0), 2.0, 1.5, 1.0).is_err());
        assert!(SharpBoundInputs::new(pair(1.0, 2.0), 2.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn extremizer_parameters() {
        let p24 = pair(2.0, 4.0);
        assert!((extremizer_alpha(p24, 1.0).unwrap() - 0.125).abs() < 1e-16);
        assert!((extremizer_alpha(p24, 2.0).unwrap() - 0.0625).abs() < 1e-16);
        assert!((extremizer_alpha(pair(1.5, 3.0), 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((extremizer_beta(p24, 1.0).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((gaussian_time_shift(p24, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((gaussian_time_shift(pair(1.5, 3.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((optimal_a(p24).unwrap() - 2.0).abs() < 1e-15);
        assert!((optimal_a(pair(2.0, f64::INFINITY)).unwrap() - 1.0).abs() < 1e-15);
        let tiny = extremizer_beta(pair(2.0, 2.0 + 1e-9), 1.0).unwrap();
        assert!(tiny < 1e-9);
    }

    #[test]
    fn extremizer_domain_errors() {
        assert!(extremizer_alpha(pair(1.0, 4.0), 1.0).is_err());
        assert!(extremizer_alpha(pair(2.0, 2.0), 1.0).is_err());
        assert!(extremizer_alpha(pair(2.0, f64::INFINITY), 1.0).is_err());
        assert!(extremizer_beta(pair(2.0, f64::INFINITY), 1.0).is_err());
        assert!(optimal_a(pair(2.0, 2.0)).is_err());
        assert!(optimal_a(pair(1.0, 3.0)).is_err());
        assert!(extremizer_alpha(pair(2.0, 4.0), 0.0).is_err());
    }

    #[test]
    fn exponent_parsing_and_serde() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("0.3".parse::<Exponent>().is_err());
        let json = serde_json::to_string(&pair(2.0, f64::INFINITY)).unwrap();
        assert_eq!(json, r#"{"p":2.0,"q":"inf"}"#);
        let back: ExponentPair = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pair(2.0, f64::INFINITY));
        assert!(serde_json::from_str::<ExponentPair>(r#"{"p":4,"q":2}"#).is_err());
    }
}
