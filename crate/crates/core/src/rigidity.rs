//! Munn–Perelman constants and the arithmetic of the rigidity statements.
//!
//! `C_{k,n}(k)` overflows f64 already for `n = 4` and `δ_{k,n}` underflows
//! with it, while `α_MP` rounds to `1.0`. Everything positive is carried as
//! [`Wide`], an f64 mantissa with an unbounded binary exponent, so relative
//! accuracy stays at f64 level for every `n`; `α_MP` is kept as `1 - α_MP`.

use std::fmt::Write as _;
use std::ops::{Add, Div, Mul};

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::ExponentPair;
use crate::error::{invalid, Error, Result};

const LN_10: f64 = std::f64::consts::LN_10;
const LN_2: f64 = std::f64::consts::LN_2;
/// Binary exponents up to this size also get a plain f64 value.
const PLAIN_EXPONENT_LIMIT: i64 = 1000;
const FIXED_POINT_STEPS: usize = 100;

/// A positive number `m · 2^e` with `m ∈ [1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Wide {
    m: f64,
    e: i64,
}

impl Wide {
    const ONE: Wide = Wide { m: 1.0, e: 0 };

    /// From a positive normal f64.
    fn new(x: f64) -> Wide {
        debug_assert!(x.is_normal() && x > 0.0);
        Wide::normalised(x, 0)
    }

    fn normalised(m: f64, e: i64) -> Wide {
        const EXP_MASK: u64 = 0x7ff << 52;
        let bits = m.to_bits();
        let shift = ((bits & EXP_MASK) >> 52) as i64 - 1023;
        Wide { m: f64::from_bits((bits & !EXP_MASK) | (1023 << 52)), e: e + shift }
    }

    fn powi(self, n: usize) -> Wide {
        (0..n).fold(Wide::ONE, |acc, _| acc * self)
    }

    fn ln(self) -> f64 {
        self.m.ln() + self.e as f64 * LN_2
    }

    fn to_f64(self) -> f64 {
        match self.e {
            e if e > 1023 => f64::INFINITY,
            e if e < -1074 => 0.0,
            e => self.m * 2f64.powi(e as i32),
        }
    }

    fn plain(self) -> Option<f64> {
        (self.e.abs() <= PLAIN_EXPONENT_LIMIT).then(|| self.to_f64())
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, o: Wide) -> Wide {
        Wide::normalised(self.m * o.m, self.e + o.e)
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, o: Wide) -> Wide {
        Wide::normalised(self.m / o.m, self.e - o.e)
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, o: Wide) -> Wide {
        let (a, b) = if self.e >= o.e { (self, o) } else { (o, self) };
        let gap = a.e - b.e;
        if gap > 64 {
            return a;
        }
        Wide::normalised(a.m + b.m * 0.5f64.powi(gap as i32), a.e)
    }
}

fn check_kn(k: usize, n: usize) -> Result<()> {
    if n < 2 || k < 1 || k > n {
        return Err(invalid(format!("need 1 <= k <= n with n >= 2, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// `C_{k,n}(i)`: logarithm always, plain value when inside f64 range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpConstant {
    pub ln: f64,
    pub log10: f64,
    pub value: Option<f64>,
}

fn c_wide(k: usize, n: usize, i: usize) -> Wide {
    let ten = Wide::new(10.0);
    let prefactor = Wide::new(16.0 * k as f64).powi(n - 1);
    (0..i).fold(Wide::ONE, |c, _| {
        Wide::new(3.0) + ten * c + prefactor * (Wide::ONE + ten * c).powi(n)
    })
}

/// The recursion `C(0) = 1`, `C(i) = 3 + 10 C + (16k)^{n-1} (1 + 10 C)^n`.
pub fn mp_c(k: usize, n: usize, i: usize) -> Result<MpConstant> {
    check_kn(k, n)?;
    if i > k {
        return Err(invalid(format!("need i <= k, got i = {i}, k = {k}")));
    }
    let c = c_wide(k, n, i);
    Ok(MpConstant { ln: c.ln(), log10: c.ln() / LN_10, value: c.plain() })
}

/// `10^{k+2} C_{k,n}(k)`.
fn leading(k: usize, n: usize) -> Wide {
    Wide::new(10.0).powi(k + 2) * c_wide(k, n, k)
}

/// `(1 + s/2k)^k`.
fn growth(k: usize, s: Wide) -> f64 {
    if s.e < -60 {
        return 1.0;
    }
    let kf = k as f64;
    (kf * (s.to_f64() / (2.0 * kf)).ln_1p()).exp()
}

/// Solves `lead · s (1 + s/2k)^k = target` by the fixed point
/// `s = (target/lead) / (1 + s/2k)^k`, a strong contraction since
/// `lead ≥ 10³` keeps `s` tiny.
fn solve(lead: Wide, k: usize, target: Wide) -> Result<Wide> {
    let base = target / lead;
    let mut s = base;
    for _ in 0..FIXED_POINT_STEPS {
        let next = base / Wide::new(growth(k, s));
        if next == s {
            return Ok(s);
        }
        s = next;
    }
    // a two-cycle in the last bit is as good as it gets
    let next = base / Wide::new(growth(k, s));
    if next.e == s.e && (next.m - s.m).abs() <= 4.0 * f64::EPSILON {
        return Ok(next);
    }
    Err(Error::NonConvergence(format!("root of the Munn-Perelman equation for k = {k} did not settle")))
}

/// `δ_{k,n}` with the relative residual `|10^{k+2} C δ (1 + δ/2k)^k - 1|`
/// of the root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpDelta {
    pub ln: f64,
    pub log10: f64,
    pub value: Option<f64>,
    pub residual: f64,
}

fn delta_wide(k: usize, n: usize) -> Result<(Wide, f64)> {
    check_kn(k, n)?;
    let lead = leading(k, n);
    let s = solve(lead, k, Wide::ONE)?;
    let residual = ((lead * s).to_f64() * growth(k, s) - 1.0).abs();
    Ok((s, residual))
}

/// Smallest positive root of `10^{k+2} C_{k,n}(k) s (1 + s/2k)^k = 1`; the
/// left side increases strictly, so the root is unique.
pub fn mp_delta(k: usize, n: usize) -> Result<MpDelta> {
    let (s, residual) = delta_wide(k, n)?;
    Ok(MpDelta { ln: s.ln(), log10: s.ln() / LN_10, value: s.plain(), residual })
}

/// `h_{k,n}(s) = [1 - 10^{k+2} C s (1 + s/2k)^k]^{-1}` for `s ∈ (0, δ_{k,n})`.
pub fn mp_h(k: usize, n: usize, s: f64) -> Result<f64> {
    check_kn(k, n)?;
    if !(s.is_normal() && s > 0.0) {
        return Err(Error::Domain(format!("h_{{{k},{n}}} needs s > 0, got {s}")));
    }
    let s = Wide::new(s);
    let lhs = (leading(k, n) * s).to_f64() * growth(k, s);
    if !(lhs < 1.0) {
        return Err(Error::Domain(format!("h_{{{k},{n}}} is defined on (0, delta) only")));
    }
    Ok(1.0 / (1.0 - lhs))
}

/// `h^{-1}_{k,n}(1 + excess)`; the chain feeds excesses far below f64
/// resolution, so `y` is passed through `y - 1`.
fn h_inverse_wide(k: usize, n: usize, excess: Wide) -> Result<Wide> {
    // 1 - 1/y = (y - 1)/y
    solve(leading(k, n), k, excess / (Wide::ONE + excess))
}

/// `h^{-1}_{k,n}(y)` for `y > 1`.
pub fn mp_h_inverse(k: usize, n: usize, y: f64) -> Result<f64> {
    check_kn(k, n)?;
    let excess = y - 1.0;
    if !(excess.is_normal() && excess > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("h^-1 is defined on (1, inf), got {y}")));
    }
    Ok(h_inverse_wide(k, n, Wide::new(excess))?.to_f64())
}

/// `α_MP(k, n)` through its complement `1 - α_MP`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpAlpha {
    pub k: usize,
    pub n: usize,
    pub ln_complement: f64,
    pub log10_complement: f64,
}

impl MpAlpha {
    /// `1 - α`; underflows to 0 beyond f64 range.
    pub fn complement(&self) -> f64 {
        self.ln_complement.exp()
    }

    /// `α` in f64; rounds to 1 for all but the smallest cases.
    pub fn value(&self) -> f64 {
        -self.ln_complement.exp_m1()
    }

    /// `K > α`, decided on complements.
    pub fn is_exceeded_by(&self, k_value: f64) -> bool {
        if k_value >= 1.0 {
            return true;
        }
        (1.0 - k_value).ln() < self.ln_complement
    }
}

/// The Munn–Perelman constant. For `k ≥ 2` the nested `1 + ··· +` chain is
/// read inside-out: `x_{k-1} = h^{-1}_{k-1}(1 + δ_k/2k) / (2(k-1))`, then
/// `x_j = h^{-1}_j(1 + Σ_{i>j} x_i) / (2j)` down to `j = 1`, with
/// `A = 1 + Σ x_i` and `1 - α = [1 + (A / h^{-1}_1(A))^n]^{-1}`.
pub fn mp_alpha(k: usize, n: usize) -> Result<MpAlpha> {
    check_kn(k, n)?;
    let twice = |j: usize| Wide::new(2.0 * j as f64);
    let complement = if k == 1 {
        // 1 - α = 1 / (1 + 2/s) = s / (s + 2)
        let s = h_inverse_wide(1, n, Wide::ONE)?;
        s / (s + Wide::new(2.0))
    } else {
        let (delta, _) = delta_wide(k, n)?;
        let mut sum = h_inverse_wide(k - 1, n, delta / twice(k))? / twice(k - 1);
        for j in (1..k - 1).rev() {
            sum = sum + h_inverse_wide(j, n, sum)? / twice(j);
        }
        let ratio = (Wide::ONE + sum) / h_inverse_wide(1, n, sum)?;
        Wide::ONE / (Wide::ONE + ratio.powi(n))
    };
    let ln = complement.ln();
    Ok(MpAlpha { k, n, ln_complement: ln, log10_complement: ln / LN_10 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MunnPerelmanRow {
    pub k: usize,
    pub c: MpConstant,
    pub delta: MpDelta,
    pub alpha: MpAlpha,
}

#[derive(Debug, Clone, Serialize)]
pub struct MunnPerelmanTable {
    pub n: usize,
    pub rows: Vec<MunnPerelmanRow>,
}

impl MunnPerelmanTable {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid(format!("need n >= 2, got {n}")));
        }
        let rows = (1..=n)
            .into_par_iter()
            .map(|k| {
                Ok(MunnPerelmanRow { k, c: mp_c(k, n, k)?, delta: mp_delta(k, n)?, alpha: mp_alpha(k, n)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MunnPerelmanTable { n, rows })
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.delta.residual).fold(0.0, f64::max)
    }

    /// `α_MP(·, n)` strictly increasing and inside `(0, 1)`.
    pub fn alpha_increasing(&self) -> bool {
        self.rows.iter().all(|r| r.alpha.ln_complement < 0.0 && r.alpha.ln_complement.is_finite())
            && self.rows.windows(2).all(|w| w[1].alpha.ln_complement < w[0].alpha.ln_complement)
    }

    /// Aligned text in scientific notation, computed from the logarithms so
    /// that values outside the f64 range print too.
    pub fn to_text(&self) -> String {
        let mut out = format!("Munn-Perelman constants, n = {}\n", self.n);
        let _ = writeln!(out, "{:>3}  {:>16}  {:>16}  {:>16}  {:>10}", "k", "C(k)", "delta", "1 - alpha", "residual");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>3}  {:>16}  {:>16}  {:>16}  {:>10.2e}",
                r.k,
                scientific(r.c.ln),
                scientific(r.delta.ln),
                scientific(r.alpha.ln_complement),
                r.delta.residual
            );
        }
        out
    }
}

/// `e^{ln}` as `d.dddddde±x` without forming the value.
fn scientific(ln: f64) -> String {
    let log10 = ln / LN_10;
    let mut exponent = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exponent);
    if mantissa >= 9.9999995 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    format!("{mantissa:.6}e{exponent}")
}

/// `(1 + δ)^{pq/(p-q)}`: a constant within the factor `1 + δ` of the sharp
/// bound pins AVR to within this factor of the volume density.
pub fn avr_pinch_from_deficit(pair: ExponentPair, delta: f64) -> Result<f64> {
    if pair.is_diagonal() {
        return Err(invalid("the pinching factor needs p < q"));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!("deficit must be >= 0, got {delta}")));
    }
    // pq/(p - q) = 1/(1/q - 1/p)
    Ok((-delta.ln_1p() / pair.gap()).exp())
}

/// Topological conclusions available from a lower bound `K` on AVR.
#[derive(Debug, Clone, Serialize)]
pub struct TopologyReport {
    pub n: usize,
    #[serde(rename = "K")]
    pub k_value: f64,
    /// Upper bound `⌊1/K⌋` on the order of the fundamental group.
    pub fundamental_group_order_bound: u64,
    pub simply_connected: bool,
    /// Largest `k₀` with `K > α_MP(k₀, n)`; `π_1 = ... = π_{k₀} = 0`.
    pub vanishing_homotopy_up_to: usize,
    pub contractible: bool,
    /// `ln(1 - α_MP(k, n))` for `k = 1..n`, and `ln(1 - K)`.
    pub ln_complements: Vec<f64>,
    pub ln_one_minus_k: f64,
}

pub fn topology_report(n: usize, k_value: f64) -> Result<TopologyReport> {
    if !(k_value > 0.0 && k_value <= 1.0) {
        return Err(invalid(format!("K must lie in (0, 1], got {k_value}")));
    }
    let alphas = (1..=n).map(|k| mp_alpha(k, n)).collect::<Result<Vec<_>>>()?;
    let k0 = alphas.iter().take_while(|a| a.is_exceeded_by(k_value)).count();
    let order = (1.0 / k_value).floor() as u64;
    Ok(TopologyReport {
        n,
        k_value,
        fundamental_group_order_bound: order,
        simply_connected: k_value > 0.5,
        vanishing_homotopy_up_to: k0,
        contractible: alphas[n - 1].is_exceeded_by(k_value),
        ln_complements: alphas.iter().map(|a| a.ln_complement).collect(),
        ln_one_minus_k: (1.0 - k_value).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_small_values() {
        assert_eq!(mp_c(1, 2, 0).unwrap().value, Some(1.0));
        assert_eq!(mp_c(1, 2, 1).unwrap().value, Some(1949.0));
        let c = mp_c(1, 2, 1).unwrap();
        assert!((c.ln - 1949f64.ln()).abs() < 1e-14);
        // k = 2: C(1) = 3 + 10 + 32·11² = 3885, C(2) = 3 + 38850 + 32·38851²
        assert_eq!(mp_c(2, 2, 1).unwrap().value, Some(3885.0));
        assert_eq!(mp_c(2, 2, 2).unwrap().value, Some(3.0 + 38850.0 + 32.0 * 38851f64.powi(2)));
        let big = mp_c(4, 4, 4).unwrap();
        assert!(big.value.is_none() && big.ln > 1000.0);
        assert!(mp_c(3, 2, 1).is_err());
    }

    #[test]
    fn delta_and_inverse_for_k1_n2() {
        let d = mp_delta(1, 2).unwrap();
        assert!((d.value.unwrap() / 5.1308e-7 - 1.0).abs() < 1e-4);
        assert!(d.residual < 1e-15);
        let s = mp_h_inverse(1, 2, 2.0).unwrap();
        assert!((s / 2.5654e-7 - 1.0).abs() < 1e-4);
        assert!((mp_h(1, 2, s).unwrap() - 2.0).abs() < 1e-12);
        assert!(mp_h(1, 2, 1.0).is_err());
    }

    #[test]
    fn alpha_k1_n2() {
        let a = mp_alpha(1, 2).unwrap();
        assert!((a.complement() / 1.2827e-7 - 1.0).abs() < 1e-3);
        assert!(a.value() < 1.0);
    }

    #[test]
    fn wide_arithmetic() {
        let a = Wide::new(3.0);
        let b = Wide::new(1e-300);
        assert_eq!((a * b).to_f64(), 3e-300);
        assert_eq!((a / Wide::new(4.0)).to_f64(), 0.75);
        assert_eq!((a + Wide::new(0.5)).to_f64(), 3.5);
        assert_eq!((a + b).to_f64(), 3.0);
        let huge = Wide::new(1e300).powi(10);
        assert!((huge.ln() - 3000.0 * LN_10).abs() < 1e-11);
        assert_eq!((huge / huge).to_f64(), 1.0);
    }

    #[test]
    fn residuals_stay_small_for_large_n() {
        for n in 2..=7 {
            let table = MunnPerelmanTable::new(n).unwrap();
            assert!(table.max_residual() < 1e-14, "n={n}");
            assert!(table.alpha_increasing(), "n={n}");
        }
    }

    #[test]
    fn scientific_from_logs() {
        assert_eq!(scientific(1949f64.ln()), "1.949000e3");
        assert_eq!(scientific(-5000.0 * LN_10), "1.000000e-5000");
    }

    #[test]
    fn pinch_factor() {
        let pair = ExponentPair::from_f64(2.0, 4.0).unwrap();
        assert_eq!(avr_pinch_from_deficit(pair, 0.0).unwrap(), 1.0);
        assert!((avr_pinch_from_deficit(pair, 0.01).unwrap() - 1.01f64.powi(-4)).abs() < 1e-15);
    }

    #[test]
    fn topology_thresholds() {
        let r = topology_report(3, 0.6).unwrap();
        assert!(r.simply_connected && r.fundamental_group_order_bound == 1);
        let r = topology_report(3, 0.3).unwrap();
        assert_eq!(r.fundamental_group_order_bound, 3);
        assert_eq!(r.vanishing_homotopy_up_to, 0);
        assert!(topology_report(2, 1.0).unwrap().contractible);
    }
}
