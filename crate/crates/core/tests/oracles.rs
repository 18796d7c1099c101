//! Library values checked against oracles computed independently here.

use std::f64::consts::PI;

use hypercone::constants::{extremizer_alpha, m_constant, optimal_a, ExponentPair};
use hypercone::kernels::carslaw_kernel;
use hypercone::rigidity::{mp_alpha, mp_delta, mp_h_inverse};
use hypercone::semigroup::{apply_heat, RadialModel};
use hypercone::special::bessel_i;
use hypercone::spaces::{ConePoint, ConeSpace};

fn pair(p: f64, q: f64) -> ExponentPair {
    ExponentPair::from_f64(p, q).unwrap()
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    f(0.5 * (lo + hi))
}

/// `ln(‖H_t f‖_q / ‖f‖_p)` on the line for `f = e^{-αx²}`.
fn ln_gaussian_ratio_1d(p: f64, q: f64, t: f64, ln_alpha: f64) -> f64 {
    let alpha = ln_alpha.exp();
    let spread = 1.0 + 4.0 * alpha * t;
    let beta = alpha / spread;
    let ln_norm = |c: f64, r: f64| (PI / (c * r)).ln() / (2.0 * r);
    -0.5 * spread.ln() + ln_norm(beta, q) - ln_norm(alpha, p)
}

#[test]
fn m_constant_from_gaussian_maximisation() {
    // Gaussians are extremal on R, where the sharp bound is M^{1/2} (4πt)^{-(1/p-1/q)/2}
    for (p, q) in [(2.0, 4.0), (1.5, 3.0), (1.2, 7.0), (3.0, 3.5)] {
        let t = 0.7;
        let best = golden_max(|u| ln_gaussian_ratio_1d(p, q, t, u), -15.0, 15.0);
        let gap = 1.0 / p - 1.0 / q;
        let m = (2.0 * (best + 0.5 * gap * (4.0 * PI * t).ln())).exp();
        assert!((m / m_constant(pair(p, q)) - 1.0).abs() < 1e-9, "({p}, {q}): {m}");
    }
    assert!((m_constant(pair(2.0, 4.0)) - 0.620403).abs() < 1e-6);
}

#[test]
fn extremizer_parameters_for_two_four() {
    assert!((extremizer_alpha(pair(2.0, 4.0), 1.0).unwrap() - 0.125).abs() < 1e-15);
    assert!((optimal_a(pair(2.0, 4.0)).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn cone_distance_matches_quotient_of_the_plane() {
    // the cone of angle 2π/k is R² modulo rotations by 2π/k
    for k in 1..=6 {
        let theta = 2.0 * PI / k as f64;
        let cone = ConeSpace::planar(theta).unwrap();
        for i in 0..40 {
            let x = ConePoint::new(0.3 + 0.1 * i as f64, theta * ((i * 7) % 40) as f64 / 40.0);
            let y = ConePoint::new(2.5 - 0.05 * i as f64, theta * ((i * 13) % 40) as f64 / 40.0);
            let brute = (0..k)
                .map(|j| {
                    let a = y.phi + 2.0 * PI * j as f64 / k as f64;
                    let (dx, dy) = (x.r * x.phi.cos() - y.r * a.cos(), x.r * x.phi.sin() - y.r * a.sin());
                    dx.hypot(dy)
                })
                .fold(f64::INFINITY, f64::min);
            let d = cone.distance(x, y).unwrap();
            assert!((d - brute).abs() < 1e-12, "k={k}: {d} vs {brute}");
        }
    }
}

#[test]
fn carslaw_kernel_has_unit_mass() {
    let theta = 0.5 * PI;
    let cone = ConeSpace::planar(theta).unwrap();
    let x = ConePoint::new(0.8, 0.4);
    let t = 0.6;
    // trapezoid in the periodic angle, Simpson in r
    let (nr, nphi, r_max) = (600, 64, 9.0);
    let hr = r_max / nr as f64;
    let mut mass = 0.0;
    for i in 0..=nr {
        let r = i as f64 * hr;
        let w = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let ring: f64 = (0..nphi)
            .map(|j| carslaw_kernel(&cone, x, ConePoint::new(r, theta * j as f64 / nphi as f64), t).unwrap().value)
            .sum::<f64>()
            * theta
            / nphi as f64;
        mass += w * hr / 3.0 * ring * r;
    }
    assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
}

#[test]
fn chapman_kolmogorov_on_the_grid() {
    let model = RadialModel::cone(ConeSpace::planar(1.3).unwrap(), 2.0, 512).unwrap();
    let f = model.sample(|r| (-(r - 1.0) * (r - 1.0)).exp());
    let two_steps = apply_heat(&apply_heat(&f, 0.5).unwrap(), 0.7).unwrap();
    let one_step = apply_heat(&f, 1.2).unwrap();
    let peak = one_step.values().iter().fold(0.0f64, |m, &v| m.max(v));
    for (a, b) in two_steps.values().iter().zip(one_step.values()) {
        assert!((a - b).abs() < 1e-10 * peak);
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn munn_perelman_small_case_by_plain_bisection() {
    // k = 1, n = 2: C = 3 + 10 + 16 · 11² = 1949
    let lead = 1e3 * 1949.0;
    let delta = bisect(|s| lead * s * (1.0 + s / 2.0) - 1.0, 0.0, 1.0);
    assert!((mp_delta(1, 2).unwrap().value.unwrap() / delta - 1.0).abs() < 1e-12);
    let inv = bisect(|s| 1.0 / (1.0 - lead * s * (1.0 + s / 2.0)) - 2.0, 0.0, 0.999 * delta);
    assert!((mp_h_inverse(1, 2, 2.0).unwrap() / inv - 1.0).abs() < 1e-12);
    let alpha = 1.0 - 1.0 / (1.0 + 2.0 / inv);
    let got = mp_alpha(1, 2).unwrap();
    assert!(((1.0 - alpha) / got.complement() - 1.0).abs() < 1e-8);
}

#[test]
fn bessel_integer_orders_match_integral_representation() {
    // e^{-x} I_n(x) = (1/π) ∫₀^π e^{x(cos φ - 1)} cos(nφ) dφ; the trapezoid
    // rule is spectrally accurate for this periodic integrand
    let oracle = |n: f64, x: f64| {
        let m = 40_000;
        let h = PI / m as f64;
        let f = |phi: f64| (x * (phi.cos() - 1.0)).exp() * (n * phi).cos();
        (0.5 * (f(0.0) + f(PI)) + (1..m).map(|j| f(j as f64 * h)).sum::<f64>()) * h / PI
    };
    let mut checked = 0;
    for n in [0.0, 1.0, 2.0, 5.0, 17.0, 49.0, 50.0, 51.0, 80.0, 120.0, 200.0] {
        for x in [0.5, 5.0, 19.9, 20.1, 60.0, 300.0, 2000.0, 1e4] {
            let expected = oracle(n, x);
            // cancellation in the integral limits the oracle to values well above rounding
            if expected < 1e-4 {
                continue;
            }
            let got = bessel_i(n, x, true).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-10, "I_{n}({x}): {got} vs {expected}");
            checked += 1;
        }
    }
    assert!(checked > 40, "only {checked} cases above the oracle floor");
}
