//! The demo's computations agree with the library they wrap.

use std::f64::consts::PI;

use hypercone::kernels::euclidean_kernel;
use hypercone_web::{bakry_curve, carslaw_heatmap, sharp_curve, sharp_value};

#[test]
fn flow_ends_at_the_sharp_bound() {
    let (p, q, dim, avr, t) = (2.0, 4.0, 2.0, 0.5, 1.0);
    let curve = bakry_curve(p, q, dim, avr, t, 50).unwrap();
    assert_eq!(curve.len(), 150);
    assert_eq!(&curve[..3], &[0.0, p, 0.0]);
    let last = &curve[147..];
    assert_eq!(last[1], q);
    let sharp = sharp_value(p, q, dim, avr, t).unwrap();
    assert!((last[2].exp() / sharp - 1.0).abs() < 1e-12);
    // p(s) increases along the flow
    assert!(curve.chunks(3).zip(curve.chunks(3).skip(1)).all(|(a, b)| b[1] > a[1]));
}

#[test]
fn full_plane_heatmap_is_the_gaussian() {
    let (res, extent, t) = (21, 2.0, 0.7);
    let h = carslaw_heatmap(2.0 * PI, 1.0, 0.0, t, extent, res).unwrap();
    let step = 2.0 * extent / (res - 1) as f64;
    for row in 0..res {
        for col in 0..res {
            let (u, v) = (-extent + col as f64 * step, extent - row as f64 * step);
            let exact = euclidean_kernel(2, (u - 1.0).hypot(v), t);
            assert!((h[row * res + col] - exact).abs() < 1e-10);
        }
    }
}

#[test]
fn half_plane_curve_matches_closed_form() {
    let c = sharp_curve(PI, 1.0, f64::INFINITY, 1.0, 4.0, 2).unwrap();
    assert!((c[1] - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((c[3] - 1.0 / (8.0 * PI)).abs() < 1e-15);
}
