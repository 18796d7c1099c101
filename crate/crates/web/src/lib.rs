//! Browser demo: three computations exported through `wasm-bindgen`. The
//! exported wrappers only convert errors; the work happens in plain
//! functions that are tested natively.

use std::f64::consts::PI;

use hypercone::bakry::{lambda_for, m_of_t, p_of_t};
use hypercone::constants::{sharp_bound, ExponentPair, SharpBoundInputs};
use hypercone::hyper::sharp_constant_cone;
use hypercone::kernels::carslaw_kernel;
use hypercone::spaces::{ConePoint, ConeSpace};
use wasm_bindgen::prelude::*;

/// `‖H_t‖_{p,q}` on the 2-D cone of angle `theta` at `n` log-spaced times
/// in `[t_min, t_max]`, as interleaved `(t, C)` pairs.
pub fn sharp_curve(theta: f64, p: f64, q: f64, t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(t_min > 0.0 && t_max > t_min && n >= 2) {
        return Err("need 0 < t_min < t_max and at least two samples".into());
    }
    let cone = ConeSpace::planar(theta).map_err(|e| e.to_string())?;
    let pair = ExponentPair::from_f64(p, q).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let t = t_min * (t_max / t_min).powf(i as f64 / (n - 1) as f64);
        out.push(t);
        out.push(sharp_constant_cone(&cone, pair, t).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Heat kernel `h(x, ·, t)` on a `res × res` pixel grid covering
/// `[-extent, extent]²` of the plane, where the cone is drawn as the sector
/// `0 ≤ φ < theta`. Pixels outside the sector are `NaN`. Row-major, top row
/// first.
pub fn carslaw_heatmap(theta: f64, x_r: f64, x_phi: f64, t: f64, extent: f64, res: usize) -> Result<Vec<f64>, String> {
    if !(extent > 0.0 && t > 0.0 && (2..=512).contains(&res)) {
        return Err("need extent > 0, t > 0 and 2 <= res <= 512".into());
    }
    let cone = ConeSpace::planar(theta).map_err(|e| e.to_string())?;
    let x = ConePoint::new(x_r, x_phi.rem_euclid(theta));
    let step = 2.0 * extent / (res - 1) as f64;
    let mut out = Vec::with_capacity(res * res);
    for row in 0..res {
        let v = extent - row as f64 * step;
        for col in 0..res {
            let u = -extent + col as f64 * step;
            let phi = v.atan2(u).rem_euclid(2.0 * PI);
            if phi >= theta {
                out.push(f64::NAN);
                continue;
            }
            let y = ConePoint::new(u.hypot(v), phi);
            out.push(carslaw_kernel(&cone, x, y, t).map_err(|e| e.to_string())?.value);
        }
    }
    Ok(out)
}

/// The optimal exponent flow from `p` reaching `q` at `t`: interleaved
/// `(s, p(s), m(s))` at `n` equal steps, with `e^{m(t)}` equal to the sharp
/// bound.
pub fn bakry_curve(p: f64, q: f64, dim: f64, avr: f64, t: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("need at least two samples".into());
    }
    let pair = ExponentPair::from_f64(p, q).map_err(|e| e.to_string())?;
    SharpBoundInputs::new(pair, dim, avr, t).map_err(|e| e.to_string())?;
    let lambda = lambda_for(pair, dim, t).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let s = t * i as f64 / (n - 1) as f64;
        let (ps, ms) = if i == n - 1 {
            (q, m_of_t(s, lambda, p, dim, avr).map_err(|e| e.to_string())?)
        } else {
            (p_of_t(s, lambda, p, dim).map_err(|e| e.to_string())?, m_of_t(s, lambda, p, dim, avr).map_err(|e| e.to_string())?)
        };
        out.extend([s, ps, ms]);
    }
    Ok(out)
}

/// Closed-form sharp bound, for labelling the flow curve.
pub fn sharp_value(p: f64, q: f64, dim: f64, avr: f64, t: f64) -> Result<f64, String> {
    let pair = ExponentPair::from_f64(p, q).map_err(|e| e.to_string())?;
    Ok(sharp_bound(&SharpBoundInputs::new(pair, dim, avr, t).map_err(|e| e.to_string())?))
}

#[wasm_bindgen(js_name = sharpCurve)]
pub fn sharp_curve_js(theta: f64, p: f64, q: f64, t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    sharp_curve(theta, p, q, t_min, t_max, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = carslawHeatmap)]
pub fn carslaw_heatmap_js(theta: f64, x_r: f64, x_phi: f64, t: f64, extent: f64, res: usize) -> Result<Vec<f64>, JsError> {
    carslaw_heatmap(theta, x_r, x_phi, t, extent, res).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bakryCurve)]
pub fn bakry_curve_js(p: f64, q: f64, dim: f64, avr: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    bakry_curve(p, q, dim, avr, t, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sharpValue)]
pub fn sharp_value_js(p: f64, q: f64, dim: f64, avr: f64, t: f64) -> Result<f64, JsError> {
    sharp_value(p, q, dim, avr, t).map_err(|e| JsError::new(&e))
}
