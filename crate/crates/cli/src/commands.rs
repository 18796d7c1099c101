//! One function per subcommand. Each returns the JSON document to emit and
//! writes CSV traces itself.

use std::fs;
use std::path::PathBuf;

use hypercone::bakry::{integrate_flow, logsobolev_check};
use hypercone::constants::{
    extremizer_alpha, extremizer_beta, gaussian_time_shift, ln_m_constant, ln_sharp_bound, optimal_a,
    ExponentPair, SharpBoundInputs,
};
use hypercone::hyper::{
    cone_model_for, estimate_operator_norm, extremizer, li_limit_trace, scaled_norm_trace, sharp_bound_for, LiTarget,
    NormOptions, NormReport,
};
use hypercone::kernels::SERIES_TOL;
use hypercone::rigidity::{topology_report, MunnPerelmanTable};
use hypercone::semigroup::{energy_log_convexity_trace, RadialFunction, RadialModel, SurfaceResolution};
use hypercone::spaces::{ConePoint, Space, GRID_CALIBRATION_TOL};
use hypercone::verify::{run_criterion, CRITERIA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::params::{missing, positive, Params};
use crate::CliError;

/// Relative rounding of closed forms evaluated in f64.
const CLOSED_FORM_TOL: f64 = 1e-14;
const FLOW_SLACK: f64 = 1e-8;
const GAUSSIAN_EQUALITY_TOL: f64 = 1e-6;
const LOGSOB_SLACK: f64 = 1e-8;
const ROOT_RESIDUAL_TOL: f64 = 1e-12;

/// The JSON document and whether its headline check passed.
pub struct Outcome {
    pub document: Value,
    pub passed: bool,
}

fn document(command: &str, body: Value) -> Value {
    let mut doc = json!({ "schema": 1, "command": command });
    if let (Some(out), Value::Object(extra)) = (doc.as_object_mut(), body) {
        out.extend(extra);
    }
    doc
}

fn write_trace(params: &Params, name: &str, csv: &str) -> Result<Option<PathBuf>, CliError> {
    let Some(dir) = &params.trace_dir else {
        return Ok(None);
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(Some(path))
}

pub fn constants(params: &Params) -> Result<Outcome, CliError> {
    let pair = params.pair()?;
    let dim = params.dim.ok_or_else(|| missing("N"))?;
    let avr = params.avr.ok_or_else(|| missing("avr"))?;
    let inputs = SharpBoundInputs::new(pair, dim, avr, params.time()?)?;
    let ln_bound = ln_sharp_bound(&inputs);
    let extremal = if pair.is_strict_interior() {
        json!({
            "alpha0": extremizer_alpha(pair, inputs.t)?,
            "beta0": extremizer_beta(pair, inputs.t)?,
            "a": optimal_a(pair)?,
            "time_shift": gaussian_time_shift(pair, inputs.t)?,
        })
    } else {
        Value::Null
    };
    let ln_m = ln_m_constant(pair);
    Ok(Outcome {
        document: document(
            "constants",
            json!({
                "inputs": inputs,
                "M": ln_m.exp(),
                "ln_M": ln_m,
                "sharp_bound": ln_bound.exp(),
                "ln_sharp_bound": ln_bound,
                "extremizer": extremal,
                "tolerances": { "closed_form_relative": CLOSED_FORM_TOL },
            }),
        ),
        passed: true,
    })
}

/// Model for `space` able to run the heat flow up to `t`.
fn model_for(params: &Params, space: Space, t: f64, strict_interior: Option<ExponentPair>) -> Result<RadialModel, CliError> {
    Ok(match (space, strict_interior) {
        (Space::Cone(cone), Some(pair)) => cone_model_for(cone, pair, t, params.points()?)?,
        (Space::Cone(cone), None) => RadialModel::cone(cone, t, params.points()?)?,
        (Space::Surface(s), _) => RadialModel::surface(s, t, SurfaceResolution::default())?,
    })
}

pub fn norm(params: &Params) -> Result<Outcome, CliError> {
    let pair = params.pair()?;
    let t = params.time()?;
    let space = params.space()?;
    let interior = pair.is_strict_interior().then_some(pair);
    let times = params.times.clone().unwrap_or_default();
    for &s in &times {
        positive("times", s)?;
    }
    let latest = times.iter().fold(t, |a, &b| a.max(b));
    // the p = q ladder widens Gaussians up to the grid radius
    let horizon = if pair.is_diagonal() { 16.0 * latest } else { latest };
    let model = model_for(params, space, horizon, interior)?;
    let opts = NormOptions::default();
    let est = estimate_operator_norm(&model, pair, t, opts)?;
    let report = NormReport::new(&model, &est)?;
    let sharp = sharp_bound_for(&space, pair, t)?;
    let gap = (sharp - est.value) / sharp;
    let passed = params.tol.is_none_or(|tol| gap.abs() <= tol);
    let (trace, trace_deviation) = if times.is_empty() {
        (None, None)
    } else {
        let trace = scaled_norm_trace(&model, pair, &times)?;
        (write_trace(params, "norm_trace.csv", &trace.to_csv())?, Some(trace.max_relative_deviation))
    };
    Ok(Outcome {
        document: document(
            "norm",
            json!({
                "report": report,
                "trace": trace,
                "trace_max_relative_deviation": trace_deviation,
                "method": est.method,
                "iterations": est.iterations,
                "residual": est.residual,
                "relative_gap": gap,
                "grid_nodes": model.len(),
                "tolerances": {
                    "power_iteration_relative": opts.rel_tol,
                    "grid_calibration": GRID_CALIBRATION_TOL,
                    "relative_gap": params.tol,
                },
                "passed": passed,
            }),
        ),
        passed,
    })
}

fn flow_data(params: &Params, model: &RadialModel, pair: ExponentPair, t: f64) -> Result<RadialFunction, CliError> {
    let text = params.data.as_deref().unwrap_or("extremizer");
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => {
            let v = a.parse::<f64>().map_err(|_| CliError::Validation(format!("bad data parameter '{a}'")))?;
            (k, Some(positive("data parameter", v)?))
        }
        None => (text, None),
    };
    match (kind, arg) {
        ("extremizer", None) if model.is_cone() => Ok(extremizer(model, pair, t)?),
        ("extremizer", None) => Err(CliError::Validation("the extremizer exists on cones only".into())),
        ("gaussian", Some(c0)) => Ok(model.sample(|r| (-c0 * r * r).exp())),
        ("plateau", Some(radius)) => Ok(model.sample(|r| 1.0 / (1.0 + ((r - radius) / 0.2).exp()))),
        _ => Err(CliError::Validation(format!(
            "unknown data '{text}'; use extremizer, gaussian:<c0> or plateau:<radius>"
        ))),
    }
}

pub fn flow(params: &Params) -> Result<Outcome, CliError> {
    let pair = params.pair()?;
    let t = params.time()?;
    let space = params.space()?;
    let model = model_for(params, space, t, pair.is_strict_interior().then_some(pair))?;
    let f = flow_data(params, &model, pair, t)?;
    let trace = integrate_flow(&f, pair, t, params.steps.unwrap_or(40))?;
    let path = write_trace(params, "flow.csv", &trace.to_csv())?;
    // Dirichlet-type energy ‖H_s f‖²₂ of the same data at the flow's positive times
    let energy_times: Vec<f64> = trace.samples.iter().map(|s| s.t).filter(|&s| s > 0.0).collect();
    let energy = if energy_times.len() >= 3 {
        let energy = energy_log_convexity_trace(&f, &energy_times)?;
        let path = write_trace(params, "energy.csv", &energy.to_csv())?;
        json!({
            "trace": path,
            "min_convexity_slack": energy.min_slack,
            "non_increasing": energy.non_increasing,
        })
    } else {
        Value::Null
    };
    Ok(Outcome {
        document: document(
            "flow",
            json!({
                "space": trace.space,
                "p": pair.p(),
                "q": pair.q(),
                "t": t,
                "lambda": trace.lambda,
                "t_lambda": trace.t_lambda,
                "final_ratio": trace.final_ratio(),
                "max_increase": trace.max_increase,
                "ode_residual": trace.ode_residual,
                "monotone": trace.is_monotone(FLOW_SLACK),
                "exponent_capped": trace.exponent_capped,
                "trace": path,
                "energy": energy,
                "tolerances": { "monotone_slack": FLOW_SLACK },
            }),
        ),
        passed: true,
    })
}

pub fn logsob(params: &Params) -> Result<Outcome, CliError> {
    let space = params.space()?;
    let model = model_for(params, space, 3.0, None)?;
    let mut gaussians = Vec::new();
    let mut worst_gaussian: f64 = 0.0;
    for &c0 in params.c0.as_deref().unwrap_or(&[0.25, 0.5, 2.0]) {
        let c0 = positive("c0", c0)?;
        let rep = logsobolev_check(&model.sample(|r| (-c0 * r * r).exp()))?;
        worst_gaussian = worst_gaussian.max(rep.deficit.abs());
        gaussians.push(json!({ "c0": c0, "report": rep }));
    }
    let samples = params.samples.unwrap_or(100);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed());
    let mut min_deficit = f64::INFINITY;
    for _ in 0..samples {
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..4.0), rng.gen_range(0.3..1.5)))
            .collect();
        let u = model.sample(|r| bumps.iter().map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp()).sum());
        if u.values().iter().all(|&v| v.abs() < 1e-3) {
            continue;
        }
        min_deficit = min_deficit.min(logsobolev_check(&u)?.deficit);
    }
    let slack = params.tol.unwrap_or(LOGSOB_SLACK);
    // Gaussians saturate the inequality only on cones
    let equality = model.is_cone().then_some(worst_gaussian <= GAUSSIAN_EQUALITY_TOL);
    let passed = min_deficit >= -slack && equality.unwrap_or(true);
    Ok(Outcome {
        document: document(
            "logsob",
            json!({
                "space": model.descriptor(),
                "gaussians": gaussians,
                "random": { "samples": samples, "seed": params.seed(), "min_deficit": min_deficit },
                "gaussian_equality": equality,
                "tolerances": { "deficit_slack": slack, "gaussian_equality": GAUSSIAN_EQUALITY_TOL },
                "passed": passed,
            }),
        ),
        passed,
    })
}

pub fn li_limit(params: &Params) -> Result<Outcome, CliError> {
    let space = params.space()?;
    let times = params.times.clone().unwrap_or_else(|| (0..9).map(|i| 10f64.powf(0.5 * i as f64)).collect());
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::Validation("times must be positive".into()));
    }
    let trace = match space {
        Space::Cone(cone) => {
            let x = params.x.map_or(ConePoint::new(1.0, 0.0), |p| p.0);
            let y = params.y.map_or(ConePoint::new(2.0, 1.0), |p| p.0);
            li_limit_trace(LiTarget::Cone(cone), x, y, x, &times)?
        }
        Space::Surface(surface) => {
            let t_max = times.iter().fold(0.0f64, |m, &t| m.max(t));
            let model = RadialModel::surface(surface, t_max, SurfaceResolution::default())?;
            let pole = ConePoint::TIP;
            li_limit_trace(LiTarget::Surface(&model), pole, pole, pole, &times)?
        }
    };
    let path = write_trace(params, "li_limit.csv", &trace.to_csv())?;
    let passed = params.tol.is_none_or(|tol| trace.time_error <= tol);
    Ok(Outcome {
        document: document(
            "li-limit",
            json!({
                "space": trace.space,
                "volume_limit": trace.volume_limit,
                "time_limit": trace.time_limit,
                "volume_error": trace.volume_error,
                "time_error": trace.time_error,
                "samples": trace.samples.len(),
                "trace": path,
                "tolerances": { "series_truncation": SERIES_TOL, "time_error": params.tol },
                "passed": passed,
            }),
        ),
        passed,
    })
}

pub fn rigidity(params: &Params) -> Result<Outcome, CliError> {
    let n = params.n.ok_or_else(|| missing("n"))?;
    let table = MunnPerelmanTable::new(n)?;
    let topology = params.k.map(|k| topology_report(n, k)).transpose()?;
    let passed = table.max_residual() < ROOT_RESIDUAL_TOL && table.alpha_increasing();
    Ok(Outcome {
        document: document(
            "rigidity",
            json!({
                "n": n,
                "table": table,
                "text": table.to_text(),
                "topology": topology,
                "max_residual": table.max_residual(),
                "alpha_increasing": table.alpha_increasing(),
                "tolerances": { "root_residual": ROOT_RESIDUAL_TOL },
                "passed": passed,
            }),
        ),
        passed,
    })
}

pub fn verify(params: &Params) -> Result<Outcome, CliError> {
    let ids = params.criterion.clone().unwrap_or_else(|| (1..=CRITERIA).collect());
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > CRITERIA) {
        return Err(CliError::Validation(format!("no criterion {bad}; use 1..={CRITERIA}")));
    }
    let outcomes: Vec<_> = ids
        .iter()
        .map(|&id| {
            let o = run_criterion(id, params.seed());
            eprintln!("{o}");
            o
        })
        .collect();
    let passed = outcomes.iter().all(|o| o.passed);
    Ok(Outcome {
        document: document("verify", json!({ "seed": params.seed(), "outcomes": outcomes, "passed": passed })),
        passed,
    })
}
