//! Browser bindings for the demo page in `www/`. Each exported function
//! returns a JSON string; the `*_json` twins return `Result<String, String>`
//! so they can be exercised natively.

use std::f64::consts::PI;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use seqrsp::cascade::{average_fidelity, ProtocolConfig, SharpnessChain, Target};
use seqrsp::classical::classical_bound;
use seqrsp::solver::{min_chain, Axis};
use seqrsp::states::InitialFamily;

/// Bobs shown per curve in the sharpness plot.
const CURVES: usize = 6;
const MAX_SAMPLES: usize = 2000;

fn check_samples(samples: usize) -> Result<(), String> {
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("samples must lie in 2..={MAX_SAMPLES}, got {samples}"));
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundPoint {
    theta: f64,
    bound: f64,
}

pub fn classical_bound_curve_json(samples: usize) -> Result<String, String> {
    check_samples(samples)?;
    let pts: Vec<BoundPoint> = (0..samples)
        .map(|k| {
            let theta = PI * k as f64 / (samples - 1) as f64;
            BoundPoint { theta, bound: classical_bound(theta) }
        })
        .collect();
    serde_json::to_string(&pts).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SharpnessPoint {
    x: f64,
    /// λᵢ^min along the infimum chain; `null` once a predecessor fails.
    lambda_mins: Vec<Option<f64>>,
    n: usize,
}

fn parse_axis(axis: &str) -> Result<Axis, String> {
    match axis {
        "theta" => Ok(Axis::Theta),
        "xi" => Ok(Axis::Xi),
        "werner" => Ok(Axis::WernerC),
        _ => Err(format!("unknown axis `{axis}` (theta, xi, werner)")),
    }
}

pub fn sharpness_curves_json(axis: &str, samples: usize) -> Result<String, String> {
    check_samples(samples)?;
    let axis = parse_axis(axis)?;
    let (lo, hi) = axis.domain();
    let mut pts = Vec::with_capacity(samples);
    for k in 0..samples {
        let x = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let res = min_chain(&axis.config(x).map_err(|e| e.to_string())?, CURVES).map_err(|e| e.to_string())?;
        let mut mins: Vec<Option<f64>> = res.lambda_mins.iter().map(|&l| Some(l).filter(|l| l.is_finite())).collect();
        mins.resize(CURVES, None);
        pts.push(SharpnessPoint { x, lambda_mins: mins, n: res.n_max });
    }
    serde_json::to_string(&pts).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct BobRow {
    index: usize,
    lambda: f64,
    fidelity: f64,
    bound: f64,
    pass: bool,
}

fn parse_family(family: &str, param: f64) -> Result<InitialFamily, String> {
    let f = match family {
        "singlet" => InitialFamily::Singlet,
        "werner" => InitialFamily::Werner { c: param },
        "nonmax" => InitialFamily::NonMaximal { xi: param },
        _ => return Err(format!("unknown family `{family}` (singlet, werner, nonmax)")),
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

pub fn cascade_json(family: &str, param: f64, theta: f64, lambdas: &str) -> Result<String, String> {
    let cfg = ProtocolConfig::new(parse_family(family, param)?, theta, Target::Psi).map_err(|e| e.to_string())?;
    let values: Vec<f64> = lambdas
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad sharpness `{s}`")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("enter at least one sharpness value".into());
    }
    let chain = SharpnessChain::new(values).map_err(|e| e.to_string())?;
    let rows = (1..=chain.len())
        .map(|i| {
            let f = average_fidelity(&cfg, &chain, i).map_err(|e| e.to_string())?;
            Ok(BobRow {
                index: i,
                lambda: chain.as_slice()[i - 1],
                fidelity: f,
                bound: cfg.threshold(),
                pass: f > cfg.threshold(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn classical_bound_curve(samples: usize) -> Result<String, JsValue> {
    classical_bound_curve_json(samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sharpness_curves(axis: &str, samples: usize) -> Result<String, JsValue> {
    sharpness_curves_json(axis, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cascade(family: &str, param: f64, theta: f64, lambdas: &str) -> Result<String, JsValue> {
    cascade_json(family, param, theta, lambdas).map_err(|e| JsValue::from_str(&e))
}
