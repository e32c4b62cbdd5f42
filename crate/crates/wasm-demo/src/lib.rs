//! Browser bindings. Each exported function returns a JSON string; the plain
//! `*_json` functions behind them are ordinary Rust and tested natively.

use level_density::density::{default_grid, linspace, ScaledDensity};
use level_density::ensembles::EnsembleSpec;
use level_density::limits::LimitFamily;
use level_density::opcore::moment_reports;
use level_density::perturb::{gap_rows, PerturbationSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn ensemble(name: &str, a: f64, b: f64) -> Result<EnsembleSpec, String> {
    let spec = match name {
        "hermite" => EnsembleSpec::Hermite,
        "laguerre" => EnsembleSpec::Laguerre { a },
        "jacobi" => EnsembleSpec::Jacobi { a, b },
        "legendre" => EnsembleSpec::legendre(),
        other => return Err(format!("unknown ensemble {other:?}")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad list entry {s:?}")))
        .collect()
}

/// `σ_n` and the limit law on a common grid covering both supports.
pub fn density_curves_json(name: &str, a: f64, b: f64, n: usize, points: usize) -> Result<String, String> {
    let spec = ensemble(name, a, b)?;
    let density = ScaledDensity::new(&spec, n).map_err(|e| e.to_string())?;
    let family = LimitFamily::for_spec(&spec);
    let (mut lo, mut hi) = density.effective_support();
    if let Some(f) = family {
        let s = f.support();
        lo = lo.max(s.lower - 0.5);
        hi = hi.min(s.upper + 0.5);
    }
    let x = if lo < hi { linspace(lo, hi, points.max(2)) } else { default_grid(&spec, n, points.max(2)).map_err(|e| e.to_string())? };
    let finite: Vec<f64> = x.iter().map(|&y| density.density(y)).collect();
    let limit: Option<Vec<f64>> = family.map(|f| x.iter().map(|&y| f.density(y)).collect());
    Ok(json!({
        "label": spec.label(),
        "n": n,
        "D_n": density.d_n(),
        "limit_name": family.map(LimitFamily::name),
        "x": x,
        "finite": finite,
        "limit": limit,
    })
    .to_string())
}

/// Moment reports for `ns × 1..=k_max`.
pub fn moment_table_json(name: &str, a: f64, b: f64, ns: &str, k_max: usize) -> Result<String, String> {
    let spec = ensemble(name, a, b)?;
    let ks: Vec<usize> = (1..=k_max.max(1)).collect();
    let rows = moment_reports(&spec, &list(ns)?, &ks).map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

/// Perturbation gaps for `p` (coefficients, constant first) at order `k`.
pub fn perturbation_gaps_json(name: &str, a: f64, b: f64, p: &str, ns: &str, k: usize) -> Result<String, String> {
    let spec = ensemble(name, a, b)?;
    let p = PerturbationSpec::parse(p).map_err(|e| e.to_string())?;
    let rows = gap_rows(&spec, &p, &list(ns)?, &[k]).map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn density_curves(name: &str, a: f64, b: f64, n: usize, points: usize) -> Result<String, JsValue> {
    density_curves_json(name, a, b, n, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn moment_table(name: &str, a: f64, b: f64, ns: &str, k_max: usize) -> Result<String, JsValue> {
    moment_table_json(name, a, b, ns, k_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn perturbation_gaps(name: &str, a: f64, b: f64, p: &str, ns: &str, k: usize) -> Result<String, JsValue> {
    perturbation_gaps_json(name, a, b, p, ns, k).map_err(|e| JsValue::from_str(&e))
}
