//! Browser bindings. Every entry point takes plain strings and numbers and
//! returns a JSON string; failures come back as `{"error": "..."}` so the
//! page never has to catch exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use critloc::critical::{column_center_check, fixtures, reduce_to_n, CaseTag};
use critloc::harness::{calibrate_delta, run_sweep_with, Experiment, ExperimentConfig};
use critloc::linclass::{classify_4x3, LinFormMatrix};
use critloc::loci::decompose;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Rows separated by newlines or `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<LinFormMatrix, String> {
    let rows: Vec<Vec<&str>> = text
        .split(['\n', ';'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| r.split(',').map(str::trim).collect())
        .collect();
    let refs: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
    LinFormMatrix::from_strs(&refs).map_err(|e| e.to_string())
}

fn locus_json(n: &LinFormMatrix) -> Result<Value, String> {
    let class = classify_4x3(n).map_err(|e| e.to_string())?;
    let locus = match decompose(&class) {
        Ok(d) => d.to_json(),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(json!({
        "classification": class.to_json(),
        "certificate_valid": class.verify(n),
        "locus": locus,
    }))
}

pub fn classify_impl(text: &str) -> Result<Value, String> {
    let n = parse_matrix(text)?;
    if (n.nrows(), n.ncols()) != (4, 3) {
        return Err(format!(
            "expected 4 rows of 3 entries, got {}x{}",
            n.nrows(),
            n.ncols()
        ));
    }
    locus_json(&n)
}

pub fn reduce_impl(case: &str) -> Result<Value, String> {
    let case: CaseTag = case
        .parse()
        .map_err(|e: critloc::critical::CriticalError| e.to_string())?;
    let cfg = fixtures(case);
    let red = reduce_to_n(&cfg).map_err(|e| e.to_string())?;
    let centers = column_center_check(&red, &cfg).is_ok();
    let rows: Vec<Vec<String>> = red
        .n
        .to_rows()
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect();
    let mut v = locus_json(&red.n)?;
    v["N"] = json!(rows);
    v["centers_on_columns"] = json!(centers);
    Ok(v)
}

pub fn trials_impl(case: &str, sigma: f64, repeats: usize, seed: u64) -> Result<Value, String> {
    let case: CaseTag = case
        .parse()
        .map_err(|e: critloc::critical::CriticalError| e.to_string())?;
    if !(1..=200).contains(&repeats) {
        return Err("repeats must be between 1 and 200".into());
    }
    let mut cfg = ExperimentConfig::new(case, seed);
    cfg.sigma_grid = vec![sigma];
    cfg.repeats = repeats;
    cfg.calibration_trials = 50;
    cfg.validate().map_err(|e| e.to_string())?;
    let exp = Experiment::new(case, cfg.profile).map_err(|e| e.to_string())?;
    let cal = calibrate_delta(&exp, &cfg).map_err(|e| e.to_string())?;
    let (records, summary) = run_sweep_with(&exp, &cfg, cal).map_err(|e| e.to_string())?;
    Ok(json!({
        "case": case.name(),
        "sigma": sigma,
        "m": cal.m,
        "delta": cal.delta,
        "distances": records.iter().map(|r| r.distance).collect::<Vec<_>>(),
        "near": summary.per_sigma[0].near,
        "far": summary.per_sigma[0].far,
    }))
}

/// Classify a 4x3 matrix of linear forms and decompose its locus.
#[wasm_bindgen]
pub fn classify(text: &str) -> String {
    respond(classify_impl(text))
}

/// Reduce a built-in camera configuration to its 4x3 matrix.
#[wasm_bindgen]
pub fn reduce_case(case: &str) -> String {
    respond(reduce_impl(case))
}

/// Perturb critical scenes by `sigma` and report reconstruction distances.
#[wasm_bindgen]
pub fn run_trials(case: &str, sigma: f64, repeats: u32, seed: u32) -> String {
    respond(trials_impl(case, sigma, repeats as usize, seed as u64))
}
