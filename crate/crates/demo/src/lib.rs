//! Interactive browser demo of the loss-detection statistics: ancilla
//! photon-count distributions, the no-click decay curve, and single-shot
//! protocol reports, all on a one-information-mode, one-ancilla-mode
//! signal.
//!
//! The `#[wasm_bindgen]` exports are thin wrappers over plain functions
//! returning JSON strings, so everything here is exercised by native tests
//! as well.

use wasm_bindgen::prelude::*;

use herald_core::error::{Error, Result};
use herald_core::fock::{basis_state, make_layout, StateVector};
use herald_core::gates::CodingSpec;
use herald_core::linalg::cr;
use herald_core::measurement::{
    classify, count_distribution, mean_ancilla_count, no_click_probability, OutcomeClass,
};
use herald_core::protocol::{decode_pipeline, run_protocol, LossEvent};
use herald_core::scenario::paper_p0_closed_form;

fn coding_for(scheme: &str, coupling: f64) -> Result<CodingSpec> {
    match scheme {
        "ecs" => Ok(CodingSpec::ecs(vec![vec![coupling]])),
        "pcs" => Ok(CodingSpec::pcs(vec![vec![1.0]], coupling)),
        other => Err(Error::scenario(
            "scheme",
            format!("unknown scheme `{other}` (expected ecs or pcs)"),
        )),
    }
}

/// Parse a tiny input-state spec: `fock:N` or `sup:a,b,...` (equal-weight
/// superposition of the listed photon numbers).
fn input_for(spec: &str, info_dim: usize) -> Result<StateVector> {
    let info = make_layout(&[info_dim], &[])?;
    if let Some(n) = spec.strip_prefix("fock:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::scenario("input", "fock:N needs an integer"))?;
        return basis_state(&info, &[n]);
    }
    if let Some(list) = spec.strip_prefix("sup:") {
        let mut state = StateVector::zero(info);
        for part in list.split(',') {
            let n: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::scenario("input", "sup:a,b,... needs integers"))?;
            if n >= info_dim {
                return Err(Error::OccupationOutOfRange {
                    mode: 0,
                    occ: n,
                    dim: info_dim,
                });
            }
            state.amps_mut()[n] = cr(1.0);
        }
        return Ok(state.normalized()?.0);
    }
    Err(Error::scenario(
        "input",
        "expected `fock:N` or `sup:a,b,...`",
    ))
}

fn event_for(event: &str) -> Result<LossEvent> {
    match event {
        "none" => Ok(LossEvent::None),
        "info_loss" => Ok(LossEvent::uniform_info(1)),
        "ancilla_loss" => Ok(LossEvent::uniform_ancilla(1)),
        other => Err(Error::scenario("event", format!("unknown event `{other}`"))),
    }
}

/// Exact ancilla photon-count distribution after encode → loss → decode.
pub fn distribution_json(
    scheme: &str,
    coupling: f64,
    input: &str,
    event: &str,
    info_dim: usize,
    anc_dim: usize,
) -> Result<String> {
    let coding = coding_for(scheme, coupling)?;
    let state = input_for(input, info_dim)?;
    let run = decode_pipeline(&state, &[anc_dim], &coding, &event_for(event)?)?;
    let dist = count_distribution(&run.state)?;
    let cutoff = dist
        .iter()
        .rposition(|r| r.probability > 1e-12)
        .map(|i| i + 1)
        .unwrap_or(1)
        .max(8);
    let probabilities: Vec<f64> = dist.iter().take(cutoff).map(|r| r.probability).collect();
    let p_zero = dist[0].probability;
    let mean = mean_ancilla_count(&run.state, 0)?;
    let mut rates = [0.0f64; 4];
    for record in &dist {
        let slot = match classify(&record.counts) {
            OutcomeClass::NoLoss => 0,
            OutcomeClass::AncillaLoss(_) => 1,
            OutcomeClass::InfoLossDetected => 2,
            OutcomeClass::Ambiguous => 3,
        };
        rates[slot] += record.probability;
    }
    Ok(serde_json::json!({
        "probabilities": probabilities,
        "p_zero": p_zero,
        "mean_count": mean,
        "branch_probability": run.collapse_norm * run.collapse_norm,
        "rates": {
            "no_loss": rates[0],
            "ancilla_loss": rates[1],
            "info_loss": rates[2],
            "ambiguous": rates[3],
        },
    })
    .to_string())
}

/// No-click probability and mean count across a coupling grid — the
/// detection-failure decay curve.
pub fn sweep_json(
    scheme: &str,
    max_coupling: f64,
    points: usize,
    input: &str,
    info_dim: usize,
    anc_dim: usize,
) -> Result<String> {
    if !(2..=200).contains(&points) {
        return Err(Error::scenario("points", "need 2..=200 grid points"));
    }
    let state = input_for(input, info_dim)?;
    let event = LossEvent::uniform_info(1);
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let g = max_coupling * (k + 1) as f64 / points as f64;
        let coding = coding_for(scheme, g)?;
        let (exact, closed_form) = if scheme == "ecs" {
            let p = no_click_probability(&state, &[anc_dim], &coding, &[cr(1.0)])?;
            (p.exact, p.paper_closed_form)
        } else {
            let run = decode_pipeline(&state, &[anc_dim], &coding, &event)?;
            let dist = count_distribution(&run.state)?;
            (dist[0].probability, paper_p0_closed_form(&coding, &event))
        };
        let run = decode_pipeline(&state, &[anc_dim], &coding, &event)?;
        let mean = mean_ancilla_count(&run.state, 0)?;
        rows.push(serde_json::json!({
            "coupling": g,
            "p0_exact": exact,
            "p0_paper_form": closed_form,
            "mean_count": mean,
        }));
    }
    Ok(serde_json::json!({ "rows": rows }).to_string())
}

/// One full protocol shot: sampled counts, classification, recovery,
/// fidelity.
pub fn report_json(
    scheme: &str,
    coupling: f64,
    input: &str,
    event: &str,
    seed: u64,
    info_dim: usize,
    anc_dim: usize,
) -> Result<String> {
    let coding = coding_for(scheme, coupling)?;
    let state = input_for(input, info_dim)?;
    let report = run_protocol(&state, &[anc_dim], &coding, &event_for(event)?, seed)?;
    Ok(serde_json::json!({
        "counts": report.counts,
        "count_probability": report.count_probability,
        "outcome": report.outcome,
        "recovery_applied": report.recovery_applied,
        "fidelity": report.fidelity,
        "branch_probability": report.branch_probability,
        "p_zero": report.ancilla_vacuum_probability,
        "truncation_tail": report.truncation_tail,
    })
    .to_string())
}

fn to_js<T>(result: Result<T>) -> std::result::Result<T, JsValue> {
    result.map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Smallest information truncation that represents the input exactly. No
/// operation in the pipeline raises an information occupation, so this
/// loses nothing.
fn required_info_dim(spec: &str) -> Result<usize> {
    let digits = spec
        .strip_prefix("fock:")
        .or_else(|| spec.strip_prefix("sup:"))
        .ok_or_else(|| Error::scenario("input", "expected `fock:N` or `sup:a,b,...`"))?;
    let mut top = 1usize;
    for part in digits.split(',') {
        let n: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::scenario("input", "photon numbers must be integers"))?;
        top = top.max(n + 1);
    }
    Ok(top.max(2))
}

/// Ancilla count distribution for the bar chart.
#[wasm_bindgen]
pub fn wasm_distribution(
    scheme: &str,
    coupling: f64,
    input: &str,
    event: &str,
    anc_dim: u32,
) -> std::result::Result<String, JsValue> {
    let info_dim = to_js(required_info_dim(input))?;
    to_js(distribution_json(
        scheme,
        coupling,
        input,
        event,
        info_dim,
        anc_dim as usize,
    ))
}

/// Detection-failure decay curve for the line chart.
#[wasm_bindgen]
pub fn wasm_sweep(
    scheme: &str,
    max_coupling: f64,
    points: u32,
    input: &str,
    anc_dim: u32,
) -> std::result::Result<String, JsValue> {
    let info_dim = to_js(required_info_dim(input))?;
    to_js(sweep_json(
        scheme,
        max_coupling,
        points as usize,
        input,
        info_dim,
        anc_dim as usize,
    ))
}

/// Single seeded protocol shot for the report panel.
#[wasm_bindgen]
pub fn wasm_report(
    scheme: &str,
    coupling: f64,
    input: &str,
    event: &str,
    seed: u32,
) -> std::result::Result<String, JsValue> {
    let info_dim = to_js(required_info_dim(input))?;
    to_js(report_json(
        scheme,
        coupling,
        input,
        event,
        seed as u64,
        info_dim,
        80,
    ))
}
