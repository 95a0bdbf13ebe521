//! Declarative scenario files and the artifact runners behind the CLI (and
//! the browser demo): parse, validate with field-level diagnostics, run,
//! and render reports deterministically.
//!
//! All floats serialize through serde_json / the standard formatter, both
//! of which emit the shortest round-trip representation, so identical runs
//! produce byte-identical artifacts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{basis_state, ModeLayout, StateVector};
use crate::gates::{coding_unitary, CodingSpec, QuadraticForm, Scheme};
use crate::linalg::{cr, C64};
use crate::measurement::{
    classify, count_distribution, distribution_csv, mean_ancilla_count, sample_counts, samples_csv,
    CountRecord, OutcomeClass,
};
use crate::protocol::{run_protocol, LossEvent, ProtocolReport};
use crate::synthesis::{
    conjugation_identity_check_windowed, cubic_dress_certificate, gaussian_reduction_solve,
    mediated_pcs, ConjugationStep, MediatedProtocolSpec, ReductionOptions, StepTag,
    DEFAULT_WINDOW_FRACTION,
};

// ---------------------------------------------------------------------------
// Scenario schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputStateSpec {
    Occupations { occupations: Vec<usize> },
    Amplitudes { amplitudes: Vec<[f64; 2]> },
    CodeWord { preset: CodeWordTag, index: usize },
    Random { preset: RandomTag, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeWordTag {
    #[serde(rename = "code_word")]
    CodeWord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RandomTag {
    #[serde(rename = "random")]
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    None,
    InfoLoss,
    AncillaLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<[f64; 2]>>,
}

impl Default for EventSpec {
    fn default() -> Self {
        EventSpec {
            kind: EventKind::None,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Report,
    Distribution,
    Samples,
}

fn default_shots() -> usize {
    1024
}

/// One protocol experiment, declaratively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub layout: ModeLayout,
    pub coding: CodingSpec,
    pub input_state: InputStateSpec,
    #[serde(default)]
    pub event: EventSpec,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile> {
        let scenario: ScenarioFile = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        self.coding.validate(&self.layout)?;
        self.build_input()?;
        self.build_event()?;
        Ok(())
    }

    pub fn build_input(&self) -> Result<StateVector> {
        let info_layout = self.layout.info_only()?;
        match &self.input_state {
            InputStateSpec::Occupations { occupations } => {
                if occupations.len() != info_layout.num_info() {
                    return Err(Error::scenario(
                        "input_state.occupations",
                        format!(
                            "expected {} entries, got {}",
                            info_layout.num_info(),
                            occupations.len()
                        ),
                    ));
                }
                basis_state(&info_layout, occupations)
            }
            InputStateSpec::Amplitudes { amplitudes } => {
                if amplitudes.len() != info_layout.total_dim() {
                    return Err(Error::scenario(
                        "input_state.amplitudes",
                        format!(
                            "expected {} amplitudes, got {}",
                            info_layout.total_dim(),
                            amplitudes.len()
                        ),
                    ));
                }
                let amps = crate::linalg::CVec::from_iterator(
                    amplitudes.len(),
                    amplitudes.iter().map(|p| C64::new(p[0], p[1])),
                );
                let state = StateVector::new(info_layout, amps)?;
                Ok(state.normalized()?.0)
            }
            InputStateSpec::CodeWord { index, .. } => {
                let k = info_layout.num_info();
                if *index >= k {
                    return Err(Error::scenario(
                        "input_state.index",
                        format!("code word index {index} out of range for {k} modes"),
                    ));
                }
                let mut occ = vec![0usize; k];
                occ[*index] = 1;
                basis_state(&info_layout, &occ)
            }
            InputStateSpec::Random { seed, .. } => Ok(StateVector::random(info_layout, *seed)),
        }
    }

    pub fn build_event(&self) -> Result<LossEvent> {
        let weights =
            |raw: &Option<Vec<[f64; 2]>>, count: usize, field: &str| -> Result<Vec<C64>> {
                match raw {
                    Option::None => Ok(vec![cr(1.0 / (count as f64).sqrt()); count]),
                    Some(w) => {
                        if w.len() != count {
                            return Err(Error::scenario(
                                field,
                                format!("expected {} weights, got {}", count, w.len()),
                            ));
                        }
                        Ok(w.iter().map(|p| C64::new(p[0], p[1])).collect())
                    }
                }
            };
        match self.event.kind {
            EventKind::None => Ok(LossEvent::None),
            EventKind::InfoLoss => Ok(LossEvent::InfoLoss(weights(
                &self.event.weights,
                self.layout.num_info(),
                "event.weights",
            )?)),
            EventKind::AncillaLoss => Ok(LossEvent::AncillaLoss(weights(
                &self.event.weights,
                self.layout.num_anc(),
                "event.weights",
            )?)),
        }
    }

    pub fn run(&self, seed_override: Option<u64>) -> Result<ProtocolReport> {
        let input = self.build_input()?;
        let event = self.build_event()?;
        run_protocol(
            &input,
            self.layout.anc_dims(),
            &self.coding,
            &event,
            seed_override.unwrap_or(self.seed),
        )
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EventSummary {
    pub kind: &'static str,
    pub weights: Vec<[f64; 2]>,
}

impl EventSummary {
    fn from_event(event: &LossEvent) -> Self {
        EventSummary {
            kind: event.kind_name(),
            weights: event
                .weights()
                .map(|w| w.iter().map(|c| [c.re, c.im]).collect())
                .unwrap_or_default(),
        }
    }
}

/// Report for a no-loss round trip.
#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub fidelity: f64,
    pub p_zero_counts: f64,
    pub truncation_tail: f64,
}

/// Report for one loss-injection run.
#[derive(Debug, Clone, Serialize)]
pub struct LossSimReport {
    pub event: EventSummary,
    pub collapse_norm: f64,
    pub branch_probability: f64,
    pub counts: Vec<usize>,
    pub count_probability: f64,
    pub outcome: OutcomeClass,
    pub recovery_applied: bool,
    pub fidelity: f64,
    pub p_zero_counts: f64,
    pub truncation_tail: f64,
}

impl LossSimReport {
    fn from_report(report: &ProtocolReport) -> Self {
        LossSimReport {
            event: EventSummary::from_event(&report.event),
            collapse_norm: report.collapse_norm,
            branch_probability: report.branch_probability,
            counts: report.counts.clone(),
            count_probability: report.count_probability,
            outcome: report.outcome,
            recovery_applied: report.recovery_applied,
            fidelity: report.fidelity,
            p_zero_counts: report.ancilla_vacuum_probability,
            truncation_tail: report.truncation_tail,
        }
    }
}

/// Artifacts produced by a loss-sim run.
#[derive(Debug, Clone)]
pub struct LossSimArtifacts {
    pub report: LossSimReport,
    pub distribution: Vec<CountRecord>,
    pub distribution_csv: String,
}

pub fn run_roundtrip(scenario: &ScenarioFile) -> Result<RoundtripReport> {
    let mut quiet = scenario.clone();
    quiet.event = EventSpec::default();
    let report = quiet.run(None)?;
    Ok(RoundtripReport {
        fidelity: report.fidelity,
        p_zero_counts: report.ancilla_vacuum_probability,
        truncation_tail: report.truncation_tail,
    })
}

pub fn run_loss_sim(
    scenario: &ScenarioFile,
    seed_override: Option<u64>,
) -> Result<LossSimArtifacts> {
    let report = scenario.run(seed_override)?;
    let distribution = count_distribution(&report.state)?;
    let csv = distribution_csv(report.state.layout(), &distribution);
    Ok(LossSimArtifacts {
        report: LossSimReport::from_report(&report),
        distribution,
        distribution_csv: csv,
    })
}

pub fn run_samples(
    scenario: &ScenarioFile,
    seed_override: Option<u64>,
    shots_override: Option<usize>,
) -> Result<String> {
    let report = scenario.run(seed_override)?;
    let shots = sample_counts(
        &report.state,
        seed_override.unwrap_or(scenario.seed),
        shots_override.unwrap_or(scenario.shots),
    )?;
    Ok(samples_csv(report.state.layout(), &shots))
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Coupling-strength sweep: the base scenario fixes everything except the
/// coupling scale. For the energy scheme the gamma matrix is multiplied by
/// each grid value; for the parity scheme the grid value becomes Γ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: ScenarioFile,
    pub grid: Vec<f64>,
}

pub const SWEEP_HEADER: &str =
    "gamma,p0_exact,p0_paper_form,mean_count,rate_no_loss,rate_ancilla_loss,rate_info_loss,rate_ambiguous";

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub p0_exact: f64,
    pub p0_paper_form: f64,
    pub mean_count: f64,
    pub rate_no_loss: f64,
    pub rate_ancilla_loss: f64,
    pub rate_info_loss: f64,
    pub rate_ambiguous: f64,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<SweepSpec> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.scenario.validate()?;
        if spec.grid.is_empty() {
            return Err(Error::scenario("grid", "needs at least one point"));
        }
        Ok(spec)
    }

    fn coding_at(&self, g: f64) -> CodingSpec {
        let mut coding = self.scenario.coding.clone();
        match coding.scheme {
            Scheme::Ecs => {
                for row in coding.gamma.iter_mut() {
                    for entry in row.iter_mut() {
                        *entry *= g;
                    }
                }
            }
            Scheme::Pcs => coding.strength = Some(g),
        }
        coding
    }

    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let input = self.scenario.build_input()?;
        let event = self.scenario.build_event()?;
        let anc_dims = self.scenario.layout.anc_dims();
        let mut rows = Vec::with_capacity(self.grid.len());
        for &g in &self.grid {
            let coding = self.coding_at(g);
            let run = crate::protocol::decode_pipeline(&input, anc_dims, &coding, &event)?;
            let dist = count_distribution(&run.state)?;
            let p0_exact = dist.first().map(|r| r.probability).unwrap_or(0.0);
            let mut mean_count = 0.0;
            for j in 0..self.scenario.layout.num_anc() {
                mean_count += mean_ancilla_count(&run.state, j)?;
            }
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
            rows.push(SweepRow {
                gamma: g,
                p0_exact,
                p0_paper_form: paper_p0_closed_form(&coding, &event),
                mean_count,
                rate_no_loss: rates[0],
                rate_ancilla_loss: rates[1],
                rate_info_loss: rates[2],
                rate_ambiguous: rates[3],
            });
        }
        Ok(rows)
    }

    pub fn csv(&self) -> Result<String> {
        let rows = self.run()?;
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.gamma,
                r.p0_exact,
                r.p0_paper_form,
                r.mean_count,
                r.rate_no_loss,
                r.rate_ancilla_loss,
                r.rate_info_loss,
                r.rate_ambiguous
            ));
        }
        Ok(out)
    }
}

/// The paper's printed closed form for the no-click probability, reported
/// as a companion column — never asserted against, since it does not match
/// the exact pipeline under any squeeze-parameter convention.
pub fn paper_p0_closed_form(coding: &CodingSpec, event: &LossEvent) -> f64 {
    let weights = match event {
        LossEvent::InfoLoss(w) => w.clone(),
        _ => return f64::NAN,
    };
    match coding.scheme {
        Scheme::Ecs => weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let product: f64 = coding.gamma[i]
                    .iter()
                    .map(|g| {
                        let e = (-g.abs()).exp();
                        2.0 * e / (1.0 + e)
                    })
                    .product();
                w.norm_sqr() * product
            })
            .sum(),
        Scheme::Pcs => {
            // printed pmf at m = 0 is sech(Γ) per coupled mode
            let strength = coding.strength.unwrap_or(0.0);
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let coupled = coding.gamma[i].iter().filter(|&&g| g == 1.0).count() as i32;
                    w.norm_sqr() * (1.0 / strength.cosh()).powi(coupled)
                })
                .sum()
        }
    }
}

// ---------------------------------------------------------------------------
// Synthesis certification specs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum CertSpec {
    /// Three-pulse mediated construction of the parity gate.
    MediatedPcs {
        strength: f64,
        #[serde(default = "one")]
        mu: f64,
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default = "plus_one")]
        qubit_init: i8,
        info_dim: usize,
        anc_dim: usize,
        #[serde(default)]
        input_seed: u64,
    },
    /// Coefficient-level Gaussian reduction of the dressed seed towards the
    /// energy-controlled-squeeze target.
    GaussianReduction {
        gamma: f64,
        lambda1: f64,
        mu1: f64,
        #[serde(default)]
        free_cubic: bool,
        #[serde(default = "one_u64")]
        seed: u64,
    },
    /// Windowed conjugation-identity residuals for the gate pairs of the
    /// cubic/Gaussian chain.
    ConjugationSuite {
        truncation: usize,
        lambda1: f64,
        mu1: f64,
        #[serde(default = "default_window")]
        window_fraction: f64,
    },
    /// Conjugation route vs direct generator exponential for the dressed
    /// seed.
    CubicDress {
        truncation: usize,
        lambda1: f64,
        mu1: f64,
        #[serde(default = "default_window")]
        window_fraction: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn one_u64() -> u64 {
    1
}
fn plus_one() -> i8 {
    1
}
fn default_window() -> f64 {
    DEFAULT_WINDOW_FRACTION
}

impl CertSpec {
    pub fn from_json(text: &str) -> Result<CertSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn run(&self) -> Result<serde_json::Value> {
        match self {
            CertSpec::MediatedPcs {
                strength,
                mu,
                kappa,
                qubit_init,
                info_dim,
                anc_dim,
                input_seed,
            } => {
                let info = ModeLayout::make(&[*info_dim], &[])?;
                let input = StateVector::random(info, *input_seed);
                let spec = MediatedProtocolSpec {
                    strength: *strength,
                    mu: *mu,
                    kappa: *kappa,
                    qubit_init: *qubit_init,
                    anc_dim: *anc_dim,
                };
                let out = mediated_pcs(&spec, &input)?;
                Ok(serde_json::json!({
                    "certificate": out.certificate,
                    "qubit_purity": out.qubit_purity,
                    "field_fidelity": out.field_fidelity,
                }))
            }
            CertSpec::GaussianReduction {
                gamma,
                lambda1,
                mu1,
                free_cubic,
                seed,
            } => {
                let target_a = QuadraticForm::quadratic(-gamma / 2.0, -gamma / 2.0, 0.0);
                let target_b = QuadraticForm::quadratic(1.0, -1.0, 0.0);
                let dressed_a = QuadraticForm {
                    qq: -3.0 * lambda1,
                    q: 1.0,
                    p: 1.0,
                    ..QuadraticForm::ZERO
                };
                let dressed_b = QuadraticForm {
                    qq: -3.0 * mu1,
                    q: 1.0,
                    p: 1.0,
                    ..QuadraticForm::ZERO
                };
                let result = gaussian_reduction_solve(
                    (&target_a, &target_b),
                    (&dressed_a, &dressed_b),
                    &ReductionOptions {
                        free_cubic: *free_cubic,
                        seed: *seed,
                        ..Default::default()
                    },
                );
                Ok(serde_json::json!({
                    "certificate": result.certificate,
                    "achieved_a": result.achieved_a,
                    "achieved_b": result.achieved_b,
                    "scale_split": result.scale,
                    "quadratic_rank_dressed": dressed_a.quadratic_rank(1e-9),
                    "quadratic_rank_target": target_a.quadratic_rank(1e-9),
                }))
            }
            CertSpec::ConjugationSuite {
                truncation,
                lambda1,
                mu1,
                window_fraction,
            } => {
                let layout = ModeLayout::make(&[*truncation], &[*truncation])?;
                let gen = crate::gates::two_mode_seed_generator(&layout)?;
                let ca = crate::gates::cubic_phase_gate(&layout, 0, *lambda1)?;
                let cb = crate::gates::cubic_phase_gate(&layout, 1, *mu1)?;
                let both = crate::fock::Operator::product(vec![ca.clone(), cb.clone()])?;
                let steps = [
                    (
                        "seed_generator/cubic_a",
                        ConjugationStep {
                            gate: ca,
                            tag: StepTag::Cubic,
                        },
                    ),
                    (
                        "seed_generator/cubic_b",
                        ConjugationStep {
                            gate: cb,
                            tag: StepTag::Cubic,
                        },
                    ),
                    (
                        "seed_generator/cubic_both",
                        ConjugationStep {
                            gate: both,
                            tag: StepTag::Cubic,
                        },
                    ),
                ];
                let mut entries = Vec::new();
                for (pair, step) in steps {
                    let residual =
                        conjugation_identity_check_windowed(&gen, &step.gate, *window_fraction)?;
                    entries.push(serde_json::json!({
                        "pair": pair,
                        "tag": step.tag,
                        "residual": residual,
                    }));
                }
                Ok(serde_json::json!({
                    "truncation": truncation,
                    "window_fraction": window_fraction,
                    "pairs": entries,
                }))
            }
            CertSpec::CubicDress {
                truncation,
                lambda1,
                mu1,
                window_fraction,
            } => {
                let layout = ModeLayout::make(&[*truncation], &[*truncation])?;
                let cert = cubic_dress_certificate(&layout, *lambda1, *mu1, *window_fraction)?;
                Ok(serde_json::to_value(&cert)?)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Embedded invariant checks (--check mode)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Re-run the invariant assertions embedded in a scenario: input
/// normalization, norm preservation of the coding unitary on probe states,
/// distribution normalization, and truncation tails.
pub fn run_checks(scenario: &ScenarioFile) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();

    let input = scenario.build_input()?;
    let n = input.norm();
    results.push(CheckResult {
        name: "input_normalized",
        passed: (n - 1.0).abs() <= 1e-10 && input.is_finite(),
        detail: format!("norm {n}"),
    });

    let unitary = coding_unitary(&scenario.layout, &scenario.coding)?;
    let mut worst_drift = 0.0f64;
    for probe_seed in 0..3u64 {
        let probe = StateVector::random(scenario.layout.clone(), 0xC0FFEE + probe_seed);
        let out = unitary.apply(&probe)?;
        worst_drift = worst_drift.max((out.norm() - 1.0).abs());
    }
    results.push(CheckResult {
        name: "coding_unitary_norm_preserving",
        passed: worst_drift <= 1e-10,
        detail: format!("max norm drift {worst_drift:e}"),
    });

    let report = scenario.run(None)?;
    let dist = count_distribution(&report.state)?;
    let total: f64 = dist.iter().map(|r| r.probability).sum();
    results.push(CheckResult {
        name: "distribution_normalized",
        passed: (total - 1.0).abs() <= 1e-10,
        detail: format!("sum {total}"),
    });
    results.push(CheckResult {
        name: "truncation_tail_small",
        passed: report.truncation_tail <= 1e-6,
        detail: format!("top-two-level mass {:e}", report.truncation_tail),
    });

    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_text() -> String {
        r#"{
            "layout": {"info_dims": [3], "anc_dims": [40]},
            "coding": {"scheme": "ecs", "gamma": [[0.3]], "direction": "encode"},
            "input_state": {"occupations": [1]},
            "event": {"kind": "ancilla_loss"},
            "shots": 64,
            "seed": 9
        }"#
        .to_string()
    }

    #[test]
    fn parse_validate_round_trip_is_lossless() {
        let scenario = ScenarioFile::from_json(&scenario_text()).unwrap();
        let text = scenario.to_json();
        let back = ScenarioFile::from_json(&text).unwrap();
        assert_eq!(back, scenario);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = scenario_text().replace("\"seed\": 9", "\"seed\": 9, \"bogus\": 1");
        assert!(ScenarioFile::from_json(&bad).is_err());
    }

    #[test]
    fn bad_gamma_shape_names_the_field() {
        let bad = scenario_text().replace("[[0.3]]", "[[0.3],[0.1]]");
        let err = ScenarioFile::from_json(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("coding.gamma"), "diagnostic was: {msg}");
    }

    #[test]
    fn roundtrip_report_fields() {
        let scenario = ScenarioFile::from_json(&scenario_text()).unwrap();
        let report = run_roundtrip(&scenario).unwrap();
        assert!(report.fidelity >= 1.0 - 1e-10);
        assert!(report.p_zero_counts >= 1.0 - 1e-10);
        let json = serde_json::to_string(&report).unwrap();
        for key in ["fidelity", "p_zero_counts", "truncation_tail"] {
            assert!(json.contains(key));
        }
    }

    #[test]
    fn loss_sim_artifacts_are_deterministic() {
        let scenario = ScenarioFile::from_json(&scenario_text()).unwrap();
        let a = run_loss_sim(&scenario, None).unwrap();
        let b = run_loss_sim(&scenario, None).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        assert_eq!(a.distribution_csv, b.distribution_csv);
        assert_eq!(a.report.outcome, OutcomeClass::AncillaLoss(0));
        assert!(!a.report.recovery_applied);
    }

    #[test]
    fn presets_build() {
        let mut scenario = ScenarioFile::from_json(&scenario_text()).unwrap();
        scenario.input_state = InputStateSpec::Random {
            preset: RandomTag::Random,
            seed: 4,
        };
        assert!((scenario.build_input().unwrap().norm() - 1.0).abs() < 1e-12);

        let text = r#"{
            "layout": {"info_dims": [2, 2], "anc_dims": [30]},
            "coding": {"scheme": "ecs", "gamma": [[0.2],[0.2]], "direction": "encode"},
            "input_state": {"preset": "code_word", "index": 1},
            "event": {"kind": "none"}
        }"#;
        let scenario = ScenarioFile::from_json(text).unwrap();
        let input = scenario.build_input().unwrap();
        let idx = input.layout().flatten(&[0, 1]).unwrap();
        assert_eq!(input.amps()[idx], cr(1.0));
    }

    #[test]
    fn sweep_zero_grid_gives_unit_p0() {
        let text = format!(
            r#"{{"scenario": {}, "grid": [0.0]}}"#,
            scenario_text().replace("\"kind\": \"ancilla_loss\"", "\"kind\": \"info_loss\"")
        );
        let spec = SweepSpec::from_json(&text).unwrap();
        let rows = spec.run().unwrap();
        assert!((rows[0].p0_exact - 1.0).abs() < 1e-12);
        let csv = spec.csv().unwrap();
        assert!(csv.starts_with(SWEEP_HEADER));
    }

    #[test]
    fn sweep_p0_strictly_decreasing() {
        let text = format!(
            r#"{{"scenario": {}, "grid": [0.1, 0.2, 0.3, 0.4, 0.5]}}"#,
            scenario_text()
                .replace("\"kind\": \"ancilla_loss\"", "\"kind\": \"info_loss\"")
                .replace("[[0.3]]", "[[1.0]]")
                .replace("[40]", "[100]")
        );
        let spec = SweepSpec::from_json(&text).unwrap();
        let rows = spec.run().unwrap();
        for pair in rows.windows(2) {
            assert!(
                pair[1].p0_exact < pair[0].p0_exact,
                "p0 not decreasing: {} -> {}",
                pair[0].p0_exact,
                pair[1].p0_exact
            );
        }
        // the classifier's false-negative rate IS the no-click probability:
        // NoLoss fires exactly on the all-zero record
        for row in &rows {
            assert_eq!(row.rate_no_loss, row.p0_exact);
        }
    }

    #[test]
    fn checks_pass_on_sane_scenario() {
        let scenario = ScenarioFile::from_json(&scenario_text()).unwrap();
        let results = run_checks(&scenario).unwrap();
        assert!(results.iter().all(|c| c.passed), "{results:?}");
    }

    #[test]
    fn cert_spec_mediated_runs() {
        let text = r#"{"task": "mediated_pcs", "strength": 0.3, "info_dim": 3, "anc_dim": 24}"#;
        let spec = CertSpec::from_json(text).unwrap();
        let value = spec.run().unwrap();
        let purity = value["qubit_purity"].as_f64().unwrap();
        assert!(purity >= 1.0 - 1e-9);
    }

    #[test]
    fn cert_spec_reduction_runs() {
        let text = r#"{"task": "gaussian_reduction", "gamma": 0.3, "lambda1": 0.05, "mu1": 0.05}"#;
        let spec = CertSpec::from_json(text).unwrap();
        let value = spec.run().unwrap();
        assert!(value["certificate"]["residual"].as_f64().unwrap() >= 0.0);
        assert_eq!(value["quadratic_rank_dressed"].as_u64().unwrap(), 1);
        assert_eq!(value["quadratic_rank_target"].as_u64().unwrap(), 2);
    }
}
