//! The end-to-end detection pipeline: encode the information register with a
//! vacuum ancilla, optionally inject a single collective photon loss, decode
//! with the inverse unitary, and hand the post-decode state to measurement.
//!
//! Loss is injected exactly once, between encode and decode; composing
//! several losses is not expressible through this API (single-loss model).

use crate::error::{Error, Result};
use crate::fock::{
    basis_state, ladder_mat, tail_mass, LadderKind, ModeLayout, Operator, StateVector,
};
use crate::gates::{coding_unitary, CodingSpec, Direction, Scheme};
use crate::linalg::{cr, C64};
use crate::measurement::{
    classify, count_distribution, project_counts, sample_counts, OutcomeClass,
};

/// A single-photon loss event: none, or a normalized superposition of
/// annihilations across one register.
#[derive(Debug, Clone, PartialEq)]
pub enum LossEvent {
    None,
    /// Σ α_i â_i over the information modes.
    InfoLoss(Vec<C64>),
    /// Σ β_j b̂_j over the ancilla modes.
    AncillaLoss(Vec<C64>),
}

impl LossEvent {
    /// Uniform 1/√K superposition over the information register.
    pub fn uniform_info(k: usize) -> Self {
        LossEvent::InfoLoss(vec![cr(1.0 / (k as f64).sqrt()); k])
    }

    /// Uniform 1/√M superposition over the ancilla register.
    pub fn uniform_ancilla(m: usize) -> Self {
        LossEvent::AncillaLoss(vec![cr(1.0 / (m as f64).sqrt()); m])
    }

    /// All weight on a single mode of the register.
    pub fn info_mode(k: usize, i: usize) -> Self {
        let mut w = vec![cr(0.0); k];
        w[i] = cr(1.0);
        LossEvent::InfoLoss(w)
    }

    pub fn ancilla_mode(m: usize, j: usize) -> Self {
        let mut w = vec![cr(0.0); m];
        w[j] = cr(1.0);
        LossEvent::AncillaLoss(w)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LossEvent::None => "none",
            LossEvent::InfoLoss(_) => "info_loss",
            LossEvent::AncillaLoss(_) => "ancilla_loss",
        }
    }

    pub fn weights(&self) -> Option<&[C64]> {
        match self {
            LossEvent::None => None,
            LossEvent::InfoLoss(w) | LossEvent::AncillaLoss(w) => Some(w),
        }
    }

    fn validate(&self, layout: &ModeLayout) -> Result<()> {
        let (w, expected, register) = match self {
            LossEvent::None => return Ok(()),
            LossEvent::InfoLoss(w) => (w, layout.num_info(), "information"),
            LossEvent::AncillaLoss(w) => (w, layout.num_anc(), "ancilla"),
        };
        if w.len() != expected {
            return Err(Error::InvalidWeights {
                reason: format!(
                    "{} weights for a {}-mode {} register",
                    w.len(),
                    expected,
                    register
                ),
            });
        }
        let norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights {
                reason: format!("squared weights sum to {norm2}, expected 1"),
            });
        }
        Ok(())
    }
}

/// Σ w_k · â_k over the register designated by the event.
pub fn collective_loss_op(layout: &ModeLayout, event: &LossEvent) -> Result<Operator> {
    event.validate(layout)?;
    let (weights, offset) = match event {
        LossEvent::None => return Err(Error::NoLossEvent),
        LossEvent::InfoLoss(w) => (w, 0usize),
        LossEvent::AncillaLoss(w) => (w, layout.num_info()),
    };
    let terms = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let mode = offset + k;
            let d = layout.dim(mode)?;
            Ok((w, mode, ladder_mat(d, LadderKind::Annihilate)))
        })
        .collect::<Result<Vec<_>>>()?;
    Operator::sum_on_modes(layout, terms)
}

/// Deterministic part of one protocol run: the normalized post-decode state
/// and the collapse norm recorded when the loss branch was normalized.
#[derive(Debug, Clone)]
pub struct DecodedRun {
    pub state: StateVector,
    /// Norm of `L·U|Ψ⟩` before renormalization; 1 when no loss is injected.
    pub collapse_norm: f64,
}

/// Encode → (loss) → decode. `input_info` lives on a bare information
/// register; the ancilla register (dimensions `anc_dims`) starts in vacuum.
pub fn decode_pipeline(
    input_info: &StateVector,
    anc_dims: &[usize],
    coding: &CodingSpec,
    event: &LossEvent,
) -> Result<DecodedRun> {
    if input_info.layout().num_anc() != 0 {
        return Err(Error::LayoutMismatch);
    }
    if coding.num_info() != input_info.layout().num_info() || coding.num_anc() != anc_dims.len() {
        return Err(Error::scenario(
            "coding.gamma",
            "coupling matrix shape does not match layout",
        ));
    }
    let (input, _) = input_info.normalized()?;
    let psi0 = input.with_vacuum_ancilla(anc_dims)?;
    let layout = psi0.layout().clone();
    let encode = coding_unitary(&layout, &coding.clone().with_direction(Direction::Encode))?;

    let mut psi = encode.apply(&psi0)?;
    let collapse_norm = match event {
        LossEvent::None => 1.0,
        _ => {
            let loss = collective_loss_op(&layout, event)?;
            psi = loss.apply(&psi)?;
            let (renormed, norm) = psi.normalized().map_err(|_| Error::ImpossibleEvent)?;
            psi = renormed;
            norm
        }
    };
    let state = encode.dagger().apply(&psi)?;
    Ok(DecodedRun {
        state,
        collapse_norm,
    })
}

/// One complete run: pipeline, one seeded photon-count shot, classification,
/// recovery where defined, and fidelity bookkeeping.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub event: LossEvent,
    /// Post-decode normalized state on the full layout.
    pub state: StateVector,
    pub collapse_norm: f64,
    /// collapse_norm² — probability weight of the injected branch.
    pub branch_probability: f64,
    /// Sampled ancilla counts (one shot, from `seed`).
    pub counts: Vec<usize>,
    /// Exact probability of that count record.
    pub count_probability: f64,
    pub outcome: OutcomeClass,
    pub recovery_applied: bool,
    /// Fidelity of the post-measurement (and post-recovery, when applied)
    /// information state against the input.
    pub fidelity: f64,
    /// Probability of seeing zero photons on every ancilla mode.
    pub ancilla_vacuum_probability: f64,
    /// Mass in the top two levels of the worst ancilla mode; truncation
    /// adequacy telemetry.
    pub truncation_tail: f64,
}

pub fn run_protocol(
    input_info: &StateVector,
    anc_dims: &[usize],
    coding: &CodingSpec,
    event: &LossEvent,
    seed: u64,
) -> Result<ProtocolReport> {
    let run = decode_pipeline(input_info, anc_dims, coding, event)?;
    let layout = run.state.layout().clone();
    let dist = count_distribution(&run.state)?;
    let ancilla_vacuum_probability = dist.first().map(|record| record.probability).unwrap_or(0.0);

    let counts = sample_counts(&run.state, seed, 1)?
        .pop()
        .expect("one shot requested");
    let (info_state, count_probability) = project_counts(&run.state, &counts)?;
    let outcome = classify(&counts);

    let (final_info, recovery_applied) = match (&coding.scheme, outcome) {
        (Scheme::Pcs, OutcomeClass::AncillaLoss(j)) => {
            (parity_correction(&info_state, coding, j)?, true)
        }
        _ => (info_state, false),
    };
    let (input, _) = input_info.normalized()?;
    let fidelity = crate::fock::fidelity(&final_info, &input)?;

    let mut truncation_tail = 0.0f64;
    for j in 0..layout.num_anc() {
        let mode = layout.anc_mode(j)?;
        let dim = layout.dim(mode)?;
        truncation_tail = truncation_tail.max(tail_mass(&run.state, mode, dim.saturating_sub(3))?);
    }

    Ok(ProtocolReport {
        event: event.clone(),
        branch_probability: run.collapse_norm * run.collapse_norm,
        collapse_norm: run.collapse_norm,
        state: run.state,
        counts,
        count_probability,
        outcome,
        recovery_applied,
        fidelity,
        ancilla_vacuum_probability,
        truncation_tail,
    })
}

/// Conditional information state after a single photon is detected on
/// ancilla mode `j`: the sinh distortion, evaluated diagonally in the
/// information number basis.
pub fn info_distortion_after_ancilla_loss(
    input_info: &StateVector,
    coding: &CodingSpec,
    j: usize,
) -> Result<StateVector> {
    if input_info.layout().num_anc() != 0 {
        return Err(Error::LayoutMismatch);
    }
    let layout = input_info.layout().clone();
    if coding.num_info() != layout.num_info() || j >= coding.num_anc() {
        return Err(Error::InvalidMode {
            mode: j,
            count: coding.num_anc(),
        });
    }
    let mut out = input_info.clone();
    match coding.scheme {
        Scheme::Ecs => {
            for (idx, amp) in out.amps_mut().iter_mut().enumerate() {
                let occ = layout.unflatten(idx);
                let g: f64 = occ
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| coding.gamma[i][j] * n as f64)
                    .sum();
                *amp *= cr((2.0 * g).sinh());
            }
        }
        Scheme::Pcs => {
            let strength = coding.strength.ok_or(Error::MissingStrength)?;
            let scale = (2.0 * strength).sinh();
            for (idx, amp) in out.amps_mut().iter_mut().enumerate() {
                let occ = layout.unflatten(idx);
                let weighted: usize = occ
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| coding.gamma[*i][j] == 1.0)
                    .map(|(_, &n)| n)
                    .sum();
                let parity = if weighted % 2 == 0 { 1.0 } else { -1.0 };
                *amp *= cr(scale * parity);
            }
        }
    }
    Ok(out.normalized()?.0)
}

/// Parity phase on the information modes coupled to ancilla `j` — the
/// recovery unitary for an ancilla loss under parity coding. Involution.
pub fn parity_correction(
    state: &StateVector,
    coding: &CodingSpec,
    j: usize,
) -> Result<StateVector> {
    if coding.scheme != Scheme::Pcs {
        return Err(Error::UnsupportedRecovery);
    }
    let layout = state.layout().clone();
    if coding.num_info() != layout.num_info() || j >= coding.num_anc() {
        return Err(Error::InvalidMode {
            mode: j,
            count: coding.num_anc(),
        });
    }
    let mut out = state.clone();
    for (idx, amp) in out.amps_mut().iter_mut().enumerate() {
        let occ = layout.unflatten(idx);
        let weighted: usize = occ
            .iter()
            .take(layout.num_info())
            .enumerate()
            .filter(|(i, _)| coding.gamma[*i][j] == 1.0)
            .map(|(_, &n)| n)
            .sum();
        if weighted % 2 == 1 {
            *amp = -*amp;
        }
    }
    Ok(out)
}

/// The K single-photon product code words |0…1…0⟩ of the fixed-total-photon
/// code, on a bare information register of K two-level modes.
pub fn code_words(k: usize) -> Result<Vec<StateVector>> {
    if k == 0 {
        return Err(Error::EmptyLayout);
    }
    let layout = ModeLayout::make(&vec![2; k], &[])?;
    (0..k)
        .map(|i| {
            let mut occ = vec![0usize; k];
            occ[i] = 1;
            basis_state(&layout, &occ)
        })
        .collect()
}
