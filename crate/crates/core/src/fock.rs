//! Truncated multi-mode Fock-space linear algebra: mode layouts, state
//! vectors, and operators in a handful of structured representations.
//!
//! Index convention (fixed, used by every serialization): information modes
//! first, then ancilla modes, flattened row-major — the last mode varies
//! fastest. Truncation is hard: the creation operator maps the top level of
//! a mode to zero, so exponentials of (truncated) Hermitian generators stay
//! exactly unitary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cr, expm_from_eigen, expm_i_hermitian, hermitian_eigen, kron, CMat, CVec, C64,
};

/// Cap on the number of amplitudes a layout may address (2^21).
pub const AMP_CAP: usize = 1 << 21;
/// Cap on the dimension for dense matrix materialization.
pub const DENSE_CAP: usize = 2048;
/// States with squared-norm within this of 1 count as normalized.
pub const NORM_TOL: f64 = 1e-12;
/// Norms below this are treated as zero (impossible branch).
pub const NORM_EPS: f64 = 1e-14;

// ---------------------------------------------------------------------------
// ModeLayout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    info_dims: Vec<usize>,
    anc_dims: Vec<usize>,
}

/// Registry of information and ancilla modes with per-mode truncation
/// dimensions. Modes are addressed by a single index: `0..K` information,
/// `K..K+M` ancilla.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawLayout")]
pub struct ModeLayout {
    dims: Vec<usize>,
    num_info: usize,
    total: usize,
}

impl Serialize for ModeLayout {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = ser.serialize_struct("ModeLayout", 2)?;
        s.serialize_field("info_dims", self.info_dims())?;
        s.serialize_field("anc_dims", self.anc_dims())?;
        s.end()
    }
}

impl TryFrom<RawLayout> for ModeLayout {
    type Error = Error;
    fn try_from(raw: RawLayout) -> Result<Self> {
        ModeLayout::make(&raw.info_dims, &raw.anc_dims)
    }
}

impl ModeLayout {
    /// Build a layout from per-mode truncation dimensions. Either register
    /// may be empty (e.g. a bare information register), but not both.
    pub fn make(info_dims: &[usize], anc_dims: &[usize]) -> Result<Self> {
        if info_dims.is_empty() && anc_dims.is_empty() {
            return Err(Error::EmptyLayout);
        }
        let dims: Vec<usize> = info_dims.iter().chain(anc_dims).copied().collect();
        let mut total: usize = 1;
        for (mode, &d) in dims.iter().enumerate() {
            if d == 0 {
                return Err(Error::ZeroDim { mode });
            }
            total = total
                .checked_mul(d)
                .filter(|&t| t <= AMP_CAP)
                .ok_or(Error::DimensionCap {
                    total: usize::MAX,
                    cap: AMP_CAP,
                })?;
        }
        if total > AMP_CAP {
            return Err(Error::DimensionCap {
                total,
                cap: AMP_CAP,
            });
        }
        Ok(ModeLayout {
            dims,
            num_info: info_dims.len(),
            total,
        })
    }

    pub fn info_dims(&self) -> &[usize] {
        &self.dims[..self.num_info]
    }

    pub fn anc_dims(&self) -> &[usize] {
        &self.dims[self.num_info..]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn num_info(&self) -> usize {
        self.num_info
    }

    pub fn num_anc(&self) -> usize {
        self.dims.len() - self.num_info
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Product of the information-mode dimensions (number of info sectors).
    pub fn info_dim(&self) -> usize {
        self.info_dims().iter().product()
    }

    /// Product of the ancilla-mode dimensions.
    pub fn anc_dim(&self) -> usize {
        self.anc_dims().iter().product()
    }

    pub fn dim(&self, mode: usize) -> Result<usize> {
        self.dims.get(mode).copied().ok_or(Error::InvalidMode {
            mode,
            count: self.dims.len(),
        })
    }

    /// Global mode index of ancilla mode `j`.
    pub fn anc_mode(&self, j: usize) -> Result<usize> {
        if j < self.num_anc() {
            Ok(self.num_info + j)
        } else {
            Err(Error::InvalidMode {
                mode: self.num_info + j,
                count: self.dims.len(),
            })
        }
    }

    /// Row-major strides: `strides[k]` = product of dims after mode `k`.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    pub fn flatten(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.dims.len() {
            return Err(Error::LayoutMismatch);
        }
        let mut idx = 0usize;
        for (mode, (&n, &d)) in occ.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::OccupationOutOfRange {
                    mode,
                    occ: n,
                    dim: d,
                });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0usize; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            occ[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        occ
    }

    /// The information register on its own (no ancilla modes).
    pub fn info_only(&self) -> Result<ModeLayout> {
        ModeLayout::make(self.info_dims(), &[])
    }

    /// Flat index into the ancilla factor space for given per-mode counts.
    pub fn anc_flatten(&self, counts: &[usize]) -> Result<usize> {
        if counts.len() != self.num_anc() {
            return Err(Error::LayoutMismatch);
        }
        let mut idx = 0usize;
        for (j, (&n, &d)) in counts.iter().zip(self.anc_dims()).enumerate() {
            if n >= d {
                return Err(Error::OccupationOutOfRange {
                    mode: self.num_info + j,
                    occ: n,
                    dim: d,
                });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn anc_unflatten(&self, mut idx: usize) -> Vec<usize> {
        let dims = self.anc_dims();
        let mut counts = vec![0usize; dims.len()];
        for j in (0..dims.len()).rev() {
            counts[j] = idx % dims[j];
            idx /= dims[j];
        }
        counts
    }
}

/// Convenience constructor mirroring the layout contract.
pub fn make_layout(info_dims: &[usize], anc_dims: &[usize]) -> Result<ModeLayout> {
    ModeLayout::make(info_dims, anc_dims)
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// Complex amplitudes over the occupation-number basis of a layout.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: ModeLayout,
    amps: CVec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    layout: ModeLayout,
    amps: Vec<[f64; 2]>,
}

impl StateVector {
    pub fn new(layout: ModeLayout, amps: CVec) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch);
        }
        Ok(StateVector { layout, amps })
    }

    pub fn zero(layout: ModeLayout) -> Self {
        let n = layout.total_dim();
        StateVector {
            layout,
            amps: CVec::zeros(n),
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn amps(&self) -> &CVec {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut CVec {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// All amplitudes finite (no NaN/Inf).
    pub fn is_finite(&self) -> bool {
        self.amps
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm().powi(2) - 1.0).abs() <= NORM_TOL
    }

    /// Returns the unit-norm state and the pre-normalization norm.
    pub fn normalized(&self) -> Result<(StateVector, f64)> {
        let n = self.norm();
        if n <= NORM_EPS {
            return Err(Error::ZeroNorm { norm: n });
        }
        let mut out = self.clone();
        out.amps /= cr(n);
        Ok((out, n))
    }

    pub fn scaled(&self, c: C64) -> StateVector {
        let mut out = self.clone();
        out.amps *= c;
        out
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        let mut out = self.clone();
        out.amps += &other.amps;
        Ok(out)
    }

    /// Tensor this (information-register) state with a vacuum ancilla
    /// register of the given dimensions.
    pub fn with_vacuum_ancilla(&self, anc_dims: &[usize]) -> Result<StateVector> {
        if self.layout.num_anc() != 0 {
            return Err(Error::LayoutMismatch);
        }
        let full = ModeLayout::make(self.layout.info_dims(), anc_dims)?;
        let anc_total = full.anc_dim();
        let mut out = StateVector::zero(full);
        for (s, amp) in self.amps.iter().enumerate() {
            out.amps[s * anc_total] = *amp;
        }
        Ok(out)
    }

    /// Seeded pseudo-random normalized state (complex-Gaussian amplitudes
    /// from a ChaCha8 stream); identical seed gives identical draws.
    pub fn random(layout: ModeLayout, seed: u64) -> StateVector {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut next_unit = move || {
            // 53-bit mantissa draw in [0, 1)
            (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        };
        let n = layout.total_dim();
        let mut amps = CVec::zeros(n);
        for i in 0..n {
            // Box-Muller
            let u1 = next_unit().max(1e-300);
            let u2 = next_unit();
            let r = (-2.0 * u1.ln()).sqrt();
            let th = std::f64::consts::TAU * u2;
            amps[i] = C64::new(r * th.cos(), r * th.sin());
        }
        let state = StateVector { layout, amps };
        state
            .normalized()
            .expect("gaussian draw has nonzero norm")
            .0
    }

    pub fn to_json(&self) -> String {
        let amps = self.amps.iter().map(|z| [z.re, z.im]).collect();
        serde_json::to_string(&StateJson {
            layout: self.layout.clone(),
            amps,
        })
        .expect("state serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<StateVector> {
        let raw: StateJson = serde_json::from_str(text)?;
        let amps = CVec::from_iterator(
            raw.amps.len(),
            raw.amps.iter().map(|p| C64::new(p[0], p[1])),
        );
        StateVector::new(raw.layout, amps)
    }
}

/// Unit basis vector for the given per-mode occupations.
pub fn basis_state(layout: &ModeLayout, occ: &[usize]) -> Result<StateVector> {
    let idx = layout.flatten(occ)?;
    let mut st = StateVector::zero(layout.clone());
    st.amps[idx] = cr(1.0);
    Ok(st)
}

/// All modes in the ground level.
pub fn vacuum_state(layout: &ModeLayout) -> StateVector {
    let mut st = StateVector::zero(layout.clone());
    st.amps[0] = cr(1.0);
    st
}

/// ⟨a|b⟩ (conjugate-linear in the first argument).
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.layout != b.layout {
        return Err(Error::LayoutMismatch);
    }
    Ok(a.amps.dotc(&b.amps))
}

/// |⟨a|b⟩|² / (‖a‖²‖b‖²); global-phase invariant, symmetric, in [0, 1].
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na <= NORM_EPS {
        return Err(Error::ZeroNorm { norm: na });
    }
    if nb <= NORM_EPS {
        return Err(Error::ZeroNorm { norm: nb });
    }
    let ov = inner(a, b)?;
    Ok((ov.norm() / (na * nb)).powi(2).min(1.0))
}

/// Photon-number distribution of one mode (all other modes summed out).
pub fn mode_marginal(state: &StateVector, mode: usize) -> Result<Vec<f64>> {
    let d = state.layout.dim(mode)?;
    let strides = state.layout.strides();
    let s = strides[mode];
    let mut marg = vec![0.0f64; d];
    for (idx, amp) in state.amps.iter().enumerate() {
        let n = (idx / s) % d;
        marg[n] += amp.norm_sqr();
    }
    Ok(marg)
}

/// Probability mass of the mode's marginal strictly above `cutoff`.
pub fn tail_mass(state: &StateVector, mode: usize, cutoff: usize) -> Result<f64> {
    let marg = mode_marginal(state, mode)?;
    Ok(marg.iter().skip(cutoff + 1).sum())
}

// ---------------------------------------------------------------------------
// Operator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
}

/// Structured operator on a layout's Hilbert space.
///
/// Every representation applies to states without materializing the full
/// `total_dim × total_dim` matrix; `to_dense` expands small instances for
/// tests and certificates.
#[derive(Debug, Clone)]
pub struct Operator {
    layout: ModeLayout,
    repr: Repr,
}

#[derive(Debug, Clone)]
pub(crate) enum Repr {
    /// Full matrix over the layout.
    Dense(CMat),
    /// Diagonal in the occupation-number basis.
    Diagonal(CVec),
    /// Single-mode matrix acting on mode `mode`, identity elsewhere.
    OnMode { mode: usize, mat: CMat },
    /// Weighted sum of single-mode terms: Σ c_k · (mat_k on mode_k).
    SumOnModes { terms: Vec<(C64, usize, CMat)> },
    /// Block-diagonal over information occupation sectors: for sector `s`
    /// the ancilla-register action is the tensor product over ancilla modes
    /// of `factors[s][j]`.
    SectorFactored { factors: Vec<Vec<CMat>> },
    /// Tensor product `A ⊗ B` on a pair of modes, identity elsewhere.
    PairKron {
        modes: (usize, usize),
        a: CMat,
        b: CMat,
    },
    /// `exp(i · scale · A ⊗ B)` on a pair of modes, stored eigen-factored
    /// (A = Va Λa Va†, B = Vb Λb Vb†). Exactly unitary for Hermitian A, B.
    PairExp {
        modes: (usize, usize),
        evals_a: Vec<f64>,
        evecs_a: CMat,
        evals_b: Vec<f64>,
        evecs_b: CMat,
        scale: f64,
    },
    /// Operator product: `factors[0] · factors[1] · …` (rightmost applies
    /// first).
    Product(Vec<Operator>),
}

impl Operator {
    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn identity(layout: &ModeLayout) -> Operator {
        let n = layout.total_dim();
        Operator {
            layout: layout.clone(),
            repr: Repr::Diagonal(CVec::from_element(n, cr(1.0))),
        }
    }

    pub fn from_dense(layout: &ModeLayout, mat: CMat) -> Result<Operator> {
        if mat.nrows() != layout.total_dim() || mat.ncols() != layout.total_dim() {
            return Err(Error::LayoutMismatch);
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::Dense(mat),
        })
    }

    pub fn from_diagonal(layout: &ModeLayout, diag: CVec) -> Result<Operator> {
        if diag.len() != layout.total_dim() {
            return Err(Error::LayoutMismatch);
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::Diagonal(diag),
        })
    }

    pub fn on_mode(layout: &ModeLayout, mode: usize, mat: CMat) -> Result<Operator> {
        let d = layout.dim(mode)?;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::LayoutMismatch);
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::OnMode { mode, mat },
        })
    }

    pub fn sum_on_modes(layout: &ModeLayout, terms: Vec<(C64, usize, CMat)>) -> Result<Operator> {
        for (_, mode, mat) in &terms {
            let d = layout.dim(*mode)?;
            if mat.nrows() != d || mat.ncols() != d {
                return Err(Error::LayoutMismatch);
            }
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::SumOnModes { terms },
        })
    }

    pub fn sector_factored(layout: &ModeLayout, factors: Vec<Vec<CMat>>) -> Result<Operator> {
        if factors.len() != layout.info_dim() {
            return Err(Error::LayoutMismatch);
        }
        for per_sector in &factors {
            if per_sector.len() != layout.num_anc() {
                return Err(Error::LayoutMismatch);
            }
            for (j, f) in per_sector.iter().enumerate() {
                let d = layout.anc_dims()[j];
                if f.nrows() != d || f.ncols() != d {
                    return Err(Error::LayoutMismatch);
                }
            }
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::SectorFactored { factors },
        })
    }

    pub fn pair_kron(
        layout: &ModeLayout,
        modes: (usize, usize),
        a: CMat,
        b: CMat,
    ) -> Result<Operator> {
        let da = layout.dim(modes.0)?;
        let db = layout.dim(modes.1)?;
        if modes.0 == modes.1
            || a.nrows() != da
            || a.ncols() != da
            || b.nrows() != db
            || b.ncols() != db
        {
            return Err(Error::LayoutMismatch);
        }
        Ok(Operator {
            layout: layout.clone(),
            repr: Repr::PairKron { modes, a, b },
        })
    }

    pub fn product(factors: Vec<Operator>) -> Result<Operator> {
        let layout = factors
            .first()
            .map(|f| f.layout.clone())
            .ok_or(Error::EmptyLayout)?;
        if factors.iter().any(|f| f.layout != layout) {
            return Err(Error::LayoutMismatch);
        }
        Ok(Operator {
            layout,
            repr: Repr::Product(factors),
        })
    }

    /// `exp(i · scale · self)` for Hermitian operators in representations
    /// that support structured exponentiation.
    pub fn expm_i(&self, scale: f64) -> Result<Operator> {
        let repr = match &self.repr {
            Repr::Dense(mat) => Repr::Dense(expm_i_hermitian(mat, scale)),
            Repr::Diagonal(diag) => Repr::Diagonal(CVec::from_iterator(
                diag.len(),
                diag.iter().map(|z| {
                    // Hermitian diagonal means real entries
                    (C64::new(0.0, scale) * z).exp()
                }),
            )),
            Repr::OnMode { mode, mat } => Repr::OnMode {
                mode: *mode,
                mat: expm_i_hermitian(mat, scale),
            },
            Repr::PairKron { modes, a, b } => {
                let (evals_a, evecs_a) = hermitian_eigen(a);
                let (evals_b, evecs_b) = hermitian_eigen(b);
                Repr::PairExp {
                    modes: *modes,
                    evals_a,
                    evecs_a,
                    evals_b,
                    evecs_b,
                    scale,
                }
            }
            _ => {
                return Err(Error::Unsupported {
                    what: "expm_i on this representation",
                })
            }
        };
        Ok(Operator {
            layout: self.layout.clone(),
            repr,
        })
    }

    /// Hermitian adjoint.
    pub fn dagger(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Diagonal(d) => Repr::Diagonal(d.map(|z| z.conj())),
            Repr::OnMode { mode, mat } => Repr::OnMode {
                mode: *mode,
                mat: mat.adjoint(),
            },
            Repr::SumOnModes { terms } => Repr::SumOnModes {
                terms: terms
                    .iter()
                    .map(|(c, mode, mat)| (c.conj(), *mode, mat.adjoint()))
                    .collect(),
            },
            Repr::SectorFactored { factors } => Repr::SectorFactored {
                factors: factors
                    .iter()
                    .map(|fs| fs.iter().map(|f| f.adjoint()).collect())
                    .collect(),
            },
            Repr::PairKron { modes, a, b } => Repr::PairKron {
                modes: *modes,
                a: a.adjoint(),
                b: b.adjoint(),
            },
            Repr::PairExp {
                modes,
                evals_a,
                evecs_a,
                evals_b,
                evecs_b,
                scale,
            } => Repr::PairExp {
                modes: *modes,
                evals_a: evals_a.clone(),
                evecs_a: evecs_a.clone(),
                evals_b: evals_b.clone(),
                evecs_b: evecs_b.clone(),
                scale: -scale,
            },
            Repr::Product(fs) => Repr::Product(fs.iter().rev().map(|f| f.dagger()).collect()),
        };
        Operator {
            layout: self.layout.clone(),
            repr,
        }
    }

    /// Matrix-vector product. The result is not renormalized.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.layout != self.layout {
            return Err(Error::LayoutMismatch);
        }
        let mut out = state.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    fn apply_in_place(&self, state: &mut StateVector) -> Result<()> {
        let dims = self.layout.dims().to_vec();
        let strides = self.layout.strides();
        match &self.repr {
            Repr::Dense(mat) => {
                let out = mat * &state.amps;
                state.amps = out;
            }
            Repr::Diagonal(diag) => {
                for (a, d) in state.amps.iter_mut().zip(diag.iter()) {
                    *a *= d;
                }
            }
            Repr::OnMode { mode, mat } => {
                apply_on_mode(state.amps.as_mut_slice(), &dims, &strides, *mode, mat);
            }
            Repr::SumOnModes { terms } => {
                let input = state.amps.clone();
                let mut acc = CVec::zeros(input.len());
                for (c, mode, mat) in terms {
                    let mut branch = input.clone();
                    apply_on_mode(branch.as_mut_slice(), &dims, &strides, *mode, mat);
                    acc.axpy(*c, &branch, cr(1.0));
                }
                state.amps = acc;
            }
            Repr::SectorFactored { factors } => {
                let anc_dims = self.layout.anc_dims().to_vec();
                let anc_total = self.layout.anc_dim();
                let anc_strides = {
                    let mut s = vec![1usize; anc_dims.len()];
                    for k in (0..anc_dims.len().saturating_sub(1)).rev() {
                        s[k] = s[k + 1] * anc_dims[k + 1];
                    }
                    s
                };
                let amps = state.amps.as_mut_slice();
                for (s, per_sector) in factors.iter().enumerate() {
                    let slice = &mut amps[s * anc_total..(s + 1) * anc_total];
                    for (j, f) in per_sector.iter().enumerate() {
                        apply_on_mode(slice, &anc_dims, &anc_strides, j, f);
                    }
                }
            }
            Repr::PairKron { modes, a, b } => {
                apply_on_pair(state.amps.as_mut_slice(), &dims, &strides, *modes, |x| {
                    a * x * b.transpose()
                });
            }
            Repr::PairExp {
                modes,
                evals_a,
                evecs_a,
                evals_b,
                evecs_b,
                scale,
            } => {
                let vb_conj = evecs_b.map(|z| z.conj());
                apply_on_pair(state.amps.as_mut_slice(), &dims, &strides, *modes, |x| {
                    // (Va ⊗ Vb) diag(e^{i s λa λb}) (Va ⊗ Vb)† applied to the
                    // matricized state: Z = Va† X conj(Vb); phase; Va Z Vbᵀ.
                    let mut z = evecs_a.adjoint() * x * &vb_conj;
                    for i in 0..evals_a.len() {
                        for j in 0..evals_b.len() {
                            z[(i, j)] *= C64::new(0.0, scale * evals_a[i] * evals_b[j]).exp();
                        }
                    }
                    evecs_a * z * evecs_b.transpose()
                });
            }
            Repr::Product(fs) => {
                for f in fs.iter().rev() {
                    f.apply_in_place(state)?;
                }
            }
        }
        Ok(())
    }

    /// Expand to a dense matrix; refused above [`DENSE_CAP`].
    pub fn to_dense(&self) -> Result<CMat> {
        let n = self.layout.total_dim();
        if n > DENSE_CAP {
            return Err(Error::DenseCap {
                total: n,
                cap: DENSE_CAP,
            });
        }
        let mat = match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Diagonal(d) => CMat::from_fn(n, n, |i, j| if i == j { d[i] } else { cr(0.0) }),
            Repr::OnMode { mode, mat } => embed_dense(&self.layout, &[(*mode, mat.clone())]),
            Repr::SumOnModes { terms } => {
                let mut acc = CMat::zeros(n, n);
                for (c, mode, mat) in terms {
                    acc += embed_dense(&self.layout, &[(*mode, mat.clone())]) * *c;
                }
                acc
            }
            Repr::SectorFactored { factors } => {
                let anc_total = self.layout.anc_dim();
                let mut acc = CMat::zeros(n, n);
                for (s, per_sector) in factors.iter().enumerate() {
                    let mut block = CMat::identity(1, 1);
                    for f in per_sector {
                        block = kron(&block, f);
                    }
                    if per_sector.is_empty() {
                        block = CMat::identity(anc_total, anc_total);
                    }
                    for i in 0..anc_total {
                        for j in 0..anc_total {
                            acc[(s * anc_total + i, s * anc_total + j)] = block[(i, j)];
                        }
                    }
                }
                acc
            }
            Repr::PairKron { modes, a, b } => {
                embed_dense(&self.layout, &[(modes.0, a.clone()), (modes.1, b.clone())])
            }
            Repr::PairExp {
                modes,
                evals_a,
                evecs_a,
                evals_b,
                evecs_b,
                scale,
            } => {
                let da = evals_a.len();
                let db = evals_b.len();
                let w = kron(evecs_a, evecs_b);
                let mut phased = w.clone();
                for (col, pair) in (0..da)
                    .flat_map(|i| (0..db).map(move |j| (i, j)))
                    .enumerate()
                {
                    let ph = C64::new(0.0, scale * evals_a[pair.0] * evals_b[pair.1]).exp();
                    for r in 0..da * db {
                        phased[(r, col)] *= ph;
                    }
                }
                let pair_mat = &phased * w.adjoint();
                embed_pair_dense(&self.layout, *modes, &pair_mat)
            }
            Repr::Product(fs) => {
                let mut acc = CMat::identity(n, n);
                for f in fs {
                    acc *= f.to_dense()?;
                }
                acc
            }
        };
        Ok(mat)
    }

    /// Max-entry magnitude of `U†U − I`, evaluated densely (small layouts).
    pub fn unitarity_residual(&self) -> Result<f64> {
        Ok(crate::linalg::unitarity_residual(&self.to_dense()?))
    }
}

/// Apply a single-mode matrix in place over a flattened multi-mode array.
fn apply_on_mode(amps: &mut [C64], dims: &[usize], strides: &[usize], mode: usize, mat: &CMat) {
    let d = dims[mode];
    let s = strides[mode];
    let block = d * s;
    let mut buf = vec![cr(0.0); d];
    let mut out = vec![cr(0.0); d];
    let total = amps.len();
    let mut base = 0;
    while base < total {
        for inner in 0..s {
            for (n, b) in buf.iter_mut().enumerate() {
                *b = amps[base + n * s + inner];
            }
            out.iter_mut().for_each(|o| *o = cr(0.0));
            for (j, &xj) in buf.iter().enumerate() {
                if xj == cr(0.0) {
                    continue;
                }
                let col = mat.column(j);
                for (i, o) in out.iter_mut().enumerate() {
                    *o += col[i] * xj;
                }
            }
            for (n, o) in out.iter().enumerate() {
                amps[base + n * s + inner] = *o;
            }
        }
        base += block;
    }
}

/// Apply a transformation to the matricized (mode_a × mode_b) factor of the
/// state for every configuration of the remaining modes.
fn apply_on_pair<F>(
    amps: &mut [C64],
    dims: &[usize],
    strides: &[usize],
    modes: (usize, usize),
    f: F,
) where
    F: Fn(&CMat) -> CMat,
{
    let (ka, kb) = modes;
    let (da, db) = (dims[ka], dims[kb]);
    let (sa, sb) = (strides[ka], strides[kb]);
    let rest: Vec<(usize, usize)> = dims
        .iter()
        .zip(strides)
        .enumerate()
        .filter(|(k, _)| *k != ka && *k != kb)
        .map(|(_, (&d, &s))| (d, s))
        .collect();
    let rest_total: usize = rest.iter().map(|(d, _)| d).product();

    let mut x = CMat::zeros(da, db);
    for r in 0..rest_total {
        // mixed-radix offset over the untouched modes
        let mut base = 0usize;
        let mut rem = r;
        for &(d, s) in rest.iter().rev() {
            base += (rem % d) * s;
            rem /= d;
        }
        for i in 0..da {
            for j in 0..db {
                x[(i, j)] = amps[base + i * sa + j * sb];
            }
        }
        let y = f(&x);
        for i in 0..da {
            for j in 0..db {
                amps[base + i * sa + j * sb] = y[(i, j)];
            }
        }
    }
}

/// Dense embedding of single-mode matrices (identity on every other mode).
fn embed_dense(layout: &ModeLayout, mats: &[(usize, CMat)]) -> CMat {
    let mut acc = CMat::identity(1, 1);
    for (k, &d) in layout.dims().iter().enumerate() {
        let factor = mats
            .iter()
            .find(|(mode, _)| *mode == k)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| CMat::identity(d, d));
        acc = kron(&acc, &factor);
    }
    acc
}

/// Dense embedding of a matrix acting jointly on a mode pair.
fn embed_pair_dense(layout: &ModeLayout, modes: (usize, usize), pair_mat: &CMat) -> CMat {
    let n = layout.total_dim();
    let dims = layout.dims();
    let strides = layout.strides();
    let (ka, kb) = modes;
    let (da, db) = (dims[ka], dims[kb]);
    let mut out = CMat::zeros(n, n);
    for col in 0..n {
        let occ = layout.unflatten(col);
        let sub_col = occ[ka] * db + occ[kb];
        let base = col - occ[ka] * strides[ka] - occ[kb] * strides[kb];
        for ia in 0..da {
            for ib in 0..db {
                let v = pair_mat[(ia * db + ib, sub_col)];
                if v != cr(0.0) {
                    out[(base + ia * strides[ka] + ib * strides[kb], col)] = v;
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Ladder operators
// ---------------------------------------------------------------------------

/// Single-mode annihilation matrix: ⟨n−1|â|n⟩ = √n, hard cutoff at the top.
pub fn ladder_mat(dim: usize, kind: LadderKind) -> CMat {
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = cr((n as f64).sqrt());
    }
    match kind {
        LadderKind::Annihilate => a,
        LadderKind::Create => a.adjoint(),
    }
}

/// Ladder operator on one mode of a layout.
pub fn ladder_op(layout: &ModeLayout, mode: usize, kind: LadderKind) -> Result<Operator> {
    let d = layout.dim(mode)?;
    Operator::on_mode(layout, mode, ladder_mat(d, kind))
}

/// Re-export of the eigendecomposition-driven exponential for callers that
/// work with raw matrices.
pub fn expm_i(mat: &CMat, scale: f64) -> CMat {
    expm_i_hermitian(mat, scale)
}

/// exp(i·scale·Λ) from cached eigenpairs.
pub fn expm_cached(evals: &[f64], evecs: &CMat, scale: f64) -> CMat {
    expm_from_eigen(evals, evecs, scale)
}
