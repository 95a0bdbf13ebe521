//! Gate constructors: number/parity operators, squeeze generators, the two
//! controlled-squeezing coding transformations, quadratures, Gaussian gates
//! and cubic phase gates.
//!
//! The coding unitaries are built sector-wise. Both generators are diagonal
//! in the information occupation basis, so the full unitary decomposes into
//! one single-mode squeeze exponential per (information sector, ancilla
//! mode) pair:
//!
//! * energy-controlled: the ancilla-mode squeeze coefficient is a linear
//!   combination of the information occupation numbers, `g_j(n) = Σ_i
//!   γ_{i,j} n_i`;
//! * parity-controlled: the coefficient is `±Γ` with the sign given by the
//!   photon-number parity of the coupled information modes.
//!
//! Squeeze convention used throughout the crate: `exp(−i g (b†² + b²))`
//! applied to vacuum is a squeezed vacuum of magnitude `r = 2g`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ladder_mat, LadderKind, ModeLayout, Operator};
use crate::linalg::{ci, cr, expm_from_eigen, hermitian_eigen, CMat, CVec};

// ---------------------------------------------------------------------------
// Coding specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Energy-controlled squeezing: ancilla squeeze linear in photon numbers.
    Ecs,
    /// Parity-controlled squeezing: ancilla squeeze sign set by parity.
    Pcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Encode,
    Decode,
}

/// Which encoding to use, its coupling matrix and direction.
///
/// `gamma` is K×M: row `i` couples information mode `i` to each ancilla
/// mode. For the parity scheme the entries must be exactly 0 or 1 and the
/// squeeze magnitude comes from `strength`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingSpec {
    pub scheme: Scheme,
    pub gamma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    pub direction: Direction,
}

impl CodingSpec {
    pub fn ecs(gamma: Vec<Vec<f64>>) -> Self {
        CodingSpec {
            scheme: Scheme::Ecs,
            gamma,
            strength: None,
            direction: Direction::Encode,
        }
    }

    pub fn pcs(gamma: Vec<Vec<f64>>, strength: f64) -> Self {
        CodingSpec {
            scheme: Scheme::Pcs,
            gamma,
            strength: Some(strength),
            direction: Direction::Encode,
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    /// Number of information modes addressed by the coupling matrix.
    pub fn num_info(&self) -> usize {
        self.gamma.len()
    }

    /// Number of ancilla modes addressed by the coupling matrix.
    pub fn num_anc(&self) -> usize {
        self.gamma.first().map(Vec::len).unwrap_or(0)
    }

    pub fn validate(&self, layout: &ModeLayout) -> Result<()> {
        if self.gamma.len() != layout.num_info() {
            return Err(Error::scenario(
                "coding.gamma",
                format!(
                    "expected {} rows (one per information mode), got {}",
                    layout.num_info(),
                    self.gamma.len()
                ),
            ));
        }
        for (i, row) in self.gamma.iter().enumerate() {
            if row.len() != layout.num_anc() {
                return Err(Error::scenario(
                    "coding.gamma",
                    format!(
                        "row {} has {} entries, expected {} (one per ancilla mode)",
                        i,
                        row.len(),
                        layout.num_anc()
                    ),
                ));
            }
            if !row.iter().all(|g| g.is_finite()) {
                return Err(Error::scenario("coding.gamma", "entries must be finite"));
            }
        }
        if self.scheme == Scheme::Pcs {
            self.binary_gamma()?;
            if self.strength.is_none() {
                return Err(Error::MissingStrength);
            }
        }
        Ok(())
    }

    fn binary_gamma(&self) -> Result<()> {
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                if g != 0.0 && g != 1.0 {
                    return Err(Error::NonBinaryCoupling { i, j, value: g });
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Single-mode building blocks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q,
    P,
}

/// b†² + b² on a single truncated mode.
pub fn squeeze_gen_mat(dim: usize) -> CMat {
    let mut h = CMat::zeros(dim, dim);
    for m in 0..dim.saturating_sub(2) {
        let c = cr((((m + 1) * (m + 2)) as f64).sqrt());
        h[(m + 2, m)] = c;
        h[(m, m + 2)] = c;
    }
    h
}

/// q = (a + a†)/√2 or p = −i(a − a†)/√2 on a single truncated mode.
pub fn quadrature_mat(dim: usize, which: Quadrature) -> CMat {
    let a = ladder_mat(dim, LadderKind::Annihilate);
    let adag = ladder_mat(dim, LadderKind::Create);
    let s = 1.0 / 2.0f64.sqrt();
    match which {
        Quadrature::Q => (&a + &adag).scale(s),
        Quadrature::P => (&a - &adag).map(|z| z * ci(-s)),
    }
}

/// Photon-number operator of one mode, diagonal in the number basis.
pub fn number_op(layout: &ModeLayout, mode: usize) -> Result<Operator> {
    let d = layout.dim(mode)?;
    let strides = layout.strides();
    let s = strides[mode];
    let n = layout.total_dim();
    let diag = CVec::from_iterator(n, (0..n).map(|idx| cr(((idx / s) % d) as f64)));
    Operator::from_diagonal(layout, diag)
}

/// Parity operator (−1)^{Σ_i column_i n_i} over the information modes.
/// `column` is a binary K-vector (one coupling column).
pub fn parity_op(layout: &ModeLayout, column: &[f64]) -> Result<Operator> {
    if column.len() != layout.num_info() {
        return Err(Error::LayoutMismatch);
    }
    for (i, &c) in column.iter().enumerate() {
        if c != 0.0 && c != 1.0 {
            return Err(Error::NonBinaryCoupling { i, j: 0, value: c });
        }
    }
    let n = layout.total_dim();
    let diag = CVec::from_iterator(
        n,
        (0..n).map(|idx| {
            let occ = layout.unflatten(idx);
            let weighted: usize = occ
                .iter()
                .take(layout.num_info())
                .zip(column)
                .filter(|(_, &c)| c == 1.0)
                .map(|(&n_i, _)| n_i)
                .sum();
            if weighted % 2 == 0 {
                cr(1.0)
            } else {
                cr(-1.0)
            }
        }),
    );
    Operator::from_diagonal(layout, diag)
}

/// The Hermitian squeeze generator b†² + b² on ancilla mode `j`.
pub fn squeeze_generator(layout: &ModeLayout, anc_mode: usize) -> Result<Operator> {
    let mode = layout.anc_mode(anc_mode)?;
    let d = layout.dim(mode)?;
    Operator::on_mode(layout, mode, squeeze_gen_mat(d))
}

/// Quadrature operator on any mode of the layout.
pub fn quadrature_op(layout: &ModeLayout, mode: usize, which: Quadrature) -> Result<Operator> {
    let d = layout.dim(mode)?;
    Operator::on_mode(layout, mode, quadrature_mat(d, which))
}

// ---------------------------------------------------------------------------
// Truncation adequacy
// ---------------------------------------------------------------------------

/// Photon-number budget a squeezed vacuum of magnitude `r` needs:
/// mean sinh²(r) plus a six-sigma-ish allowance 6·sinh(r)cosh(r).
pub fn squeeze_load(r: f64) -> f64 {
    let (sh, ch) = (r.sinh(), r.cosh());
    sh * sh + 6.0 * sh * ch
}

fn check_squeeze_fits(r: f64, dim: usize, mode: usize) -> Result<()> {
    let required = squeeze_load(r);
    if required >= dim as f64 {
        return Err(Error::TruncationInadequate {
            mode,
            r,
            required,
            dim,
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Coding unitaries
// ---------------------------------------------------------------------------

/// Per-dimension cache of squeeze-generator eigendecompositions, so each
/// sector factor costs two matrix multiplies instead of an eigensolve.
struct SqueezeFactory {
    cache: HashMap<usize, (Vec<f64>, CMat)>,
}

impl SqueezeFactory {
    fn new() -> Self {
        SqueezeFactory {
            cache: HashMap::new(),
        }
    }

    /// exp(i · scale · (b†² + b²)) on `dim` levels.
    fn unitary(&mut self, dim: usize, scale: f64) -> CMat {
        let (evals, evecs) = self
            .cache
            .entry(dim)
            .or_insert_with(|| hermitian_eigen(&squeeze_gen_mat(dim)));
        expm_from_eigen(evals, evecs, scale)
    }
}

fn unflatten_dims(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut occ = vec![0usize; dims.len()];
    for k in (0..dims.len()).rev() {
        occ[k] = idx % dims[k];
        idx /= dims[k];
    }
    occ
}

/// Largest |Σ_i γ_{i,j} n_i| over all information sectors, per ancilla mode.
fn max_abs_drive(gamma: &[Vec<f64>], info_dims: &[usize], j: usize) -> f64 {
    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    for (i, &d) in info_dims.iter().enumerate() {
        let reach = gamma[i][j] * (d - 1) as f64;
        if reach > 0.0 {
            hi += reach;
        } else {
            lo += reach;
        }
    }
    hi.abs().max(lo.abs())
}

/// Energy-controlled-squeezing unitary
/// `exp(∓i Σ_{i,j} γ_{i,j} n̂_i ⊗ (b̂_j†² + b̂_j²))`
/// (minus for encode, plus for decode), assembled block-diagonally over
/// information sectors.
pub fn ecs_unitary(layout: &ModeLayout, coding: &CodingSpec) -> Result<Operator> {
    if coding.scheme != Scheme::Ecs {
        return Err(Error::SchemeMismatch { expected: "ecs" });
    }
    coding.validate(layout)?;
    let info_dims = layout.info_dims().to_vec();
    let anc_dims = layout.anc_dims().to_vec();
    for (j, &d) in anc_dims.iter().enumerate() {
        let drive = max_abs_drive(&coding.gamma, &info_dims, j);
        if drive > 0.0 {
            check_squeeze_fits(2.0 * drive, d, layout.anc_mode(j)?)?;
        }
    }
    let sign = match coding.direction {
        Direction::Encode => -1.0,
        Direction::Decode => 1.0,
    };
    let mut factory = SqueezeFactory::new();
    let mut factors = Vec::with_capacity(layout.info_dim());
    for sector in 0..layout.info_dim() {
        let occ = unflatten_dims(&info_dims, sector);
        let per_mode = anc_dims
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                let g: f64 = occ
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| coding.gamma[i][j] * n as f64)
                    .sum();
                factory.unitary(d, sign * g)
            })
            .collect();
        factors.push(per_mode);
    }
    Operator::sector_factored(layout, factors)
}

/// Parity-controlled-squeezing unitary
/// `exp(∓i Γ Σ_j Π̂_j ⊗ (b̂_j†² + b̂_j²))` with Π̂_j the parity of the
/// information modes coupled to ancilla `j` (binary coupling column).
pub fn pcs_unitary(layout: &ModeLayout, coding: &CodingSpec) -> Result<Operator> {
    if coding.scheme != Scheme::Pcs {
        return Err(Error::SchemeMismatch { expected: "pcs" });
    }
    coding.validate(layout)?;
    let strength = coding.strength.ok_or(Error::MissingStrength)?;
    let info_dims = layout.info_dims().to_vec();
    let anc_dims = layout.anc_dims().to_vec();
    for (j, &d) in anc_dims.iter().enumerate() {
        if strength != 0.0 {
            check_squeeze_fits(2.0 * strength.abs(), d, layout.anc_mode(j)?)?;
        }
    }
    let sign = match coding.direction {
        Direction::Encode => -1.0,
        Direction::Decode => 1.0,
    };
    let mut factory = SqueezeFactory::new();
    let mut factors = Vec::with_capacity(layout.info_dim());
    for sector in 0..layout.info_dim() {
        let occ = unflatten_dims(&info_dims, sector);
        let per_mode = anc_dims
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                let weighted: usize = occ
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| coding.gamma[*i][j] == 1.0)
                    .map(|(_, &n)| n)
                    .sum();
                let parity = if weighted % 2 == 0 { 1.0 } else { -1.0 };
                factory.unitary(d, sign * strength * parity)
            })
            .collect();
        factors.push(per_mode);
    }
    Operator::sector_factored(layout, factors)
}

/// Dispatch on the scheme.
pub fn coding_unitary(layout: &ModeLayout, coding: &CodingSpec) -> Result<Operator> {
    match coding.scheme {
        Scheme::Ecs => ecs_unitary(layout, coding),
        Scheme::Pcs => pcs_unitary(layout, coding),
    }
}

// ---------------------------------------------------------------------------
// Quadratic forms and single-mode gates
// ---------------------------------------------------------------------------

/// Real single-mode polynomial
/// `qq·q² + pp·p² + qp·(qp+pq)/2 + q·q̂ + p·p̂ + c`,
/// Weyl (symmetric) ordering for the cross term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub qq: f64,
    pub pp: f64,
    pub qp: f64,
    pub q: f64,
    pub p: f64,
    pub c: f64,
}

impl QuadraticForm {
    pub const ZERO: QuadraticForm = QuadraticForm {
        qq: 0.0,
        pp: 0.0,
        qp: 0.0,
        q: 0.0,
        p: 0.0,
        c: 0.0,
    };

    pub fn quadratic(qq: f64, pp: f64, qp: f64) -> Self {
        QuadraticForm {
            qq,
            pp,
            qp,
            ..Self::ZERO
        }
    }

    pub fn linear(q: f64, p: f64) -> Self {
        QuadraticForm { q, p, ..Self::ZERO }
    }

    pub fn is_finite(&self) -> bool {
        [self.qq, self.pp, self.qp, self.q, self.p, self.c]
            .iter()
            .all(|x| x.is_finite())
    }

    /// Hermitian matrix of the form on a truncated mode.
    pub fn to_matrix(&self, dim: usize) -> CMat {
        let qm = quadrature_mat(dim, Quadrature::Q);
        let pm = quadrature_mat(dim, Quadrature::P);
        let mut h = CMat::zeros(dim, dim);
        if self.qq != 0.0 {
            h += (&qm * &qm).scale(self.qq);
        }
        if self.pp != 0.0 {
            h += (&pm * &pm).scale(self.pp);
        }
        if self.qp != 0.0 {
            h += (&qm * &pm + &pm * &qm).scale(0.5 * self.qp);
        }
        if self.q != 0.0 {
            h += qm.scale(self.q);
        }
        if self.p != 0.0 {
            h += pm.scale(self.p);
        }
        if self.c != 0.0 {
            h += CMat::identity(dim, dim).scale(self.c);
        }
        h
    }

    /// Coefficient-wise Euclidean distance to another form.
    pub fn distance(&self, other: &QuadraticForm) -> f64 {
        let d = [
            self.qq - other.qq,
            self.pp - other.pp,
            self.qp - other.qp,
            self.q - other.q,
            self.p - other.p,
            self.c - other.c,
        ];
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Rank of the 2×2 quadratic coefficient block, with tolerance `tol` on
    /// the eigenvalues of [[qq, qp/2], [qp/2, pp]].
    pub fn quadratic_rank(&self, tol: f64) -> usize {
        let (a, b, c) = (self.qq, 0.5 * self.qp, self.pp);
        let tr = a + c;
        let det = a * c - b * b;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = 0.5 * (tr - disc);
        [l1, l2].iter().filter(|l| l.abs() > tol).count()
    }
}

/// Gaussian gate exp(i·form(q̂, p̂)) on one mode.
pub fn gaussian_gate(layout: &ModeLayout, mode: usize, form: &QuadraticForm) -> Result<Operator> {
    if !form.is_finite() {
        return Err(Error::scenario("form", "coefficients must be finite"));
    }
    let d = layout.dim(mode)?;
    Operator::on_mode(layout, mode, form.to_matrix(d))?.expm_i(1.0)
}

/// Cubic phase gate exp(i·λ·q̂³) on one mode.
pub fn cubic_phase_gate(layout: &ModeLayout, mode: usize, strength: f64) -> Result<Operator> {
    if !strength.is_finite() {
        return Err(Error::scenario("strength", "must be finite"));
    }
    let d = layout.dim(mode)?;
    let q = quadrature_mat(d, Quadrature::Q);
    let q3 = &q * &q * &q;
    Operator::on_mode(layout, mode, q3)?.expm_i(strength)
}

/// Hermitian generator (q̂+p̂) ⊗ (q̂+p̂) on a two-mode layout.
pub fn two_mode_seed_generator(layout: &ModeLayout) -> Result<Operator> {
    if layout.num_modes() != 2 {
        return Err(Error::LayoutMismatch);
    }
    let da = layout.dim(0)?;
    let db = layout.dim(1)?;
    let qa = quadrature_mat(da, Quadrature::Q) + quadrature_mat(da, Quadrature::P);
    let qb = quadrature_mat(db, Quadrature::Q) + quadrature_mat(db, Quadrature::P);
    Operator::pair_kron(layout, (0, 1), qa, qb)
}

/// Two-mode Gaussian seed `exp(i (q̂+p̂) ⊗ (q̂+p̂))`.
pub fn two_mode_seed(layout: &ModeLayout) -> Result<Operator> {
    two_mode_seed_generator(layout)?.expm_i(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{basis_state, make_layout, vacuum_state, StateVector};
    use crate::linalg::{max_entry_diff, unitarity_residual, C64};

    fn max_vec_diff(a: &CVec, b: &CVec) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn parity_examples() {
        let layout = make_layout(&[4], &[1]).unwrap();
        let pi = parity_op(&layout, &[1.0]).unwrap();
        let even = basis_state(&layout, &[0, 0]).unwrap();
        let odd = basis_state(&layout, &[3, 0]).unwrap();
        assert_eq!(pi.apply(&even).unwrap().amps()[0], cr(1.0));
        assert!(
            (pi.apply(&odd).unwrap().amps()[layout.flatten(&[3, 0]).unwrap()] - cr(-1.0)).norm()
                < 1e-15
        );

        let layout2 = make_layout(&[2, 2], &[1]).unwrap();
        let pi2 = parity_op(&layout2, &[1.0, 1.0]).unwrap();
        let oneone = basis_state(&layout2, &[1, 1, 0]).unwrap();
        let out = pi2.apply(&oneone).unwrap();
        assert_eq!(out.amps()[layout2.flatten(&[1, 1, 0]).unwrap()], cr(1.0));

        // parity² = I exactly
        let twice = Operator::product(vec![pi2.clone(), pi2]).unwrap();
        let dense = twice.to_dense().unwrap();
        let n = layout2.total_dim();
        assert_eq!(max_entry_diff(&dense, &CMat::identity(n, n)), 0.0);

        assert!(matches!(
            parity_op(&layout2, &[1.0, 0.5]),
            Err(Error::NonBinaryCoupling { .. })
        ));
    }

    #[test]
    fn squeeze_generator_elements() {
        let g = squeeze_gen_mat(5);
        assert!((g[(2, 0)] - cr(2.0f64.sqrt())).norm() < 1e-15);
        assert_eq!(g[(0, 0)], cr(0.0));
        assert_eq!(max_entry_diff(&g, &g.adjoint()), 0.0);
    }

    #[test]
    fn quadrature_elements_and_commutator() {
        let q = quadrature_mat(5, Quadrature::Q);
        let p = quadrature_mat(5, Quadrature::P);
        assert!((q[(1, 0)] - cr(1.0 / 2.0f64.sqrt())).norm() < 1e-15);
        assert_eq!(p[(0, 0)], cr(0.0));
        let comm = &q * &p - &p * &q;
        assert!((comm[(0, 0)] - ci(1.0)).norm() < 1e-14);
        // i·I everywhere except the top diagonal entry
        for i in 0..4 {
            assert!((comm[(i, i)] - ci(1.0)).norm() < 1e-14);
        }
        assert!((comm[(4, 4)] - ci(1.0 - 5.0)).norm() < 1e-13);
    }

    #[test]
    fn ecs_zero_coupling_is_identity() {
        let layout = make_layout(&[3], &[8]).unwrap();
        let u = ecs_unitary(&layout, &CodingSpec::ecs(vec![vec![0.0]])).unwrap();
        let st = StateVector::random(layout.clone(), 7);
        assert!(max_vec_diff(u.apply(&st).unwrap().amps(), st.amps()) < 1e-12);
    }

    #[test]
    fn ecs_vacuum_sector_untouched() {
        let layout = make_layout(&[3], &[24]).unwrap();
        let u = ecs_unitary(&layout, &CodingSpec::ecs(vec![vec![0.3]])).unwrap();
        let vac = vacuum_state(&layout);
        let out = u.apply(&vac).unwrap();
        assert!(max_vec_diff(out.amps(), vac.amps()) < 1e-12);
    }

    #[test]
    fn ecs_single_sector_matches_full_dense_exponential() {
        // K=M=1, γ=0.3, input |1⟩⊗|0⟩: block route vs dense exponential of
        // the full two-mode generator γ n̂ ⊗ (b†²+b²) at ancilla truncation
        // 200.
        let layout = make_layout(&[2], &[200]).unwrap();
        let gamma = 0.3;
        let u = ecs_unitary(&layout, &CodingSpec::ecs(vec![vec![gamma]])).unwrap();
        let input = basis_state(&layout, &[1, 0]).unwrap();
        let via_blocks = u.apply(&input).unwrap();

        let nmat = {
            let mut m = CMat::zeros(2, 2);
            m[(1, 1)] = cr(1.0);
            m
        };
        let gen = Operator::pair_kron(&layout, (0, 1), nmat, squeeze_gen_mat(200)).unwrap();
        let dense_exp = gen.expm_i(-gamma).unwrap();
        let via_dense = dense_exp.apply(&input).unwrap();
        assert!(max_vec_diff(via_blocks.amps(), via_dense.amps()) < 1e-11);
    }

    #[test]
    fn pcs_zero_strength_is_identity() {
        let layout = make_layout(&[3], &[8]).unwrap();
        let u = pcs_unitary(&layout, &CodingSpec::pcs(vec![vec![1.0]], 0.0)).unwrap();
        let st = StateVector::random(layout.clone(), 17);
        assert!(max_vec_diff(u.apply(&st).unwrap().amps(), st.amps()) < 1e-12);
    }

    #[test]
    fn pcs_sectors_are_conjugate_squeezers() {
        // even and odd sectors see opposite-sign generators, so their blocks
        // are complex conjugates of one another
        let layout = make_layout(&[2], &[12]).unwrap();
        let u = pcs_unitary(&layout, &CodingSpec::pcs(vec![vec![1.0]], 0.4)).unwrap();
        let dense = u.to_dense().unwrap();
        let anc = 12;
        for i in 0..anc {
            for j in 0..anc {
                let even = dense[(i, j)];
                let odd = dense[(anc + i, anc + j)];
                assert!((even - odd.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pcs_single_sector_matches_dense_exponential() {
        // K=M=1, Γ=0.4, input |1⟩⊗|0⟩: odd parity flips the sign, so the
        // ancilla ends in exp(+i·0.4·(b†²+b²))|0⟩.
        let layout = make_layout(&[2], &[200]).unwrap();
        let u = pcs_unitary(&layout, &CodingSpec::pcs(vec![vec![1.0]], 0.4)).unwrap();
        let input = basis_state(&layout, &[1, 0]).unwrap();
        let out = u.apply(&input).unwrap();

        let sq = crate::linalg::expm_i_hermitian(&squeeze_gen_mat(200), 0.4);
        for m in 0..200 {
            let idx = layout.flatten(&[1, m]).unwrap();
            assert!((out.amps()[idx] - sq[(m, 0)]).norm() < 1e-11);
        }
    }

    #[test]
    fn coding_unitaries_are_unitary_and_invertible() {
        let layout = make_layout(&[3], &[24]).unwrap();
        for coding in [
            CodingSpec::ecs(vec![vec![0.25]]),
            CodingSpec::pcs(vec![vec![1.0]], 0.4),
        ] {
            let enc = coding_unitary(&layout, &coding).unwrap();
            assert!(enc.unitarity_residual().unwrap() < 1e-10);
            let dec =
                coding_unitary(&layout, &coding.clone().with_direction(Direction::Decode)).unwrap();
            let both = Operator::product(vec![dec, enc])
                .unwrap()
                .to_dense()
                .unwrap();
            assert!(max_entry_diff(&both, &CMat::identity(72, 72)) < 1e-10);
        }
    }

    #[test]
    fn coding_unitaries_commute_with_info_number_ops() {
        let layout = make_layout(&[2, 2], &[16]).unwrap();
        let coding = CodingSpec::ecs(vec![vec![0.2], vec![0.3]]);
        let u = ecs_unitary(&layout, &coding).unwrap().to_dense().unwrap();
        for mode in 0..2 {
            let n = number_op(&layout, mode).unwrap().to_dense().unwrap();
            let comm = &u * &n - &n * &u;
            let worst = comm.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10);
        }

        let coding = CodingSpec::pcs(vec![vec![1.0], vec![1.0]], 0.3);
        let u = pcs_unitary(&layout, &coding).unwrap().to_dense().unwrap();
        for mode in 0..2 {
            let n = number_op(&layout, mode).unwrap().to_dense().unwrap();
            let comm = &u * &n - &n * &u;
            assert!(comm.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        }
        let pi = parity_op(&layout, &[1.0, 1.0]).unwrap().to_dense().unwrap();
        let comm = &u * &pi - &pi * &u;
        assert!(comm.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn truncation_precheck_rejects_hot_squeezers() {
        // γ·n up to 2.5 → r = 5 → needs thousands of levels
        let layout = make_layout(&[6], &[120]).unwrap();
        let err = ecs_unitary(&layout, &CodingSpec::ecs(vec![vec![0.5]]));
        assert!(matches!(err, Err(Error::TruncationInadequate { .. })));
    }

    #[test]
    fn gaussian_gate_examples() {
        let layout = make_layout(&[16], &[]).unwrap();
        let id = gaussian_gate(&layout, 0, &QuadraticForm::ZERO).unwrap();
        let st = StateVector::random(layout.clone(), 2);
        assert!(max_vec_diff(id.apply(&st).unwrap().amps(), st.amps()) < 1e-13);

        // coefficient-wise construction yields a Hermitian matrix, cross
        // term included
        let mixed = QuadraticForm {
            qq: 0.3,
            pp: -0.7,
            qp: 0.4,
            q: 1.1,
            p: -0.2,
            c: 0.5,
        };
        let h = mixed.to_matrix(12);
        assert!(max_entry_diff(&h, &h.adjoint()) < 1e-13);

        let q2 = QuadraticForm::quadratic(1.0, 0.0, 0.0);
        let twice_q2 = QuadraticForm::quadratic(2.0, 0.0, 0.0);
        let g1 = gaussian_gate(&layout, 0, &q2).unwrap();
        let g2 = gaussian_gate(&layout, 0, &twice_q2).unwrap();
        let seq = Operator::product(vec![g1.clone(), g1]).unwrap();
        assert!(max_entry_diff(&seq.to_dense().unwrap(), &g2.to_dense().unwrap()) < 1e-12);
    }

    #[test]
    fn cubic_gate_truncation_convergence() {
        // λ=0.1 on |0⟩: truncation 60 vs 120 agree to 1e-9 in fidelity
        let out60 = {
            let layout = make_layout(&[60], &[]).unwrap();
            let g = cubic_phase_gate(&layout, 0, 0.1).unwrap();
            g.apply(&vacuum_state(&layout)).unwrap()
        };
        let out120 = {
            let layout = make_layout(&[120], &[]).unwrap();
            let g = cubic_phase_gate(&layout, 0, 0.1).unwrap();
            g.apply(&vacuum_state(&layout)).unwrap()
        };
        let ov: C64 = (0..60)
            .map(|n| out60.amps()[n].conj() * out120.amps()[n])
            .sum();
        let fid = ov.norm_sqr();
        assert!(fid >= 1.0 - 1e-9, "fidelity {fid}");
    }

    #[test]
    fn two_mode_seed_properties() {
        let layout = make_layout(&[10], &[10]).unwrap();
        let gen = two_mode_seed_generator(&layout).unwrap();
        let dense_gen = gen.to_dense().unwrap();
        assert!(max_entry_diff(&dense_gen, &dense_gen.adjoint()) < 1e-13);

        // ⟨00|G|00⟩ = 0 (odd operators), ⟨11|G|00⟩ = i
        let vac = vacuum_state(&layout);
        let g_vac = gen.apply(&vac).unwrap();
        assert!(g_vac.amps()[0].norm() < 1e-14);
        let idx11 = layout.flatten(&[1, 1]).unwrap();
        assert!((g_vac.amps()[idx11] - ci(1.0)).norm() < 1e-14);

        let u0 = two_mode_seed(&layout).unwrap();
        assert!(unitarity_residual(&u0.to_dense().unwrap()) < 1e-10);
    }

    #[test]
    fn sinh_parity_identity_by_series() {
        // sinh(2ΓΠ̂)|Ψ⟩ = sinh(2Γ)·Π̂|Ψ⟩ since Π̂² = I; evaluate the series
        // by repeated application and compare.
        let layout = make_layout(&[3, 2], &[1]).unwrap();
        let pi = parity_op(&layout, &[1.0, 1.0]).unwrap();
        let strength: f64 = 0.37;
        for seed in 0..20 {
            let psi = StateVector::random(layout.clone(), 1000 + seed);
            // series Σ_k (2Γ)^{2k+1} Π^{2k+1} ψ / (2k+1)!
            let pi_psi = pi.apply(&psi).unwrap();
            let mut series = StateVector::zero(layout.clone());
            let mut term = pi_psi.clone().scaled(cr(2.0 * strength));
            let mut k = 1usize;
            loop {
                series = series.add(&term).unwrap();
                if term.norm() < 1e-18 || k > 60 {
                    break;
                }
                // next odd power: multiply by (2Γ)²·Π² /((k+1)(k+2)) = (2Γ)²/(…)
                let factor = (2.0 * strength).powi(2) / ((k + 1) as f64 * (k + 2) as f64);
                term = term.scaled(cr(factor));
                k += 2;
            }
            let direct = pi_psi.scaled(cr((2.0 * strength).sinh()));
            assert!(max_vec_diff(series.amps(), direct.amps()) < 1e-12);
        }
    }

    #[test]
    fn coding_spec_json_round_trip() {
        let spec = CodingSpec::pcs(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.4);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"scheme\":\"pcs\""));
        let back: CodingSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
