//! Dense reference matrices for small spaces.
//!
//! Matrix elements are derived here from scratch: each basis configuration
//! is unranked into an occupation list, the operator string is applied by
//! explicit occupation algebra (Jordan-Wigner parity for fermions, `√n`
//! factors for bosons), and the result is ranked back. Nothing from the
//! matrix-free kernel is used, so a sign or prefactor bug there cannot hide
//! behind the same bug here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::combinadics::{Address, OccupationVector};
use crate::error::{Error, Result};
use crate::fockspace::{Space, StateVector, Statistics};
use crate::hamiltonian::HamiltonianSpec;
use crate::kernel::{Ladder, LadderString};
use crate::mixtures::{MixtureHamiltonian, MixtureSpace};

/// Largest dimension the oracle will build.
pub const DENSE_CAP: usize = 5000;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// An explicit operator matrix in address order (row and column `J − 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument(
                "operator matrix must be square".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(x);
        (&self.matrix * v).iter().copied().collect()
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let a = &self.matrix;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// `A ⊗ B` with the B index fastest.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }
}

impl std::ops::Add for DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: Self) -> Self {
        Self {
            matrix: self.matrix + rhs.matrix,
        }
    }
}

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::TooLarge { dim, cap });
    }
    Ok(())
}

/// Applies `ops` (rightmost first) to an occupation list. `None` when the
/// string annihilates the configuration.
pub fn act_on_occupations(
    statistics: Statistics,
    ops: &[Ladder],
    occ: &[u32],
) -> Option<(Vec<u32>, f64)> {
    let mut n = occ.to_vec();
    let mut amp = 1.0f64;
    for op in ops.iter().rev() {
        let (p, create) = match *op {
            Ladder::Create(p) => (p - 1, true),
            Ladder::Annihilate(p) => (p - 1, false),
        };
        match statistics {
            Statistics::Fermion => {
                // move the operator past b†_1 … b†_{p−1}
                let parity = n.iter().take(p).filter(|&&x| x == 1).count() % 2;
                let ok = if create { n[p] == 0 } else { n[p] == 1 };
                if !ok {
                    return None;
                }
                n[p] = if create { 1 } else { 0 };
                if parity == 1 {
                    amp = -amp;
                }
            }
            Statistics::Boson => {
                if create {
                    amp *= f64::from(n[p] + 1).sqrt();
                    n[p] += 1;
                } else {
                    if n[p] == 0 {
                        return None;
                    }
                    amp *= f64::from(n[p]).sqrt();
                    n[p] -= 1;
                }
            }
        }
    }
    Some((n, amp))
}

fn add_string(
    space: &Space,
    basis: &[Vec<u32>],
    ops: &[Ladder],
    coefficient: Complex64,
    matrix: &mut DMatrix<Complex64>,
) -> Result<()> {
    for (col, occ) in basis.iter().enumerate() {
        if let Some((out, amp)) = act_on_occupations(space.statistics(), ops, occ) {
            let row = space.rank(&OccupationVector::new(out))?.offset();
            matrix[(row, col)] += coefficient * amp;
        }
    }
    Ok(())
}

fn basis_of(space: &Space) -> Result<Vec<Vec<u32>>> {
    (1..=space.dim() as u64)
        .map(|j| Ok(space.unrank(Address::new(j).expect("j ≥ 1"))?.into_inner()))
        .collect()
}

fn check_string(space: &Space, ops: &[Ladder]) -> Result<()> {
    for op in ops {
        space.check_orbital(op.orbital())?;
    }
    let creates = ops
        .iter()
        .filter(|o| matches!(o, Ladder::Create(_)))
        .count();
    if 2 * creates != ops.len() {
        return Err(Error::InvalidArgument(
            "operator string does not conserve particle number".into(),
        ));
    }
    Ok(())
}

/// Matrix of one operator string.
pub fn build_dense_term(space: &Space, string: &LadderString) -> Result<DenseOperator> {
    check_cap(space.dim(), DENSE_CAP)?;
    check_string(space, string.ops())?;
    let basis = basis_of(space)?;
    let mut m = DMatrix::from_element(space.dim(), space.dim(), ZERO);
    add_string(
        space,
        &basis,
        string.ops(),
        Complex64::new(1.0, 0.0),
        &mut m,
    )?;
    Ok(DenseOperator { matrix: m })
}

/// Matrix of `Σ h_kq b†_k b_q + ½ Σ W_ksql b†_k b†_s b_l b_q`.
pub fn build_dense(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    build_dense_with_cap(spec, DENSE_CAP)
}

pub fn build_dense_with_cap(spec: &HamiltonianSpec, cap: usize) -> Result<DenseOperator> {
    let space = spec.space();
    check_cap(space.dim(), cap)?;
    let basis = basis_of(space)?;
    let mut m = DMatrix::from_element(space.dim(), space.dim(), ZERO);
    for ((k, q), h) in spec.one_body().nonzeros() {
        let ops = [Ladder::Create(k), Ladder::Annihilate(q)];
        add_string(space, &basis, &ops, h, &mut m)?;
    }
    for ([k, s, q, l], w) in spec.two_body().nonzeros() {
        let ops = [
            Ladder::Create(k),
            Ladder::Create(s),
            Ladder::Annihilate(l),
            Ladder::Annihilate(q),
        ];
        add_string(space, &basis, &ops, w * 0.5, &mut m)?;
    }
    Ok(DenseOperator { matrix: m })
}

/// Mixture matrix as `H_A ⊗ 1 + 1 ⊗ H_B + Σ W^AB (a†_k a_q) ⊗ (b†_k' b_q')`.
pub fn build_dense_mixture(h: &MixtureHamiltonian) -> Result<DenseOperator> {
    let space: &MixtureSpace = h.space();
    check_cap(space.dim(), DENSE_CAP)?;
    let (a, b) = (space.a(), space.b());
    let mut total = build_dense(&h.a)?.kron(&DenseOperator::identity(b.dim()))
        + DenseOperator::identity(a.dim()).kron(&build_dense(&h.b)?);
    for ([k, kp, q, qp], w) in h.inter.nonzeros() {
        let ta = build_dense_term(a, &LadderString::one_body(k, q))?;
        let tb = build_dense_term(b, &LadderString::one_body(kp, qp))?;
        total.matrix += ta.kron(&tb).matrix * w;
    }
    Ok(total)
}

/// Full spectrum of a Hermitian operator, ascending, with eigenvectors as
/// columns in the same order.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl DenseSpectrum {
    /// `exp(−i·op·t) ψ`.
    pub fn propagate(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        let coeffs = v.adjoint() * DVector::from_column_slice(psi);
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.eigenvalues)
                .map(|(c, &e)| c * Complex64::new(0.0, -e * t).exp()),
        );
        (v * phased).iter().copied().collect()
    }

    pub fn ground(&self) -> (f64, Vec<Complex64>) {
        (
            self.eigenvalues[0],
            self.eigenvectors.column(0).iter().copied().collect(),
        )
    }
}

/// Tolerance on `max |A − A†|`, relative to the largest entry.
pub const DENSE_HERMITIAN_TOL: f64 = 1e-12;

pub fn dense_eig(op: &DenseOperator) -> Result<DenseSpectrum> {
    check_cap(op.dim(), DENSE_CAP)?;
    let dev = op.hermiticity_deviation();
    if dev > DENSE_HERMITIAN_TOL * op.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let herm = (&op.matrix + op.matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::from_element(op.dim(), op.dim(), ZERO);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(DenseSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(−i·op·t) ψ` through the spectral decomposition.
pub fn dense_expm_apply(op: &DenseOperator, psi: &StateVector, t: f64) -> Result<StateVector> {
    if op.dim() != psi.len() {
        return Err(Error::SpaceMismatch(format!(
            "{}-dimensional operator on a {}-dimensional vector",
            op.dim(),
            psi.len()
        )));
    }
    let out = dense_eig(op)?.propagate(psi.amplitudes(), t);
    StateVector::from_amplitudes(psi.space(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_bose_hubbard;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn number_operator_is_diagonal_n() {
        let s = Space::fermions(2, 4).unwrap();
        let d = build_dense(&HamiltonianSpec::number_operator(&s)).unwrap();
        assert_eq!(d.matrix(), &(DMatrix::identity(6, 6) * c(2.0)));
    }

    #[test]
    fn boson_hop_matrix() {
        // basis |2,0⟩, |1,1⟩, |0,2⟩
        let s = Space::bosons(2, 2).unwrap();
        let d = build_dense_term(&s, &LadderString::one_body(1, 2)).unwrap();
        let r2 = 2f64.sqrt();
        let mut want = DMatrix::from_element(3, 3, c(0.0));
        want[(0, 1)] = c(r2);
        want[(1, 2)] = c(r2);
        assert!((d.matrix() - want).norm() < 1e-15);
    }

    #[test]
    fn fermion_sign_by_hand() {
        let s = Space::fermions(2, 4).unwrap();
        let d = build_dense_term(&s, &LadderString::one_body(1, 3)).unwrap();
        let from = s
            .rank(&OccupationVector::new(vec![0, 1, 1, 0]))
            .unwrap()
            .offset();
        let to = s
            .rank(&OccupationVector::new(vec![1, 1, 0, 0]))
            .unwrap()
            .offset();
        assert_eq!(d.matrix()[(to, from)], c(-1.0));
    }

    #[test]
    fn hermitian_specs_give_hermitian_matrices() {
        for s in [Space::fermions(3, 5).unwrap(), Space::bosons(3, 3).unwrap()] {
            let d = build_dense(&HamiltonianSpec::random_hermitian(&s, 2)).unwrap();
            assert!(d.hermiticity_deviation() <= 1e-13);
        }
    }

    #[test]
    fn double_well_spectrum() {
        let spec = build_bose_hubbard(1, 2, 0.6, 2.0, false).unwrap();
        let eig = dense_eig(&build_dense(&spec).unwrap()).unwrap();
        assert!((eig.eigenvalues[0] + 0.6).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_matches_characteristic_roots() {
        // real symmetric with known eigenvalues 1, 2, 4 (diagonal in a rotated basis)
        let q = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0 / 3.0),
                c(-2.0 / 3.0),
                c(1.0 / 3.0),
                c(2.0 / 3.0),
                c(1.0 / 3.0),
                c(-2.0 / 3.0),
                c(1.0 / 3.0),
                c(2.0 / 3.0),
                c(2.0 / 3.0),
            ],
        );
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(4.0), c(1.0), c(2.0)]));
        let a = &q * d * q.transpose();
        let eig = dense_eig(&DenseOperator::from_matrix(a.clone()).unwrap()).unwrap();
        for (got, want) in eig.eigenvalues.iter().zip([1.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-13);
        }
        for (i, &e) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i).into_owned();
            assert!((&a * &v - v * c(e)).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_invariant_under_permutation() {
        let s = Space::fermions(2, 4).unwrap();
        let d = build_dense(&HamiltonianSpec::random_hermitian(&s, 8)).unwrap();
        let n = d.dim();
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + 1) % n).collect();
        let permuted = DMatrix::from_fn(n, n, |i, j| d.matrix()[(perm[i], perm[j])]);
        let a = dense_eig(&d).unwrap().eigenvalues;
        let b = dense_eig(&DenseOperator::from_matrix(permuted).unwrap())
            .unwrap()
            .eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut a = DMatrix::from_element(2, 2, c(0.0));
        a[(0, 1)] = c(1.0);
        let err = dense_eig(&DenseOperator::from_matrix(a).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotHermitian(_)));
    }

    #[test]
    fn exponential_identities() {
        let s = Space::bosons(2, 3).unwrap();
        let psi = StateVector::random(&s, 4);
        let op = build_dense(&HamiltonianSpec::random_hermitian(&s, 5)).unwrap();
        let same = dense_expm_apply(&op, &psi, 0.0).unwrap();
        let zero = dense_expm_apply(&DenseOperator::zeros(s.dim()), &psi, 3.0).unwrap();
        for (v, w) in [(same, &psi), (zero, &psi)] {
            for (a, b) in v.amplitudes().iter().zip(w.amplitudes()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
        for t in [0.3, 2.0, 17.0] {
            let out = dense_expm_apply(&op, &psi, t).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let big = Space::fermions(8, 16).unwrap();
        assert!(matches!(
            build_dense(&HamiltonianSpec::zeros(&big)),
            Err(Error::TooLarge {
                dim: 12870,
                cap: DENSE_CAP
            })
        ));
    }
}
