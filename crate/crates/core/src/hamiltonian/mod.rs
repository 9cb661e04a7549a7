//! Coefficient tables of second-quantized operators.
//!
//! A single-species operator is
//!
//! ```text
//! H = Σ_{kq} h_kq b†_k b_q + ½ Σ_{ksql} W_ksql b†_k b†_s b_l b_q
//! ```
//!
//! The two-body subscript order is `k s q l` while the operator string reads
//! `b†_k b†_s b_l b_q`: `k` pairs with `q` and `s` pairs with `l`. Every
//! table, file and density in this crate keeps that convention.

mod file;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::Space;

pub use file::{
    load_integral_file, load_integrals, parse_integrals, save_integrals, write_integrals,
    IntegralFile,
};

/// Tolerance for Hermiticity checks on coefficient tables.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest orbital count stored as a dense `M⁴` tensor.
pub const DENSE_TWO_BODY_MAX_ORBITALS: usize = 32;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `h_kq`, an `M × M` complex matrix (1-based accessors).
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyTable {
    orbitals: usize,
    data: Vec<Complex64>,
}

impl OneBodyTable {
    pub fn zeros(orbitals: usize) -> Self {
        Self {
            orbitals,
            data: vec![ZERO; orbitals * orbitals],
        }
    }

    pub fn identity(orbitals: usize) -> Self {
        let mut t = Self::zeros(orbitals);
        for k in 1..=orbitals {
            t.set(k, k, Complex64::new(1.0, 0.0));
        }
        t
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    #[inline]
    fn slot(&self, k: usize, q: usize) -> usize {
        debug_assert!(k >= 1 && q >= 1 && k <= self.orbitals && q <= self.orbitals);
        (k - 1) * self.orbitals + (q - 1)
    }

    pub fn get(&self, k: usize, q: usize) -> Complex64 {
        self.data[self.slot(k, q)]
    }

    pub fn set(&mut self, k: usize, q: usize, value: Complex64) {
        let i = self.slot(k, q);
        self.data[i] = value;
    }

    /// Nonzero entries in `(k, q)` order.
    pub fn nonzeros(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        let m = self.orbitals;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(move |(i, v)| ((i / m + 1, i % m + 1), *v))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TwoBodyStorage {
    Dense(Vec<Complex64>),
    Sparse(BTreeMap<[usize; 4], Complex64>),
}

/// `W_ksql`, stored densely up to 32 orbitals and as a coordinate map above.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyTable {
    orbitals: usize,
    storage: TwoBodyStorage,
}

impl TwoBodyTable {
    pub fn zeros(orbitals: usize) -> Self {
        let storage = if orbitals <= DENSE_TWO_BODY_MAX_ORBITALS {
            TwoBodyStorage::Dense(vec![ZERO; orbitals.pow(4)])
        } else {
            TwoBodyStorage::Sparse(BTreeMap::new())
        };
        Self { orbitals, storage }
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, TwoBodyStorage::Dense(_))
    }

    #[inline]
    fn slot(&self, k: usize, s: usize, q: usize, l: usize) -> usize {
        let m = self.orbitals;
        (((k - 1) * m + (s - 1)) * m + (q - 1)) * m + (l - 1)
    }

    /// Coefficient `W_ksql` of `b†_k b†_s b_l b_q`.
    pub fn get(&self, k: usize, s: usize, q: usize, l: usize) -> Complex64 {
        match &self.storage {
            TwoBodyStorage::Dense(d) => d[self.slot(k, s, q, l)],
            TwoBodyStorage::Sparse(map) => map.get(&[k, s, q, l]).copied().unwrap_or(ZERO),
        }
    }

    pub fn set(&mut self, k: usize, s: usize, q: usize, l: usize, value: Complex64) {
        let i = self.slot(k, s, q, l);
        match &mut self.storage {
            TwoBodyStorage::Dense(d) => d[i] = value,
            TwoBodyStorage::Sparse(map) => {
                if value == ZERO {
                    map.remove(&[k, s, q, l]);
                } else {
                    map.insert([k, s, q, l], value);
                }
            }
        }
    }

    /// Nonzero entries keyed `[k, s, q, l]`, in lexicographic key order.
    pub fn nonzeros(&self) -> Vec<([usize; 4], Complex64)> {
        match &self.storage {
            TwoBodyStorage::Dense(d) => {
                let m = self.orbitals;
                d.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != ZERO)
                    .map(|(i, v)| {
                        let l = i % m;
                        let q = (i / m) % m;
                        let s = (i / (m * m)) % m;
                        let k = i / (m * m * m);
                        ([k + 1, s + 1, q + 1, l + 1], *v)
                    })
                    .collect()
            }
            TwoBodyStorage::Sparse(map) => map.iter().map(|(k, v)| (*k, *v)).collect(),
        }
    }

    /// `(W_ksql + W_sklq) / 2`: the part of `W` the operator actually sees,
    /// since `b†_k b†_s b_l b_q = b†_s b†_k b_q b_l` for both statistics.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.orbitals);
        for ([k, s, q, l], v) in self.nonzeros() {
            let cur = out.get(k, s, q, l);
            out.set(k, s, q, l, cur + v * 0.5);
            let cur = out.get(s, k, l, q);
            out.set(s, k, l, q, cur + v * 0.5);
        }
        out
    }
}

/// A single-species operator: space plus `h` and `W` tables.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    space: Space,
    one_body: OneBodyTable,
    two_body: TwoBodyTable,
}

impl HamiltonianSpec {
    pub fn new(space: Space, one_body: OneBodyTable, two_body: TwoBodyTable) -> Result<Self> {
        let m = space.orbitals();
        if one_body.orbitals() != m || two_body.orbitals() != m {
            return Err(Error::Validation(format!(
                "tables sized {} / {} for a space with {m} orbitals",
                one_body.orbitals(),
                two_body.orbitals()
            )));
        }
        Ok(Self {
            space,
            one_body,
            two_body,
        })
    }

    pub fn zeros(space: &Space) -> Self {
        let m = space.orbitals();
        Self {
            space: space.clone(),
            one_body: OneBodyTable::zeros(m),
            two_body: TwoBodyTable::zeros(m),
        }
    }

    /// Total number operator `Σ_k b†_k b_k`.
    pub fn number_operator(space: &Space) -> Self {
        let mut h = Self::zeros(space);
        h.one_body = OneBodyTable::identity(space.orbitals());
        h
    }

    /// Random operator satisfying the entrywise Hermiticity conditions
    /// `h_qk = conj(h_kq)` and `W_qlks = conj(W_ksql)`, entries in `[−1, 1]`.
    pub fn random_hermitian(space: &Space, seed: u64) -> Self {
        let m = space.orbitals();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |real: bool| {
            let re = 2.0 * rng.random::<f64>() - 1.0;
            let im = if real {
                0.0
            } else {
                2.0 * rng.random::<f64>() - 1.0
            };
            Complex64::new(re, im)
        };
        let mut h = OneBodyTable::zeros(m);
        for k in 1..=m {
            for q in k..=m {
                let v = draw(k == q);
                h.set(k, q, v);
                h.set(q, k, v.conj());
            }
        }
        let mut w = TwoBodyTable::zeros(m);
        for k in 1..=m {
            for s in 1..=m {
                for q in 1..=m {
                    for l in 1..=m {
                        // adjoint partner of (k,s,q,l) is (q,l,k,s)
                        let partner = (q, l, k, s);
                        if partner < (k, s, q, l) {
                            continue;
                        }
                        let v = draw(partner == (k, s, q, l));
                        w.set(k, s, q, l, v);
                        w.set(q, l, k, s, v.conj());
                    }
                }
            }
        }
        Self {
            space: space.clone(),
            one_body: h,
            two_body: w,
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn one_body(&self) -> &OneBodyTable {
        &self.one_body
    }

    pub fn two_body(&self) -> &TwoBodyTable {
        &self.two_body
    }

    pub fn one_body_mut(&mut self) -> &mut OneBodyTable {
        &mut self.one_body
    }

    pub fn two_body_mut(&mut self) -> &mut TwoBodyTable {
        &mut self.two_body
    }

    /// Same tables scaled by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = Self::zeros(&self.space);
        for ((k, q), v) in self.one_body.nonzeros() {
            out.one_body.set(k, q, v * factor);
        }
        for ([k, s, q, l], v) in self.two_body.nonzeros() {
            out.two_body.set(k, s, q, l, v * factor);
        }
        out
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        validate(self)
    }
}

/// Bose-Hubbard chain (or ring) with hopping `J` and on-site `U`:
/// `h_{k,k±1} = −J`, `W_kkkk = U`, giving `(U/2) Σ_k n_k (n_k − 1)`.
pub fn build_bose_hubbard(
    particles: usize,
    sites: usize,
    hopping: f64,
    interaction: f64,
    ring: bool,
) -> Result<HamiltonianSpec> {
    if sites == 0 {
        return Err(Error::InvalidArgument(
            "at least one site is required".into(),
        ));
    }
    let space = Space::bosons(particles, sites)?;
    let mut spec = HamiltonianSpec::zeros(&space);
    let t = Complex64::new(-hopping, 0.0);
    let mut bond = |a: usize, b: usize| {
        spec.one_body.set(a, b, t);
        spec.one_body.set(b, a, t);
    };
    for k in 1..sites {
        bond(k, k + 1);
    }
    // a two-site ring would double the only bond
    if ring && sites > 2 {
        bond(sites, 1);
    }
    for k in 1..=sites {
        spec.two_body
            .set(k, k, k, k, Complex64::new(interaction, 0.0));
    }
    Ok(spec)
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub one_body_hermitian: bool,
    pub max_one_body_deviation: f64,
    /// `(k, q)` with `k ≤ q` where `|h_kq − conj(h_qk)| > tol`.
    pub one_body_violations: Vec<(usize, usize)>,
    pub two_body_self_adjoint: bool,
    pub max_two_body_deviation: f64,
    /// `[k, s, q, l]` (the lexicographically smaller of each adjoint pair)
    /// where `|W_ksql − conj(W_qlks)| > tol`.
    pub two_body_violations: Vec<[usize; 4]>,
}

impl ValidationReport {
    pub fn is_hermitian(&self) -> bool {
        self.one_body_hermitian && self.two_body_self_adjoint
    }
}

/// Checks structure (finite entries) and reports Hermiticity of `h` and
/// entrywise self-adjointness of `W`.
pub fn validate(spec: &HamiltonianSpec) -> Result<ValidationReport> {
    let m = spec.space.orbitals();
    if spec.one_body.orbitals() != m || spec.two_body.orbitals() != m {
        return Err(Error::Validation(
            "table dimensions do not match the space".into(),
        ));
    }
    let finite = |v: Complex64| v.re.is_finite() && v.im.is_finite();
    if let Some(((k, q), _)) = spec.one_body.nonzeros().find(|(_, v)| !finite(*v)) {
        return Err(Error::Validation(format!("h[{k},{q}] is not finite")));
    }
    let two = spec.two_body.nonzeros();
    if let Some(([k, s, q, l], _)) = two.iter().find(|(_, v)| !finite(*v)) {
        return Err(Error::Validation(format!(
            "W[{k},{s},{q},{l}] is not finite"
        )));
    }

    let mut report = ValidationReport::default();
    for k in 1..=m {
        for q in k..=m {
            let dev = (spec.one_body.get(k, q) - spec.one_body.get(q, k).conj()).norm();
            report.max_one_body_deviation = report.max_one_body_deviation.max(dev);
            if dev > HERMITIAN_TOL {
                report.one_body_violations.push((k, q));
            }
        }
    }
    report.one_body_hermitian = report.one_body_violations.is_empty();

    let w = &spec.two_body;
    let mut seen = std::collections::BTreeSet::new();
    for ([k, s, q, l], v) in two {
        let key = [k, s, q, l].min([q, l, k, s]);
        if !seen.insert(key) {
            continue;
        }
        let dev = (v - w.get(q, l, k, s).conj()).norm();
        report.max_two_body_deviation = report.max_two_body_deviation.max(dev);
        if dev > HERMITIAN_TOL {
            report.two_body_violations.push(key);
        }
    }
    report.two_body_self_adjoint = report.two_body_violations.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_symmetric_h_is_hermitian() {
        let s = Space::fermions(1, 3).unwrap();
        let mut spec = HamiltonianSpec::zeros(&s);
        spec.one_body_mut().set(1, 2, c(0.5, 0.0));
        spec.one_body_mut().set(2, 1, c(0.5, 0.0));
        spec.one_body_mut().set(3, 3, c(-2.0, 0.0));
        let r = spec.validate().unwrap();
        assert!(r.one_body_hermitian && r.is_hermitian());
    }

    #[test]
    fn imaginary_symmetric_h_is_not_hermitian() {
        let s = Space::fermions(1, 2).unwrap();
        let mut spec = HamiltonianSpec::zeros(&s);
        spec.one_body_mut().set(1, 2, c(0.0, 1.0));
        spec.one_body_mut().set(2, 1, c(0.0, 1.0));
        let r = spec.validate().unwrap();
        assert!(!r.one_body_hermitian);
        assert_eq!(r.one_body_violations, vec![(1, 2)]);
        assert!((r.max_one_body_deviation - 2.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_entries_are_pinpointed() {
        let s = Space::bosons(2, 3).unwrap();
        let mut spec = HamiltonianSpec::random_hermitian(&s, 11);
        assert!(spec.validate().unwrap().is_hermitian());

        let v = spec.one_body().get(3, 1);
        spec.one_body_mut().set(3, 1, v + c(1e-9, 0.0));
        let v = spec.two_body().get(2, 3, 1, 2);
        spec.two_body_mut().set(2, 3, 1, 2, v + c(0.0, 1e-6));
        let r = spec.validate().unwrap();
        assert_eq!(r.one_body_violations, vec![(1, 3)]);
        assert_eq!(r.two_body_violations, vec![[1, 2, 2, 3]]);
        assert!(!r.is_hermitian());
    }

    #[test]
    fn non_finite_entries_are_errors() {
        let s = Space::bosons(2, 2).unwrap();
        let mut spec = HamiltonianSpec::zeros(&s);
        spec.two_body_mut().set(1, 2, 2, 1, c(f64::NAN, 0.0));
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("W[1,2,2,1]"), "{err}");
    }

    #[test]
    fn bose_hubbard_tables() {
        let spec = build_bose_hubbard(2, 2, 0.7, 3.0, false).unwrap();
        assert_eq!(spec.one_body().get(1, 2), c(-0.7, 0.0));
        assert_eq!(spec.one_body().get(2, 1), c(-0.7, 0.0));
        assert_eq!(spec.one_body().get(1, 1), c(0.0, 0.0));
        assert_eq!(spec.two_body().get(1, 1, 1, 1), c(3.0, 0.0));
        assert_eq!(spec.two_body().get(2, 2, 2, 2), c(3.0, 0.0));
        assert_eq!(spec.two_body().nonzeros().len(), 2);

        let ring = build_bose_hubbard(1, 3, 1.0, 0.0, true).unwrap();
        assert_eq!(ring.one_body().get(1, 3), c(-1.0, 0.0));
        assert_eq!(ring.one_body().get(3, 1), c(-1.0, 0.0));
        let chain = build_bose_hubbard(1, 3, 1.0, 0.0, false).unwrap();
        assert_eq!(chain.one_body().get(1, 3), c(0.0, 0.0));
        assert!(build_bose_hubbard(1, 0, 1.0, 0.0, false).is_err());
    }

    #[test]
    fn sparse_storage_above_dense_limit() {
        let mut w = TwoBodyTable::zeros(40);
        assert!(!w.is_dense());
        w.set(40, 1, 2, 39, c(1.5, -1.0));
        assert_eq!(w.get(40, 1, 2, 39), c(1.5, -1.0));
        assert_eq!(w.nonzeros(), vec![([40, 1, 2, 39], c(1.5, -1.0))]);
        w.set(40, 1, 2, 39, c(0.0, 0.0));
        assert!(w.nonzeros().is_empty());
        assert!(TwoBodyTable::zeros(32).is_dense());
    }

    #[test]
    fn symmetrized_two_body() {
        let mut w = TwoBodyTable::zeros(3);
        w.set(1, 2, 3, 1, c(2.0, 0.0));
        let sym = w.symmetrized();
        assert_eq!(sym.get(1, 2, 3, 1), c(1.0, 0.0));
        assert_eq!(sym.get(2, 1, 1, 3), c(1.0, 0.0));
    }
}
