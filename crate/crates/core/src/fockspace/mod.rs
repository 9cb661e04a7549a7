//! Single-species Fock spaces and dense state vectors over them.

pub(crate) mod io;

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinadics::{
    self, low_mask, space_dimension, Address, BinomialTable, FermionBits, HoleVector,
    OccupationVector, MAX_FERMION_ORBITALS,
};
use crate::error::{Error, Result};

pub use io::{read_vector, write_vector, VectorJson, VECTOR_JSON_FORMAT, VECTOR_MAGIC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Fermion => "fermion",
            Statistics::Boson => "boson",
        })
    }
}

/// `N` particles of one statistics in `M` orbitals, with the binomial table
/// that drives addressing. Cloning is cheap.
#[derive(Clone)]
pub struct Space {
    inner: Arc<SpaceInner>,
}

struct SpaceInner {
    statistics: Statistics,
    particles: usize,
    orbitals: usize,
    dim: usize,
    binomials: BinomialTable,
}

impl Space {
    pub fn new(statistics: Statistics, particles: usize, orbitals: usize) -> Result<Self> {
        if orbitals == 0 {
            return Err(Error::InvalidSpace(
                "at least one orbital is required".into(),
            ));
        }
        if statistics == Statistics::Fermion && orbitals > MAX_FERMION_ORBITALS {
            return Err(Error::InvalidSpace(format!(
                "fermionic spaces are limited to {MAX_FERMION_ORBITALS} orbitals"
            )));
        }
        let dim = space_dimension(statistics, particles, orbitals)?;
        let dim = usize::try_from(dim)
            .map_err(|_| Error::Overflow(format!("{dim} configurations do not fit in memory")))?;
        // Addressing always happens in a fermionic picture: the space itself
        // for fermions, the isomorphic N + M − 1 orbital space for bosons.
        let binomials = match statistics {
            Statistics::Fermion => BinomialTable::new(orbitals, orbitals - particles),
            Statistics::Boson => BinomialTable::new(particles + orbitals - 1, orbitals - 1),
        };
        Ok(Self {
            inner: Arc::new(SpaceInner {
                statistics,
                particles,
                orbitals,
                dim,
                binomials,
            }),
        })
    }

    pub fn fermions(particles: usize, orbitals: usize) -> Result<Self> {
        Self::new(Statistics::Fermion, particles, orbitals)
    }

    pub fn bosons(particles: usize, orbitals: usize) -> Result<Self> {
        Self::new(Statistics::Boson, particles, orbitals)
    }

    pub fn statistics(&self) -> Statistics {
        self.inner.statistics
    }

    pub fn particles(&self) -> usize {
        self.inner.particles
    }

    pub fn orbitals(&self) -> usize {
        self.inner.orbitals
    }

    /// Number of configurations, `N_conf`.
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    /// Hole count of the fermionic picture: `M − N` for fermions, `M − 1`
    /// for bosons.
    pub fn holes(&self) -> usize {
        match self.statistics() {
            Statistics::Fermion => self.orbitals() - self.particles(),
            Statistics::Boson => self.orbitals() - 1,
        }
    }

    pub fn binomials(&self) -> &BinomialTable {
        &self.inner.binomials
    }

    pub fn check_orbital(&self, orbital: usize) -> Result<()> {
        if orbital == 0 || orbital > self.orbitals() {
            return Err(Error::OrbitalOutOfRange {
                orbital,
                orbitals: self.orbitals(),
            });
        }
        Ok(())
    }

    /// Address of a configuration given as occupations (either statistics).
    pub fn rank(&self, occ: &OccupationVector) -> Result<Address> {
        match self.statistics() {
            Statistics::Boson => combinadics::boson_rank(occ, self),
            Statistics::Fermion => {
                occ.validate(self)?;
                let bits = FermionBits::from_occupations(occ.as_slice());
                combinadics::fermion_rank(&bits.holes(self.orbitals()), self)
            }
        }
    }

    /// Occupations of the configuration at `j` (either statistics).
    pub fn unrank(&self, j: Address) -> Result<OccupationVector> {
        match self.statistics() {
            Statistics::Boson => combinadics::boson_unrank(j, self),
            Statistics::Fermion => {
                let holes = combinadics::fermion_unrank(j, self)?;
                Ok(FermionBits::from_holes(&holes, self.orbitals()).occupations(self.orbitals()))
            }
        }
    }

    /// Every configuration once, in increasing address order.
    pub fn configurations(&self) -> Configurations {
        Configurations::new(self.clone())
    }
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.statistics() == other.statistics()
                && self.particles() == other.particles()
                && self.orbitals() == other.orbitals())
    }
}

impl Eq for Space {}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Space")
            .field("statistics", &self.statistics())
            .field("particles", &self.particles())
            .field("orbitals", &self.orbitals())
            .field("dim", &self.dim())
            .finish()
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} N={} M={} (N_conf={})",
            self.statistics(),
            self.particles(),
            self.orbitals(),
            self.dim()
        )
    }
}

/// A configuration as produced by [`Space::configurations`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Configuration {
    Fermion {
        holes: HoleVector,
        bits: FermionBits,
    },
    Boson(OccupationVector),
}

impl Configuration {
    pub fn occupations(&self, orbitals: usize) -> OccupationVector {
        match self {
            Configuration::Fermion { bits, .. } => bits.occupations(orbitals),
            Configuration::Boson(occ) => occ.clone(),
        }
    }

    pub fn render(&self, orbitals: usize) -> String {
        match self {
            Configuration::Fermion { bits, .. } => bits.render(orbitals),
            Configuration::Boson(occ) => occ.to_string(),
        }
    }
}

/// Iterator over `(Address, Configuration)` in increasing `J`.
///
/// Fermions walk hole sets in colexicographic order of their distance from
/// the right edge (Gosper's successor), which is exactly increasing address.
/// Bosons step to the next occupation vector in decreasing lexicographic
/// order.
pub struct Configurations {
    space: Space,
    next: usize,
    // fermions: hole mask with bit c standing for orbital M − c
    mask: u128,
    occ: Vec<u32>,
}

impl Configurations {
    fn new(space: Space) -> Self {
        let mask = low_mask(space.holes());
        let mut occ = vec![0u32; space.orbitals()];
        occ[0] = space.particles() as u32;
        Self {
            space,
            next: 0,
            mask,
            occ,
        }
    }
}

impl Iterator for Configurations {
    type Item = (Address, Configuration);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.space.dim() {
            return None;
        }
        let address = Address::from_offset(self.next);
        let m = self.space.orbitals();
        let item = match self.space.statistics() {
            Statistics::Fermion => {
                // reverse so that bit c (from the right edge) becomes bit M − 1 − c
                let empty = if m == 128 {
                    self.mask.reverse_bits()
                } else {
                    self.mask.reverse_bits() >> (128 - m)
                };
                let bits = FermionBits(!empty & low_mask(m));
                if self.next + 1 < self.space.dim() {
                    let x = self.mask;
                    let c = x & x.wrapping_neg();
                    let r = x + c;
                    self.mask = (((r ^ x) >> 2) / c) | r;
                }
                Configuration::Fermion {
                    holes: bits.holes(m),
                    bits,
                }
            }
            Statistics::Boson => {
                let current = OccupationVector::new(self.occ.clone());
                next_occupation(&mut self.occ);
                Configuration::Boson(current)
            }
        };
        self.next += 1;
        Some((address, item))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.space.dim() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Configurations {}

/// Advances `occ` to the next bosonic configuration in address order.
/// Returns `false` (leaving `occ` unchanged) at the last configuration.
pub(crate) fn next_occupation(occ: &mut [u32]) -> bool {
    let m = occ.len();
    if m < 2 {
        return false;
    }
    let Some(p) = (0..m - 1).rev().find(|&p| occ[p] > 0) else {
        return false;
    };
    let tail: u32 = occ[p + 1..].iter().sum();
    occ[p] -= 1;
    occ[p + 1] = tail + 1;
    for x in &mut occ[p + 2..] {
        *x = 0;
    }
    true
}

/// Dense amplitudes `C_J` over a [`Space`]; slot `J − 1` holds `C_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: Space,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(space: &Space) -> Self {
        Self {
            space: space.clone(),
            amplitudes: vec![Complex64::new(0.0, 0.0); space.dim()],
        }
    }

    pub fn basis(space: &Space, j: Address) -> Result<Self> {
        if j.get() > space.dim() as u64 {
            return Err(Error::AddressOutOfRange {
                address: j.get(),
                dim: space.dim() as u64,
            });
        }
        let mut v = Self::zeros(space);
        v.amplitudes[j.offset()] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Normalized vector with Gaussian-like random amplitudes, reproducible
    /// from `seed`.
    pub fn random(space: &Space, seed: u64) -> Self {
        let mut v = Self::from_amplitudes(space, random_amplitudes(space.dim(), seed))
            .expect("length matches");
        v.normalize();
        v
    }

    pub fn from_amplitudes(space: &Space, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Format("amplitudes must be finite".into()));
        }
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn get(&self, j: Address) -> Complex64 {
        self.amplitudes[j.offset()]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for c in &mut self.amplitudes {
                *c /= n;
            }
        }
    }

    pub fn scale(&mut self, alpha: Complex64) {
        for c in &mut self.amplitudes {
            *c *= alpha;
        }
    }

    /// In-place `self += alpha · x`.
    pub fn axpy_in_place(&mut self, alpha: Complex64, x: &StateVector) -> Result<()> {
        check_same(&self.space, &x.space)?;
        axpy_slice(alpha, &x.amplitudes, &mut self.amplitudes);
        Ok(())
    }
}

impl Index<Address> for StateVector {
    type Output = Complex64;

    fn index(&self, j: Address) -> &Complex64 {
        &self.amplitudes[j.offset()]
    }
}

impl IndexMut<Address> for StateVector {
    fn index_mut(&mut self, j: Address) -> &mut Complex64 {
        &mut self.amplitudes[j.offset()]
    }
}

pub(crate) fn check_same(a: &Space, b: &Space) -> Result<()> {
    if a != b {
        return Err(Error::SpaceMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// `Σ_J conj(u_J) · v_J`.
pub fn dot(u: &StateVector, v: &StateVector) -> Result<Complex64> {
    check_same(&u.space, &v.space)?;
    Ok(dot_slice(&u.amplitudes, &v.amplitudes))
}

/// Returns `y + alpha · x`; neither input is modified.
pub fn axpy(alpha: Complex64, x: &StateVector, y: &StateVector) -> Result<StateVector> {
    check_same(&x.space, &y.space)?;
    let mut out = y.clone();
    axpy_slice(alpha, &x.amplitudes, &mut out.amplitudes);
    Ok(out)
}

/// Compensated (Neumaier) inner product on raw slices. Deterministic: the
/// summation order is fixed by the slice order.
pub fn dot_slice(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    debug_assert_eq!(u.len(), v.len());
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for (a, b) in u.iter().zip(v) {
        // conj(a) * b
        re.add(a.re * b.re);
        re.add(a.im * b.im);
        im.add(a.re * b.im);
        im.add(-a.im * b.re);
    }
    Complex64::new(re.total(), im.total())
}

pub fn norm_sqr(u: &[Complex64]) -> f64 {
    let mut acc = Neumaier::default();
    for a in u {
        acc.add(a.norm_sqr());
    }
    acc.total()
}

pub fn axpy_slice(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn random_amplitudes(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fermion_iteration_order() {
        let s = Space::fermions(2, 3).unwrap();
        let got: Vec<_> = s
            .configurations()
            .map(|(j, c)| (j.get(), c.render(3)))
            .collect();
        assert_eq!(
            got,
            vec![
                (1, "|110⟩".into()),
                (2, "|101⟩".into()),
                (3, "|011⟩".into())
            ]
        );
    }

    #[test]
    fn boson_iteration_order() {
        let s = Space::bosons(2, 2).unwrap();
        let got: Vec<_> = s
            .configurations()
            .map(|(_, c)| c.occupations(2).into_inner())
            .collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn iteration_agrees_with_unrank() {
        for s in [
            Space::fermions(3, 7).unwrap(),
            Space::fermions(0, 4).unwrap(),
            Space::fermions(5, 5).unwrap(),
            Space::bosons(4, 5).unwrap(),
            Space::bosons(3, 1).unwrap(),
            Space::bosons(0, 3).unwrap(),
        ] {
            let mut count = 0;
            for (j, conf) in s.configurations() {
                assert_eq!(s.unrank(j).unwrap(), conf.occupations(s.orbitals()), "{s}");
                count += 1;
            }
            assert_eq!(count, s.dim());
        }
    }

    #[test]
    fn wide_fermion_space_iterates() {
        let s = Space::fermions(127, 128).unwrap();
        assert_eq!(s.configurations().count(), 128);
        let (_, last) = s.configurations().last().unwrap();
        assert_eq!(
            last,
            Configuration::Fermion {
                holes: HoleVector::new(vec![1], 128).unwrap(),
                bits: FermionBits(u128::MAX - 1),
            }
        );
    }

    #[test]
    fn space_validation() {
        assert!(Space::fermions(3, 2).is_err());
        assert!(Space::bosons(3, 0).is_err());
        assert!(Space::fermions(1, 129).is_err());
        assert!(Space::fermions(60, 120).is_err());
    }

    #[test]
    fn dot_basics() {
        let s = Space::bosons(2, 3).unwrap();
        let e1 = StateVector::basis(&s, Address::new(1).unwrap()).unwrap();
        let e2 = StateVector::basis(&s, Address::new(2).unwrap()).unwrap();
        assert_eq!(dot(&e1, &e2).unwrap(), c(0.0, 0.0));
        let v = StateVector::random(&s, 3);
        let vv = dot(&v, &v).unwrap();
        assert!((vv.re - 1.0).abs() < 1e-15 && vv.im == 0.0);
        let u = StateVector::random(&s, 4);
        let uv = dot(&u, &v).unwrap();
        let vu = dot(&v, &u).unwrap();
        assert!((uv - vu.conj()).norm() < 1e-16);
        let other = StateVector::zeros(&Space::bosons(2, 2).unwrap());
        assert!(matches!(dot(&u, &other), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn axpy_identities() {
        let s = Space::fermions(2, 4).unwrap();
        let x = StateVector::random(&s, 1);
        let y = StateVector::random(&s, 2);
        assert_eq!(axpy(c(0.0, 0.0), &x, &y).unwrap(), y);
        assert_eq!(axpy(c(1.0, 0.0), &x, &StateVector::zeros(&s)).unwrap(), x);
        let alpha = c(0.3, -1.2);
        let z = axpy(alpha, &x, &y).unwrap();
        for i in 0..s.dim() {
            assert_eq!(
                z.amplitudes()[i],
                y.amplitudes()[i] + alpha * x.amplitudes()[i]
            );
        }
        let mut w = y.clone();
        w.axpy_in_place(alpha, &x).unwrap();
        assert_eq!(w, z);
    }

    #[test]
    fn random_vectors_are_reproducible() {
        let s = Space::bosons(3, 3).unwrap();
        assert_eq!(StateVector::random(&s, 9), StateVector::random(&s, 9));
        assert_ne!(StateVector::random(&s, 9), StateVector::random(&s, 10));
    }

    #[test]
    fn next_occupation_walks_all() {
        let mut occ = vec![3, 0, 0];
        let mut n = 1;
        while next_occupation(&mut occ) {
            n += 1;
        }
        assert_eq!(n, 10);
        assert_eq!(occ, vec![0, 0, 3]);
    }
}
