//! Ranking and unranking of configurations.
//!
//! A fermionic configuration of `N` particles in `M` orbitals is labelled by
//! the strictly increasing positions `i_1 < … < i_{M_v}` of its `M_v = M − N`
//! holes, counted from the left and starting at 1. Its address is
//!
//! ```text
//! J = 1 + Σ_{k=1}^{M_v} C(N + M_v − i_k, M_v + 1 − k)
//! ```
//!
//! Bosonic configurations `|n_1, …, n_M⟩` are addressed through the
//! one-to-one map onto `N` fermions in `N + M − 1` orbitals: the boson count
//! in orbital `k` is the run of occupied fermionic orbitals between hole
//! `k − 1` and hole `k`. In closed form
//!
//! ```text
//! J = 1 + Σ_{k=1}^{M−1} C(N + M − 1 − k − Σ_{l≤k} n_l, M − k)
//! ```
//!
//! In both cases `J = 1` puts every particle as far left as possible and
//! `J = N_conf` as far right as possible. All public indices are 1-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::fockspace::{Space, Statistics};

/// Pascal triangle of exact unsigned binomial coefficients.
///
/// Entries that do not fit in 64 bits saturate to `u64::MAX`. A space only
/// ever looks up coefficients strictly smaller than its dimension, so a
/// saturated entry can never be read on a valid ranking path; the space
/// constructor rejects dimensions that saturate.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    max_top: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BinomialTable {
    /// Table of `C(a, b)` for `a ≤ max_top`, `b ≤ max_bottom`.
    pub fn new(max_top: usize, max_bottom: usize) -> Self {
        let stride = max_bottom + 1;
        let mut data = vec![0u64; (max_top + 1) * stride];
        for a in 0..=max_top {
            data[a * stride] = 1;
            for b in 1..=max_bottom.min(a) {
                let left = data[(a - 1) * stride + b - 1];
                let up = data[(a - 1) * stride + b];
                data[a * stride + b] = left.saturating_add(up);
            }
        }
        Self {
            max_top,
            stride,
            data,
        }
    }

    pub fn max_top(&self) -> usize {
        self.max_top
    }

    pub fn max_bottom(&self) -> usize {
        self.stride - 1
    }

    /// Raw (possibly saturated) coefficient. Zero when `bottom > top`.
    #[inline]
    pub fn get(&self, top: usize, bottom: usize) -> u64 {
        debug_assert!(top <= self.max_top && bottom < self.stride);
        self.data[top * self.stride + bottom]
    }

    /// The coefficient, or `None` if it does not fit in 64 bits.
    pub fn exact(&self, top: usize, bottom: usize) -> Option<u64> {
        if top > self.max_top || bottom >= self.stride {
            return None;
        }
        match self.get(top, bottom) {
            u64::MAX => None,
            v => Some(v),
        }
    }
}

/// A 1-based position in a state vector, `1 ≤ J ≤ N_conf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(u64);

impl Address {
    pub const FIRST: Address = Address(1);

    pub fn new(j: u64) -> Option<Self> {
        (j >= 1).then_some(Self(j))
    }

    /// Address of the zero-based storage slot `offset`.
    pub fn from_offset(offset: usize) -> Self {
        Self(offset as u64 + 1)
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Zero-based storage slot, `J − 1`.
    pub fn offset(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Strictly increasing, 1-based hole positions of a fermionic configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HoleVector(Vec<usize>);

impl HoleVector {
    /// Validates ordering and the `[1, orbitals]` range. The hole count is
    /// checked later against a concrete space.
    pub fn new(holes: Vec<usize>, orbitals: usize) -> Result<Self> {
        for (idx, &h) in holes.iter().enumerate() {
            if h == 0 || h > orbitals {
                return Err(Error::InvalidConfiguration(format!(
                    "hole position {h} outside [1, {orbitals}]"
                )));
            }
            if idx > 0 && holes[idx - 1] >= h {
                return Err(Error::InvalidConfiguration(format!(
                    "hole positions must be strictly increasing, got {holes:?}"
                )));
            }
        }
        Ok(Self(holes))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Per-orbital particle counts `n_1 … n_M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    pub fn orbitals(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    /// Checks the vector against a space of either statistics.
    pub fn validate(&self, space: &Space) -> Result<()> {
        if self.0.len() != space.orbitals() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} orbitals, got {}",
                space.orbitals(),
                self.0.len()
            )));
        }
        if self.total() != space.particles() as u64 {
            return Err(Error::InvalidConfiguration(format!(
                "occupations sum to {}, space holds {} particles",
                self.total(),
                space.particles()
            )));
        }
        if space.statistics() == Statistics::Fermion && self.0.iter().any(|&n| n > 1) {
            return Err(Error::InvalidConfiguration(
                "fermionic occupations must be 0 or 1".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Bit-set form of a fermionic configuration: orbital `k` (1-based) is
/// occupied iff bit `k − 1` is set. Limited to 128 orbitals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct FermionBits(pub u128);

pub const MAX_FERMION_ORBITALS: usize = 128;

#[inline]
pub(crate) fn low_mask(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

impl FermionBits {
    pub fn from_holes(holes: &HoleVector, orbitals: usize) -> Self {
        let mut empty = 0u128;
        for &h in holes.as_slice() {
            empty |= 1u128 << (h - 1);
        }
        Self(low_mask(orbitals) & !empty)
    }

    pub fn from_occupations(occ: &[u32]) -> Self {
        let mut bits = 0u128;
        for (i, &n) in occ.iter().enumerate() {
            if n > 0 {
                bits |= 1u128 << i;
            }
        }
        Self(bits)
    }

    pub fn holes(self, orbitals: usize) -> HoleVector {
        let mut empty = !self.0 & low_mask(orbitals);
        let mut holes = Vec::with_capacity(empty.count_ones() as usize);
        while empty != 0 {
            holes.push(empty.trailing_zeros() as usize + 1);
            empty &= empty - 1;
        }
        HoleVector(holes)
    }

    pub fn occupations(self, orbitals: usize) -> OccupationVector {
        OccupationVector((0..orbitals).map(|i| ((self.0 >> i) & 1) as u32).collect())
    }

    #[inline]
    pub fn is_occupied(self, orbital: usize) -> bool {
        (self.0 >> (orbital - 1)) & 1 == 1
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Occupied orbitals strictly between `k` and `q` (1-based, either order).
    #[inline]
    pub fn count_between(self, k: usize, q: usize) -> u32 {
        let (lo, hi) = if k < q { (k, q) } else { (q, k) };
        if hi - lo < 2 {
            return 0;
        }
        // bits lo .. hi-2 hold orbitals lo+1 .. hi-1
        let mask = low_mask(hi - 1) & !low_mask(lo);
        (self.0 & mask).count_ones()
    }

    /// Bit-string rendering, orbital 1 first, e.g. `|1100⟩`.
    pub fn render(self, orbitals: usize) -> String {
        let mut s = String::with_capacity(orbitals + 4);
        s.push('|');
        for i in 0..orbitals {
            s.push(if (self.0 >> i) & 1 == 1 { '1' } else { '0' });
        }
        s.push('⟩');
        s
    }
}

/// `N_conf` for a complete Fock subspace: `C(M, N)` for fermions,
/// `C(N + M − 1, N)` for bosons.
pub fn space_dimension(statistics: Statistics, particles: usize, orbitals: usize) -> Result<u64> {
    let (top, bottom) = match statistics {
        Statistics::Fermion => {
            if orbitals < particles {
                return Err(Error::InvalidSpace(format!(
                    "{particles} fermions do not fit in {orbitals} orbitals"
                )));
            }
            (orbitals, particles.min(orbitals - particles))
        }
        Statistics::Boson => {
            if orbitals == 0 {
                return Err(Error::InvalidSpace(
                    "bosons need at least one orbital".into(),
                ));
            }
            (particles + orbitals - 1, particles.min(orbitals - 1))
        }
    };
    checked_binomial(top, bottom).ok_or_else(|| {
        Error::Overflow(format!(
            "C({top}, {bottom}) for {particles} particles in {orbitals} orbitals"
        ))
    })
}

fn checked_binomial(top: usize, bottom: usize) -> Option<u64> {
    if bottom > top {
        return Some(0);
    }
    // multiplicative form, exact at each step: C(top-bottom+i, i)
    let mut acc: u128 = 1;
    let base = (top - bottom) as u128;
    for i in 1..=bottom as u128 {
        acc = acc.checked_mul(base + i)? / i;
        if acc >= u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

// ---------------------------------------------------------------------------
// Hot-path primitives shared by the kernel. `orbitals` and `holes` describe a
// fermionic space (for bosons: the isomorphic fermion space).

/// `J − 1` of a fermionic bit configuration.
#[inline]
pub(crate) fn rank_bits(table: &BinomialTable, orbitals: usize, holes: usize, bits: u128) -> u64 {
    let mut empty = !bits & low_mask(orbitals);
    let mut acc = 0u64;
    let mut bottom = holes;
    while empty != 0 {
        let i = empty.trailing_zeros() as usize + 1;
        acc += table.get(orbitals - i, bottom);
        bottom -= 1;
        empty &= empty - 1;
    }
    acc
}

/// `J − 1` of a bosonic occupation vector.
#[inline]
pub(crate) fn rank_occupations(table: &BinomialTable, particles: usize, occ: &[u32]) -> u64 {
    let m = occ.len();
    let mut acc = 0u64;
    let mut prefix = 0usize;
    for k in 1..m {
        prefix += occ[k - 1] as usize;
        // N + M − 1 − k − S_k ≥ M − k − 1 ≥ 0 since S_k ≤ N
        acc += table.get(particles + m - 1 - k - prefix, m - k);
    }
    acc
}

/// Hole positions (1-based) of the configuration at zero-based rank `rank`.
fn unrank_holes(table: &BinomialTable, orbitals: usize, holes: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(holes);
    // c_k = orbitals − i_k is strictly decreasing; c_1 ≤ orbitals − 1
    let mut upper = orbitals;
    for k in 1..=holes {
        let bottom = holes + 1 - k;
        let mut c = upper - 1;
        while c >= bottom && table.get(c, bottom) > rank {
            c -= 1;
        }
        // for c < bottom the coefficient is zero; c ≥ bottom − 1 always holds
        if c >= bottom {
            rank -= table.get(c, bottom);
        }
        out.push(orbitals - c);
        upper = c;
    }
    debug_assert_eq!(rank, 0);
    out
}

fn check_address(j: Address, space: &Space) -> Result<()> {
    if j.get() > space.dim() as u64 {
        return Err(Error::AddressOutOfRange {
            address: j.get(),
            dim: space.dim() as u64,
        });
    }
    Ok(())
}

fn require(space: &Space, statistics: Statistics) -> Result<()> {
    if space.statistics() != statistics {
        return Err(Error::SpaceMismatch(format!(
            "operation needs a {statistics} space, got {}",
            space.statistics()
        )));
    }
    Ok(())
}

/// Address of a fermionic configuration given by its hole positions.
pub fn fermion_rank(holes: &HoleVector, space: &Space) -> Result<Address> {
    require(space, Statistics::Fermion)?;
    let m = space.orbitals();
    let mv = space.holes();
    if holes.len() != mv {
        return Err(Error::InvalidConfiguration(format!(
            "expected {mv} holes, got {}",
            holes.len()
        )));
    }
    // re-check order and range: HoleVector may have been built for another M
    let holes = HoleVector::new(holes.as_slice().to_vec(), m)?;
    let table = space.binomials();
    let rank: u64 = holes
        .as_slice()
        .iter()
        .enumerate()
        .map(|(idx, &i)| table.get(m - i, mv - idx))
        .sum();
    Ok(Address(rank + 1))
}

/// Hole positions of the fermionic configuration at address `j`.
pub fn fermion_unrank(j: Address, space: &Space) -> Result<HoleVector> {
    require(space, Statistics::Fermion)?;
    check_address(j, space)?;
    Ok(HoleVector(unrank_holes(
        space.binomials(),
        space.orbitals(),
        space.holes(),
        j.get() - 1,
    )))
}

/// Address of a bosonic configuration.
pub fn boson_rank(occ: &OccupationVector, space: &Space) -> Result<Address> {
    require(space, Statistics::Boson)?;
    occ.validate(space)?;
    Ok(Address(
        rank_occupations(space.binomials(), space.particles(), occ.as_slice()) + 1,
    ))
}

/// Occupations of the bosonic configuration at address `j`.
pub fn boson_unrank(j: Address, space: &Space) -> Result<OccupationVector> {
    require(space, Statistics::Boson)?;
    check_address(j, space)?;
    let n = space.particles();
    let m = space.orbitals();
    let holes = unrank_holes(space.binomials(), n + m - 1, m - 1, j.get() - 1);
    Ok(holes_to_occupations(&holes, n + m - 1))
}

fn holes_to_occupations(holes: &[usize], fermion_orbitals: usize) -> OccupationVector {
    let mut occ = Vec::with_capacity(holes.len() + 1);
    let mut prev = 0usize;
    for &i in holes {
        occ.push((i - prev - 1) as u32);
        prev = i;
    }
    occ.push((fermion_orbitals - prev) as u32);
    OccupationVector(occ)
}

/// Maps `|n_1, …, n_M⟩` onto the hole positions of the isomorphic fermionic
/// configuration (`N` fermions in `N + M − 1` orbitals, `M − 1` holes):
/// `i_1 = n_1 + 1`, `i_k = i_{k−1} + n_k + 1`.
pub fn boson_to_fermion(occ: &OccupationVector) -> HoleVector {
    let occ = occ.as_slice();
    let mut holes = Vec::with_capacity(occ.len().saturating_sub(1));
    let mut pos = 0usize;
    for &n in &occ[..occ.len().saturating_sub(1)] {
        pos += n as usize + 1;
        holes.push(pos);
    }
    HoleVector(holes)
}

/// Inverse of [`boson_to_fermion`]. `fermion_orbitals` is `M' = N + M − 1`;
/// the last occupation closes the vector as `n_M = M' − i_{M−1}`.
pub fn fermion_to_boson(holes: &HoleVector, fermion_orbitals: usize) -> Result<OccupationVector> {
    let holes = HoleVector::new(holes.as_slice().to_vec(), fermion_orbitals)?;
    Ok(holes_to_occupations(holes.as_slice(), fermion_orbitals))
}
