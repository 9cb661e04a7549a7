//! Matrix-free application of creation/annihilation strings.
//!
//! Every particle-conserving string maps a configuration to at most one
//! configuration. Applying a term to a vector is therefore a walk over the
//! configurations the term can reach, each gathering one amplitude from its
//! uniquely determined source address, times a prefactor.
//!
//! Phases follow the basis `|n⟩ = (b†_1)^{n_1} ⋯ (b†_M)^{n_M} |vac⟩`: an
//! elementary fermion operator on orbital `p` picks up `(−1)^{Σ_{i<p} n_i}`.
//! Composing `b†_k b_q` that way leaves `(−1)^{d}` with `d` the number of
//! occupied orbitals strictly between `k` and `q`.

use num_complex::Complex64;

use crate::combinadics::{
    low_mask, rank_bits, rank_occupations, space_dimension, Address, FermionBits, OccupationVector,
};
use crate::error::{Error, Result};
use crate::fockspace::{check_same, next_occupation, Space, StateVector, Statistics};
use crate::hamiltonian::{HamiltonianSpec, OneBodyTable};

/// Terms with `|coefficient|` below this are skipped by default.
pub const DEFAULT_SKIP_THRESHOLD: f64 = 1e-15;

/// One elementary operator, 1-based orbital.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    pub fn orbital(self) -> usize {
        match self {
            Ladder::Create(p) | Ladder::Annihilate(p) => p,
        }
    }
}

/// A product of ladder operators written left to right; the rightmost
/// operator acts first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LadderString(Vec<Ladder>);

impl LadderString {
    pub fn new(ops: Vec<Ladder>) -> Self {
        Self(ops)
    }

    /// `b†_k b_q`.
    pub fn one_body(k: usize, q: usize) -> Self {
        Self(vec![Ladder::Create(k), Ladder::Annihilate(q)])
    }

    /// `b†_k b†_s b_l b_q`.
    pub fn two_body(k: usize, s: usize, l: usize, q: usize) -> Self {
        Self(vec![
            Ladder::Create(k),
            Ladder::Create(s),
            Ladder::Annihilate(l),
            Ladder::Annihilate(q),
        ])
    }

    pub fn ops(&self) -> &[Ladder] {
        &self.0
    }

    pub fn is_particle_conserving(&self) -> bool {
        let creates = self
            .0
            .iter()
            .filter(|o| matches!(o, Ladder::Create(_)))
            .count();
        2 * creates == self.0.len()
    }

    fn check(&self, space: &Space) -> Result<()> {
        for op in &self.0 {
            space.check_orbital(op.orbital())?;
        }
        if !self.is_particle_conserving() {
            return Err(Error::InvalidArgument(
                "operator string does not conserve particle number".into(),
            ));
        }
        Ok(())
    }
}

/// Image of one configuration under an operator string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementaryResult {
    pub target: Address,
    /// `±1` for fermions, a product of `√n` factors for bosons.
    pub prefactor: f64,
    pub vanished: bool,
}

/// Occupied orbitals strictly between `k` and `q`.
pub fn fermion_sign_count(config: FermionBits, k: usize, q: usize) -> u32 {
    config.count_between(k, q)
}

/// Applies `string` to one configuration, one elementary step at a time.
pub fn apply_string_to_configuration(
    space: &Space,
    string: &LadderString,
    config: &OccupationVector,
) -> Result<ElementaryResult> {
    string.check(space)?;
    config.validate(space)?;
    let vanished = ElementaryResult {
        target: Address::FIRST,
        prefactor: 0.0,
        vanished: true,
    };
    let mut occ = config.as_slice().to_vec();
    let mut prefactor = 1.0f64;
    for op in string.ops().iter().rev() {
        let p = op.orbital() - 1;
        match space.statistics() {
            Statistics::Fermion => {
                let below: u32 = occ[..p].iter().sum();
                let wanted = matches!(op, Ladder::Annihilate(_)) as u32;
                if occ[p] != wanted {
                    return Ok(vanished);
                }
                occ[p] = 1 - wanted;
                if below % 2 == 1 {
                    prefactor = -prefactor;
                }
            }
            Statistics::Boson => match op {
                Ladder::Annihilate(_) => {
                    if occ[p] == 0 {
                        return Ok(vanished);
                    }
                    prefactor *= (occ[p] as f64).sqrt();
                    occ[p] -= 1;
                }
                Ladder::Create(_) => {
                    occ[p] += 1;
                    prefactor *= (occ[p] as f64).sqrt();
                }
            },
        }
    }
    Ok(ElementaryResult {
        target: space.rank(&OccupationVector::new(occ))?,
        prefactor,
        vanished: false,
    })
}

/// Precomputed reach of a particle-conserving string within a space.
#[derive(Clone, Debug)]
pub(crate) struct TermPlan {
    ops: Vec<Ladder>,
    kind: PlanKind,
}

#[derive(Clone, Debug)]
enum PlanKind {
    /// The string annihilates every configuration.
    Empty,
    Fermion {
        /// Touched-orbital pattern of outputs and sources.
        out_bits: u128,
        src_bits: u128,
        /// Untouched orbitals (0-based) and how many particles they hold.
        free: Vec<u32>,
        free_particles: usize,
    },
    Boson {
        /// Minimal output occupations; outputs are `min_out + e` for every
        /// distribution `e` of `free_particles` bosons.
        min_out: Vec<u32>,
        /// Source = output − shift.
        shift: Vec<i32>,
        free_particles: usize,
    },
}

impl TermPlan {
    pub(crate) fn new(space: &Space, string: &LadderString) -> Result<Self> {
        string.check(space)?;
        let ops = string.ops().to_vec();
        let kind = match space.statistics() {
            Statistics::Fermion => fermion_plan(space, &ops),
            Statistics::Boson => boson_plan(space, &ops),
        };
        Ok(Self { ops, kind })
    }

    /// Number of output configurations the term reaches.
    pub(crate) fn reach(&self, space: &Space) -> u64 {
        match &self.kind {
            PlanKind::Empty => 0,
            PlanKind::Fermion {
                free,
                free_particles,
                ..
            } => space_dimension(Statistics::Fermion, *free_particles, free.len())
                .unwrap_or(u64::MAX),
            PlanKind::Boson { free_particles, .. } => {
                space_dimension(Statistics::Boson, *free_particles, space.orbitals())
                    .unwrap_or(u64::MAX)
            }
        }
    }
}

fn fermion_plan(space: &Space, ops: &[Ladder]) -> PlanKind {
    // state per orbital: None untouched, Some(current occupation)
    let m = space.orbitals();
    let mut current: Vec<Option<bool>> = vec![None; m];
    let mut src_bits = 0u128;
    for op in ops.iter().rev() {
        let p = op.orbital() - 1;
        let create = matches!(op, Ladder::Create(_));
        match current[p] {
            None => {
                if !create {
                    src_bits |= 1 << p;
                }
                current[p] = Some(create);
            }
            Some(occupied) => {
                if occupied == create {
                    return PlanKind::Empty;
                }
                current[p] = Some(create);
            }
        }
    }
    let mut out_bits = 0u128;
    let mut free = Vec::new();
    for (p, c) in current.iter().enumerate() {
        match c {
            Some(true) => out_bits |= 1 << p,
            Some(false) => {}
            None => free.push(p as u32),
        }
    }
    let fixed = out_bits.count_ones() as usize;
    let n = space.particles();
    if fixed > n || n - fixed > free.len() {
        return PlanKind::Empty;
    }
    PlanKind::Fermion {
        out_bits,
        src_bits,
        free,
        free_particles: n - fixed,
    }
}

fn boson_plan(space: &Space, ops: &[Ladder]) -> PlanKind {
    let m = space.orbitals();
    let mut need = vec![0i32; m];
    let mut shift = vec![0i32; m];
    for op in ops.iter().rev() {
        let p = op.orbital() - 1;
        match op {
            Ladder::Annihilate(_) => {
                need[p] = need[p].max(1 - shift[p]);
                shift[p] -= 1;
            }
            Ladder::Create(_) => shift[p] += 1,
        }
    }
    let min_out: Vec<u32> = need
        .iter()
        .zip(&shift)
        .map(|(r, d)| (r + d) as u32)
        .collect();
    let fixed: usize = min_out.iter().map(|&x| x as usize).sum();
    if fixed > space.particles() {
        return PlanKind::Empty;
    }
    PlanKind::Boson {
        min_out,
        shift,
        free_particles: space.particles() - fixed,
    }
}

/// Calls `visit(output offset, source offset, prefactor)` for every
/// configuration the planned term reaches.
pub(crate) fn for_each_transition(
    space: &Space,
    plan: &TermPlan,
    mut visit: impl FnMut(usize, usize, f64),
) {
    match &plan.kind {
        PlanKind::Empty => {}
        PlanKind::Fermion {
            out_bits,
            src_bits,
            free,
            free_particles,
        } => {
            let m = space.orbitals();
            let holes = space.holes();
            let table = space.binomials();
            let p = *free_particles;
            let f = free.len();
            let mut pick: Vec<usize> = (0..p).collect();
            loop {
                let mut chosen = 0u128;
                for &i in &pick {
                    chosen |= 1 << free[i];
                }
                let out = chosen | out_bits;
                let src = chosen | src_bits;
                let mut bits = src;
                let mut odd = 0u32;
                for op in plan.ops.iter().rev() {
                    let q = op.orbital() - 1;
                    odd ^= (bits & low_mask(q)).count_ones();
                    bits ^= 1 << q;
                }
                debug_assert_eq!(bits, out);
                let sign = if odd & 1 == 1 { -1.0 } else { 1.0 };
                visit(
                    rank_bits(table, m, holes, out) as usize,
                    rank_bits(table, m, holes, src) as usize,
                    sign,
                );
                // next p-combination of 0..f in lexicographic order
                let mut i = p;
                while i > 0 && pick[i - 1] == f - p + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                pick[i - 1] += 1;
                for j in i..p {
                    pick[j] = pick[j - 1] + 1;
                }
            }
        }
        PlanKind::Boson {
            min_out,
            shift,
            free_particles,
        } => {
            let m = space.orbitals();
            let n = space.particles();
            let table = space.binomials();
            let mut extra = vec![0u32; m];
            extra[0] = *free_particles as u32;
            let mut out = vec![0u32; m];
            let mut src = vec![0u32; m];
            let mut run = vec![0u32; m];
            loop {
                for x in 0..m {
                    out[x] = extra[x] + min_out[x];
                    src[x] = (out[x] as i32 - shift[x]) as u32;
                }
                run.copy_from_slice(&src);
                let mut product = 1u64;
                for op in plan.ops.iter().rev() {
                    let q = op.orbital() - 1;
                    match op {
                        Ladder::Annihilate(_) => {
                            product *= run[q] as u64;
                            run[q] -= 1;
                        }
                        Ladder::Create(_) => {
                            run[q] += 1;
                            product *= run[q] as u64;
                        }
                    }
                }
                visit(
                    rank_occupations(table, n, &out) as usize,
                    rank_occupations(table, n, &src) as usize,
                    (product as f64).sqrt(),
                );
                if !next_occupation(&mut extra) {
                    break;
                }
            }
        }
    }
}

/// `out += coefficient · T src` for a planned term.
pub(crate) fn accumulate(
    space: &Space,
    plan: &TermPlan,
    coefficient: Complex64,
    src: &[Complex64],
    out: &mut [Complex64],
) {
    for_each_transition(space, plan, |o, s, f| {
        out[o] += coefficient * f * src[s];
    });
}

/// `⟨ψ|T|ψ⟩` for a planned term, summed in transition order.
pub(crate) fn expectation(space: &Space, plan: &TermPlan, psi: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_transition(space, plan, |o, s, f| {
        acc += psi[o].conj() * f * psi[s];
    });
    acc
}

/// A weighted operator string.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub string: LadderString,
    pub coefficient: Complex64,
}

/// Terms of `Σ h_kq b†_k b_q + ½ Σ W_ksql b†_k b†_s b_l b_q` whose
/// coefficient reaches `threshold`: one-body terms in `(k, q)` order, then
/// two-body terms in `(k, s, q, l)` order.
pub fn hamiltonian_terms(spec: &HamiltonianSpec, threshold: f64) -> Vec<Term> {
    let mut terms = one_body_terms(spec.one_body(), threshold);
    for ([k, s, q, l], w) in spec.two_body().nonzeros() {
        let c = w * 0.5;
        if c.norm() >= threshold {
            terms.push(Term {
                string: LadderString::two_body(k, s, l, q),
                coefficient: c,
            });
        }
    }
    terms
}

pub(crate) fn one_body_terms(h: &OneBodyTable, threshold: f64) -> Vec<Term> {
    h.nonzeros()
        .filter(|(_, v)| v.norm() >= threshold)
        .map(|((k, q), v)| Term {
            string: LadderString::one_body(k, q),
            coefficient: v,
        })
        .collect()
}

/// `string |ψ⟩`.
pub fn apply_string(string: &LadderString, psi: &StateVector) -> Result<StateVector> {
    let space = psi.space();
    let plan = TermPlan::new(space, string)?;
    let mut out = vec![Complex64::new(0.0, 0.0); space.dim()];
    accumulate(
        space,
        &plan,
        Complex64::new(1.0, 0.0),
        psi.amplitudes(),
        &mut out,
    );
    StateVector::from_amplitudes(space, out)
}

/// `b†_k b_q |ψ⟩`.
pub fn apply_one_body_term(k: usize, q: usize, psi: &StateVector) -> Result<StateVector> {
    apply_string(&LadderString::one_body(k, q), psi)
}

/// `b†_k b†_s b_l b_q |ψ⟩`, defined for every index pattern.
pub fn apply_two_body_term(
    k: usize,
    s: usize,
    l: usize,
    q: usize,
    psi: &StateVector,
) -> Result<StateVector> {
    apply_string(&LadderString::two_body(k, s, l, q), psi)
}

/// Tuning for whole-operator application.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApplyOptions {
    pub skip_threshold: f64,
    pub workers: usize,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            skip_threshold: DEFAULT_SKIP_THRESHOLD,
            workers: 1,
        }
    }
}

/// `Σ_kq h_kq b†_k b_q |ψ⟩`.
pub fn apply_one_body_operator(h: &OneBodyTable, psi: &StateVector) -> Result<StateVector> {
    let space = psi.space();
    if h.orbitals() != space.orbitals() {
        return Err(Error::SpaceMismatch(format!(
            "{}-orbital table on {space}",
            h.orbitals()
        )));
    }
    let terms = one_body_terms(h, DEFAULT_SKIP_THRESHOLD);
    crate::executor::apply_terms(space, &terms, psi.amplitudes(), 1)
        .and_then(|v| StateVector::from_amplitudes(space, v))
}

/// `H |ψ⟩` with default options.
pub fn apply_hamiltonian(spec: &HamiltonianSpec, psi: &StateVector) -> Result<StateVector> {
    apply_hamiltonian_with(spec, psi, &ApplyOptions::default())
}

pub fn apply_hamiltonian_with(
    spec: &HamiltonianSpec,
    psi: &StateVector,
    options: &ApplyOptions,
) -> Result<StateVector> {
    check_same(spec.space(), psi.space())?;
    let terms = hamiltonian_terms(spec, options.skip_threshold);
    let out = crate::executor::apply_terms(psi.space(), &terms, psi.amplitudes(), options.workers)?;
    StateVector::from_amplitudes(psi.space(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinadics::HoleVector;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn basis(space: &Space, o: &[u32]) -> StateVector {
        StateVector::basis(space, space.rank(&occ(o)).unwrap()).unwrap()
    }

    /// Nonzero amplitudes as (occupations, value).
    fn support(v: &StateVector) -> Vec<(Vec<u32>, Complex64)> {
        v.space()
            .configurations()
            .filter(|(j, _)| v.get(*j).norm() > 0.0)
            .map(|(j, cfg)| {
                let m = v.space().orbitals();
                (cfg.occupations(m).into_inner(), v.get(j))
            })
            .collect()
    }

    #[test]
    fn sign_count_examples() {
        let bits = FermionBits::from_occupations(&[0, 1, 1, 0]);
        assert_eq!(fermion_sign_count(bits, 1, 3), 1);
        assert_eq!(fermion_sign_count(bits, 3, 1), 1);
        assert_eq!(fermion_sign_count(bits, 2, 3), 0);
        let bits = FermionBits::from_occupations(&[1, 0, 1, 1]);
        assert_eq!(fermion_sign_count(bits, 2, 3), 0);
    }

    #[test]
    fn fermion_one_body_sign() {
        let s = Space::fermions(2, 4).unwrap();
        let out = apply_one_body_term(1, 3, &basis(&s, &[0, 1, 1, 0])).unwrap();
        assert_eq!(support(&out), vec![(vec![1, 1, 0, 0], c(-1.0))]);
    }

    #[test]
    fn boson_one_body_and_two_body() {
        let s = Space::bosons(2, 2).unwrap();
        let out = apply_one_body_term(1, 2, &basis(&s, &[1, 1])).unwrap();
        let sup = support(&out);
        assert_eq!(sup.len(), 1);
        assert_eq!(sup[0].0, vec![2, 0]);
        assert!((sup[0].1.re - 2f64.sqrt()).abs() < 1e-15);

        let out = apply_two_body_term(1, 1, 2, 2, &basis(&s, &[0, 2])).unwrap();
        let sup = support(&out);
        assert_eq!(sup[0].0, vec![2, 0]);
        assert!((sup[0].1.re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_and_vanishing() {
        let s = Space::fermions(2, 4).unwrap();
        let psi = StateVector::random(&s, 3);
        assert_eq!(apply_two_body_term(2, 2, 1, 3, &psi).unwrap().norm(), 0.0);
        assert_eq!(apply_two_body_term(1, 3, 4, 4, &psi).unwrap().norm(), 0.0);
        let b = Space::bosons(1, 3).unwrap();
        let psi = StateVector::random(&b, 3);
        assert_eq!(apply_two_body_term(1, 2, 3, 1, &psi).unwrap().norm(), 0.0);
    }

    #[test]
    fn number_operator_diagonal() {
        for space in [Space::fermions(3, 6).unwrap(), Space::bosons(3, 4).unwrap()] {
            let psi = StateVector::random(&space, 9);
            for k in 1..=space.orbitals() {
                let out = apply_one_body_term(k, k, &psi).unwrap();
                for (j, cfg) in space.configurations() {
                    let n = cfg.occupations(space.orbitals()).as_slice()[k - 1] as f64;
                    assert!((out.get(j) - psi.get(j) * n).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn out_of_range_orbitals() {
        let s = Space::fermions(1, 3).unwrap();
        let psi = StateVector::random(&s, 1);
        assert!(matches!(
            apply_one_body_term(4, 1, &psi),
            Err(Error::OrbitalOutOfRange { .. })
        ));
        assert!(apply_two_body_term(1, 0, 1, 1, &psi).is_err());
        let odd = LadderString::new(vec![Ladder::Create(1)]);
        assert!(matches!(
            apply_string(&odd, &psi),
            Err(Error::InvalidArgument(_))
        ));
    }

    /// Prefix-count phases composed over `b†_k b_q` give `(−1)^d`.
    #[test]
    fn prefix_phase_matches_between_count() {
        for m in 1..=12 {
            for n in 0..=m {
                let s = Space::fermions(n, m).unwrap();
                for (_, cfg) in s.configurations() {
                    let o = cfg.occupations(m);
                    let bits = FermionBits::from_occupations(o.as_slice());
                    for k in 1..=m {
                        for q in 1..=m {
                            let r = apply_string_to_configuration(
                                &s,
                                &LadderString::one_body(k, q),
                                &o,
                            )
                            .unwrap();
                            let allowed = bits.is_occupied(q) && (k == q || !bits.is_occupied(k));
                            assert_eq!(!r.vanished, allowed);
                            if allowed {
                                let d = fermion_sign_count(bits, k, q);
                                let want = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
                                assert_eq!(r.prefactor, want, "m={m} {o} k={k} q={q}");
                            }
                        }
                    }
                }
            }
        }
    }

    /// The planned gather walk and the step-by-step reference agree on
    /// every configuration for every two-body index pattern.
    #[test]
    fn plan_matches_elementary_walk() {
        let spaces = [
            Space::fermions(2, 4).unwrap(),
            Space::fermions(3, 5).unwrap(),
            Space::bosons(3, 3).unwrap(),
            Space::bosons(2, 4).unwrap(),
            Space::bosons(4, 1).unwrap(),
        ];
        for space in &spaces {
            let m = space.orbitals();
            for idx in 0..m.pow(4) {
                let (k, s, l, q) = (
                    idx / m.pow(3) + 1,
                    idx / m.pow(2) % m + 1,
                    idx / m % m + 1,
                    idx % m + 1,
                );
                let string = LadderString::two_body(k, s, l, q);
                let plan = TermPlan::new(space, &string).unwrap();
                let mut seen = vec![None; space.dim()];
                for_each_transition(space, &plan, |o, src, f| {
                    assert!(seen[src].is_none());
                    seen[src] = Some((o, f));
                });
                let mut count = 0u64;
                for (j, cfg) in space.configurations() {
                    let r =
                        apply_string_to_configuration(space, &string, &cfg.occupations(m)).unwrap();
                    match seen[j.offset()] {
                        None => assert!(r.vanished),
                        Some((o, f)) => {
                            count += 1;
                            assert!(!r.vanished);
                            assert_eq!(r.target.offset(), o);
                            assert!((r.prefactor - f).abs() < 1e-14);
                        }
                    }
                }
                assert_eq!(count, plan.reach(space));
            }
        }
    }

    #[test]
    fn identity_table_counts_particles() {
        let space = Space::bosons(3, 3).unwrap();
        let psi = StateVector::random(&space, 4);
        let out = apply_one_body_operator(&OneBodyTable::identity(3), &psi).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b * 3.0).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_spec_gives_zero() {
        let space = Space::fermions(2, 5).unwrap();
        let psi = StateVector::random(&space, 4);
        let out = apply_hamiltonian(&HamiltonianSpec::zeros(&space), &psi).unwrap();
        assert!(out.amplitudes().iter().all(|a| *a == c(0.0)));
    }

    #[test]
    fn single_entry_table_is_scaled_term() {
        let space = Space::fermions(2, 4).unwrap();
        let psi = StateVector::random(&space, 2);
        let mut h = OneBodyTable::zeros(4);
        let coef = Complex64::new(0.3, -0.7);
        h.set(4, 2, coef);
        let a = apply_one_body_operator(&h, &psi).unwrap();
        let b = apply_one_body_term(4, 2, &psi).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - coef * y).norm() < 1e-15);
        }
    }

    #[test]
    fn wide_fermion_space_uses_high_bits() {
        let space = Space::fermions(2, 128).unwrap();
        let holes = HoleVector::new((2..=127).collect(), 128).unwrap();
        let j = crate::combinadics::fermion_rank(&holes, &space).unwrap();
        let psi = StateVector::basis(&space, j).unwrap();
        let out = apply_one_body_term(127, 128, &psi).unwrap();
        let sup = support(&out);
        assert_eq!(sup.len(), 1);
        let mut want = vec![0u32; 128];
        want[0] = 1;
        want[126] = 1;
        assert_eq!(sup[0].0, want);
        assert_eq!(sup[0].1, c(1.0));
    }

    proptest! {
        #[test]
        fn linearity(seed in any::<u64>(), boson in any::<bool>()) {
            let space = if boson { Space::bosons(3, 3).unwrap() } else { Space::fermions(3, 5).unwrap() };
            let spec = HamiltonianSpec::random_hermitian(&space, seed);
            let u = StateVector::random(&space, seed ^ 1);
            let v = StateVector::random(&space, seed ^ 2);
            let (a, b) = (Complex64::new(0.4, -1.1), Complex64::new(-2.0, 0.5));
            let mut mix = u.clone();
            mix.scale(a);
            mix.axpy_in_place(b, &v).unwrap();
            let lhs = apply_hamiltonian(&spec, &mix).unwrap();
            let hu = apply_hamiltonian(&spec, &u).unwrap();
            let hv = apply_hamiltonian(&spec, &v).unwrap();
            for i in 0..space.dim() {
                let rhs = a * hu.amplitudes()[i] + b * hv.amplitudes()[i];
                prop_assert!((lhs.amplitudes()[i] - rhs).norm() < 1e-12);
            }
        }

        #[test]
        fn hermiticity_transfers(seed in any::<u64>(), boson in any::<bool>()) {
            let space = if boson { Space::bosons(2, 4).unwrap() } else { Space::fermions(2, 5).unwrap() };
            let spec = HamiltonianSpec::random_hermitian(&space, seed);
            let u = StateVector::random(&space, seed ^ 7);
            let v = StateVector::random(&space, seed ^ 8);
            let uhv = crate::fockspace::dot(&u, &apply_hamiltonian(&spec, &v).unwrap()).unwrap();
            let vhu = crate::fockspace::dot(&v, &apply_hamiltonian(&spec, &u).unwrap()).unwrap();
            prop_assert!((uhv - vhu.conj()).norm() <= 1e-12 * u.norm() * v.norm());
        }
    }
}
