//! Two-species mixtures: Fermi-Fermi, Bose-Bose and Bose-Fermi.
//!
//! A mixture configuration is a pair `(J_A, J_B)`, flattened row-major with
//! `J_B` fastest: offset `(J_A − 1)·N^B_conf + (J_B − 1)`. Operator strings of
//! different species commute, so each species keeps its own phase and no
//! cross-species sign appears.
//!
//! ```text
//! H = H_A + H_B + Σ_{k k' q q'} W^AB_{k k' q q'} a†_k a_q b†_k' b_q'
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinadics::Address;
use crate::error::{Error, Result};
use crate::executor::{run_jobs, TermJob};
use crate::fockspace::io::{
    read_amplitudes, read_u64, statistics_byte, statistics_from_byte, write_amplitudes, write_u64,
};
use crate::fockspace::{dot_slice, norm_sqr, random_amplitudes, Space, StateVector};
use crate::hamiltonian::{HamiltonianSpec, ValidationReport, HERMITIAN_TOL};
use crate::kernel::{for_each_transition, hamiltonian_terms, ApplyOptions, LadderString, TermPlan};

pub const MIXTURE_VECTOR_MAGIC: &[u8; 8] = b"FOCKMIX1";

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Species {
    A,
    B,
}

/// Product of two single-species spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpace {
    a: Space,
    b: Space,
    dim: usize,
}

impl MixtureSpace {
    pub fn new(a: Space, b: Space) -> Result<Self> {
        let dim = a.dim().checked_mul(b.dim()).ok_or_else(|| {
            Error::Overflow(format!("{} × {} mixture configurations", a.dim(), b.dim()))
        })?;
        Ok(Self { a, b, dim })
    }

    pub fn a(&self) -> &Space {
        &self.a
    }

    pub fn b(&self) -> &Space {
        &self.b
    }

    pub fn species(&self, s: Species) -> &Space {
        match s {
            Species::A => &self.a,
            Species::B => &self.b,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn address(&self, ja: Address, jb: Address) -> Result<Address> {
        mixture_address(self, ja, jb)
    }

    /// Inverse of [`mixture_address`].
    pub fn split(&self, j: Address) -> Result<(Address, Address)> {
        if j.get() > self.dim as u64 {
            return Err(Error::AddressOutOfRange {
                address: j.get(),
                dim: self.dim as u64,
            });
        }
        let off = j.offset();
        let nb = self.b.dim();
        Ok((
            Address::from_offset(off / nb),
            Address::from_offset(off % nb),
        ))
    }
}

impl fmt::Display for MixtureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊗ {}", self.a, self.b)
    }
}

/// `(J_A − 1)·N^B_conf + J_B`.
pub fn mixture_address(space: &MixtureSpace, ja: Address, jb: Address) -> Result<Address> {
    for (j, s) in [(ja, &space.a), (jb, &space.b)] {
        if j.get() > s.dim() as u64 {
            return Err(Error::AddressOutOfRange {
                address: j.get(),
                dim: s.dim() as u64,
            });
        }
    }
    Ok(Address::from_offset(
        ja.offset() * space.b.dim() + jb.offset(),
    ))
}

/// Amplitudes over a [`MixtureSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureStateVector {
    space: MixtureSpace,
    amplitudes: Vec<Complex64>,
}

impl MixtureStateVector {
    pub fn zeros(space: &MixtureSpace) -> Self {
        Self {
            space: space.clone(),
            amplitudes: vec![ZERO; space.dim()],
        }
    }

    pub fn basis(space: &MixtureSpace, ja: Address, jb: Address) -> Result<Self> {
        let j = mixture_address(space, ja, jb)?;
        let mut v = Self::zeros(space);
        v.amplitudes[j.offset()] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    /// Normalized random vector, reproducible from `seed`.
    pub fn random(space: &MixtureSpace, seed: u64) -> Self {
        let mut v = Self {
            space: space.clone(),
            amplitudes: random_amplitudes(space.dim(), seed),
        };
        v.normalize();
        v
    }

    pub fn from_amplitudes(space: &MixtureSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} amplitudes for {space} with {} configurations",
                amplitudes.len(),
                space.dim()
            )));
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    /// `u_A ⊗ v_B`.
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        let space = MixtureSpace::new(a.space().clone(), b.space().clone())?;
        let mut amps = Vec::with_capacity(space.dim());
        for x in a.amplitudes() {
            for y in b.amplitudes() {
                amps.push(x * y);
            }
        }
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn space(&self) -> &MixtureSpace {
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

    pub fn get(&self, ja: Address, jb: Address) -> Complex64 {
        self.amplitudes[ja.offset() * self.space.b.dim() + jb.offset()]
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for c in &mut self.amplitudes {
                *c /= n;
            }
        }
    }

    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        self.check(other.space())?;
        Ok(dot_slice(&self.amplitudes, &other.amplitudes))
    }

    fn check(&self, space: &MixtureSpace) -> Result<()> {
        if &self.space != space {
            return Err(Error::SpaceMismatch(format!("{} vs {space}", self.space)));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(66 + 16 * self.len());
        write_mixture_vector(&mut buf, self).expect("writing to memory");
        buf
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        read_mixture_vector(&mut bytes)
    }
}

/// `FOCKMIX1`, then statistics byte, `N`, `M`, `N_conf` for species A and
/// for species B, the total dimension, and the amplitudes, all little-endian.
pub fn write_mixture_vector(w: &mut impl Write, v: &MixtureStateVector) -> Result<()> {
    w.write_all(MIXTURE_VECTOR_MAGIC)?;
    for s in [v.space.a(), v.space.b()] {
        w.write_all(&[statistics_byte(s.statistics())])?;
        write_u64(w, s.particles() as u64)?;
        write_u64(w, s.orbitals() as u64)?;
        write_u64(w, s.dim() as u64)?;
    }
    write_u64(w, v.space.dim() as u64)?;
    write_amplitudes(w, &v.amplitudes)
}

pub fn read_mixture_vector(r: &mut impl Read) -> Result<MixtureStateVector> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MIXTURE_VECTOR_MAGIC {
        return Err(Error::Format("bad magic, expected FOCKMIX1".into()));
    }
    let mut species = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut b = [0u8; 1];
        r.read_exact(&mut b)?;
        let stats = statistics_from_byte(b[0])?;
        let n = read_u64(r)? as usize;
        let m = read_u64(r)? as usize;
        let dim = read_u64(r)?;
        let s = Space::new(stats, n, m)?;
        if dim != s.dim() as u64 {
            return Err(Error::Format(format!(
                "header claims {dim} configurations for {s}"
            )));
        }
        species.push(s);
    }
    let b = species.pop().expect("two species");
    let a = species.pop().expect("two species");
    let space = MixtureSpace::new(a, b)?;
    if read_u64(r)? != space.dim() as u64 {
        return Err(Error::Format(
            "total dimension does not match the species".into(),
        ));
    }
    let amps = read_amplitudes(r, space.dim())?;
    MixtureStateVector::from_amplitudes(&space, amps)
}

/// `W^AB_{k k' q q'}`, the coefficient of `a†_k a_q b†_k' b_q'`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterSpeciesTable {
    orbitals_a: usize,
    orbitals_b: usize,
    entries: BTreeMap<[usize; 4], Complex64>,
}

impl InterSpeciesTable {
    pub fn zeros(orbitals_a: usize, orbitals_b: usize) -> Self {
        Self {
            orbitals_a,
            orbitals_b,
            entries: BTreeMap::new(),
        }
    }

    pub fn orbitals(&self) -> (usize, usize) {
        (self.orbitals_a, self.orbitals_b)
    }

    pub fn get(&self, k: usize, kp: usize, q: usize, qp: usize) -> Complex64 {
        self.entries.get(&[k, kp, q, qp]).copied().unwrap_or(ZERO)
    }

    pub fn set(&mut self, k: usize, kp: usize, q: usize, qp: usize, value: Complex64) {
        assert!(
            (1..=self.orbitals_a).contains(&k)
                && (1..=self.orbitals_a).contains(&q)
                && (1..=self.orbitals_b).contains(&kp)
                && (1..=self.orbitals_b).contains(&qp),
            "inter-species index out of range"
        );
        if value == ZERO {
            self.entries.remove(&[k, kp, q, qp]);
        } else {
            self.entries.insert([k, kp, q, qp], value);
        }
    }

    /// Nonzero entries keyed `[k, k', q, q']` in lexicographic order.
    pub fn nonzeros(&self) -> Vec<([usize; 4], Complex64)> {
        self.entries.iter().map(|(k, v)| (*k, *v)).collect()
    }

    /// Largest `|W_{k k' q q'} − conj(W_{q q' k k'})|`, with the offending
    /// keys (smaller of each adjoint pair).
    pub fn hermiticity(&self) -> (f64, Vec<[usize; 4]>) {
        let mut worst = 0.0f64;
        let mut bad = Vec::new();
        for ([k, kp, q, qp], v) in self.nonzeros() {
            let partner = [q, qp, k, kp];
            let key = [k, kp, q, qp];
            if partner < key && self.entries.contains_key(&partner) {
                continue;
            }
            let dev = (v - self.get(q, qp, k, kp).conj()).norm();
            worst = worst.max(dev);
            if dev > HERMITIAN_TOL {
                bad.push(key.min(partner));
            }
        }
        (worst, bad)
    }
}

/// Full mixture operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureHamiltonian {
    space: MixtureSpace,
    pub a: HamiltonianSpec,
    pub b: HamiltonianSpec,
    pub inter: InterSpeciesTable,
}

/// Hermiticity of every part of a mixture operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureValidation {
    pub a: ValidationReport,
    pub b: ValidationReport,
    pub inter_hermitian: bool,
    pub max_inter_deviation: f64,
    pub inter_violations: Vec<[usize; 4]>,
}

impl MixtureValidation {
    pub fn is_hermitian(&self) -> bool {
        self.a.is_hermitian() && self.b.is_hermitian() && self.inter_hermitian
    }
}

impl MixtureHamiltonian {
    pub fn new(a: HamiltonianSpec, b: HamiltonianSpec, inter: InterSpeciesTable) -> Result<Self> {
        let space = MixtureSpace::new(a.space().clone(), b.space().clone())?;
        if inter.orbitals() != (a.space().orbitals(), b.space().orbitals()) {
            return Err(Error::Validation(
                "inter-species table size does not match".into(),
            ));
        }
        Ok(Self { space, a, b, inter })
    }

    pub fn zeros(space: &MixtureSpace) -> Self {
        Self {
            space: space.clone(),
            a: HamiltonianSpec::zeros(space.a()),
            b: HamiltonianSpec::zeros(space.b()),
            inter: InterSpeciesTable::zeros(space.a().orbitals(), space.b().orbitals()),
        }
    }

    /// Random Hermitian intra-species parts plus an inter-species table with
    /// `W_{q q' k k'} = conj(W_{k k' q q'})`, entries in `[−1, 1]`.
    pub fn random_hermitian(space: &MixtureSpace, seed: u64) -> Self {
        let a = HamiltonianSpec::random_hermitian(space.a(), seed);
        let b = HamiltonianSpec::random_hermitian(space.b(), seed.wrapping_add(0x9e37_79b9));
        let (ma, mb) = (space.a().orbitals(), space.b().orbitals());
        let mut inter = InterSpeciesTable::zeros(ma, mb);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xab);
        for k in 1..=ma {
            for kp in 1..=mb {
                for q in 1..=ma {
                    for qp in 1..=mb {
                        let (key, partner) = ((k, kp, q, qp), (q, qp, k, kp));
                        if partner < key {
                            continue;
                        }
                        let re = 2.0 * rng.random::<f64>() - 1.0;
                        let im = if key == partner {
                            0.0
                        } else {
                            2.0 * rng.random::<f64>() - 1.0
                        };
                        let v = Complex64::new(re, im);
                        inter.set(k, kp, q, qp, v);
                        inter.set(q, qp, k, kp, v.conj());
                    }
                }
            }
        }
        Self {
            space: space.clone(),
            a,
            b,
            inter,
        }
    }

    pub fn space(&self) -> &MixtureSpace {
        &self.space
    }

    pub fn validate(&self) -> Result<MixtureValidation> {
        self.check_consistent()?;
        let (max_inter_deviation, inter_violations) = self.inter.hermiticity();
        Ok(MixtureValidation {
            a: self.a.validate()?,
            b: self.b.validate()?,
            inter_hermitian: inter_violations.is_empty(),
            max_inter_deviation,
            inter_violations,
        })
    }

    fn check_consistent(&self) -> Result<()> {
        if self.a.space() != self.space.a() || self.b.space() != self.space.b() {
            return Err(Error::SpaceMismatch(
                "species operators do not match the mixture space".into(),
            ));
        }
        if self.inter.orbitals() != (self.space.a().orbitals(), self.space.b().orbitals()) {
            return Err(Error::SpaceMismatch(
                "inter-species table size does not match".into(),
            ));
        }
        Ok(())
    }
}

// -- jobs ------------------------------------------------------------------

fn collect(space: &Space, plan: &TermPlan) -> Vec<(usize, usize, f64)> {
    let mut v = Vec::new();
    for_each_transition(space, plan, |o, s, f| v.push((o, s, f)));
    v
}

struct IntraA<'a> {
    space: &'a Space,
    plan: TermPlan,
    coefficient: Complex64,
    nb: usize,
}

impl TermJob for IntraA<'_> {
    fn weight(&self) -> u64 {
        self.plan.reach(self.space).saturating_mul(self.nb as u64)
    }

    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        let nb = self.nb;
        for_each_transition(self.space, &self.plan, |o, s, f| {
            let c = self.coefficient * f;
            let (dst, from) = (&mut out[o * nb..(o + 1) * nb], &src[s * nb..(s + 1) * nb]);
            for (d, x) in dst.iter_mut().zip(from) {
                *d += c * x;
            }
        });
    }
}

struct IntraB<'a> {
    space: &'a Space,
    plan: TermPlan,
    coefficient: Complex64,
    na: usize,
}

impl TermJob for IntraB<'_> {
    fn weight(&self) -> u64 {
        self.plan.reach(self.space).saturating_mul(self.na as u64)
    }

    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        let nb = self.space.dim();
        let moves = collect(self.space, &self.plan);
        for ja in 0..self.na {
            let base = ja * nb;
            for &(o, s, f) in &moves {
                out[base + o] += self.coefficient * f * src[base + s];
            }
        }
    }
}

struct Inter<'a> {
    a: &'a Space,
    b: &'a Space,
    plan_a: TermPlan,
    plan_b: TermPlan,
    coefficient: Complex64,
}

impl TermJob for Inter<'_> {
    fn weight(&self) -> u64 {
        self.plan_a
            .reach(self.a)
            .saturating_mul(self.plan_b.reach(self.b))
    }

    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        let nb = self.b.dim();
        let moves_b = collect(self.b, &self.plan_b);
        for_each_transition(self.a, &self.plan_a, |oa, sa, fa| {
            for &(ob, sb, fb) in &moves_b {
                out[oa * nb + ob] += self.coefficient * (fa * fb) * src[sa * nb + sb];
            }
        });
    }
}

enum MixtureJob<'a> {
    A(IntraA<'a>),
    B(IntraB<'a>),
    X(Inter<'a>),
}

impl TermJob for MixtureJob<'_> {
    fn weight(&self) -> u64 {
        match self {
            Self::A(j) => j.weight(),
            Self::B(j) => j.weight(),
            Self::X(j) => j.weight(),
        }
    }

    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        match self {
            Self::A(j) => j.apply(src, out),
            Self::B(j) => j.apply(src, out),
            Self::X(j) => j.apply(src, out),
        }
    }
}

fn intra_jobs<'a>(
    space: &'a MixtureSpace,
    species: Species,
    spec: &HamiltonianSpec,
    threshold: f64,
) -> Result<Vec<MixtureJob<'a>>> {
    let s = space.species(species);
    if spec.space() != s {
        return Err(Error::SpaceMismatch(format!(
            "species operator on {}, mixture species is {s}",
            spec.space()
        )));
    }
    hamiltonian_terms(spec, threshold)
        .into_iter()
        .map(|t| string_job(space, species, &t.string, t.coefficient))
        .collect()
}

fn string_job<'a>(
    space: &'a MixtureSpace,
    species: Species,
    string: &LadderString,
    coefficient: Complex64,
) -> Result<MixtureJob<'a>> {
    let s = space.species(species);
    let plan = TermPlan::new(s, string)?;
    Ok(match species {
        Species::A => MixtureJob::A(IntraA {
            space: s,
            plan,
            coefficient,
            nb: space.b().dim(),
        }),
        Species::B => MixtureJob::B(IntraB {
            space: s,
            plan,
            coefficient,
            na: space.a().dim(),
        }),
    })
}

fn inter_jobs<'a>(
    space: &'a MixtureSpace,
    table: &InterSpeciesTable,
    threshold: f64,
) -> Result<Vec<MixtureJob<'a>>> {
    if table.orbitals() != (space.a().orbitals(), space.b().orbitals()) {
        return Err(Error::SpaceMismatch(
            "inter-species table size does not match".into(),
        ));
    }
    table
        .nonzeros()
        .into_iter()
        .filter(|(_, w)| w.norm() >= threshold)
        .map(|([k, kp, q, qp], w)| {
            Ok(MixtureJob::X(Inter {
                a: space.a(),
                b: space.b(),
                plan_a: TermPlan::new(space.a(), &LadderString::one_body(k, q))?,
                plan_b: TermPlan::new(space.b(), &LadderString::one_body(kp, qp))?,
                coefficient: w,
            }))
        })
        .collect()
}

fn run(
    psi: &MixtureStateVector,
    jobs: Vec<MixtureJob<'_>>,
    workers: usize,
) -> Result<MixtureStateVector> {
    let out = run_jobs(&jobs, &psi.amplitudes, psi.space.dim(), workers);
    MixtureStateVector::from_amplitudes(&psi.space, out)
}

/// A single-species string acting on one component of a mixture state.
pub fn apply_species_string(
    species: Species,
    string: &LadderString,
    psi: &MixtureStateVector,
) -> Result<MixtureStateVector> {
    let job = string_job(&psi.space, species, string, Complex64::new(1.0, 0.0))?;
    run(psi, vec![job], 1)
}

/// `H_A` acting on the A index for every fixed `J_B`.
pub fn apply_intra_a(
    spec: &HamiltonianSpec,
    psi: &MixtureStateVector,
) -> Result<MixtureStateVector> {
    let t = ApplyOptions::default().skip_threshold;
    run(psi, intra_jobs(&psi.space, Species::A, spec, t)?, 1)
}

/// `H_B` acting on the B index for every fixed `J_A`.
pub fn apply_intra_b(
    spec: &HamiltonianSpec,
    psi: &MixtureStateVector,
) -> Result<MixtureStateVector> {
    let t = ApplyOptions::default().skip_threshold;
    run(psi, intra_jobs(&psi.space, Species::B, spec, t)?, 1)
}

/// `Σ W^AB_{k k' q q'} a†_k a_q b†_k' b_q' |ψ⟩`.
pub fn apply_inter(
    table: &InterSpeciesTable,
    psi: &MixtureStateVector,
) -> Result<MixtureStateVector> {
    let t = ApplyOptions::default().skip_threshold;
    run(psi, inter_jobs(&psi.space, table, t)?, 1)
}

pub fn apply_mixture_hamiltonian(
    h: &MixtureHamiltonian,
    psi: &MixtureStateVector,
) -> Result<MixtureStateVector> {
    apply_mixture_hamiltonian_with(h, psi, &ApplyOptions::default())
}

/// `(H_A + H_B + W^AB) |ψ⟩`, bitwise independent of the worker count.
pub fn apply_mixture_hamiltonian_with(
    h: &MixtureHamiltonian,
    psi: &MixtureStateVector,
    options: &ApplyOptions,
) -> Result<MixtureStateVector> {
    h.check_consistent()?;
    psi.check(&h.space)?;
    let t = options.skip_threshold;
    let mut jobs = intra_jobs(&psi.space, Species::A, &h.a, t)?;
    jobs.extend(intra_jobs(&psi.space, Species::B, &h.b, t)?);
    jobs.extend(inter_jobs(&psi.space, &h.inter, t)?);
    run(psi, jobs, options.workers.max(1))
}

/// `⟨ψ|T|ψ⟩` for a string acting on one species.
pub fn species_expectation(
    psi: &MixtureStateVector,
    species: Species,
    string: &LadderString,
) -> Result<Complex64> {
    let space = &psi.space;
    let s = space.species(species);
    let plan = TermPlan::new(s, string)?;
    let (na, nb) = (space.a().dim(), space.b().dim());
    let amp = &psi.amplitudes;
    let mut acc = ZERO;
    for_each_transition(s, &plan, |o, src, f| {
        let mut part = ZERO;
        match species {
            Species::A => {
                for jb in 0..nb {
                    part += amp[o * nb + jb].conj() * amp[src * nb + jb];
                }
            }
            Species::B => {
                for ja in 0..na {
                    part += amp[ja * nb + o].conj() * amp[ja * nb + src];
                }
            }
        }
        acc += part * f;
    });
    Ok(acc)
}

/// `⟨ψ|H|ψ⟩` for a mixture.
pub fn mixture_energy(h: &MixtureHamiltonian, psi: &MixtureStateVector) -> Result<Complex64> {
    let h_psi = apply_mixture_hamiltonian(h, psi)?;
    psi.dot(&h_psi)
}
