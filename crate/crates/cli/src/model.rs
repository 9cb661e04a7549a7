//! Loading operators and states, and checking them against the flags.

use std::path::Path;

use fock::combinadics::{Address, OccupationVector};
use fock::fockspace::read_vector;
use fock::fockspace::{Space, StateVector, Statistics};
use fock::hamiltonian::{load_integral_file, HamiltonianSpec, IntegralFile};
use fock::kernel::ApplyOptions;
use fock::mixtures::{read_mixture_vector, MixtureHamiltonian, MixtureSpace, MixtureStateVector};
use fock::oracle::{build_dense, build_dense_mixture, DenseOperator};
use fock::solvers::{LinearOperator, MixtureOperator, SpecOperator};
use fock::{Error, Result};
use num_complex::Complex64;

use crate::args::SpaceArgs;

pub enum Model {
    Single(HamiltonianSpec),
    Mixture(MixtureHamiltonian),
}

pub enum State {
    Single(StateVector),
    Mixture(MixtureStateVector),
}

impl SpaceArgs {
    fn statistics(&self) -> Option<Statistics> {
        if self.fermion {
            Some(Statistics::Fermion)
        } else if self.boson {
            Some(Statistics::Boson)
        } else {
            None
        }
    }

    /// Single-species space from the flags alone.
    pub fn single_space(&self) -> Result<Space> {
        if self.mix {
            return Err(Error::InvalidArgument(
                "this command works on one species".into(),
            ));
        }
        let stats = self
            .statistics()
            .ok_or_else(|| Error::InvalidArgument("--fermion or --boson is required".into()))?;
        let (Some(n), Some(m)) = (self.particles, self.orbitals) else {
            return Err(Error::InvalidArgument("-N and -M are required".into()));
        };
        Space::new(stats, n, m)
    }

    fn check(
        &self,
        what: &str,
        space: &Space,
        stats: Option<Statistics>,
        n: Option<usize>,
        m: Option<usize>,
    ) -> Result<()> {
        let mismatch = |flag: &str, got: String, file: String| {
            Err(Error::InvalidArgument(format!(
                "{flag} {got} disagrees with the {what} in the file ({file})"
            )))
        };
        if let Some(s) = stats.filter(|s| *s != space.statistics()) {
            return mismatch("statistics", s.to_string(), space.to_string());
        }
        if let Some(n) = n.filter(|n| *n != space.particles()) {
            return mismatch("particle number", n.to_string(), space.to_string());
        }
        if let Some(m) = m.filter(|m| *m != space.orbitals()) {
            return mismatch("orbital count", m.to_string(), space.to_string());
        }
        Ok(())
    }

    /// Flags are optional, but any that are given must match the file.
    pub fn check_model(&self, model: &Model) -> Result<()> {
        match model {
            Model::Single(spec) => {
                if self.mix {
                    return Err(Error::InvalidArgument(
                        "--mix given but the file holds one species".into(),
                    ));
                }
                if self.particles_b.is_some() || self.orbitals_b.is_some() {
                    return Err(Error::InvalidArgument("-NB/-MB need a mixture file".into()));
                }
                self.check(
                    "space",
                    spec.space(),
                    self.statistics(),
                    self.particles,
                    self.orbitals,
                )
            }
            Model::Mixture(h) => {
                if self.fermion || self.boson {
                    return Err(Error::InvalidArgument(
                        "the file holds a mixture; use --mix".into(),
                    ));
                }
                let s = h.space();
                self.check(
                    "species A space",
                    s.a(),
                    None,
                    self.particles,
                    self.orbitals,
                )?;
                self.check(
                    "species B space",
                    s.b(),
                    None,
                    self.particles_b,
                    self.orbitals_b,
                )
            }
        }
    }
}

impl Model {
    pub fn load(path: &Path, flags: &SpaceArgs) -> Result<Self> {
        let model = match load_integral_file(path)? {
            IntegralFile::Single(spec) => Model::Single(spec),
            IntegralFile::Mixture(h) => Model::Mixture(h),
        };
        flags.check_model(&model)?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Single(s) => s.space().dim(),
            Model::Mixture(h) => h.space().dim(),
        }
    }

    pub fn operator(&self, workers: usize) -> Box<dyn LinearOperator + '_> {
        let options = ApplyOptions {
            workers,
            ..ApplyOptions::default()
        };
        match self {
            Model::Single(s) => Box::new(SpecOperator::new(s, options)),
            Model::Mixture(h) => Box::new(MixtureOperator::new(h, options)),
        }
    }

    pub fn dense(&self) -> Result<DenseOperator> {
        match self {
            Model::Single(s) => build_dense(s),
            Model::Mixture(h) => build_dense_mixture(h),
        }
    }

    /// Column labels and values of `⟨n_k⟩` for every orbital of every species.
    pub fn occupation_labels(&self) -> Vec<String> {
        match self {
            Model::Single(s) => (1..=s.space().orbitals())
                .map(|k| format!("n{k}"))
                .collect(),
            Model::Mixture(h) => {
                let s = h.space();
                (1..=s.a().orbitals())
                    .map(|k| format!("nA{k}"))
                    .chain((1..=s.b().orbitals()).map(|k| format!("nB{k}")))
                    .collect()
            }
        }
    }

    pub fn occupation_table(&self) -> OccupationTable {
        match self {
            Model::Single(s) => OccupationTable::new(s.space(), None),
            Model::Mixture(h) => OccupationTable::new(h.space().a(), Some(h.space().b())),
        }
    }

    pub fn wrap(&self, amplitudes: Vec<Complex64>) -> Result<State> {
        Ok(match self {
            Model::Single(s) => State::Single(StateVector::from_amplitudes(s.space(), amplitudes)?),
            Model::Mixture(h) => {
                State::Mixture(MixtureStateVector::from_amplitudes(h.space(), amplitudes)?)
            }
        })
    }

    /// Basis state from a configuration literal.
    pub fn basis_state(&self, literal: &str) -> Result<State> {
        match self {
            Model::Single(s) => {
                let j = rank_literal(s.space(), literal)?;
                Ok(State::Single(StateVector::basis(s.space(), j)?))
            }
            Model::Mixture(h) => {
                let (la, lb) = literal.split_once('/').ok_or_else(|| {
                    Error::InvalidArgument("mixture literals take the form A/B, e.g. 10/2,0".into())
                })?;
                let space: &MixtureSpace = h.space();
                let ja = rank_literal(space.a(), la)?;
                let jb = rank_literal(space.b(), lb)?;
                Ok(State::Mixture(MixtureStateVector::basis(space, ja, jb)?))
            }
        }
    }

    pub fn read_state(&self, path: &Path) -> Result<State> {
        let bytes = std::fs::read(path)?;
        let state = if bytes.starts_with(fock::mixtures::MIXTURE_VECTOR_MAGIC) {
            State::Mixture(read_mixture_vector(&mut bytes.as_slice())?)
        } else {
            State::Single(read_vector(&mut bytes.as_slice())?)
        };
        match (self, &state) {
            (Model::Single(s), State::Single(v)) if s.space() == v.space() => Ok(state),
            (Model::Mixture(h), State::Mixture(v)) if h.space() == v.space() => Ok(state),
            _ => Err(Error::SpaceMismatch(format!(
                "vector in {} does not live in the operator's space",
                path.display()
            ))),
        }
    }
}

impl State {
    pub fn amplitudes(&self) -> &[Complex64] {
        match self {
            State::Single(v) => v.amplitudes(),
            State::Mixture(v) => v.amplitudes(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            State::Single(v) => v.to_bytes(),
            State::Mixture(v) => v.to_bytes(),
        }
    }
}

/// Parses `1100`, `|1100⟩`, `2,0,0` or `1,1,0,0` and ranks it.
pub fn parse_literal(space: &Space, text: &str) -> Result<OccupationVector> {
    let body = text
        .trim()
        .trim_start_matches('|')
        .trim_end_matches('⟩')
        .trim_end_matches('>');
    let bad = || Error::InvalidConfiguration(format!("cannot read {text:?} as a configuration"));
    let occ: Vec<u32> = if body.contains(',') {
        body.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    } else {
        body.chars()
            .map(|c| c.to_digit(10).ok_or_else(bad))
            .collect::<Result<_>>()?
    };
    let occ = OccupationVector::new(occ);
    occ.validate(space)?;
    Ok(occ)
}

pub fn rank_literal(space: &Space, text: &str) -> Result<Address> {
    space.rank(&parse_literal(space, text)?)
}

/// Occupations of every configuration, kept for repeated `⟨n_k⟩` sweeps.
pub struct OccupationTable {
    a: Vec<Vec<u32>>,
    b: Option<Vec<Vec<u32>>>,
}

fn occupations(space: &Space) -> Vec<Vec<u32>> {
    space
        .configurations()
        .map(|(_, c)| c.occupations(space.orbitals()).into_inner())
        .collect()
}

impl OccupationTable {
    fn new(a: &Space, b: Option<&Space>) -> Self {
        Self {
            a: occupations(a),
            b: b.map(occupations),
        }
    }

    /// `⟨ψ|n_k|ψ⟩ / ⟨ψ|ψ⟩`, species A orbitals first.
    pub fn expectations(&self, amps: &[Complex64]) -> Vec<f64> {
        let ma = self.a.first().map_or(0, Vec::len);
        let mb = self.b.as_ref().and_then(|b| b.first()).map_or(0, Vec::len);
        let nb = self.b.as_ref().map_or(1, Vec::len);
        let mut out = vec![0.0; ma + mb];
        let mut total = 0.0;
        for (j, c) in amps.iter().enumerate() {
            let p = c.norm_sqr();
            if p == 0.0 {
                continue;
            }
            total += p;
            for (k, n) in self.a[j / nb].iter().enumerate() {
                out[k] += p * f64::from(*n);
            }
            if let Some(b) = &self.b {
                for (k, n) in b[j % nb].iter().enumerate() {
                    out[ma + k] += p * f64::from(*n);
                }
            }
        }
        if total > 0.0 {
            for x in &mut out {
                *x /= total;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let f = Space::fermions(2, 4).unwrap();
        assert_eq!(rank_literal(&f, "1100").unwrap().get(), 1);
        assert_eq!(rank_literal(&f, "|1,1,0,0⟩").unwrap().get(), 1);
        assert!(rank_literal(&f, "1110").is_err());
        assert!(rank_literal(&f, "2000").is_err());
        let b = Space::bosons(2, 3).unwrap();
        assert_eq!(rank_literal(&b, "2,0,0").unwrap().get(), 1);
        assert_eq!(rank_literal(&b, "200").unwrap().get(), 1);
        assert!(rank_literal(&b, "x,0,0").is_err());
    }

    #[test]
    fn mixture_occupations() {
        let a = Space::fermions(1, 2).unwrap();
        let b = Space::bosons(2, 2).unwrap();
        let table = OccupationTable::new(&a, Some(&b));
        let mut amps = vec![Complex64::new(0.0, 0.0); 6];
        // |10⟩ ⊗ |0,2⟩ is the last B configuration of the first A block
        amps[2] = Complex64::new(1.0, 0.0);
        assert_eq!(table.expectations(&amps), vec![1.0, 0.0, 0.0, 2.0]);
    }
}
