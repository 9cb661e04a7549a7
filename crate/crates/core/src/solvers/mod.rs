//! Krylov solvers built only on operator application and vector algebra.

mod lanczos;
mod sil;
mod tridiag;

use num_complex::Complex64;

use crate::error::Result;
use crate::fockspace::StateVector;
use crate::hamiltonian::HamiltonianSpec;
use crate::kernel::{apply_hamiltonian_with, ApplyOptions};
use crate::mixtures::{apply_mixture_hamiltonian_with, MixtureHamiltonian, MixtureStateVector};
use crate::oracle::DenseOperator;

pub use lanczos::{ground_state, lanczos_ground_state, GroundState, LanczosOptions, KRYLOV_CAP};
pub use sil::{propagate, propagate_operator, PropagationOptions, PropagationResult};
pub use tridiag::{tridiagonal_eigen, TridiagonalEigen};

/// Anything that can be applied to a flat amplitude vector.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// A single-species operator together with its application options.
#[derive(Clone, Copy, Debug)]
pub struct SpecOperator<'a> {
    pub spec: &'a HamiltonianSpec,
    pub options: ApplyOptions,
}

impl<'a> SpecOperator<'a> {
    pub fn new(spec: &'a HamiltonianSpec, options: ApplyOptions) -> Self {
        Self { spec, options }
    }
}

impl LinearOperator for SpecOperator<'_> {
    fn dim(&self) -> usize {
        self.spec.space().dim()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let psi = StateVector::from_amplitudes(self.spec.space(), x.to_vec())?;
        Ok(apply_hamiltonian_with(self.spec, &psi, &self.options)?.into_amplitudes())
    }
}

impl LinearOperator for HamiltonianSpec {
    fn dim(&self) -> usize {
        self.space().dim()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        SpecOperator::new(self, ApplyOptions::default()).apply(x)
    }
}

/// A mixture operator together with its application options.
#[derive(Clone, Copy, Debug)]
pub struct MixtureOperator<'a> {
    pub hamiltonian: &'a MixtureHamiltonian,
    pub options: ApplyOptions,
}

impl<'a> MixtureOperator<'a> {
    pub fn new(hamiltonian: &'a MixtureHamiltonian, options: ApplyOptions) -> Self {
        Self {
            hamiltonian,
            options,
        }
    }
}

impl LinearOperator for MixtureOperator<'_> {
    fn dim(&self) -> usize {
        self.hamiltonian.space().dim()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let psi = MixtureStateVector::from_amplitudes(self.hamiltonian.space(), x.to_vec())?;
        Ok(
            apply_mixture_hamiltonian_with(self.hamiltonian, &psi, &self.options)?
                .into_amplitudes(),
        )
    }
}

impl LinearOperator for MixtureHamiltonian {
    fn dim(&self) -> usize {
        self.space().dim()
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        MixtureOperator::new(self, ApplyOptions::default()).apply(x)
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        DenseOperator::dim(self)
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.matvec(x))
    }
}
