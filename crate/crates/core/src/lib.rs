//! Matrix-free application of second-quantized operators to state vectors
//! in complete Fock spaces of fermions, bosons and their two-species
//! mixtures.
//!
//! ```
//! use fock::prelude::*;
//!
//! // two bosons hopping between two sites, no interaction
//! let spec = build_bose_hubbard(2, 2, 1.0, 0.0, false).unwrap();
//! let (e0, _) = ground_state(&spec, 1e-10, 500, 7).unwrap();
//! assert!((e0 + 2.0).abs() < 1e-10);
//! ```

pub mod combinadics;
pub mod error;
pub mod executor;
pub mod fockspace;
pub mod hamiltonian;
pub mod kernel;
pub mod mixtures;
pub mod observables;
pub mod oracle;
pub mod solvers;

pub use error::{Error, Result};

/// The types and functions most programs need.
pub mod prelude {
    pub use crate::combinadics::{
        boson_rank, boson_to_fermion, boson_unrank, fermion_rank, fermion_to_boson, fermion_unrank,
        Address, FermionBits, HoleVector, OccupationVector,
    };
    pub use crate::error::{Error, Result};
    pub use crate::executor::{parallel_apply, parallel_densities, resolve_workers};
    pub use crate::fockspace::{dot, Space, StateVector, Statistics};
    pub use crate::hamiltonian::{
        build_bose_hubbard, load_integrals, HamiltonianSpec, OneBodyTable, TwoBodyTable,
    };
    pub use crate::kernel::{
        apply_hamiltonian, apply_one_body_term, apply_two_body_term, ApplyOptions, Ladder,
        LadderString,
    };
    pub use crate::mixtures::{
        apply_mixture_hamiltonian, InterSpeciesTable, MixtureHamiltonian, MixtureSpace,
        MixtureStateVector,
    };
    pub use crate::observables::{energy, one_body_density, two_body_density};
    pub use crate::solvers::{ground_state, propagate, LinearOperator};
}

/// The guide's code blocks, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/addressing.md")]
    mod addressing {}
    #[doc = include_str!("../../../book/src/bosons.md")]
    mod bosons {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/hamiltonians.md")]
    mod hamiltonians {}
    #[doc = include_str!("../../../book/src/mixtures.md")]
    mod mixtures {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/parallel.md")]
    mod parallel {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
