//! Reduced density matrices and expectation values.
//!
//! Every element is a dot product of the incoming state with the image of
//! one operator string, `ρ_kq = ⟨ψ|b†_k b_q|ψ⟩` and
//! `ρ_kslq = ⟨ψ|b†_k b†_s b_l b_q|ψ⟩`. The values are those of the vector as
//! given; normalize first to get physical densities.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::executor::expectations;
use crate::fockspace::{check_same, dot_slice, StateVector};
use crate::hamiltonian::HamiltonianSpec;
use crate::kernel::{apply_hamiltonian, LadderString};
use crate::mixtures::{MixtureStateVector, Species};

/// Orbital count above which the two-body density is written as a sparse
/// coordinate list.
pub const DENSE_TWO_BODY_OUTPUT_MAX_ORBITALS: usize = 8;

/// Entries below this magnitude are left out of sparse listings.
pub const SPARSE_OUTPUT_CUTOFF: f64 = 1e-14;

/// `ρ_kq = ⟨ψ|b†_k b_q|ψ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyDensity {
    orbitals: usize,
    data: Vec<Complex64>,
}

impl OneBodyDensity {
    pub(crate) fn compute(psi: &StateVector, workers: usize) -> Result<Self> {
        let m = psi.space().orbitals();
        let strings: Vec<LadderString> = (1..=m)
            .flat_map(|k| (1..=m).map(move |q| LadderString::one_body(k, q)))
            .collect();
        let data = expectations(psi.space(), &strings, psi.amplitudes(), workers)?;
        Ok(Self { orbitals: m, data })
    }

    pub(crate) fn from_elements(orbitals: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), orbitals * orbitals);
        Self { orbitals, data }
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    /// `ρ_kq`, 1-based.
    pub fn get(&self, k: usize, q: usize) -> Complex64 {
        self.data[(k - 1) * self.orbitals + (q - 1)]
    }

    pub fn trace(&self) -> Complex64 {
        (1..=self.orbitals).map(|k| self.get(k, k)).sum()
    }

    /// `max |ρ_kq − conj(ρ_qk)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = self.orbitals;
        let mut worst = 0.0f64;
        for k in 1..=m {
            for q in k..=m {
                worst = worst.max((self.get(k, q) - self.get(q, k).conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.orbitals, self.orbitals, &self.data)
    }

    /// Eigenvalues of the Hermitian part of `ρ`, largest first.
    pub fn natural_occupations(&self) -> Vec<f64> {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }

    /// Rows `k,q,re,im` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,q,re,im\n");
        for k in 1..=self.orbitals {
            for q in 1..=self.orbitals {
                let v = self.get(k, q);
                let _ = writeln!(out, "{k},{q},{},{}", v.re, v.im);
            }
        }
        out
    }

    /// `{"orbitals", "re", "im", "natural_occupations"}` with row-major
    /// nested arrays.
    pub fn to_json_value(&self) -> Value {
        let m = self.orbitals;
        let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (1..=m)
                .map(|k| (1..=m).map(|q| f(&self.get(k, q))).collect())
                .collect()
        };
        json!({
            "orbitals": m,
            "re": part(|c| c.re),
            "im": part(|c| c.im),
            "natural_occupations": self.natural_occupations(),
        })
    }
}

/// `ρ_kslq = ⟨ψ|b†_k b†_s b_l b_q|ψ⟩`, stored with `q` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyDensity {
    orbitals: usize,
    data: Vec<Complex64>,
}

impl TwoBodyDensity {
    pub(crate) fn compute(psi: &StateVector, workers: usize) -> Result<Self> {
        let m = psi.space().orbitals();
        let mut strings = Vec::with_capacity(m.pow(4));
        for k in 1..=m {
            for s in 1..=m {
                for l in 1..=m {
                    for q in 1..=m {
                        strings.push(LadderString::two_body(k, s, l, q));
                    }
                }
            }
        }
        let data = expectations(psi.space(), &strings, psi.amplitudes(), workers)?;
        Ok(Self { orbitals: m, data })
    }

    pub fn orbitals(&self) -> usize {
        self.orbitals
    }

    #[inline]
    fn slot(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        let m = self.orbitals;
        (((a - 1) * m + (b - 1)) * m + (c - 1)) * m + (d - 1)
    }

    /// `ρ_kslq = ⟨b†_k b†_s b_l b_q⟩`, 1-based.
    pub fn get(&self, k: usize, s: usize, l: usize, q: usize) -> Complex64 {
        self.data[self.slot(k, s, l, q)]
    }

    /// `Σ_{k,s} ⟨b†_k b†_s b_s b_k⟩`, equal to `N(N − 1)` for normalized states.
    pub fn pair_trace(&self) -> Complex64 {
        let m = self.orbitals;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=m {
            for s in 1..=m {
                acc += self.get(k, s, s, k);
            }
        }
        acc
    }

    /// `Σ_s ⟨b†_k b†_s b_s b_q⟩`, equal to `(N − 1) ρ_kq`.
    pub fn partial_trace(&self) -> OneBodyDensity {
        let m = self.orbitals;
        let mut data = vec![Complex64::new(0.0, 0.0); m * m];
        for k in 1..=m {
            for q in 1..=m {
                data[(k - 1) * m + (q - 1)] = (1..=m).map(|s| self.get(k, s, s, q)).sum();
            }
        }
        OneBodyDensity::from_elements(m, data)
    }

    /// Flat copy indexed like the two-body integrals, `[k][s][q][l]` with `l`
    /// fastest, so that `E₂ = ½ Σ W_ksql · P_ksql`.
    pub fn to_physicist(&self) -> Vec<Complex64> {
        self.reorder(|k, s, q, l| self.get(k, s, l, q))
    }

    /// Flat copy in the `[k][q][s][l]` order, pairing creation and
    /// annihilation indices of each particle: `G_kqsl = ⟨b†_k b†_s b_l b_q⟩`.
    pub fn to_chemist(&self) -> Vec<Complex64> {
        self.reorder(|k, q, s, l| self.get(k, s, l, q))
    }

    fn reorder(&self, f: impl Fn(usize, usize, usize, usize) -> Complex64) -> Vec<Complex64> {
        let m = self.orbitals;
        let mut out = Vec::with_capacity(m.pow(4));
        for a in 1..=m {
            for b in 1..=m {
                for c in 1..=m {
                    for d in 1..=m {
                        out.push(f(a, b, c, d));
                    }
                }
            }
        }
        out
    }

    /// Dense `{"layout": "kslq", "re", "im"}` up to eight orbitals, a sparse
    /// `{"entries": [[k, s, l, q, re, im], …]}` list above.
    pub fn to_json_value(&self) -> Value {
        let m = self.orbitals;
        if m <= DENSE_TWO_BODY_OUTPUT_MAX_ORBITALS {
            json!({
                "orbitals": m,
                "layout": "kslq",
                "re": self.data.iter().map(|c| c.re).collect::<Vec<_>>(),
                "im": self.data.iter().map(|c| c.im).collect::<Vec<_>>(),
            })
        } else {
            let mut entries = Vec::new();
            for (i, v) in self.data.iter().enumerate() {
                if v.norm() < SPARSE_OUTPUT_CUTOFF {
                    continue;
                }
                let q = i % m + 1;
                let l = i / m % m + 1;
                let s = i / (m * m) % m + 1;
                let k = i / (m * m * m) + 1;
                entries.push(json!([k, s, l, q, v.re, v.im]));
            }
            json!({ "orbitals": m, "layout": "kslq", "entries": entries })
        }
    }
}

/// `ρ_kq` for every `(k, q)`.
pub fn one_body_density(psi: &StateVector) -> Result<OneBodyDensity> {
    OneBodyDensity::compute(psi, 1)
}

/// `ρ_kslq` for every index quadruple.
pub fn two_body_density(psi: &StateVector) -> Result<TwoBodyDensity> {
    TwoBodyDensity::compute(psi, 1)
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy(spec: &HamiltonianSpec, psi: &StateVector) -> Result<Complex64> {
    check_same(spec.space(), psi.space())?;
    let h_psi = apply_hamiltonian(spec, psi)?;
    Ok(dot_slice(psi.amplitudes(), h_psi.amplitudes()))
}

/// `Σ h_kq ρ_kq + ½ Σ W_ksql ρ_kslq`.
pub fn energy_from_densities(
    spec: &HamiltonianSpec,
    rho1: &OneBodyDensity,
    rho2: &TwoBodyDensity,
) -> Result<Complex64> {
    let m = spec.space().orbitals();
    if rho1.orbitals() != m || rho2.orbitals() != m {
        return Err(Error::SpaceMismatch(
            "density and operator orbital counts differ".into(),
        ));
    }
    let mut e = Complex64::new(0.0, 0.0);
    for ((k, q), h) in spec.one_body().nonzeros() {
        e += h * rho1.get(k, q);
    }
    for ([k, s, q, l], w) in spec.two_body().nonzeros() {
        e += w * 0.5 * rho2.get(k, s, l, q);
    }
    Ok(e)
}

/// Species-resolved one-body densities of a mixture state.
pub fn mixture_densities(psi: &MixtureStateVector) -> Result<(OneBodyDensity, OneBodyDensity)> {
    let one = |species: Species| -> Result<OneBodyDensity> {
        let m = psi.space().species(species).orbitals();
        let mut data = Vec::with_capacity(m * m);
        for k in 1..=m {
            for q in 1..=m {
                let string = LadderString::one_body(k, q);
                data.push(crate::mixtures::species_expectation(psi, species, &string)?);
            }
        }
        Ok(OneBodyDensity::from_elements(m, data))
    };
    Ok((one(Species::A)?, one(Species::B)?))
}

/// JSON summary of a state's densities.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub format: &'static str,
    pub rho1: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho2: Option<Value>,
}

pub const DENSITY_REPORT_FORMAT: &str = "fock-density/1";

impl DensityReport {
    pub fn new(rho1: &OneBodyDensity, rho2: Option<&TwoBodyDensity>) -> Self {
        Self {
            format: DENSITY_REPORT_FORMAT,
            rho1: rho1.to_json_value(),
            rho2: rho2.map(TwoBodyDensity::to_json_value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinadics::OccupationVector;
    use crate::fockspace::Space;
    use crate::hamiltonian::build_bose_hubbard;
    use proptest::prelude::*;

    fn basis(space: &Space, o: &[u32]) -> StateVector {
        StateVector::basis(
            space,
            space.rank(&OccupationVector::new(o.to_vec())).unwrap(),
        )
        .unwrap()
    }

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() <= tol
    }

    #[test]
    fn single_permanent_density() {
        let s = Space::bosons(3, 3).unwrap();
        let rho = one_body_density(&basis(&s, &[3, 0, 0])).unwrap();
        for k in 1..=3 {
            for q in 1..=3 {
                let want = if k == 1 && q == 1 { 3.0 } else { 0.0 };
                assert!(close(rho.get(k, q), want, 1e-15));
            }
        }
        assert_eq!(rho.natural_occupations()[0].round(), 3.0);
    }

    #[test]
    fn single_determinant_density() {
        let s = Space::fermions(2, 4).unwrap();
        let rho = one_body_density(&basis(&s, &[1, 1, 0, 0])).unwrap();
        for k in 1..=4 {
            for q in 1..=4 {
                let want = if k == q && k <= 2 { 1.0 } else { 0.0 };
                assert!(close(rho.get(k, q), want, 1e-15));
            }
        }
    }

    #[test]
    fn one_particle_has_no_pairs() {
        let s = Space::bosons(1, 3).unwrap();
        let rho2 = two_body_density(&StateVector::random(&s, 4)).unwrap();
        assert!(rho2.data.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn number_operator_energy() {
        let s = Space::fermions(3, 5).unwrap();
        let psi = StateVector::random(&s, 8);
        let e = energy(&HamiltonianSpec::number_operator(&s), &psi).unwrap();
        assert!(close(e, 3.0, 1e-12));
    }

    #[test]
    fn double_well_ground_energy() {
        let spec = build_bose_hubbard(1, 2, 0.8, 5.0, false).unwrap();
        let s = spec.space().clone();
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let psi = StateVector::from_amplitudes(&s, vec![amp, amp]).unwrap();
        assert!(close(energy(&spec, &psi).unwrap(), -0.8, 1e-15));
    }

    #[test]
    fn reorder_helpers() {
        let s = Space::fermions(2, 3).unwrap();
        let spec = HamiltonianSpec::random_hermitian(&s, 3);
        let psi = StateVector::random(&s, 3);
        let rho2 = two_body_density(&psi).unwrap();
        let phys = rho2.to_physicist();
        let chem = rho2.to_chemist();
        let m = 3;
        let at = |k: usize, b: usize, c: usize, d: usize| {
            (((k - 1) * m + b - 1) * m + c - 1) * m + d - 1
        };
        let mut e2 = Complex64::new(0.0, 0.0);
        for ([k, s_, q, l], w) in spec.two_body().nonzeros() {
            e2 += w * 0.5 * phys[at(k, s_, q, l)];
            assert_eq!(chem[at(k, q, s_, l)], phys[at(k, s_, q, l)]);
        }
        let mut h0 = spec.clone();
        *h0.one_body_mut() = crate::hamiltonian::OneBodyTable::zeros(3);
        let direct = energy(&h0, &psi).unwrap();
        assert!((direct - e2).norm() < 1e-12);
    }

    #[test]
    fn csv_and_json_shapes() {
        let s = Space::bosons(2, 2).unwrap();
        let psi = basis(&s, &[1, 1]);
        let rho = one_body_density(&psi).unwrap();
        let csv = rho.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().nth(1), Some("1,1,1,0"));
        let v = rho.to_json_value();
        assert_eq!(v["re"][0][0], 1.0);
        assert_eq!(v["natural_occupations"].as_array().unwrap().len(), 2);

        let rho2 = two_body_density(&psi).unwrap();
        assert_eq!(rho2.to_json_value()["re"].as_array().unwrap().len(), 16);
        let wide = Space::fermions(1, 9).unwrap();
        let rho2 = two_body_density(&StateVector::random(&wide, 1)).unwrap();
        assert_eq!(rho2.to_json_value()["entries"].as_array().unwrap().len(), 0);
        let report = serde_json::to_value(DensityReport::new(&rho, None)).unwrap();
        assert_eq!(report["format"], DENSITY_REPORT_FORMAT);
        assert!(report.get("rho2").is_none());
    }

    proptest! {
        #[test]
        fn density_laws(seed in any::<u64>(), boson in any::<bool>()) {
            let s = if boson { Space::bosons(3, 3).unwrap() } else { Space::fermions(3, 5).unwrap() };
            let n = 3.0;
            let psi = StateVector::random(&s, seed);
            let rho = one_body_density(&psi).unwrap();
            prop_assert!(close(rho.trace(), n, 1e-12));
            prop_assert!(rho.hermiticity_deviation() <= 1e-12);
            let occ = rho.natural_occupations();
            let cap = if boson { n } else { 1.0 };
            prop_assert!(occ.iter().all(|&x| x >= -1e-10 && x <= cap + 1e-10));
            let rho2 = two_body_density(&psi).unwrap();
            prop_assert!(close(rho2.pair_trace(), n * (n - 1.0), 1e-10));
            let pt = rho2.partial_trace();
            for k in 1..=s.orbitals() {
                for q in 1..=s.orbitals() {
                    prop_assert!((pt.get(k, q) - rho.get(k, q) * (n - 1.0)).norm() <= 1e-10);
                }
            }
            let spec = HamiltonianSpec::random_hermitian(&s, seed ^ 5);
            let direct = energy(&spec, &psi).unwrap();
            let via = energy_from_densities(&spec, &rho, &rho2).unwrap();
            prop_assert!((direct - via).norm() <= 1e-10 * direct.norm().max(1.0));
            prop_assert!(direct.im.abs() <= 1e-12 * direct.norm().max(1.0));
        }
    }
}
