//! Deterministic term-parallel evaluation.
//!
//! Terms are dealt into a fixed number of groups, independent of how many
//! workers run. Each group accumulates its terms, in canonical order, into a
//! private partial vector; partials are then summed along a binary tree keyed
//! on group id. The floating-point summation order is therefore the same for
//! any worker count, and so is every bit of the result.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{check_same, dot_slice, Space, StateVector};
use crate::hamiltonian::HamiltonianSpec;
use crate::kernel::{
    accumulate, expectation, hamiltonian_terms, LadderString, Term, TermPlan,
    DEFAULT_SKIP_THRESHOLD,
};
use crate::observables::{OneBodyDensity, TwoBodyDensity};

/// Number of term groups; fixed so the reduction tree never changes shape.
pub const TERM_GROUPS: usize = 16;

/// Environment variable consulted when no worker count is given.
pub const WORKERS_ENV: &str = "FOCK_WORKERS";

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A unit of work that adds its contribution into an output vector.
pub(crate) trait TermJob: Sync {
    /// Estimated cost, used only for load balancing.
    fn weight(&self) -> u64;
    fn apply(&self, src: &[Complex64], out: &mut [Complex64]);
}

/// Static assignment of term indices to groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermPartition {
    groups: Vec<Vec<usize>>,
}

impl TermPartition {
    /// Greedy weighted assignment in canonical term order: each term goes to
    /// the currently lightest group, lowest id on ties.
    pub fn from_weights(weights: &[u64], groups: usize) -> Self {
        let groups = groups.max(1);
        let mut load = vec![0u128; groups];
        let mut out = vec![Vec::new(); groups];
        for (i, &w) in weights.iter().enumerate() {
            let g = (0..groups)
                .min_by_key(|&g| (load[g], g))
                .expect("groups ≥ 1");
            load[g] += w.max(1) as u128;
            out[g].push(i);
        }
        Self { groups: out }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Groups handled by `worker` out of `workers` (round-robin).
    pub fn groups_for_worker(&self, worker: usize, workers: usize) -> Vec<usize> {
        (worker..self.groups.len())
            .step_by(workers.max(1))
            .collect()
    }
}

fn add_into(a: Option<Vec<Complex64>>, b: Option<Vec<Complex64>>) -> Option<Vec<Complex64>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut a), Some(b)) => {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            Some(a)
        }
    }
}

/// Sum of leaves `lo..hi` along the fixed binary tree.
fn tree_sum(
    lo: usize,
    hi: usize,
    leaf: &mut dyn FnMut(usize) -> Option<Vec<Complex64>>,
) -> Option<Vec<Complex64>> {
    if hi - lo == 1 {
        return leaf(lo);
    }
    let mid = lo + (hi - lo) / 2;
    let left = tree_sum(lo, mid, leaf);
    let right = tree_sum(mid, hi, leaf);
    add_into(left, right)
}

fn run_group<J: TermJob>(
    jobs: &[J],
    members: &[usize],
    src: &[Complex64],
    dim: usize,
) -> Option<Vec<Complex64>> {
    if members.is_empty() {
        return None;
    }
    let mut out = vec![ZERO; dim];
    for &i in members {
        jobs[i].apply(src, &mut out);
    }
    Some(out)
}

/// Sum of all job contributions, bitwise independent of `workers`.
pub(crate) fn run_jobs<J: TermJob>(
    jobs: &[J],
    src: &[Complex64],
    dim: usize,
    workers: usize,
) -> Vec<Complex64> {
    let weights: Vec<u64> = jobs.iter().map(TermJob::weight).collect();
    let partition = TermPartition::from_weights(&weights, TERM_GROUPS);
    let groups = partition.groups();
    let workers = workers.clamp(1, groups.len());

    let result = if workers == 1 {
        // evaluate leaves lazily so at most log₂(G) partials are alive
        tree_sum(0, groups.len(), &mut |g| {
            run_group(jobs, &groups[g], src, dim)
        })
    } else {
        let mut partials: Vec<Option<Vec<Complex64>>> = vec![None; groups.len()];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let mine = partition.groups_for_worker(w, workers);
                    scope.spawn(move || {
                        mine.into_iter()
                            .map(|g| (g, run_group(jobs, &groups[g], src, dim)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (g, v) in h.join().expect("worker panicked") {
                    partials[g] = v;
                }
            }
        });
        tree_sum(0, groups.len(), &mut |g| partials[g].take())
    };
    result.unwrap_or_else(|| vec![ZERO; dim])
}

struct PlannedTerm<'a> {
    space: &'a Space,
    plan: TermPlan,
    coefficient: Complex64,
}

impl TermJob for PlannedTerm<'_> {
    fn weight(&self) -> u64 {
        self.plan.reach(self.space)
    }

    fn apply(&self, src: &[Complex64], out: &mut [Complex64]) {
        accumulate(self.space, &self.plan, self.coefficient, src, out);
    }
}

/// Applies a list of single-species terms.
pub(crate) fn apply_terms(
    space: &Space,
    terms: &[Term],
    src: &[Complex64],
    workers: usize,
) -> Result<Vec<Complex64>> {
    let jobs = terms
        .iter()
        .map(|t| {
            Ok(PlannedTerm {
                space,
                plan: TermPlan::new(space, &t.string)?,
                coefficient: t.coefficient,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(run_jobs(&jobs, src, space.dim(), workers))
}

/// `H |ψ⟩` evaluated by `workers` threads; bitwise equal for every count.
pub fn parallel_apply(
    spec: &HamiltonianSpec,
    psi: &StateVector,
    workers: usize,
) -> Result<StateVector> {
    if workers == 0 {
        return Err(Error::InvalidArgument(
            "at least one worker is required".into(),
        ));
    }
    check_same(spec.space(), psi.space())?;
    let terms = hamiltonian_terms(spec, DEFAULT_SKIP_THRESHOLD);
    let out = apply_terms(psi.space(), &terms, psi.amplitudes(), workers)?;
    StateVector::from_amplitudes(psi.space(), out)
}

/// `⟨ψ|T_i|ψ⟩` for every string, split round-robin across workers. Each
/// element is computed by one worker alone, so the values do not depend on
/// the worker count.
pub(crate) fn expectations(
    space: &Space,
    strings: &[LadderString],
    psi: &[Complex64],
    workers: usize,
) -> Result<Vec<Complex64>> {
    let plans = strings
        .iter()
        .map(|s| TermPlan::new(space, s))
        .collect::<Result<Vec<_>>>()?;
    let workers = workers.clamp(1, plans.len().max(1));
    if workers == 1 {
        return Ok(plans.iter().map(|p| expectation(space, p, psi)).collect());
    }
    let mut out = vec![ZERO; plans.len()];
    std::thread::scope(|scope| {
        let plans = &plans;
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..plans.len())
                        .step_by(workers)
                        .map(|i| (i, expectation(space, &plans[i], psi)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                out[i] = v;
            }
        }
    });
    Ok(out)
}

/// One- and two-body densities plus `⟨ψ|H|ψ⟩`, all bitwise independent of
/// `workers`.
pub fn parallel_densities(
    spec: &HamiltonianSpec,
    psi: &StateVector,
    workers: usize,
) -> Result<(OneBodyDensity, TwoBodyDensity, Complex64)> {
    if workers == 0 {
        return Err(Error::InvalidArgument(
            "at least one worker is required".into(),
        ));
    }
    check_same(spec.space(), psi.space())?;
    let rho1 = OneBodyDensity::compute(psi, workers)?;
    let rho2 = TwoBodyDensity::compute(psi, workers)?;
    let h_psi = parallel_apply(spec, psi, workers)?;
    let energy = dot_slice(psi.amplitudes(), h_psi.amplitudes());
    Ok((rho1, rho2, energy))
}

/// Worker count: an explicit value wins, then `FOCK_WORKERS`, then 1.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    resolve_workers_from(flag, std::env::var(WORKERS_ENV).ok().as_deref())
}

pub(crate) fn resolve_workers_from(flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(text)) if !text.trim().is_empty() => text.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{WORKERS_ENV}={text:?} is not a worker count"))
        })?,
        _ => 1,
    };
    if n == 0 {
        return Err(Error::InvalidArgument(
            "at least one worker is required".into(),
        ));
    }
    Ok(n)
}
