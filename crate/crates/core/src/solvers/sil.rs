//! Short iterative Lanczos propagation, `ψ(t + τ) ≈ ‖ψ‖ V exp(−iTτ) e₁`.
//!
//! Every step builds a fresh Krylov space of dimension `m` from the current
//! state. The local error is bounded by `τ^m/m! · Π β_j`, which also fixes
//! the largest admissible step, `τ_max = (tol · m! / Π β_j)^{1/m}`. Each
//! output interval `dt` is covered by as many such steps as that bound
//! requires.

use num_complex::Complex64;

use super::tridiag::tridiagonal_eigen;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::fockspace::{axpy_slice, dot_slice, norm_sqr, StateVector};
use crate::hamiltonian::HamiltonianSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub t_final: f64,
    /// Output interval.
    pub dt: f64,
    pub krylov_dim: usize,
    /// Bound on the local error of each Krylov step.
    pub err_tol: f64,
    /// Smallest admissible step; `None` means `dt · 1e-6`.
    pub min_dt: Option<f64>,
    /// Keep the state at every output time.
    pub snapshots: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: 0.1,
            krylov_dim: 15,
            err_tol: 1e-12,
            min_dt: None,
            snapshots: false,
        }
    }
}

/// Time series recorded at `t = 0, dt, 2dt, …, t_final`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub energies: Vec<f64>,
    /// Sum of the step error bounds accumulated up to each output time.
    pub error_estimates: Vec<f64>,
    /// Whatever the caller's observer returned at each output time.
    pub observables: Vec<Vec<f64>>,
    pub snapshots: Vec<Vec<Complex64>>,
    pub final_state: Vec<Complex64>,
    pub steps: usize,
    pub matvecs: usize,
}

struct Krylov {
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `ln Π β_j` over all `m` off-diagonals including the trailing one;
    /// `None` after a happy breakdown.
    log_beta_product: Option<f64>,
    norm: f64,
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

fn build(
    op: &dyn LinearOperator,
    psi: &[Complex64],
    m: usize,
    matvecs: &mut usize,
) -> Result<Krylov> {
    let norm = norm_sqr(psi).sqrt();
    let mut v0 = psi.to_vec();
    for c in &mut v0 {
        *c /= norm;
    }
    let mut k = Krylov {
        basis: vec![v0],
        alpha: Vec::with_capacity(m),
        beta: Vec::with_capacity(m),
        log_beta_product: Some(0.0),
        norm,
    };
    let mut scale = 0.0f64;
    for j in 0..m {
        let mut w = op.apply(&k.basis[j])?;
        *matvecs += 1;
        let a = dot_slice(&k.basis[j], &w).re;
        k.alpha.push(a);
        axpy_slice(Complex64::new(-a, 0.0), &k.basis[j], &mut w);
        if j > 0 {
            axpy_slice(Complex64::new(-k.beta[j - 1], 0.0), &k.basis[j - 1], &mut w);
        }
        // the subspace is rebuilt every step, so local re-orthogonalization
        // keeps it clean without any cost carried between steps
        for v in &k.basis {
            let c = dot_slice(v, &w);
            axpy_slice(-c, v, &mut w);
        }
        let b = norm_sqr(&w).sqrt();
        scale = scale.max(a.abs()).max(b);
        if b <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            k.log_beta_product = None;
            break;
        }
        if let Some(p) = k.log_beta_product.as_mut() {
            *p += b.ln();
        }
        if j + 1 == m {
            break;
        }
        k.beta.push(b);
        for c in &mut w {
            *c /= b;
        }
        k.basis.push(w);
    }
    Ok(k)
}

impl Krylov {
    fn m(&self) -> usize {
        self.alpha.len()
    }

    /// Largest step with error bound ≤ `tol`; infinite after breakdown.
    fn max_step(&self, tol: f64) -> f64 {
        match self.log_beta_product {
            None => f64::INFINITY,
            Some(lp) => {
                let m = self.m() as f64;
                ((tol.ln() + ln_factorial(self.m()) - lp) / m).exp()
            }
        }
    }

    fn error_bound(&self, tau: f64) -> f64 {
        match self.log_beta_product {
            None => 0.0,
            Some(lp) => (self.m() as f64 * tau.ln() - ln_factorial(self.m()) + lp).exp(),
        }
    }

    fn advance(&self, tau: f64) -> Vec<Complex64> {
        let m = self.m();
        let eig = tridiagonal_eigen(&self.alpha, &self.beta[..m - 1]);
        // c = Z exp(−iΛτ) Zᵀ e₁
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for (j, &lam) in eig.values.iter().enumerate() {
            let z = eig.vector(j);
            let w = Complex64::new(0.0, -lam * tau).exp() * z[0];
            for (ci, zi) in c.iter_mut().zip(z) {
                *ci += w * *zi;
            }
        }
        let n = self.basis[0].len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (v, ci) in self.basis.iter().zip(&c) {
            axpy_slice(ci * self.norm, v, &mut out);
        }
        out
    }
}

/// Propagates `psi0` under `exp(−iHt)`, calling `observe(t, ψ)` at each
/// output time.
pub fn propagate_operator(
    op: &dyn LinearOperator,
    psi0: &[Complex64],
    options: &PropagationOptions,
    mut observe: impl FnMut(f64, &[Complex64]) -> Vec<f64>,
) -> Result<PropagationResult> {
    let o = options;
    if psi0.len() != op.dim() {
        return Err(Error::SpaceMismatch(format!(
            "{}-dimensional state for a {}-dimensional operator",
            psi0.len(),
            op.dim()
        )));
    }
    if o.dt.is_nan() || o.dt <= 0.0 || !o.t_final.is_finite() || o.t_final < 0.0 {
        return Err(Error::InvalidArgument(
            "need dt > 0 and a finite t_final ≥ 0".into(),
        ));
    }
    if o.krylov_dim < 1 || o.err_tol.is_nan() || o.err_tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "need krylov_dim ≥ 1 and err_tol > 0".into(),
        ));
    }
    let min_dt = o.min_dt.unwrap_or(o.dt * 1e-6);
    let m = o.krylov_dim.min(op.dim());
    let intervals = ((o.t_final / o.dt) - 1e-9).ceil().max(0.0) as usize;

    let mut res = PropagationResult::default();
    let mut psi = psi0.to_vec();
    let mut t = 0.0f64;
    let mut err_sum = 0.0f64;
    let grid_time = |i: usize| {
        if i >= intervals {
            o.t_final
        } else {
            i as f64 * o.dt
        }
    };
    for i in 0..=intervals {
        let norm = norm_sqr(&psi).sqrt();
        res.times.push(t);
        res.norms.push(norm);
        res.energies.push(0.0);
        res.error_estimates.push(err_sum);
        res.observables.push(observe(t, &psi));
        if o.snapshots {
            res.snapshots.push(psi.clone());
        }
        if norm == 0.0 {
            t = if i == intervals { t } else { grid_time(i + 1) };
            continue;
        }
        if i == intervals {
            let h = op.apply(&psi)?;
            res.matvecs += 1;
            res.energies[i] = dot_slice(&psi, &h).re / (norm * norm);
            break;
        }
        let t_next = grid_time(i + 1);
        let mut first = true;
        while t < t_next {
            let k = build(op, &psi, m, &mut res.matvecs)?;
            if first {
                // α₀ is the Rayleigh quotient of the state at this grid time
                res.energies[i] = k.alpha[0];
                first = false;
            }
            let remaining = t_next - t;
            let tau_max = k.max_step(o.err_tol);
            if tau_max < remaining && tau_max < min_dt {
                return Err(Error::StepFailure {
                    time: t,
                    dt: tau_max,
                    estimate: k.error_bound(min_dt.min(remaining)),
                });
            }
            let tau = remaining.min(tau_max);
            psi = k.advance(tau);
            err_sum += k.error_bound(tau);
            res.steps += 1;
            t = if tau == remaining { t_next } else { t + tau };
        }
    }
    res.final_state = psi;
    Ok(res)
}

/// `exp(−iHt) ψ₀` sampled at the output grid, with the site occupations
/// `⟨n_k⟩` as observables.
pub fn propagate(
    spec: &HamiltonianSpec,
    psi0: &StateVector,
    t_final: f64,
    dt: f64,
    krylov_dim: usize,
    err_tol: f64,
) -> Result<PropagationResult> {
    let options = PropagationOptions {
        t_final,
        dt,
        krylov_dim,
        err_tol,
        ..PropagationOptions::default()
    };
    let space = spec.space().clone();
    crate::fockspace::check_same(&space, psi0.space())?;
    let mut failure = None;
    let result = propagate_operator(spec, psi0.amplitudes(), &options, |_, amps| {
        site_occupations(&space, amps).unwrap_or_else(|e| {
            failure = Some(e);
            Vec::new()
        })
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

/// `⟨ψ|n_k|ψ⟩ / ⟨ψ|ψ⟩` for every orbital.
pub(crate) fn site_occupations(
    space: &crate::fockspace::Space,
    amps: &[Complex64],
) -> Result<Vec<f64>> {
    let norm = norm_sqr(amps);
    let mut out = vec![0.0; space.orbitals()];
    if norm == 0.0 {
        return Ok(out);
    }
    for (j, cfg) in space.configurations() {
        let p = amps[j.offset()].norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (k, n) in cfg
            .occupations(space.orbitals())
            .as_slice()
            .iter()
            .enumerate()
        {
            out[k] += p * f64::from(*n);
        }
    }
    for x in &mut out {
        *x /= norm;
    }
    Ok(out)
}
