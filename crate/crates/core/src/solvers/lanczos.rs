//! Restarted Lanczos for the lowest eigenpair.
//!
//! Each cycle grows a Krylov basis with full re-orthogonalization (two
//! Gram-Schmidt passes), watches the Ritz residual estimate `β·|y_last|`, and
//! confirms convergence with the true residual `‖Hx − θx‖`. A cycle that
//! reaches the basis cap restarts from its best Ritz vector.

use num_complex::Complex64;

use super::tridiag::tridiagonal_eigen;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::fockspace::{axpy_slice, dot_slice, norm_sqr, random_amplitudes, StateVector};
use crate::hamiltonian::HamiltonianSpec;

/// Largest Krylov basis kept before a restart.
pub const KRYLOV_CAP: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Required `‖Hx − Ex‖` for a unit vector `x`.
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    pub seed: u64,
    pub krylov_cap: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            seed: 0,
            krylov_cap: KRYLOV_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    /// Unit-norm eigenvector.
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub matvecs: usize,
    pub restarts: usize,
}

fn scale(x: &mut [Complex64], a: f64) {
    for c in x {
        *c *= a;
    }
}

/// Lowest eigenpair of a Hermitian operator.
pub fn lanczos_ground_state(
    op: &dyn LinearOperator,
    options: &LanczosOptions,
) -> Result<GroundState> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("empty space".into()));
    }
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let cap = options.krylov_cap.clamp(1, n);
    let mut start = random_amplitudes(n, options.seed);
    let mut matvecs = 0usize;
    let mut restarts = 0usize;
    let mut best: Option<(f64, f64, Vec<Complex64>)> = None;

    loop {
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cap);
        let mut alpha: Vec<f64> = Vec::with_capacity(cap);
        let mut beta: Vec<f64> = Vec::with_capacity(cap);
        let nrm = norm_sqr(&start).sqrt();
        scale(&mut start, 1.0 / nrm);
        basis.push(start.clone());
        let mut scale_est = 0.0f64;

        // grow until the Ritz estimate, breakdown or the cap says stop
        let (theta, y) = loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j])?;
            matvecs += 1;
            let a = dot_slice(&basis[j], &w).re;
            alpha.push(a);
            axpy_slice(Complex64::new(-a, 0.0), &basis[j], &mut w);
            if j > 0 {
                axpy_slice(Complex64::new(-beta[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot_slice(v, &w);
                    axpy_slice(-c, v, &mut w);
                }
            }
            let b = norm_sqr(&w).sqrt();
            scale_est = scale_est.max(a.abs()).max(b);

            let eig = tridiagonal_eigen(&alpha, &beta);
            let y = eig.vector(0).to_vec();
            let estimate = b * y[j].abs();
            let breakdown = b <= 1e-13 * scale_est.max(f64::MIN_POSITIVE);
            if estimate <= 0.1 * options.tol
                || breakdown
                || basis.len() == cap
                || matvecs >= options.max_iter
            {
                break (eig.values[0], y);
            }
            beta.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(w);
        };

        // Ritz vector and its true residual
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (v, &c) in basis.iter().zip(&y) {
            axpy_slice(Complex64::new(c, 0.0), v, &mut x);
        }
        let xn = norm_sqr(&x).sqrt();
        scale(&mut x, 1.0 / xn);
        let mut r = op.apply(&x)?;
        matvecs += 1;
        let theta = {
            // Rayleigh quotient of the normalized Ritz vector
            let rq = dot_slice(&x, &r).re;
            if rq.is_finite() {
                rq
            } else {
                theta
            }
        };
        axpy_slice(Complex64::new(-theta, 0.0), &x, &mut r);
        let residual = norm_sqr(&r).sqrt();

        if best.as_ref().is_none_or(|b| residual < b.1) {
            best = Some((theta, residual, x.clone()));
        }
        if residual <= options.tol {
            return Ok(GroundState {
                energy: theta,
                vector: x,
                residual,
                matvecs,
                restarts,
            });
        }
        if matvecs >= options.max_iter {
            return Err(Error::NoConvergence {
                matvecs,
                residual: best.map_or(f64::INFINITY, |b| b.1),
            });
        }
        restarts += 1;
        start = x;
    }
}

/// Lowest eigenpair of `H`; the returned energy and vector satisfy
/// `‖Hψ − Eψ‖ ≤ tol`.
pub fn ground_state(
    spec: &HamiltonianSpec,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(f64, StateVector)> {
    let options = LanczosOptions {
        tol,
        max_iter,
        seed,
        ..LanczosOptions::default()
    };
    let gs = lanczos_ground_state(spec, &options)?;
    Ok((
        gs.energy,
        StateVector::from_amplitudes(spec.space(), gs.vector)?,
    ))
}
