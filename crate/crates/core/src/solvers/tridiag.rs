//! Eigen-decomposition of real symmetric tridiagonal matrices by the
//! implicit QL method (the EISPACK `tql2` procedure).

/// Eigenvalues (ascending) and eigenvectors of a symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    /// Column-major `n × n`: eigenvector `j` is `vectors[j*n .. (j+1)*n]`.
    pub vectors: Vec<f64>,
    n: usize,
}

impl TridiagonalEigen {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

/// `diag` has `n` entries, `off` has `n − 1` (the sub/superdiagonal).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> TridiagonalEigen {
    let n = diag.len();
    assert!(
        n == 0 || off.len() + 1 == n,
        "off-diagonal must have n − 1 entries"
    );
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    // z[(row, col)] stored column-major
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[l + 2..] {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let zi = z[i * n + k];
                        let zi1 = z[(i + 1) * n + k];
                        z[(i + 1) * n + k] = s * zi + c * zi1;
                        z[i * n + k] = c * zi - s * zi1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iterations >= 60 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // selection sort keeps eigenvector columns aligned
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for r in 0..n {
                z.swap(i * n + r, k * n + r);
            }
        }
    }
    TridiagonalEigen {
        values: d,
        vectors: z,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_pairs(diag: &[f64], off: &[f64], eig: &TridiagonalEigen) {
        let n = diag.len();
        for j in 0..n {
            let v = eig.vector(j);
            let lam = eig.values[j];
            for i in 0..n {
                let mut tv = diag[i] * v[i];
                if i > 0 {
                    tv += off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += off[i] * v[i + 1];
                }
                assert!((tv - lam * v[i]).abs() < 1e-12, "pair {j} row {i}");
            }
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two() {
        let eig = tridiagonal_eigen(&[0.0, 0.0], &[1.5]);
        assert!((eig.values[0] + 1.5).abs() < 1e-15);
        assert!((eig.values[1] - 1.5).abs() < 1e-15);
        check_pairs(&[0.0, 0.0], &[1.5], &eig);
    }

    #[test]
    fn one_by_one_and_empty() {
        let eig = tridiagonal_eigen(&[4.0], &[]);
        assert_eq!(eig.values, vec![4.0]);
        assert_eq!(eig.vectors, vec![1.0]);
        assert!(tridiagonal_eigen(&[], &[]).is_empty());
    }

    #[test]
    fn free_chain_spectrum() {
        // −2cos(πj/(n+1)) for the open tight-binding chain
        let n = 40;
        let diag = vec![0.0; n];
        let off = vec![-1.0; n - 1];
        let eig = tridiagonal_eigen(&diag, &off);
        let mut want: Vec<f64> = (1..=n)
            .map(|j| -2.0 * (std::f64::consts::PI * j as f64 / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        check_pairs(&diag, &off, &eig);
    }

    #[test]
    fn decoupled_blocks() {
        let diag = [3.0, -1.0, 2.0, 2.0];
        let off = [0.0, 0.5, 0.0];
        let eig = tridiagonal_eigen(&diag, &off);
        check_pairs(&diag, &off, &eig);
        assert!((eig.values[3] - 3.0).abs() < 1e-14);
    }
}
