//! Self-contained dense symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by the implicit-shift
//! QL iteration, in the EISPACK `tred2`/`tql2` lineage. Eigenvalues come back
//! ascending; eigenvectors are the columns of an orthogonal matrix. The
//! decomposition certifies itself: reconstruction and orthogonality residuals
//! are computed on every vector-producing call and a violation is an error,
//! never a silent return.

use crate::error::{Error, Result};
use crate::matrix::{dot, Mat};
use crate::operator::SymmetricOperator;

/// Hard cap on implicit-shift iterations per eigenvalue.
const MAX_QL_ITERATIONS: usize = 64;

/// Residual tolerance scale: `residual <= 1e-10 * (1 + max|M|)`.
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat,
    residual: f64,
    orthogonality_residual: f64,
}

impl EigenDecomposition {
    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthogonal matrix whose k-th column is the k-th eigenvector.
    pub fn eigenvectors(&self) -> &Mat {
        &self.eigenvectors
    }

    /// `max |M - V diag(lambda) V^T|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `max |V^T V - I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.orthogonality_residual
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Functional calculus: builds `f(M) = V diag(f(lambda)) V^T`, exactly
    /// symmetric by construction.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> SymmetricOperator {
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        SymmetricOperator::from_mat_mirroring(weighted_recombine(&self.eigenvectors, &weights))
    }
}

/// `V diag(w) V^T`, upper triangle computed and mirrored.
fn weighted_recombine(v: &Mat, weights: &[f64]) -> Mat {
    let n = v.rows();
    let mut scaled = v.clone();
    for i in 0..n {
        for (k, &w) in weights.iter().enumerate() {
            scaled[(i, k)] *= w;
        }
    }
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            out[(i, j)] = dot(scaled.row(i), v.row(j));
        }
    }
    out.mirror_upper()
}

/// Full eigendecomposition of a symmetric operator.
pub fn eigh(op: &SymmetricOperator) -> Result<EigenDecomposition> {
    if !op.is_symmetric() {
        return Err(Error::NotSymmetric {
            max_asymmetry: op.mat().asymmetry(),
        });
    }
    let n = op.dim();
    let mut work = op.mat().clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut work, &mut d, &mut e, true);
    ql_implicit_shift(&mut d, &mut e, Some(&mut work))?;
    let (eigenvalues, eigenvectors) = sort_pairs(d, work);

    let recombined = weighted_recombine(&eigenvectors, &eigenvalues);
    let residual = recombined.max_abs_diff(op.mat());
    let gram = eigenvectors.transpose().matmul(&eigenvectors);
    let orthogonality_residual = gram.max_abs_diff(&Mat::identity(n));

    let tolerance = RESIDUAL_TOL * (1.0 + op.mat().max_abs());
    if residual > tolerance || orthogonality_residual > RESIDUAL_TOL {
        return Err(Error::ResidualTooLarge {
            residual: residual.max(orthogonality_residual),
            tolerance,
        });
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        residual,
        orthogonality_residual,
    })
}

/// Eigenvalues only, ascending. Skips accumulation and residual checks, so it
/// is the right call for large spectrum scans.
pub fn eigvalsh(op: &SymmetricOperator) -> Result<Vec<f64>> {
    if !op.is_symmetric() {
        return Err(Error::NotSymmetric {
            max_asymmetry: op.mat().asymmetry(),
        });
    }
    let n = op.dim();
    let mut work = op.mat().clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut work, &mut d, &mut e, false);
    ql_implicit_shift(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Spectral norm `max |lambda|` of a symmetric operator.
pub fn spectral_norm(op: &SymmetricOperator) -> Result<f64> {
    let ev = eigvalsh(op)?;
    Ok(ev.iter().fold(0.0, |m, v| m.max(v.abs())))
}

fn sort_pairs(d: Vec<f64>, z: Mat) -> (Vec<f64>, Mat) {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let eigenvalues = order.iter().map(|&i| d[i]).collect();
    let eigenvectors = z.select_columns(&order);
    (eigenvalues, eigenvectors)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// On return `d` holds the diagonal and `e[1..]` the subdiagonal. With
/// `accumulate` the matrix is overwritten by the orthogonal transform `Q`
/// with `Q^T A Q` tridiagonal; otherwise its contents are scratch.
fn tridiagonalize(a: &mut Mat, d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = a.rows();
    if n == 0 {
        return;
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    if accumulate {
                        a[(j, i)] = a[(i, j)] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * a[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    if accumulate {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a[(i, k)] * a[(k, j)];
                    }
                    for k in 0..i {
                        a[(k, j)] -= g * a[(k, i)];
                    }
                }
            }
            d[i] = a[(i, i)];
            a[(i, i)] = 1.0;
            for j in 0..i {
                a[(j, i)] = 0.0;
                a[(i, j)] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a[(i, i)];
        }
    }
}

/// QL iteration with implicit Wilkinson shifts on a tridiagonal matrix.
/// Rotations are applied to the columns of `z` when given.
fn ql_implicit_shift(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Mat>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    // Split threshold scaled by the whole matrix, not by neighboring
    // entries: tree spectra carry large clusters of zero eigenvalues, whose
    // subdiagonals bottom out at the roundoff floor of the global scale and
    // never pass a purely local test.
    let norm_scale = (0..n).map(|i| d[i].abs() + e[i].abs()).fold(0.0, f64::max);
    let threshold = f64::EPSILON * norm_scale;

    for l in 0..n {
        let mut iterations = 0;
        loop {
            // Split point: first negligible subdiagonal entry at or after l.
            let mut m = l;
            while m < n - 1 {
                if e[m].abs() <= threshold {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence {
                    iterations: MAX_QL_ITERATIONS,
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SplitMix64;

    fn random_symmetric(n: usize, rng: &mut SplitMix64) -> SymmetricOperator {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = rng.next_signed();
            }
        }
        SymmetricOperator::from_mat(m.mirror_upper()).unwrap()
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let id = SymmetricOperator::identity(5);
        let ev = eigvalsh(&id).unwrap();
        for v in ev {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_swap_has_plus_minus_one() {
        let op =
            SymmetricOperator::from_mat(Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let ev = eigvalsh(&op).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn residual_bounds_hold_for_random_matrices() {
        let mut rng = SplitMix64::new(0x5eed);
        for n in [1, 2, 3, 5, 17, 64, 193, 512] {
            let op = random_symmetric(n, &mut rng);
            let decomp = eigh(&op).unwrap();
            let tol = 1e-10 * (1.0 + op.mat().max_abs());
            assert!(decomp.residual() <= tol, "n={n}: {}", decomp.residual());
            assert!(
                decomp.orthogonality_residual() <= 1e-10,
                "n={n}: {}",
                decomp.orthogonality_residual()
            );
        }
    }

    #[test]
    fn eigvalsh_matches_eigh_eigenvalues() {
        let mut rng = SplitMix64::new(42);
        let op = random_symmetric(40, &mut rng);
        let values_only = eigvalsh(&op).unwrap();
        let full = eigh(&op).unwrap();
        for (a, b) in values_only.iter().zip(full.eigenvalues()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn apply_function_squares_the_operator() {
        let mut rng = SplitMix64::new(9);
        let op = random_symmetric(12, &mut rng);
        let sq = eigh(&op).unwrap().apply_function(|x| x * x);
        let direct = op.mat().matmul(op.mat());
        assert!(sq.mat().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn rejects_non_symmetric_input() {
        let m = Mat::from_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(SymmetricOperator::from_mat(m).is_err());
    }

    #[test]
    fn spectral_norm_of_diagonal_is_max_abs() {
        let op = SymmetricOperator::diagonal(&[-3.0, 1.0, 2.0]);
        assert!((spectral_norm(&op).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn handles_degenerate_eigenvalues() {
        // diag(2, 2, 2) plus a rank-one bump.
        let mut m = Mat::identity(3).scale(2.0);
        m[(0, 1)] = 1e-3;
        m[(1, 0)] = 1e-3;
        let op = SymmetricOperator::from_mat(m).unwrap();
        let ev = eigvalsh(&op).unwrap();
        assert!((ev[0] - (2.0 - 1e-3)).abs() < 1e-12);
        assert!((ev[1] - 2.0).abs() < 1e-12);
        assert!((ev[2] - (2.0 + 1e-3)).abs() < 1e-12);
    }
}
