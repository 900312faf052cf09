//! Dense complex-Hermitian eigensolver (cyclic Jacobi) and small helpers.
//!
//! Jacobi is slower than Householder+QR for large matrices but is simple,
//! backward stable, and fully deterministic, which the reproducibility
//! contract of this crate depends on. Dimensions here stay below ~150.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Largest absolute entry of a complex matrix.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Locate the worst Hermiticity violation, if any: returns
/// `(row, col, |m[r][c] - conj(m[c][r])|)` for the maximizing pair.
pub fn hermiticity_defect(m: &Array2<C64>) -> (usize, usize, f64) {
    let n = m.nrows();
    let mut worst = (0, 0, 0.0);
    for r in 0..n {
        for c in r..n {
            let d = (m[[r, c]] - m[[c, r]].conj()).norm();
            if d > worst.2 {
                worst = (r, c, d);
            }
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in nondecreasing order and the matching orthonormal
/// eigenvectors as the columns of a unitary matrix. The input is symmetrized
/// internally; callers are expected to have validated Hermiticity already.
pub fn eigh(matrix: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigh requires a square matrix");

    // work on the Hermitian average so round-off in the input cannot leak
    // imaginary parts onto the diagonal
    let mut a = Array2::<C64>::zeros((n, n));
    for r in 0..n {
        for c in 0..n {
            a[[r, c]] = 0.5 * (matrix[[r, c]] + matrix[[c, r]].conj());
        }
    }
    let mut v = Array2::<C64>::eye(n);

    let scale = max_abs(&a).max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[[p, q]].norm());
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[[p, q]];
                let habs = h.norm();
                if habs <= tol * 1e-2 {
                    continue;
                }
                let phase = h / habs;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                let rho = (app - aqq) / (2.0 * habs);
                let t = if rho == 0.0 {
                    1.0
                } else {
                    rho.signum() / (rho.abs() + (1.0 + rho * rho).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = C64::new(t * c, 0.0) * phase.conj();

                // rows p, q of A
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk + s.conj() * aqk;
                    a[[q, k]] = -s * apk + c * aqk;
                }
                // columns p, q of A and of V
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp + s * akq;
                    a[[k, q]] = -s.conj() * akp + c * akq;

                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp + s * vkq;
                    v[[k, q]] = -s.conj() * vkp + c * vkq;
                }
                a[[p, q]] = C64::new(0.0, 0.0);
                a[[q, p]] = C64::new(0.0, 0.0);
            }
        }
    }
    if !converged {
        // one final check: the last sweep may have pushed it under tolerance
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[[p, q]].norm());
            }
        }
        if off > tol {
            return Err(Error::EigenNoConvergence(MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[[i, i]].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));

    let values = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut vectors = Array2::<C64>::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        for row in 0..n {
            vectors[[row, col]] = v[[row, i]];
        }
    }

    regauge_degenerate(&values, &mut vectors, scale);
    fix_phases(&mut vectors);
    Ok((values, vectors))
}

/// Deterministic re-orthonormalization (modified Gram-Schmidt in index
/// order) inside each degenerate eigenvalue cluster.
fn regauge_degenerate(values: &Array1<f64>, vectors: &mut Array2<C64>, scale: f64) {
    let n = values.len();
    let gap_tol = 1e-12 * scale.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < gap_tol {
            end += 1;
        }
        if end - start > 1 {
            for j in start..end {
                for k in start..j {
                    let proj: C64 = (0..vectors.nrows())
                        .map(|r| vectors[[r, k]].conj() * vectors[[r, j]])
                        .sum();
                    for r in 0..vectors.nrows() {
                        let vk = vectors[[r, k]];
                        vectors[[r, j]] -= proj * vk;
                    }
                }
                let norm: f64 = (0..vectors.nrows())
                    .map(|r| vectors[[r, j]].norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                for r in 0..vectors.nrows() {
                    vectors[[r, j]] /= norm;
                }
            }
        }
        start = end;
    }
}

/// Fix the global phase of each column so its largest-magnitude component is
/// real and positive (first such component on exact magnitude ties).
fn fix_phases(vectors: &mut Array2<C64>) {
    let (n, cols) = (vectors.nrows(), vectors.ncols());
    for j in 0..cols {
        let mut best = 0;
        let mut best_mag = 0.0f64;
        for r in 0..n {
            let mag = vectors[[r, j]].norm();
            if mag > best_mag {
                best_mag = mag;
                best = r;
            }
        }
        if best_mag > 0.0 {
            let phase = vectors[[best, j]] / best_mag;
            let correction = phase.conj();
            for r in 0..n {
                vectors[[r, j]] *= correction;
            }
            // remove residual imaginary round-off on the anchor component
            vectors[[best, j]] = C64::new(vectors[[best, j]].re, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix() {
        let m = array![
            [c(3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)]
        ];
        let (vals, vecs) = eigh(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        assert!((vecs[[1, 0]].re - 1.0).abs() < 1e-14);
        assert!((vecs[[0, 1]].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = array![
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0)]
        ];
        let (vals, _) = eigh(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_reconstruction() {
        let m = array![
            [c(1.0, 0.0), c(0.3, -0.7), c(0.1, 0.2)],
            [c(0.3, 0.7), c(-2.0, 0.0), c(0.0, 1.1)],
            [c(0.1, -0.2), c(0.0, -1.1), c(0.5, 0.0)]
        ];
        let (vals, vecs) = eigh(&m).unwrap();
        // H v = lambda v for each column
        for j in 0..3 {
            for r in 0..3 {
                let hv: C64 = (0..3).map(|k| m[[r, k]] * vecs[[k, j]]).sum();
                let diff = (hv - vals[j] * vecs[[r, j]]).norm();
                assert!(diff < 1e-12, "residual {diff}");
            }
        }
        // orthonormality
        for i in 0..3 {
            for j in 0..3 {
                let dot: C64 = (0..3).map(|r| vecs[[r, i]].conj() * vecs[[r, j]]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn bit_identical_repeat() {
        let m = array![
            [c(0.2, 0.0), c(0.5, -0.4)],
            [c(0.5, 0.4), c(-0.3, 0.0)]
        ];
        let (v1, w1) = eigh(&m).unwrap();
        let (v2, w2) = eigh(&m).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(w1, w2);
    }
}
