//! Independent reference implementations the oracle tests compare against.
//! Everything here is deliberately naive: dense Gaussian elimination, a
//! textbook Kronecker product and explicit vectorization, sharing no code
//! with the library under test.

use ndarray::Array2;

/// Solves `A x = b` for dense square `A` by Gaussian elimination with
/// partial pivoting. Panics on a singular system; oracle use only.
pub fn dense_solve(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a[[i, j]];
        }
        m[i][n] = b[i];
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        assert!(m[pivot][col].abs() > 1e-12, "singular system in oracle");
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Kronecker product by the index definition:
/// `out[i*p + k, j*q + l] = a[i, j] * b[k, l]` for `b` of shape `p x q`.
pub fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = a[[i, j]] * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Column-major vectorization (stack the columns).
pub fn vec_cm(a: &Array2<f64>) -> Vec<f64> {
    let (rows, cols) = a.dim();
    let mut out = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            out.push(a[[r, c]]);
        }
    }
    out
}

/// Inverse of [`vec_cm`].
pub fn unvec_cm(v: &[f64], rows: usize, cols: usize) -> Array2<f64> {
    assert_eq!(v.len(), rows * cols);
    Array2::from_shape_fn((rows, cols), |(r, c)| v[c * rows + r])
}
