//! Dense linear algebra over generic scalars.
//!
//! Systems here are tiny (n <= 4), so plain Gaussian elimination with partial
//! pivoting on the primal values is enough. Derivative slots ride along.

use crate::scalar::Scalar;

/// Solves `A z = b` for row-major `A` of size `n x n`.
///
/// Returns `None` when a pivot vanishes.
pub fn solve<S: Scalar>(a: &[S], b: &[S], n: usize) -> Option<Vec<S>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.re().abs()));
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .re()
                    .abs()
                    .total_cmp(&m[j * n + col].re().abs())
            })
            .unwrap();
        if !(m[piv * n + col].re().abs() > 1e-14 * scale) {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            rhs.swap(piv, col);
        }
        let inv = m[col * n + col].recip();
        for row in (col + 1)..n {
            let f = m[row * n + col] * inv;
            for k in col..n {
                m[row * n + k] = m[row * n + k] - f * m[col * n + k];
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut z = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc = acc - m[row * n + k] * z[k];
        }
        z[row] = acc / m[row * n + row];
    }
    Some(z)
}

/// `b^T A^{-1} b`.
pub fn inverse_quadratic_form<S: Scalar>(a: &[S], b: &[S], n: usize) -> Option<S> {
    let z = solve(a, b, n)?;
    Some(crate::scalar::dot(b, &z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let b = [5.0, 3.0, 7.0];
        let z = solve(&a, &b, 3).unwrap();
        // A z = b
        for r in 0..3 {
            let lhs: f64 = (0..3).map(|k| a[r * 3 + k] * z[k]).sum();
            assert!((lhs - b[r]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_returns_none() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(solve(&a, &[1.0, 1.0], 2).is_none());
    }
}
