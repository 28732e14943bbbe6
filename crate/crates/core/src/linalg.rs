//! Gaussian elimination for the small (k x k) systems of the control solve.

use crate::scalar::Real;

/// Inverse of a square row-major matrix by Gauss-Jordan with partial pivoting.
/// `None` when a pivot vanishes.
pub fn invert<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    let mut lhs = a.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            lhs[r * n + col]
                .abs()
                .partial_cmp(&lhs[s * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        let p = lhs[pivot * n + col];
        if p == T::zero() || !p.is_finite() {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                lhs.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        for j in 0..n {
            lhs[col * n + j] /= p;
            inv[col * n + j] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = lhs[r * n + col];
            if f != T::zero() {
                for j in 0..n {
                    let (lv, iv) = (lhs[col * n + j], inv[col * n + j]);
                    lhs[r * n + j] -= f * lv;
                    inv[r * n + j] -= f * iv;
                }
            }
        }
    }
    Some(inv)
}

pub fn norm_inf<T: Real>(a: &[T], n: usize) -> T {
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), T::max)
}

pub fn mat_vec<T: Real>(a: &[T], n: usize, v: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |s, j| s + a[i * n + j] * v[j]))
        .collect()
}
