//! Central finite differences.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Step used for coordinate `v`: `FD_STEP * max(1, |v|)`.
#[inline]
pub fn fd_step<T: Real>(v: T) -> T {
    T::lit(T::FD_STEP) * v.abs().max(T::one())
}

/// Gradient of `f` at `v` by central differences.
pub fn central_gradient<T, F>(f: F, v: &[T]) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> T,
{
    let mut probe = v.to_vec();
    let mut grad = Vec::with_capacity(v.len());
    for j in 0..v.len() {
        let h = fd_step(v[j]);
        probe[j] = v[j] + h;
        let fp = f(&probe);
        probe[j] = v[j] - h;
        let fm = f(&probe);
        probe[j] = v[j];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite {
                what: format!("function evaluation near coordinate {j}"),
            });
        }
        // the realized step, not the nominal one
        let span = (v[j] + h) - (v[j] - h);
        grad.push((fp - fm) / span);
    }
    Ok(grad)
}

/// Partial derivatives of a vector-valued map: `out[j]` is `d f / d v_j`.
pub(crate) fn central_jacobian_columns<T, F>(f: F, v: &[T], rel_step: f64) -> Result<Vec<Vec<T>>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let mut probe = v.to_vec();
    let mut cols = Vec::with_capacity(v.len());
    for j in 0..v.len() {
        let h = T::lit(rel_step) * v[j].abs().max(T::one());
        probe[j] = v[j] + h;
        let fp = f(&probe)?;
        probe[j] = v[j] - h;
        let fm = f(&probe)?;
        probe[j] = v[j];
        let span = (v[j] + h) - (v[j] - h);
        cols.push(fp.iter().zip(&fm).map(|(p, m)| (*p - *m) / span).collect());
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_at_three() {
        let g = central_gradient(|v: &[f64]| v[0] * v[0], &[3.0]).unwrap();
        assert!((g[0] - 6.0).abs() <= 1e-8, "{g:?}");
    }

    #[test]
    fn constant_has_zero_gradient() {
        let g = central_gradient(|_: &[f64]| 4.25, &[1.0, -7.0, 1e3]).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn non_finite_is_error() {
        let r = central_gradient(|v: &[f64]| v[0].sqrt(), &[0.0]);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    proptest! {
        // quadratic q(v) = v.A v / 2 + b.v + c, gradient A v + b (A symmetric)
        #[test]
        fn quadratics_are_differenced_accurately(
            a in proptest::collection::vec(-3.0f64..3.0, 9),
            b in proptest::collection::vec(-3.0f64..3.0, 3),
            v in proptest::collection::vec(-10.0f64..10.0, 3),
            c in -5.0f64..5.0,
        ) {
            let sym = |i: usize, j: usize| 0.5 * (a[3 * i + j] + a[3 * j + i]);
            let q = |x: &[f64]| {
                let mut s = c;
                for i in 0..3 {
                    s += b[i] * x[i];
                    for j in 0..3 {
                        s += 0.5 * x[i] * sym(i, j) * x[j];
                    }
                }
                s
            };
            let g = central_gradient(q, &v).unwrap();
            for i in 0..3 {
                let exact = b[i] + (0..3).map(|j| sym(i, j) * v[j]).sum::<f64>();
                let scale = exact.abs().max(1.0);
                prop_assert!((g[i] - exact).abs() <= 1e-7 * scale, "{} vs {}", g[i], exact);
            }
        }
    }
}
