//! Pointwise elimination of the controls: solves `target = d kappa / d u` by
//! damped Newton with a finite-difference Hessian.

use crate::diff::central_jacobian_columns;
use crate::error::{Error, Result};
use crate::linalg::{invert, mat_vec, norm_inf};
use crate::scalar::{max_abs, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolve<T> {
    pub u: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSolveOptions<T> {
    /// Convergence threshold on `|target - d kappa/du|_inf`.
    pub tol: T,
    pub max_iterations: usize,
    /// Hessians with a larger infinity-norm condition number are rejected.
    pub max_condition: T,
}

impl<T: Real> Default for ControlSolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(1e3)),
            max_iterations: 50,
            max_condition: T::lit(1e12),
        }
    }
}

const MAX_HALVINGS: usize = 40;

/// Finds `u` with `grad_u(u) = target`.
pub fn solve_stationary<T, G>(
    grad_u: G,
    target: &[T],
    guess: &[T],
    opts: &ControlSolveOptions<T>,
) -> Result<ControlSolve<T>>
where
    T: Real,
    G: Fn(&[T]) -> Result<Vec<T>>,
{
    let k = target.len();
    if guess.len() != k {
        return Err(Error::DimensionMismatch {
            what: "control guess",
            expected: k,
            got: guess.len(),
        });
    }
    let mismatch = |u: &[T]| -> Result<(Vec<T>, T)> {
        let g = grad_u(u)?;
        if g.len() != k {
            return Err(Error::DimensionMismatch {
                what: "control gradient",
                expected: k,
                got: g.len(),
            });
        }
        let r: Vec<T> = g.iter().zip(target).map(|(a, b)| *a - *b).collect();
        let n = max_abs(&r);
        Ok((r, n))
    };

    let mut u = guess.to_vec();
    let (mut r, mut norm) = mismatch(&u)?;
    if norm <= opts.tol {
        return Ok(ControlSolve {
            u,
            iterations: 0,
            residual: norm,
        });
    }

    for it in 1..=opts.max_iterations {
        let cols = central_jacobian_columns(&grad_u, &u, T::HESSIAN_STEP)?;
        // row-major Hessian from its columns
        let mut hess = vec![T::zero(); k * k];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..k {
                hess[i * k + j] = col[i];
            }
        }
        let inv = invert(&hess, k).ok_or(Error::Regularity {
            condition: f64::INFINITY,
        })?;
        let condition = norm_inf(&hess, k) * norm_inf(&inv, k);
        if !(condition <= opts.max_condition) {
            return Err(Error::Regularity {
                condition: condition.to_f64_lossy(),
            });
        }
        let step = mat_vec(&inv, k, &r);

        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = u.iter().zip(&step).map(|(a, d)| *a - lambda * *d).collect();
            match mismatch(&trial) {
                Ok((tr, tn)) if tn < norm || tn <= opts.tol => {
                    accepted = Some((trial, tr, tn));
                    break;
                }
                // overshooting into a non-finite gradient counts as a rejected step
                Ok(_) | Err(Error::NonFinite { .. }) => {}
                Err(e) => return Err(e),
            }
            lambda *= T::lit(0.5);
        }
        let Some((nu, nr, nn)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: norm.to_f64_lossy(),
            });
        };
        u = nu;
        r = nr;
        norm = nn;
        if norm <= opts.tol {
            return Ok(ControlSolve {
                u,
                iterations: it,
                residual: norm,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: norm.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_converges_in_one_step() {
        let c = [2.0, 3.0];
        let s = solve_stationary(
            |u: &[f64]| Ok(vec![c[0] * u[0], c[1] * u[1]]),
            &[2.0, 6.0],
            &[0.0, 0.0],
            &ControlSolveOptions::default(),
        )
        .unwrap();
        assert_eq!(s.iterations, 1);
        assert!((s.u[0] - 1.0).abs() < 1e-12 && (s.u[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_quadratic_needs_damping() {
        // kappa = cosh(u): solve sinh(u) = 50 starting from u = 0
        let s = solve_stationary(
            |u: &[f64]| Ok(vec![u[0].sinh()]),
            &[50.0],
            &[0.0],
            &ControlSolveOptions::default(),
        )
        .unwrap();
        assert!((s.u[0] - 50f64.asinh()).abs() < 1e-10);
        assert!(s.iterations > 1);
    }

    #[test]
    fn singular_hessian_is_regularity_failure() {
        let err = solve_stationary(
            |u: &[f64]| Ok(vec![u[0] + u[1], u[0] + u[1]]),
            &[1.0, 2.0],
            &[0.0, 0.0],
            &ControlSolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Regularity { .. }), "{err:?}");
    }

    #[test]
    fn ill_conditioned_hessian_is_regularity_failure() {
        let err = solve_stationary(
            |u: &[f64]| Ok(vec![u[0], 1e-14 * u[1]]),
            &[1.0, 1.0],
            &[0.0, 0.0],
            &ControlSolveOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Regularity { .. }), "{err:?}");
    }

    #[test]
    fn iteration_cap_is_nonconvergence() {
        let opts = ControlSolveOptions {
            max_iterations: 1,
            ..ControlSolveOptions::default()
        };
        let err = solve_stationary(|u: &[f64]| Ok(vec![u[0].sinh()]), &[50.0], &[0.0], &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 1, .. }));
    }
}
