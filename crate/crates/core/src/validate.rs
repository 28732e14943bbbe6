//! Numerical checks of the Lie algebroid axioms.
//!
//! Derivatives of the anchor and structure functions are taken by central
//! differences, so the compatibility and Jacobi residuals carry a floor of
//! roughly `1e-10` for `f64`; tolerances below `1e-7` are not meaningful.

use std::fmt;

use crate::algebroid::{BasePoint, LieAlgebroid, Matrix, StructureTensor};
use crate::diff::fd_step;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T> {
    pub identity_name: String,
    pub max_residual: T,
    /// Where the largest residual occurred (a base point, or a state sample
    /// for trajectory checks).
    pub worst_point: BasePoint<T>,
    pub samples_checked: usize,
    pub passed: bool,
    pub tolerance: T,
}

impl<T: Real> ValidationReport<T> {
    pub(crate) fn from_residuals(
        identity_name: impl Into<String>,
        residuals: impl IntoIterator<Item = (T, BasePoint<T>)>,
        tolerance: T,
    ) -> Result<Self> {
        let mut worst: Option<(T, BasePoint<T>)> = None;
        let mut samples = 0;
        for (r, p) in residuals {
            samples += 1;
            let replace = match &worst {
                None => true,
                Some((w, _)) => r > *w || r.is_nan(),
            };
            if replace {
                worst = Some((r, p));
            }
        }
        let (max_residual, worst_point) =
            worst.ok_or_else(|| Error::Invalid("no samples to validate".into()))?;
        Ok(Self {
            identity_name: identity_name.into(),
            passed: max_residual <= tolerance,
            max_residual,
            worst_point,
            samples_checked: samples,
            tolerance,
        })
    }
}

impl<T: Real> fmt::Display for ValidationReport<T> {
    /// `IDENTITY max_residual tolerance PASS|FAIL`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:.6e} {:.1e} {}",
            self.identity_name,
            self.max_residual,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

fn nonempty<T>(points: &[BasePoint<T>]) -> Result<()> {
    if points.is_empty() {
        Err(Error::Invalid("sample list is empty".into()))
    } else {
        Ok(())
    }
}

/// Max over samples and indices of `|C^g_{ab} + C^g_{ba}|`.
pub fn check_antisymmetry<T: Real>(
    algebroid: &LieAlgebroid<T>,
    sample_points: &[BasePoint<T>],
    tol: T,
) -> Result<ValidationReport<T>> {
    nonempty(sample_points)?;
    let residuals = sample_points
        .iter()
        .map(|p| Ok((algebroid.structure_at(p)?.antisymmetry_defect().0, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    ValidationReport::from_residuals("antisymmetry", residuals, tol)
}

/// `out[j]` holds `d/dx^j` of the evaluated object, flattened.
fn partials<T: Real, F>(x: &[T], eval: F) -> Result<Vec<Vec<T>>>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = fd_step(x[j]);
            probe[j] = x[j] + h;
            let plus = eval(&probe)?;
            probe[j] = x[j] - h;
            let minus = eval(&probe)?;
            probe[j] = x[j];
            let span = (x[j] + h) - (x[j] - h);
            Ok(plus.iter().zip(&minus).map(|(p, m)| (*p - *m) / span).collect())
        })
        .collect()
}

/// Max of `|rho(e_a) rho^i_b,j - rho(e_b) rho^i_a,j - rho^i_g C^g_ab|`
/// at one point, i.e. the failure of the anchor to be a bracket morphism.
pub fn compatibility_residual<T: Real>(algebroid: &LieAlgebroid<T>, x: &[T]) -> Result<T> {
    let n = algebroid.base_dim();
    let m = algebroid.rank();
    let rho = algebroid.anchor_raw(x)?;
    let c = algebroid.structure_raw(x)?;
    let d_rho = partials(x, |p| Ok(algebroid.anchor_raw(p)?.as_slice().to_vec()))?;
    let drho = |j: usize, i: usize, beta: usize| d_rho[j][i * m + beta];

    let mut worst = T::zero();
    for alpha in 0..m {
        for beta in (alpha + 1)..m {
            for i in 0..n {
                let mut r = T::zero();
                for j in 0..n {
                    r += rho[(j, alpha)] * drho(j, i, beta) - rho[(j, beta)] * drho(j, i, alpha);
                }
                for gamma in 0..m {
                    r -= rho[(i, gamma)] * c[(gamma, alpha, beta)];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

pub fn check_compatibility<T: Real>(
    algebroid: &LieAlgebroid<T>,
    sample_points: &[BasePoint<T>],
    tol: T,
) -> Result<ValidationReport<T>> {
    nonempty(sample_points)?;
    let residuals = sample_points
        .iter()
        .map(|p| Ok((compatibility_residual(algebroid, p.coords())?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    ValidationReport::from_residuals("compatibility", residuals, tol)
}

/// Max over `(nu, a, b, c)` of the cyclic sum
/// `rho^i_a C^nu_bc,i + C^nu_a mu C^mu_bc` over `(a, b, c)`.
pub fn jacobi_residual<T: Real>(algebroid: &LieAlgebroid<T>, x: &[T]) -> Result<T> {
    let m = algebroid.rank();
    let n = algebroid.base_dim();
    let rho: Matrix<T> = algebroid.anchor_raw(x)?;
    let c: StructureTensor<T> = algebroid.structure_raw(x)?;
    let d_c = partials(x, |p| Ok(algebroid.structure_raw(p)?.as_slice().to_vec()))?;
    let idx = |g: usize, a: usize, b: usize| (g * m + a) * m + b;

    // directional derivative rho(e_a) C^nu_bc
    let lie = |a: usize, nu: usize, b: usize, cc: usize| {
        (0..n).fold(T::zero(), |acc, i| acc + rho[(i, a)] * d_c[i][idx(nu, b, cc)])
    };
    let quad = |nu: usize, a: usize, b: usize, cc: usize| {
        (0..m).fold(T::zero(), |acc, mu| acc + c[(nu, a, mu)] * c[(mu, b, cc)])
    };

    let mut worst = T::zero();
    for nu in 0..m {
        for a in 0..m {
            for b in (a + 1)..m {
                for cc in (b + 1)..m {
                    let r = lie(a, nu, b, cc)
                        + lie(b, nu, cc, a)
                        + lie(cc, nu, a, b)
                        + quad(nu, a, b, cc)
                        + quad(nu, b, cc, a)
                        + quad(nu, cc, a, b);
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    Ok(worst)
}

pub fn check_jacobi<T: Real>(
    algebroid: &LieAlgebroid<T>,
    sample_points: &[BasePoint<T>],
    tol: T,
) -> Result<ValidationReport<T>> {
    nonempty(sample_points)?;
    let residuals = sample_points
        .iter()
        .map(|p| Ok((jacobi_residual(algebroid, p.coords())?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    ValidationReport::from_residuals("jacobi", residuals, tol)
}

/// Runs all three axiom checks with the same sample set.
pub fn check_axioms<T: Real>(
    algebroid: &LieAlgebroid<T>,
    sample_points: &[BasePoint<T>],
    antisymmetry_tol: T,
    derivative_tol: T,
) -> Result<[ValidationReport<T>; 3]> {
    Ok([
        check_antisymmetry(algebroid, sample_points, antisymmetry_tol)?,
        check_compatibility(algebroid, sample_points, derivative_tol)?,
        check_jacobi(algebroid, sample_points, derivative_tol)?,
    ])
}
