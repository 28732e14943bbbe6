use std::fmt;
use std::sync::Arc;

use crate::algebroid::BasePoint;
use crate::diff::central_gradient;
use crate::error::{Error, Result};
use crate::scalar::{all_finite, max_abs, Real};
use crate::validate::ValidationReport;

pub type KinematicCostFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;
pub type KinematicGradFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;
pub type DynamicCostFn<T> = Arc<dyn Fn(&[T], &[T], &[T]) -> T + Send + Sync>;
pub type DynamicGradFn<T> = Arc<dyn Fn(&[T], &[T], &[T]) -> Vec<T> + Send + Sync>;

fn finite_value<T: Real>(v: T, what: &str) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what: what.into() })
    }
}

fn finite_vec<T: Real>(v: Vec<T>, len: usize, what: &'static str) -> Result<Vec<T>> {
    if v.len() != len {
        return Err(Error::DimensionMismatch {
            what,
            expected: len,
            got: v.len(),
        });
    }
    if !all_finite(&v) {
        return Err(Error::NonFinite { what: what.into() });
    }
    Ok(v)
}

/// Running cost `kappa(x, u)` of a kinematic problem, `u` the constrained
/// quasi-velocities. Gradients default to central differences.
#[derive(Clone)]
pub struct KinematicCost<T> {
    eval: KinematicCostFn<T>,
    grad_x: Option<KinematicGradFn<T>>,
    grad_u: Option<KinematicGradFn<T>>,
}

impl<T> fmt::Debug for KinematicCost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KinematicCost")
            .field("analytic_grad_x", &self.grad_x.is_some())
            .field("analytic_grad_u", &self.grad_u.is_some())
            .finish()
    }
}

impl<T: Real> KinematicCost<T> {
    pub fn new(eval: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            grad_x: None,
            grad_u: None,
        }
    }

    /// The zero cost; its extremals are the abnormal ones.
    pub fn zero() -> Self {
        Self::new(|_, _| T::zero())
            .with_grad_x(|x, _| vec![T::zero(); x.len()])
            .with_grad_u(|_, u| vec![T::zero(); u.len()])
    }

    pub fn with_grad_x(mut self, g: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_x = Some(Arc::new(g));
        self
    }

    pub fn with_grad_u(mut self, g: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_u = Some(Arc::new(g));
        self
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.grad_x.is_some() && self.grad_u.is_some()
    }

    pub fn value(&self, x: &[T], u: &[T]) -> Result<T> {
        finite_value((self.eval)(x, u), "kinematic cost")
    }

    pub fn gradient_x(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        match &self.grad_x {
            Some(g) => finite_vec(g(x, u), x.len(), "kinematic cost x-gradient"),
            None => central_gradient(|xp| (self.eval)(xp, u), x),
        }
    }

    pub fn gradient_u(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        match &self.grad_u {
            Some(g) => finite_vec(g(x, u), u.len(), "kinematic cost u-gradient"),
            None => central_gradient(|up| (self.eval)(x, up), u),
        }
    }

    /// Compares the supplied gradients against central differences at each
    /// `(x, u)` probe. Slots without an analytic gradient are skipped.
    pub fn check_gradients(&self, probes: &[(Vec<T>, Vec<T>)], tol: T) -> Result<ValidationReport<T>> {
        let mut rows = Vec::with_capacity(probes.len());
        for (x, u) in probes {
            let mut r = T::zero();
            if let Some(g) = &self.grad_x {
                let fd = central_gradient(|xp| (self.eval)(xp, u), x)?;
                r = r.max(max_diff(&g(x, u), &fd)?);
            }
            if let Some(g) = &self.grad_u {
                let fd = central_gradient(|up| (self.eval)(x, up), u)?;
                r = r.max(max_diff(&g(x, u), &fd)?);
            }
            rows.push((r, BasePoint::new(x.clone())?));
        }
        ValidationReport::from_residuals("kinematic_cost_gradients", rows, tol)
    }
}

fn max_diff<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "gradient",
            expected: b.len(),
            got: a.len(),
        });
    }
    let d: Vec<T> = a.iter().zip(b).map(|(p, q)| *p - *q).collect();
    Ok(max_abs(&d))
}

/// Running cost `kappa(x, y, u)` of a dynamic problem: `y` the constrained
/// quasi-velocities, `u` the accelerations (controls).
#[derive(Clone)]
pub struct DynamicCost<T> {
    eval: DynamicCostFn<T>,
    grad_x: Option<DynamicGradFn<T>>,
    grad_y: Option<DynamicGradFn<T>>,
    grad_u: Option<DynamicGradFn<T>>,
}

impl<T> fmt::Debug for DynamicCost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicCost")
            .field("analytic_grad_x", &self.grad_x.is_some())
            .field("analytic_grad_y", &self.grad_y.is_some())
            .field("analytic_grad_u", &self.grad_u.is_some())
            .finish()
    }
}

impl<T: Real> DynamicCost<T> {
    pub fn new(eval: impl Fn(&[T], &[T], &[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            grad_x: None,
            grad_y: None,
            grad_u: None,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _, _| T::zero())
            .with_grad_x(|x, _, _| vec![T::zero(); x.len()])
            .with_grad_y(|_, y, _| vec![T::zero(); y.len()])
            .with_grad_u(|_, _, u| vec![T::zero(); u.len()])
    }

    pub fn with_grad_x(mut self, g: impl Fn(&[T], &[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_x = Some(Arc::new(g));
        self
    }

    pub fn with_grad_y(mut self, g: impl Fn(&[T], &[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_y = Some(Arc::new(g));
        self
    }

    pub fn with_grad_u(mut self, g: impl Fn(&[T], &[T], &[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.grad_u = Some(Arc::new(g));
        self
    }

    pub fn has_analytic_gradients(&self) -> bool {
        self.grad_x.is_some() && self.grad_y.is_some() && self.grad_u.is_some()
    }

    pub fn value(&self, x: &[T], y: &[T], u: &[T]) -> Result<T> {
        finite_value((self.eval)(x, y, u), "dynamic cost")
    }

    pub fn gradient_x(&self, x: &[T], y: &[T], u: &[T]) -> Result<Vec<T>> {
        match &self.grad_x {
            Some(g) => finite_vec(g(x, y, u), x.len(), "dynamic cost x-gradient"),
            None => central_gradient(|p| (self.eval)(p, y, u), x),
        }
    }

    pub fn gradient_y(&self, x: &[T], y: &[T], u: &[T]) -> Result<Vec<T>> {
        match &self.grad_y {
            Some(g) => finite_vec(g(x, y, u), y.len(), "dynamic cost y-gradient"),
            None => central_gradient(|p| (self.eval)(x, p, u), y),
        }
    }

    pub fn gradient_u(&self, x: &[T], y: &[T], u: &[T]) -> Result<Vec<T>> {
        match &self.grad_u {
            Some(g) => finite_vec(g(x, y, u), u.len(), "dynamic cost u-gradient"),
            None => central_gradient(|p| (self.eval)(x, y, p), u),
        }
    }

    /// As [`KinematicCost::check_gradients`], probes are `(x, y, u)`.
    pub fn check_gradients(&self, probes: &[(Vec<T>, Vec<T>, Vec<T>)], tol: T) -> Result<ValidationReport<T>> {
        let mut rows = Vec::with_capacity(probes.len());
        for (x, y, u) in probes {
            let mut r = T::zero();
            if let Some(g) = &self.grad_x {
                let fd = central_gradient(|p| (self.eval)(p, y, u), x)?;
                r = r.max(max_diff(&g(x, y, u), &fd)?);
            }
            if let Some(g) = &self.grad_y {
                let fd = central_gradient(|p| (self.eval)(x, p, u), y)?;
                r = r.max(max_diff(&g(x, y, u), &fd)?);
            }
            if let Some(g) = &self.grad_u {
                let fd = central_gradient(|p| (self.eval)(x, y, p), u)?;
                r = r.max(max_diff(&g(x, y, u), &fd)?);
            }
            rows.push((r, BasePoint::new(x.clone())?));
        }
        ValidationReport::from_residuals("dynamic_cost_gradients", rows, tol)
    }
}
