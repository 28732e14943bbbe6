//! Dynamic optimal control: accelerations of the constrained quasi-velocities
//! are the controls; the extremal system lives on the dual of the E-tangent
//! bundle to the constraint distribution, coordinates `(x, y, mu, pi)`.

use crate::algebroid::{ConstraintDistribution, LieAlgebroid};
use crate::error::{Error, Result};
use crate::scalar::{all_finite, max_abs, Real};

use super::control::{solve_stationary, ControlSolve, ControlSolveOptions};
use super::cost::DynamicCost;
use super::kinematic::abnormal_block;
use super::{AbnormalResiduals, ABNORMAL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState<T> {
    pub x: Vec<T>,
    /// Constrained quasi-velocities `y^a`.
    pub y: Vec<T>,
    /// All momenta `mu_alpha`, constrained first.
    pub mu: Vec<T>,
    /// Momenta `pi_a` conjugate to `y^a`.
    pub pi: Vec<T>,
}

impl<T: Real> DynamicState<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, mu: Vec<T>, pi: Vec<T>) -> Self {
        Self { x, y, mu, pi }
    }

    /// Layout `[x (n), y (k), mu (m), pi (k)]`.
    pub fn from_flat(flat: &[T], n: usize, m: usize, k: usize) -> Result<Self> {
        if flat.len() != n + 2 * k + m {
            return Err(Error::DimensionMismatch {
                what: "dynamic state",
                expected: n + 2 * k + m,
                got: flat.len(),
            });
        }
        let (x, rest) = flat.split_at(n);
        let (y, rest) = rest.split_at(k);
        let (mu, pi) = rest.split_at(m);
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            mu: mu.to_vec(),
            pi: pi.to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.x.len() + 2 * self.y.len() + self.mu.len());
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.extend_from_slice(&self.mu);
        v.extend_from_slice(&self.pi);
        v
    }
}

#[derive(Debug, Clone)]
pub struct DynamicProblem<T> {
    pub algebroid: LieAlgebroid<T>,
    pub distribution: ConstraintDistribution,
    pub cost: DynamicCost<T>,
    pub solve_options: ControlSolveOptions<T>,
}

impl<T: Real> DynamicProblem<T> {
    pub fn new(algebroid: LieAlgebroid<T>, distribution: ConstraintDistribution, cost: DynamicCost<T>) -> Self {
        Self {
            algebroid,
            distribution,
            cost,
            solve_options: ControlSolveOptions::default(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.algebroid.base_dim() + self.algebroid.rank() + 2 * self.distribution.k()
    }

    fn check_state(&self, s: &DynamicState<T>) -> Result<()> {
        let (n, m, k) = (self.algebroid.base_dim(), self.algebroid.rank(), self.distribution.k());
        for (what, got, expected) in [
            ("dynamic state x", s.x.len(), n),
            ("dynamic state y", s.y.len(), k),
            ("dynamic state mu", s.mu.len(), m),
            ("dynamic state pi", s.pi.len(), k),
        ] {
            if got != expected {
                return Err(Error::DimensionMismatch { what, expected, got });
            }
        }
        if ![&s.x, &s.y, &s.mu, &s.pi].iter().all(|v| all_finite(v)) {
            return Err(Error::NonFinite {
                what: "dynamic state".into(),
            });
        }
        Ok(())
    }

    /// `H = mu_a y^a + pi_a u^a - kappa(x, y, u)`; the `mu_A` pair with a
    /// vanishing component and drop out.
    pub fn hamiltonian(&self, s: &DynamicState<T>, u: &[T]) -> Result<T> {
        self.check_state(s)?;
        let k = self.distribution.k();
        if u.len() != k {
            return Err(Error::DimensionMismatch {
                what: "controls",
                expected: k,
                got: u.len(),
            });
        }
        let mut h = T::zero();
        for a in 0..k {
            h += s.mu[a] * s.y[a] + s.pi[a] * u[a];
        }
        Ok(h - self.cost.value(&s.x, &s.y, u)?)
    }

    /// Solves `pi_a = d kappa / d u^a` for `u`.
    pub fn solve_controls(&self, x: &[T], y: &[T], pi: &[T], guess: &[T]) -> Result<ControlSolve<T>> {
        solve_stationary(|u| self.cost.gradient_u(x, y, u), pi, guess, &self.solve_options)
    }

    pub fn optimal_controls(&self, s: &DynamicState<T>) -> Result<Vec<T>> {
        self.check_state(s)?;
        let k = self.distribution.k();
        Ok(self.solve_controls(&s.x, &s.y, &s.pi, &vec![T::zero(); k])?.u)
    }

    pub fn optimal_hamiltonian(&self, s: &DynamicState<T>) -> Result<T> {
        let u = self.optimal_controls(s)?;
        self.hamiltonian(s, &u)
    }

    /// `|pi_a - d kappa/du^a|_inf` at the optimal controls.
    pub fn optimality_residual(&self, s: &DynamicState<T>) -> Result<T> {
        let u = self.optimal_controls(s)?;
        let g = self.cost.gradient_u(&s.x, &s.y, &u)?;
        let d: Vec<T> = s.pi.iter().zip(&g).map(|(p, g)| *p - *g).collect();
        Ok(max_abs(&d))
    }

    /// Normal extremal field:
    /// `x' = rho^i_a y^a`, `y' = u`, `pi_a' = dkappa/dy^a - mu_a`,
    /// `mu_alpha' = rho^i_alpha dkappa/dx^i - mu_gamma C^gamma_{alpha b} y^b`.
    pub fn extremal_rhs(&self, s: &DynamicState<T>) -> Result<DynamicState<T>> {
        let u = self.optimal_controls(s)?;
        let (n, m, k) = (self.algebroid.base_dim(), self.algebroid.rank(), self.distribution.k());
        let rho = self.algebroid.anchor_raw(&s.x)?;
        let c = self.algebroid.structure_raw(&s.x)?;
        let dk_dx = self.cost.gradient_x(&s.x, &s.y, &u)?;
        let dk_dy = self.cost.gradient_y(&s.x, &s.y, &u)?;

        let x_dot = (0..n)
            .map(|i| (0..k).fold(T::zero(), |acc, a| acc + rho[(i, a)] * s.y[a]))
            .collect();
        let pi_dot = (0..k).map(|a| dk_dy[a] - s.mu[a]).collect();
        let mu_dot = (0..m)
            .map(|alpha| {
                let mut v = (0..n).fold(T::zero(), |acc, i| acc + rho[(i, alpha)] * dk_dx[i]);
                for gamma in 0..m {
                    for b in 0..k {
                        v -= s.mu[gamma] * c[(gamma, alpha, b)] * s.y[b];
                    }
                }
                v
            })
            .collect();
        Ok(DynamicState {
            x: x_dot,
            y: u,
            mu: mu_dot,
            pi: pi_dot,
        })
    }

    pub fn extremal_rhs_flat(&self, flat: &[T]) -> Result<Vec<T>> {
        let s = DynamicState::from_flat(
            flat,
            self.algebroid.base_dim(),
            self.algebroid.rank(),
            self.distribution.k(),
        )?;
        Ok(self.extremal_rhs(&s)?.to_flat())
    }
}

/// Abnormal dynamic extremal (zero cost) with externally supplied
/// accelerations `u`: `x' = rho^i_a y^a`, `y' = u`,
/// `mu_A' = -mu_B C^B_{Ab} y^b`, with `mu_a` and `pi` held at zero.
pub fn dynamic_abnormal_rhs<T: Real>(
    algebroid: &LieAlgebroid<T>,
    distribution: &ConstraintDistribution,
    state: &DynamicState<T>,
    u: &[T],
) -> Result<(DynamicState<T>, AbnormalResiduals<T>)> {
    let (n, m, k) = (algebroid.base_dim(), algebroid.rank(), distribution.k());
    for (what, got, expected) in [
        ("dynamic state x", state.x.len(), n),
        ("dynamic state y", state.y.len(), k),
        ("dynamic state mu", state.mu.len(), m),
        ("dynamic state pi", state.pi.len(), k),
        ("controls", u.len(), k),
    ] {
        if got != expected {
            return Err(Error::DimensionMismatch { what, expected, got });
        }
    }
    let tol = T::lit(ABNORMAL_TOL);
    let mu_a = max_abs(&state.mu[..k]);
    if !(mu_a <= tol) {
        return Err(Error::AbnormalityViolated {
            what: "|mu_a|",
            value: mu_a.to_f64_lossy(),
        });
    }
    let pi = max_abs(&state.pi);
    if !(pi <= tol) {
        return Err(Error::AbnormalityViolated {
            what: "|pi|",
            value: pi.to_f64_lossy(),
        });
    }
    let (x_dot, mu_dot, mut residuals) = abnormal_block(algebroid, distribution, &state.x, &state.mu, &state.y)?;
    residuals.pi = Some(pi);
    Ok((
        DynamicState {
            x: x_dot,
            y: u.to_vec(),
            mu: mu_dot,
            pi: vec![T::zero(); k],
        },
        residuals,
    ))
}
