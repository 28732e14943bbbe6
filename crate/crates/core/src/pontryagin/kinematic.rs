//! Kinematic optimal control: the constrained quasi-velocities are the
//! controls and the extremal system lives on `E*`.

use crate::algebroid::{ConstraintDistribution, LieAlgebroid};
use crate::error::{Error, Result};
use crate::scalar::{all_finite, max_abs, Real};

use super::control::{solve_stationary, ControlSolve, ControlSolveOptions};
use super::cost::KinematicCost;
use super::{AbnormalResiduals, ABNORMAL_TOL};

/// `(x, mu)`; `mu` is in basis order, constrained entries first.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicState<T> {
    pub x: Vec<T>,
    pub mu: Vec<T>,
}

impl<T: Real> KinematicState<T> {
    pub fn new(x: Vec<T>, mu: Vec<T>) -> Self {
        Self { x, mu }
    }

    /// Layout `[x^1..x^n, mu_1..mu_m]`.
    pub fn from_flat(flat: &[T], n: usize, m: usize) -> Result<Self> {
        if flat.len() != n + m {
            return Err(Error::DimensionMismatch {
                what: "kinematic state",
                expected: n + m,
                got: flat.len(),
            });
        }
        Ok(Self {
            x: flat[..n].to_vec(),
            mu: flat[n..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.mu);
        v
    }
}

/// Algebroid, constraint distribution and cost of one kinematic problem.
#[derive(Debug, Clone)]
pub struct KinematicProblem<T> {
    pub algebroid: LieAlgebroid<T>,
    pub distribution: ConstraintDistribution,
    pub cost: KinematicCost<T>,
    pub solve_options: ControlSolveOptions<T>,
}

impl<T: Real> KinematicProblem<T> {
    pub fn new(algebroid: LieAlgebroid<T>, distribution: ConstraintDistribution, cost: KinematicCost<T>) -> Self {
        Self {
            algebroid,
            distribution,
            cost,
            solve_options: ControlSolveOptions::default(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.algebroid.base_dim() + self.algebroid.rank()
    }

    fn check_state(&self, state: &KinematicState<T>) -> Result<()> {
        let (n, m) = (self.algebroid.base_dim(), self.algebroid.rank());
        if state.x.len() != n {
            return Err(Error::DimensionMismatch {
                what: "kinematic state x",
                expected: n,
                got: state.x.len(),
            });
        }
        if state.mu.len() != m {
            return Err(Error::DimensionMismatch {
                what: "kinematic state mu",
                expected: m,
                got: state.mu.len(),
            });
        }
        if !all_finite(&state.x) || !all_finite(&state.mu) {
            return Err(Error::NonFinite {
                what: "kinematic state".into(),
            });
        }
        Ok(())
    }

    fn check_controls(&self, u: &[T]) -> Result<()> {
        let k = self.distribution.k();
        if u.len() != k {
            return Err(Error::DimensionMismatch {
                what: "controls",
                expected: k,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `H = mu_a u^a - kappa(x, u)`.
    pub fn hamiltonian(&self, state: &KinematicState<T>, u: &[T]) -> Result<T> {
        self.check_state(state)?;
        self.check_controls(u)?;
        let pairing: T = state.mu.iter().zip(u).map(|(m, v)| *m * *v).sum();
        Ok(pairing - self.cost.value(&state.x, u)?)
    }

    /// Solves `mu_a = d kappa / d u^a` for `u`.
    pub fn solve_controls(&self, x: &[T], mu_a: &[T], guess: &[T]) -> Result<ControlSolve<T>> {
        solve_stationary(|u| self.cost.gradient_u(x, u), mu_a, guess, &self.solve_options)
    }

    pub fn optimal_controls(&self, state: &KinematicState<T>) -> Result<Vec<T>> {
        self.check_state(state)?;
        let k = self.distribution.k();
        Ok(self.solve_controls(&state.x, &state.mu[..k], &vec![T::zero(); k])?.u)
    }

    /// The Hamiltonian on the critical submanifold.
    pub fn optimal_hamiltonian(&self, state: &KinematicState<T>) -> Result<T> {
        let u = self.optimal_controls(state)?;
        self.hamiltonian(state, &u)
    }

    /// `|mu_a - d kappa/du^a|_inf` at the optimal controls.
    pub fn optimality_residual(&self, state: &KinematicState<T>) -> Result<T> {
        let u = self.optimal_controls(state)?;
        let g = self.cost.gradient_u(&state.x, &u)?;
        let d: Vec<T> = state.mu.iter().zip(&g).map(|(m, g)| *m - *g).collect();
        Ok(max_abs(&d))
    }

    /// Normal extremal field with the controls eliminated:
    /// `x' = rho^i_a u^a`,
    /// `mu_alpha' = rho^i_alpha dkappa/dx^i - mu_gamma C^gamma_{alpha b} u^b`.
    pub fn extremal_rhs(&self, state: &KinematicState<T>) -> Result<KinematicState<T>> {
        let u = self.optimal_controls(state)?;
        self.rhs_with_controls(state, &u)
    }

    pub(crate) fn rhs_with_controls(&self, state: &KinematicState<T>, u: &[T]) -> Result<KinematicState<T>> {
        let (n, m, k) = (self.algebroid.base_dim(), self.algebroid.rank(), self.distribution.k());
        let rho = self.algebroid.anchor_raw(&state.x)?;
        let c = self.algebroid.structure_raw(&state.x)?;
        let dk_dx = self.cost.gradient_x(&state.x, u)?;

        let x_dot = (0..n)
            .map(|i| (0..k).fold(T::zero(), |s, a| s + rho[(i, a)] * u[a]))
            .collect();
        let mu_dot = (0..m)
            .map(|alpha| {
                let mut v = (0..n).fold(T::zero(), |s, i| s + rho[(i, alpha)] * dk_dx[i]);
                for gamma in 0..m {
                    for b in 0..k {
                        v -= state.mu[gamma] * c[(gamma, alpha, b)] * u[b];
                    }
                }
                v
            })
            .collect();
        Ok(KinematicState { x: x_dot, mu: mu_dot })
    }

    pub fn extremal_rhs_flat(&self, flat: &[T]) -> Result<Vec<T>> {
        let s = KinematicState::from_flat(flat, self.algebroid.base_dim(), self.algebroid.rank())?;
        Ok(self.extremal_rhs(&s)?.to_flat())
    }
}

/// Abnormal kinematic extremal with externally supplied controls `u`:
/// `x' = rho^i_a u^a`, `mu_A' = -mu_B C^B_{Ab} u^b`, `mu_a` held at zero.
/// The constrained-row condition `mu_B C^B_{ab} u^b = 0` is reported, not
/// enforced.
pub fn kinematic_abnormal_rhs<T: Real>(
    algebroid: &LieAlgebroid<T>,
    distribution: &ConstraintDistribution,
    state: &KinematicState<T>,
    u: &[T],
) -> Result<(KinematicState<T>, AbnormalResiduals<T>)> {
    let (n, m, k) = (algebroid.base_dim(), algebroid.rank(), distribution.k());
    if state.x.len() != n || state.mu.len() != m {
        return Err(Error::DimensionMismatch {
            what: "kinematic state",
            expected: n + m,
            got: state.x.len() + state.mu.len(),
        });
    }
    if u.len() != k {
        return Err(Error::DimensionMismatch {
            what: "controls",
            expected: k,
            got: u.len(),
        });
    }
    let mu_a_norm = max_abs(&state.mu[..k]);
    if !(mu_a_norm <= T::lit(ABNORMAL_TOL)) {
        return Err(Error::AbnormalityViolated {
            what: "|mu_a|",
            value: mu_a_norm.to_f64_lossy(),
        });
    }
    let (x_dot, mu_dot, residuals) = abnormal_block(algebroid, distribution, &state.x, &state.mu, u)?;
    Ok((KinematicState { x: x_dot, mu: mu_dot }, residuals))
}

/// Shared by the kinematic and dynamic abnormal systems; `v` is the
/// constrained velocity (`u` kinematic, `y` dynamic).
pub(crate) fn abnormal_block<T: Real>(
    algebroid: &LieAlgebroid<T>,
    distribution: &ConstraintDistribution,
    x: &[T],
    mu: &[T],
    v: &[T],
) -> Result<(Vec<T>, Vec<T>, AbnormalResiduals<T>)> {
    let (n, m, k) = (algebroid.base_dim(), algebroid.rank(), distribution.k());
    let rho = algebroid.anchor_raw(x)?;
    let c = algebroid.structure_raw(x)?;
    let x_dot = (0..n)
        .map(|i| (0..k).fold(T::zero(), |s, a| s + rho[(i, a)] * v[a]))
        .collect();
    // -mu_B C^B_{alpha b} v^b for every alpha; rows a are the algebraic condition
    let bracket_row = |alpha: usize| {
        let mut s = T::zero();
        for big_b in k..m {
            for b in 0..k {
                s += mu[big_b] * c[(big_b, alpha, b)] * v[b];
            }
        }
        s
    };
    let mut mu_dot = vec![T::zero(); m];
    for big_a in k..m {
        mu_dot[big_a] = -bracket_row(big_a);
    }
    let rows: Vec<T> = (0..k).map(bracket_row).collect();
    let residuals = AbnormalResiduals {
        constrained_momentum: max_abs(&mu[..k]),
        bracket_condition: max_abs(&rows),
        complementary_momentum: max_abs(&mu[k..]),
        pi: None,
    };
    Ok((x_dot, mu_dot, residuals))
}

impl<T: Real> KinematicProblem<T> {
    /// Largest residual of the momentum equations rewritten with
    /// `mu_a = dkappa/du^a` substituted,
    /// `d/dt(dkappa/du^a) - rho^i_a dkappa/dx^i + dkappa/du^c C^c_ab u^b + mu_B C^B_ab u^b`
    /// and the matching `mu_A` rows, over the interior samples of a stored
    /// extremal. Time derivatives are central differences between neighbours.
    pub fn substituted_residual(&self, times: &[T], states: &[Vec<T>]) -> Result<T> {
        if times.len() != states.len() || times.len() < 3 {
            return Err(Error::Invalid(
                "substituted residual needs at least three matched samples".into(),
            ));
        }
        let (n, m, k) = (self.algebroid.base_dim(), self.algebroid.rank(), self.distribution.k());
        // per sample: (state, u, dkappa/du, dkappa/dx)
        let samples = states
            .iter()
            .map(|flat| {
                let s = KinematicState::from_flat(flat, n, m)?;
                let u = self.optimal_controls(&s)?;
                let p = self.cost.gradient_u(&s.x, &u)?;
                let gx = self.cost.gradient_x(&s.x, &u)?;
                Ok((s, u, p, gx))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut worst = T::zero();
        for i in 1..samples.len() - 1 {
            let dt = times[i + 1] - times[i - 1];
            let (s, u, p, gx) = &samples[i];
            let (prev, next) = (&samples[i - 1], &samples[i + 1]);
            let rho = self.algebroid.anchor_raw(&s.x)?;
            let c = self.algebroid.structure_raw(&s.x)?;
            for alpha in 0..m {
                let rate = if alpha < k {
                    (next.2[alpha] - prev.2[alpha]) / dt
                } else {
                    (next.0.mu[alpha] - prev.0.mu[alpha]) / dt
                };
                let mut r = rate - (0..n).fold(T::zero(), |acc, j| acc + rho[(j, alpha)] * gx[j]);
                for b in 0..k {
                    for cc in 0..k {
                        r += p[cc] * c[(cc, alpha, b)] * u[b];
                    }
                    for big_b in k..m {
                        r += s.mu[big_b] * c[(big_b, alpha, b)] * u[b];
                    }
                }
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }
}
