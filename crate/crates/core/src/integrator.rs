//! Explicit integration of autonomous systems with per-sample monitors.
//!
//! Fixed-step classical RK4 is the default. An adaptive Dormand-Prince 5(4)
//! pair is available; its output is resampled onto the same uniform grid by
//! cubic Hermite interpolation so both integrators produce comparable tables.

use std::fmt;
use std::sync::Arc;

use crate::algebroid::BasePoint;
use crate::error::{Error, Result};
use crate::scalar::{all_finite, Real};
use crate::validate::ValidationReport;

/// Name under which the Hamiltonian series is stored.
pub const HAMILTONIAN: &str = "H";

pub type MonitorFn<T> = Arc<dyn Fn(&[T]) -> Result<T> + Send + Sync>;

/// A named scalar observer of the state.
#[derive(Clone)]
pub struct Monitor<T> {
    pub name: String,
    pub eval: MonitorFn<T>,
}

impl<T> Monitor<T> {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[T]) -> Result<T> + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }
}

impl<T> fmt::Debug for Monitor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Monitor").field(&self.name).finish()
    }
}

/// Time-stamped samples of a trajectory plus one series per monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    /// `(name, values)` in monitor order, one value per sample.
    pub series: Vec<(String, Vec<T>)>,
}

impl<T: Real> Trajectory<T> {
    fn start(t0: T, initial: Vec<T>, monitors: &[Monitor<T>]) -> Result<Self> {
        let mut traj = Self {
            times: Vec::new(),
            states: Vec::new(),
            series: monitors.iter().map(|m| (m.name.clone(), Vec::new())).collect(),
        };
        traj.push(t0, initial, monitors)?;
        Ok(traj)
    }

    fn push(&mut self, t: T, state: Vec<T>, monitors: &[Monitor<T>]) -> Result<()> {
        let values = monitors
            .iter()
            .map(|m| (m.eval)(&state))
            .collect::<Result<Vec<_>>>()?;
        for ((_, series), v) in self.series.iter_mut().zip(values) {
            series.push(v);
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn series(&self, name: &str) -> Option<&[T]> {
        self.series
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn hamiltonian(&self) -> Option<&[T]> {
        self.series(HAMILTONIAN)
    }

    pub fn final_state(&self) -> Option<&[T]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Component `j` of every sample.
    pub fn component(&self, j: usize) -> Vec<T> {
        self.states.iter().map(|s| s[j]).collect()
    }

    /// Checks the structural invariants: increasing times, one state and one
    /// value per series entry per sample, uniform state length.
    pub fn check_invariants(&self) -> Result<()> {
        if self.states.len() != self.times.len() {
            return Err(Error::Invalid("states and times differ in length".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("times not strictly increasing".into()));
        }
        let d = self.state_dim();
        if self.states.iter().any(|s| s.len() != d) {
            return Err(Error::Invalid("non-uniform state dimension".into()));
        }
        if self.series.iter().any(|(_, v)| v.len() != self.times.len()) {
            return Err(Error::Invalid("series length differs from sample count".into()));
        }
        Ok(())
    }
}

/// Integration stopped early; `partial` holds every sample accepted so far.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure<T> {
    pub time: T,
    pub reason: Error,
    pub partial: Trajectory<T>,
}

impl<T: Real> fmt::Display for IntegrationFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "integration aborted at t={}: {}", self.time, self.reason)
    }
}

impl<T: Real> std::error::Error for IntegrationFailure<T> {}

fn axpy<T: Real>(x: &[T], a: T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(xi, di)| *xi + a * *di).collect()
}

fn eval_checked<T: Real, F>(rhs: &F, state: &[T]) -> Result<Vec<T>>
where
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let d = rhs(state)?;
    if d.len() != state.len() {
        return Err(Error::DimensionMismatch {
            what: "rhs output",
            expected: state.len(),
            got: d.len(),
        });
    }
    if !all_finite(&d) {
        return Err(Error::NonFinite {
            what: "rhs evaluation".into(),
        });
    }
    Ok(d)
}

/// One classical Runge-Kutta step of size `h`.
pub fn rk4_step<T, F>(rhs: &F, state: &[T], h: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    if !(h > T::zero()) {
        return Err(Error::Invalid("nonpositive step".into()));
    }
    let half = h * T::lit(0.5);
    let k1 = eval_checked(rhs, state)?;
    let k2 = eval_checked(rhs, &axpy(state, half, &k1))?;
    let k3 = eval_checked(rhs, &axpy(state, half, &k2))?;
    let k4 = eval_checked(rhs, &axpy(state, h, &k3))?;
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let next: Vec<T> = (0..state.len())
        .map(|i| state[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect();
    if !all_finite(&next) {
        return Err(Error::NonFinite {
            what: "rk4 update".into(),
        });
    }
    Ok(next)
}

fn check_interval<T: Real>(t0: T, t1: T, h: T) -> Result<()> {
    if !(h > T::zero()) {
        return Err(Error::Invalid("nonpositive step".into()));
    }
    if !(t1 > t0) {
        return Err(Error::Invalid("empty time interval".into()));
    }
    Ok(())
}

/// Uniform grid `t0, t0 + h, ...` ending exactly at `t1`; a final step
/// shorter than `h` is kept unless it would be below rounding level.
pub fn uniform_grid<T: Real>(t0: T, t1: T, h: T) -> Vec<T> {
    let span = (t1 - t0) / h;
    let full = span.floor().to_usize().unwrap_or(0);
    let mut grid: Vec<T> = (0..=full).map(|i| t0 + h * T::from_usize(i).unwrap()).collect();
    let last = *grid.last().unwrap();
    let slack = T::epsilon() * T::lit(64.0) * t1.abs().max(T::one());
    if t1 - last > slack || grid.len() == 1 {
        grid.push(t1);
    } else {
        *grid.last_mut().unwrap() = t1;
    }
    grid
}

/// Fixed-step RK4 from `t0` to `t1`, evaluating every monitor at each sample.
/// Setup errors (bad step, bad interval, failing monitor on the initial state)
/// abort with an empty partial trajectory.
pub fn integrate<T, F>(
    rhs: F,
    initial: &[T],
    t0: T,
    t1: T,
    h: T,
    monitors: &[Monitor<T>],
) -> Result<Trajectory<T>, IntegrationFailure<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let fail = |time: T, reason: Error, partial: Trajectory<T>| IntegrationFailure { time, reason, partial };
    let empty = || Trajectory {
        times: vec![],
        states: vec![],
        series: vec![],
    };
    if let Err(e) = check_interval(t0, t1, h) {
        return Err(fail(t0, e, empty()));
    }
    if !all_finite(initial) {
        let e = Error::NonFinite {
            what: "initial state".into(),
        };
        return Err(fail(t0, e, empty()));
    }
    let mut traj = Trajectory::start(t0, initial.to_vec(), monitors).map_err(|e| fail(t0, e, empty()))?;

    let grid = uniform_grid(t0, t1, h);
    let mut state = initial.to_vec();
    for w in grid.windows(2) {
        let next = match rk4_step(&rhs, &state, w[1] - w[0]) {
            Ok(s) => s,
            Err(e) => return Err(fail(w[0], e, traj)),
        };
        if let Err(e) = traj.push(w[1], next.clone(), monitors) {
            return Err(fail(w[1], e, traj));
        }
        state = next;
    }
    Ok(traj)
}

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions<T> {
    pub atol: T,
    pub rtol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        Self {
            atol: T::lit(1e-9),
            rtol: T::lit(1e-9),
            max_steps: 10_000_000,
        }
    }
}

// Dormand-Prince 5(4) tableau
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince attempt: `(y_next, f(y_next), error_norm)`.
fn dopri_attempt<T, F>(rhs: &F, y: &[T], f0: &[T], h: T, opts: &AdaptiveOptions<T>) -> Result<(Vec<T>, Vec<T>, T)>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let d = y.len();
    let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
    k.push(f0.to_vec());
    for s in 1..7 {
        let stage: Vec<T> = (0..d)
            .map(|i| {
                let incr = (0..s).fold(T::zero(), |acc, j| acc + T::lit(DP_A[s][j]) * k[j][i]);
                y[i] + h * incr
            })
            .collect();
        k.push(eval_checked(rhs, &stage)?);
    }
    let y5: Vec<T> = (0..d)
        .map(|i| y[i] + h * (0..7).fold(T::zero(), |acc, j| acc + T::lit(DP_B5[j]) * k[j][i]))
        .collect();
    let mut err_sq = T::zero();
    for i in 0..d {
        let e = h * (0..7).fold(T::zero(), |acc, j| acc + T::lit(DP_B5[j] - DP_B4[j]) * k[j][i]);
        let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err_sq += (e / scale).powi(2);
    }
    let err = (err_sq / T::from_usize(d.max(1)).unwrap()).sqrt();
    // FSAL: the last stage is f(y5)
    let f_next = k.pop().unwrap();
    Ok((y5, f_next, err))
}

fn hermite<T: Real>(t: T, ta: T, ya: &[T], fa: &[T], tb: T, yb: &[T], fb: &[T]) -> Vec<T> {
    let h = tb - ta;
    let s = (t - ta) / h;
    let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
    let h00 = (one + two * s) * (one - s) * (one - s);
    let h10 = s * (one - s) * (one - s);
    let h01 = s * s * (three - two * s);
    let h11 = s * s * (s - one);
    (0..ya.len())
        .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
        .collect()
}

/// Adaptive Dormand-Prince integration; samples are reported on the uniform
/// grid of spacing `output_step` using cubic Hermite dense output.
pub fn integrate_adaptive<T, F>(
    rhs: F,
    initial: &[T],
    t0: T,
    t1: T,
    output_step: T,
    monitors: &[Monitor<T>],
    opts: &AdaptiveOptions<T>,
) -> Result<Trajectory<T>, IntegrationFailure<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<Vec<T>>,
{
    let fail = |time: T, reason: Error, partial: Trajectory<T>| IntegrationFailure { time, reason, partial };
    let empty = || Trajectory {
        times: vec![],
        states: vec![],
        series: vec![],
    };
    if let Err(e) = check_interval(t0, t1, output_step) {
        return Err(fail(t0, e, empty()));
    }
    let mut traj = Trajectory::start(t0, initial.to_vec(), monitors).map_err(|e| fail(t0, e, empty()))?;
    let grid = uniform_grid(t0, t1, output_step);
    let mut next_out = 1;

    let mut t = t0;
    let mut y = initial.to_vec();
    let mut f = match eval_checked(&rhs, &y) {
        Ok(f) => f,
        Err(e) => return Err(fail(t0, e, traj)),
    };
    let mut h = output_step.min(t1 - t0);
    let (safety, min_fac, max_fac) = (T::lit(0.9), T::lit(0.2), T::lit(5.0));
    let fifth = T::lit(0.2);
    let mut steps = 0;

    while next_out < grid.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(fail(t, Error::Invalid("adaptive step limit reached".into()), traj));
        }
        let step = h.min(t1 - t);
        let (y_new, f_new, err) = match dopri_attempt(&rhs, &y, &f, step, opts) {
            Ok(r) => r,
            Err(e) => {
                // a failed stage evaluation is retried with a smaller step
                h = step * T::lit(0.25);
                if h < T::epsilon() * t.abs().max(T::one()) {
                    return Err(fail(t, e, traj));
                }
                continue;
            }
        };
        let factor = if err == T::zero() {
            max_fac
        } else {
            (safety * err.powf(-fifth)).max(min_fac).min(max_fac)
        };
        if err <= T::one() {
            let t_new = if t1 - (t + step) <= T::epsilon() * t1.abs().max(T::one()) {
                t1
            } else {
                t + step
            };
            while next_out < grid.len() && grid[next_out] <= t_new {
                let to = grid[next_out];
                let sample = if to == t_new {
                    y_new.clone()
                } else {
                    hermite(to, t, &y, &f, t_new, &y_new, &f_new)
                };
                if let Err(e) = traj.push(to, sample, monitors) {
                    return Err(fail(to, e, traj));
                }
                next_out += 1;
            }
            t = t_new;
            y = y_new;
            f = f_new;
        } else if step < T::epsilon() * t.abs().max(T::one()) * T::lit(16.0) {
            return Err(fail(t, Error::Invalid("adaptive step underflow".into()), traj));
        }
        h = step * factor;
    }
    Ok(traj)
}

/// Drift `max |v(t) - v(t0)|` of a named series.
pub fn check_conserved<T: Real>(traj: &Trajectory<T>, name: &str, tol: T) -> Result<ValidationReport<T>> {
    let values = traj.series(name).ok_or_else(|| Error::Unknown {
        kind: "series",
        name: name.into(),
    })?;
    let v0 = *values
        .first()
        .ok_or_else(|| Error::Invalid("empty trajectory".into()))?;
    let rows = values
        .iter()
        .zip(&traj.states)
        .map(|(v, s)| Ok(((*v - v0).abs(), BasePoint::new(s.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    ValidationReport::from_residuals(format!("{name}_drift"), rows, tol)
}
