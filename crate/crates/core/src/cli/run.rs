//! Executes one scenario: builds the extremal system, integrates it and
//! renders the trajectory table and the report.

use std::fmt::Write as _;
use std::sync::Arc;

use super::scenario::{IntegratorChoice, Scenario};
use super::CliError;
use crate::algebroid::BasePoint;
use crate::error::{Error, Result};
use crate::examples::{example_by_name, ExampleProblem, ProblemKind};
use crate::integrator::{
    check_conserved, integrate, integrate_adaptive, AdaptiveOptions, IntegrationFailure, Monitor, Trajectory,
    HAMILTONIAN,
};
use crate::pontryagin::{
    dynamic_abnormal_rhs, kinematic_abnormal_rhs, DynamicState, KinematicState, ABNORMAL_TOL,
};
use crate::scalar::max_abs;
use crate::validate::ValidationReport;

pub const CONSERVED_TOL: f64 = 1e-8;
pub const OPTIMALITY_TOL: f64 = 1e-8;
pub const HAMILTONIAN_REL_TOL: f64 = 1e-6;

type Rhs = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// How a monitor enters the report.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Check {
    Drift(f64),
    RelativeDrift(f64),
    Max(f64),
    None,
}

struct System {
    rhs: Rhs,
    /// `H` first, then every other monitor the kind offers.
    monitors: Vec<(Monitor<f64>, Check)>,
}

/// Successful or partial run output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub csv: String,
    pub report: String,
    /// Set when integration stopped early; `csv` then holds the partial table.
    pub failure: Option<String>,
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::validation(e.to_string())
}

pub fn execute(s: &Scenario) -> std::result::Result<RunOutcome, CliError> {
    let example: ExampleProblem<f64> = example_by_name(&s.example, &s.parameters).map_err(|e| match e {
        Error::Unknown { .. } => CliError::usage(e.to_string()),
        other => validation(other),
    })?;
    if !example.supports(s.kind) {
        return Err(CliError::validation(format!("{} does not support kind {}", example.name, s.kind)));
    }
    let expected = example.state_dim(s.kind);
    if s.initial.len() != expected {
        return Err(CliError::validation(format!(
            "initial state has {} entries, {} {} needs {expected} ({})",
            s.initial.len(),
            example.name,
            s.kind,
            example.state_names(s.kind).join(",")
        )));
    }
    if s.initial.iter().any(|v| !v.is_finite()) {
        return Err(CliError::validation("initial state is not finite"));
    }
    let initial = example.from_labeled(s.kind, &s.initial).map_err(validation)?;
    let system = build_system(&example, s, &initial)?;
    let monitors = select_monitors(system.monitors, &s.monitors)?;
    let plain: Vec<Monitor<f64>> = monitors.iter().map(|(m, _)| m.clone()).collect();

    let rhs = system.rhs.clone();
    let result = match s.integrator {
        IntegratorChoice::Rk4 => integrate(|x: &[f64]| rhs(x), &initial, s.t0, s.t1, s.step, &plain),
        IntegratorChoice::Rk45 => integrate_adaptive(
            |x: &[f64]| rhs(x),
            &initial,
            s.t0,
            s.t1,
            s.step,
            &plain,
            &AdaptiveOptions::default(),
        ),
    };
    let names = example.state_names(s.kind);
    match result {
        Ok(traj) => Ok(RunOutcome {
            csv: render_csv(&example, s.kind, &names, &traj).map_err(validation)?,
            report: render_report(&traj, &monitors).map_err(validation)?,
            failure: None,
        }),
        Err(IntegrationFailure { time, reason, partial }) => {
            if partial.is_empty() {
                // setup problems: the initial state itself is rejected
                return Err(validation(reason));
            }
            Ok(RunOutcome {
                csv: render_csv(&example, s.kind, &names, &partial).map_err(validation)?,
                report: String::new(),
                failure: Some(format!("integration aborted at t={time}: {reason}")),
            })
        }
    }
}

fn build_system(example: &ExampleProblem<f64>, s: &Scenario, initial: &[f64]) -> std::result::Result<System, CliError> {
    let (n, m, k) = (example.n(), example.m(), example.k());
    let conserved = |kind| {
        example
            .conserved(kind)
            .iter()
            .map(|c| (c.clone(), Check::Drift(CONSERVED_TOL)))
            .collect::<Vec<_>>()
    };
    if !s.kind.is_abnormal() && s.control.is_some() {
        return Err(CliError::validation("controls are only supplied for abnormal kinds"));
    }
    match s.kind {
        ProblemKind::Kinematic => {
            let p = Arc::new(example.kinematic_problem().map_err(validation)?);
            let (ph, po, pr) = (p.clone(), p.clone(), p.clone());
            let mut monitors = vec![
                (
                    Monitor::new(HAMILTONIAN, move |x: &[f64]| {
                        ph.optimal_hamiltonian(&KinematicState::from_flat(x, n, m)?)
                    }),
                    Check::RelativeDrift(HAMILTONIAN_REL_TOL),
                ),
                (
                    Monitor::new("optimality", move |x: &[f64]| {
                        po.optimality_residual(&KinematicState::from_flat(x, n, m)?)
                    }),
                    Check::Max(OPTIMALITY_TOL),
                ),
            ];
            monitors.extend(conserved(ProblemKind::Kinematic));
            Ok(System {
                rhs: Arc::new(move |x: &[f64]| pr.extremal_rhs_flat(x)),
                monitors,
            })
        }
        ProblemKind::Dynamic => {
            let p = Arc::new(example.dynamic_problem().map_err(validation)?);
            let (ph, po, pr) = (p.clone(), p.clone(), p.clone());
            let mut monitors = vec![
                (
                    Monitor::new(HAMILTONIAN, move |x: &[f64]| {
                        ph.optimal_hamiltonian(&DynamicState::from_flat(x, n, m, k)?)
                    }),
                    Check::RelativeDrift(HAMILTONIAN_REL_TOL),
                ),
                (
                    Monitor::new("optimality", move |x: &[f64]| {
                        po.optimality_residual(&DynamicState::from_flat(x, n, m, k)?)
                    }),
                    Check::Max(OPTIMALITY_TOL),
                ),
            ];
            monitors.extend(conserved(ProblemKind::Dynamic));
            Ok(System {
                rhs: Arc::new(move |x: &[f64]| pr.extremal_rhs_flat(x)),
                monitors,
            })
        }
        ProblemKind::KinematicAbnormal | ProblemKind::DynamicAbnormal => abnormal_system(example, s, initial),
    }
}

fn abnormal_system(example: &ExampleProblem<f64>, s: &Scenario, initial: &[f64]) -> std::result::Result<System, CliError> {
    let (n, m, k) = (example.n(), example.m(), example.k());
    let labeled = s
        .control
        .as_ref()
        .ok_or_else(|| CliError::validation(format!("{} needs --control with {k} entries", s.kind)))?;
    let u = example.constrained_from_labeled(labeled).map_err(validation)?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(CliError::validation("controls are not finite"));
    }
    let (alg, dist) = (example.algebroid.clone(), example.distribution);
    let dynamic = s.kind.is_dynamic();

    // precondition on the initial state
    let mu_off = if dynamic { n + k } else { n };
    let mu_a = max_abs(&initial[mu_off..mu_off + k]);
    let pi = if dynamic { max_abs(&initial[n + k + m..]) } else { 0.0 };
    if !(mu_a <= ABNORMAL_TOL) || !(pi <= ABNORMAL_TOL) {
        return Err(CliError::validation("abnormal kinds need constrained momenta and pi at zero"));
    }

    type Eval = Arc<dyn Fn(&[f64]) -> Result<(Vec<f64>, crate::pontryagin::AbnormalResiduals<f64>, f64)> + Send + Sync>;
    let eval: Eval = if dynamic {
        let u = u.clone();
        Arc::new(move |x: &[f64]| {
            let st = DynamicState::from_flat(x, n, m, k)?;
            let h = (0..k).map(|a| st.mu[a] * st.y[a] + st.pi[a] * u[a]).sum();
            let (d, r) = dynamic_abnormal_rhs(&alg, &dist, &st, &u)?;
            Ok((d.to_flat(), r, h))
        })
    } else {
        let u = u.clone();
        Arc::new(move |x: &[f64]| {
            let st = KinematicState::from_flat(x, n, m)?;
            let h = (0..k).map(|a| st.mu[a] * u[a]).sum();
            let (d, r) = kinematic_abnormal_rhs(&alg, &dist, &st, &u)?;
            Ok((d.to_flat(), r, h))
        })
    };
    let field = |f: fn(&crate::pontryagin::AbnormalResiduals<f64>, f64) -> f64| {
        let e = eval.clone();
        move |x: &[f64]| e(x).map(|(_, r, h)| f(&r, h))
    };
    let mut monitors = vec![
        (Monitor::new(HAMILTONIAN, field(|_, h| h)), Check::RelativeDrift(HAMILTONIAN_REL_TOL)),
        (Monitor::new("mu_a", field(|r, _| r.constrained_momentum)), Check::Max(ABNORMAL_TOL)),
        (Monitor::new("bracket", field(|r, _| r.bracket_condition)), Check::Max(ABNORMAL_TOL)),
        (Monitor::new("mu_A", field(|r, _| r.complementary_momentum)), Check::None),
    ];
    if dynamic {
        monitors.push((Monitor::new("pi", field(|r, _| r.pi.unwrap_or(0.0))), Check::Max(ABNORMAL_TOL)));
    }
    let e = eval.clone();
    Ok(System {
        rhs: Arc::new(move |x: &[f64]| e(x).map(|(d, _, _)| d)),
        monitors,
    })
}

/// Keeps `H` plus the requested monitors; an empty request keeps all.
fn select_monitors(
    available: Vec<(Monitor<f64>, Check)>,
    requested: &[String],
) -> std::result::Result<Vec<(Monitor<f64>, Check)>, CliError> {
    if requested.is_empty() {
        return Ok(available);
    }
    if let Some(bad) = requested.iter().find(|r| !available.iter().any(|(m, _)| &m.name == *r)) {
        let names: Vec<&str> = available.iter().map(|(m, _)| m.name.as_str()).collect();
        return Err(CliError::validation(format!("unknown monitor {bad}, available: {}", names.join(","))));
    }
    Ok(available
        .into_iter()
        .filter(|(m, _)| m.name == HAMILTONIAN || requested.contains(&m.name))
        .collect())
}

/// Trajectory table: header `t,<state names>,<monitor names>`, state columns
/// in labeled order, every real with 17 significant digits.
pub fn render_csv(
    example: &ExampleProblem<f64>,
    kind: ProblemKind,
    names: &[String],
    traj: &Trajectory<f64>,
) -> Result<String> {
    if traj.is_empty() {
        return Err(Error::Invalid("empty trajectory".into()));
    }
    let mut out = String::from("t");
    for name in names.iter().map(String::as_str).chain(traj.series.iter().map(|(n, _)| n.as_str())) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, (t, state)) in traj.times.iter().zip(&traj.states).enumerate() {
        let labeled = example.to_labeled(kind, state)?;
        write!(out, "{t:.16e}").expect("writing to a String");
        for v in labeled.iter().chain(traj.series.iter().map(|(_, s)| &s[i])) {
            write!(out, ",{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

fn render_report(traj: &Trajectory<f64>, monitors: &[(Monitor<f64>, Check)]) -> Result<String> {
    let mut out = String::new();
    for (m, check) in monitors {
        let report = match *check {
            Check::Drift(tol) => check_conserved(traj, &m.name, tol)?,
            Check::RelativeDrift(rel) => {
                let h0 = traj.series(&m.name).and_then(|s| s.first().copied()).unwrap_or(0.0);
                check_conserved(traj, &m.name, rel * h0.abs().max(1.0))?
            }
            Check::Max(tol) => {
                let values = traj.series(&m.name).unwrap_or(&[]);
                let rows = values
                    .iter()
                    .zip(&traj.states)
                    .map(|(v, s)| Ok((v.abs(), BasePoint::new(s.clone())?)))
                    .collect::<Result<Vec<_>>>()?;
                ValidationReport::from_residuals(m.name.clone(), rows, tol)?
            }
            Check::None => continue,
        };
        writeln!(out, "{report}").expect("writing to a String");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::ExitStatus;
    use crate::examples::rolling_disc;
    use std::collections::BTreeMap;

    fn scenario(example: &str, kind: ProblemKind, initial: Vec<f64>) -> Scenario {
        Scenario {
            example: example.into(),
            kind,
            parameters: BTreeMap::new(),
            initial,
            t0: 0.0,
            t1: 0.01,
            step: 1e-3,
            integrator: IntegratorChoice::Rk4,
            monitors: vec![],
            control: None,
            output: None,
            report: None,
        }
    }

    #[test]
    fn constant_trajectory_has_header_and_rows() {
        let d = rolling_disc::<f64>();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![vec![0.0; 8]; 2],
            series: vec![("H".into(), vec![0.5, 0.5])],
        };
        let names = d.state_names(ProblemKind::Kinematic);
        let csv = render_csv(&d, ProblemKind::Kinematic, &names, &traj).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.ends_with('\n'));
        assert!(csv.starts_with("t,x1,x2,x3,x4,mu1,mu2,mu3,mu4,H\n"));
        assert!(csv.contains("1.0000000000000000e0,"));
    }

    #[test]
    fn disc_dynamic_columns() {
        let mut init = vec![0.0; 12];
        init[4] = 1.0;
        init[6] = 1.0;
        let out = execute(&scenario("rolling_disc", ProblemKind::Dynamic, init)).unwrap();
        let header = out.csv.lines().next().unwrap();
        assert_eq!(
            header,
            "t,x1,x2,x3,x4,y3,y4,mu1,mu2,mu3,mu4,pi3,pi4,H,optimality,mu1,mu2"
        );
        assert!(out.report.lines().all(|l| l.ends_with("PASS")), "{}", out.report);
    }

    #[test]
    fn wrong_length_is_validation_error() {
        let e = execute(&scenario("rigid_body", ProblemKind::Kinematic, vec![0.0; 5])).unwrap_err();
        assert_eq!(e.status, ExitStatus::Validation);
    }

    #[test]
    fn abnormal_needs_zero_constrained_momenta() {
        let mut s = scenario("rigid_body", ProblemKind::KinematicAbnormal, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        s.control = Some(vec![0.0, 0.0]);
        let e = execute(&s).unwrap_err();
        assert_eq!(e.status, ExitStatus::Validation);
        s.initial = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let out = execute(&s).unwrap();
        assert!(out.csv.lines().next().unwrap().ends_with("H,mu_a,bracket,mu_A"));
    }

    #[test]
    fn unknown_monitor_rejected() {
        let mut s = scenario("rigid_body", ProblemKind::Kinematic, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        s.monitors = vec!["energy".into()];
        assert_eq!(execute(&s).unwrap_err().status, ExitStatus::Validation);
        s.monitors = vec!["casimir".into()];
        let out = execute(&s).unwrap();
        assert!(out.csv.lines().next().unwrap().ends_with(",H,casimir"));
    }

    #[test]
    fn blow_up_is_reported_with_partial_table() {
        // a step far beyond the momentum time scale drives RK4 to overflow
        let mut s = scenario("rigid_body", ProblemKind::Kinematic, vec![0.0, 0.0, 0.0, 10.0, 10.0, 10.0]);
        s.parameters = BTreeMap::from([("I2".into(), 1.0), ("I3".into(), 2.0)]);
        s.t1 = 100.0;
        s.step = 1.0;
        let out = execute(&s).unwrap();
        assert!(out.failure.is_some());
        assert!(out.csv.lines().count() >= 2);
    }
}
