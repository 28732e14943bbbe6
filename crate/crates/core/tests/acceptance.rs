//! Acceptance gate. Runs without the libtest harness so that every
//! criterion prints its verdict line; the process fails if any criterion does.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use algebroid_control::examples::{
    reference_rhs, rigid_body, rolling_ball, rolling_disc, third_order_residual,
};
use algebroid_control::integrator::check_conserved;
use algebroid_control::pontryagin::{dynamic_abnormal_rhs, kinematic_abnormal_rhs};
use algebroid_control::sampling::{uniform_points, uniform_vectors};
use algebroid_control::validate::check_axioms;
use algebroid_control::{integrate, DynState, Example, KinState, Monitor, Path as Traj, ProblemKind};

type Outcome = Result<String, String>;

fn examples() -> Vec<Example> {
    vec![
        rolling_disc(),
        rigid_body(1.0, 2.0).unwrap(),
        rolling_ball(1.0, 1.0).unwrap(),
    ]
}

type Rhs = Arc<dyn Fn(&[f64]) -> algebroid_control::Result<Vec<f64>> + Send + Sync>;

/// Flat internal rhs and Hamiltonian monitor of a normal problem.
fn normal_system(e: &Example, kind: ProblemKind) -> (Rhs, Monitor<f64>) {
    let (n, m, k) = (e.n(), e.m(), e.k());
    if kind.is_dynamic() {
        let p = Arc::new(e.dynamic_problem().unwrap());
        let q = p.clone();
        let h = Monitor::new("H", move |s: &[f64]| q.optimal_hamiltonian(&DynState::from_flat(s, n, m, k)?));
        (Arc::new(move |s: &[f64]| p.extremal_rhs_flat(s)), h)
    } else {
        let p = Arc::new(e.kinematic_problem().unwrap());
        let q = p.clone();
        let h = Monitor::new("H", move |s: &[f64]| q.optimal_hamiltonian(&KinState::from_flat(s, n, m)?));
        (Arc::new(move |s: &[f64]| p.extremal_rhs_flat(s)), h)
    }
}

fn run(e: &Example, kind: ProblemKind, labeled: &[f64], t1: f64, h: f64, monitors: &[Monitor<f64>]) -> Result<Traj, String> {
    let (rhs, _) = normal_system(e, kind);
    let init = e.from_labeled(kind, labeled).map_err(|x| x.to_string())?;
    integrate(|s: &[f64]| rhs(s), &init, 0.0, t1, h, monitors).map_err(|x| format!("{} {kind}: {x}", e.name))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn axioms() -> Outcome {
    let mut worst = Vec::new();
    for e in examples() {
        let pts = uniform_points(e.n(), 100, 2024, -1.0, 1.0);
        for r in check_axioms(&e.algebroid, &pts, 1e-12, 1e-6).map_err(|x| x.to_string())? {
            if !r.passed {
                return Err(format!("{}.{r}", e.name));
            }
            worst.push(format!("{}.{}={:.1e}", e.name, r.identity_name, r.max_residual));
        }
    }
    Ok(worst.join(" "))
}

fn equation_reproduction() -> Outcome {
    let mut details = Vec::new();
    for e in examples() {
        for &block in &e.blocks {
            let kind = block.kind();
            let (rhs, _) = normal_system(&e, kind);
            let mut worst = 0.0f64;
            for labeled in uniform_vectors::<f64>(e.state_dim(kind), 100, 7, -1.0, 1.0) {
                let internal = e.from_labeled(kind, &labeled).map_err(|x| x.to_string())?;
                let generic = e.to_labeled(kind, &rhs(&internal).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
                let expected = reference_rhs(&e, block, &labeled).map_err(|x| x.to_string())?;
                worst = worst.max(max_abs_diff(&generic, &expected));
            }
            if !(worst <= 1e-9) {
                return Err(format!("{block} differs by {worst:.3e}"));
            }
            details.push(format!("{block}={worst:.1e}"));
        }
    }
    Ok(details.join(" "))
}

fn hamiltonian_conservation() -> Outcome {
    let mut details = Vec::new();
    for e in examples() {
        for kind in [ProblemKind::Kinematic, ProblemKind::Dynamic] {
            let (_, h) = normal_system(&e, kind);
            let init: Vec<f64> = uniform_vectors::<f64>(e.state_dim(kind), 1, 31, -0.5, 0.5).remove(0);
            let traj = run(&e, kind, &init, 5.0, 1e-3, &[h])?;
            let h0 = traj.series("H").unwrap()[0];
            let tol = 1e-6 * h0.abs().max(1.0);
            let r = check_conserved(&traj, "H", tol).map_err(|x| x.to_string())?;
            if !r.passed {
                return Err(format!("{} {kind} {r}", e.name));
            }
            details.push(format!("{}/{kind}={:.1e}", e.name, r.max_residual));
        }
    }
    Ok(details.join(" "))
}

fn conserved_quantities() -> Outcome {
    let cases = [
        (rolling_disc(), ProblemKind::Dynamic, vec!["mu1", "mu2"]),
        (rolling_ball(1.0, 1.0).unwrap(), ProblemKind::Dynamic, vec!["mu1+mu4", "mu2+mu5"]),
        (rigid_body(1.0, 1.0).unwrap(), ProblemKind::Kinematic, vec!["mu1"]),
    ];
    let mut details = Vec::new();
    for (e, kind, names) in cases {
        let monitors: Vec<Monitor<f64>> = e
            .conserved(kind)
            .iter()
            .filter(|m| names.contains(&m.name.as_str()))
            .cloned()
            .collect();
        if monitors.len() != names.len() {
            return Err(format!("{} {kind} lacks one of {names:?}", e.name));
        }
        let init: Vec<f64> = uniform_vectors::<f64>(e.state_dim(kind), 1, 5, -0.5, 0.5).remove(0);
        let traj = run(&e, kind, &init, 5.0, 1e-3, &monitors)?;
        for name in names {
            let r = check_conserved(&traj, name, 1e-8).map_err(|x| x.to_string())?;
            if !r.passed {
                return Err(format!("{} {kind} {r}", e.name));
            }
            details.push(format!("{}/{name}={:.1e}", e.name, r.max_residual));
        }
    }
    Ok(details.join(" "))
}

fn closed_form_rotation() -> Outcome {
    let e = rigid_body(1.0, 1.0).unwrap();
    let mu1 = 1.3;
    let traj = run(&e, ProblemKind::Kinematic, &[0.0, 0.0, 0.0, mu1, 0.8, 0.0], std::f64::consts::PI, 1e-3, &[])?;
    let mut worst = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let l = e.to_labeled(ProblemKind::Kinematic, s).map_err(|x| x.to_string())?;
        let exact = [0.8 * (mu1 * t).cos(), 0.8 * (mu1 * t).sin()];
        worst = worst.max(max_abs_diff(&l[4..6], &exact));
    }
    if worst <= 1e-6 {
        Ok(format!("max deviation {worst:.1e}"))
    } else {
        Err(format!("max deviation {worst:.3e}"))
    }
}

fn third_order_system() -> Outcome {
    let e = rigid_body(1.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for init in uniform_vectors::<f64>(10, 3, 13, -0.7, 0.7) {
        let traj = run(&e, ProblemKind::Dynamic, &init, 1.0, 1e-3, &[])?;
        worst = worst.max(third_order_residual(&e, &traj.times, &traj.states).map_err(|x| x.to_string())?);
    }
    if worst <= 1e-4 {
        Ok(format!("max residual {worst:.1e}"))
    } else {
        Err(format!("max residual {worst:.3e}"))
    }
}

fn substituted_equations() -> Outcome {
    let mut details = Vec::new();
    for e in examples() {
        let p = e.kinematic_problem().unwrap();
        let init: Vec<f64> = uniform_vectors::<f64>(e.state_dim(ProblemKind::Kinematic), 1, 17, -0.5, 0.5).remove(0);
        let traj = run(&e, ProblemKind::Kinematic, &init, 1.0, 1e-3, &[])?;
        let r = p.substituted_residual(&traj.times, &traj.states).map_err(|x| x.to_string())?;
        if !(r <= 1e-4) {
            return Err(format!("{} residual {r:.3e}", e.name));
        }
        details.push(format!("{}={r:.1e}", e.name));
    }
    Ok(details.join(" "))
}

fn abnormal_consistency() -> Outcome {
    let mut checked = 0;
    for e in examples() {
        let (n, m, k) = (e.n(), e.m(), e.k());
        let dist = e.distribution;
        let samples = uniform_vectors::<f64>(n + m + 2 * k, 100, 23, -1.0, 1.0);
        for s in samples {
            let x = s[..n].to_vec();
            let mut mu = s[n..n + m].to_vec();
            mu[..k].iter_mut().for_each(|v| *v = 0.0);
            let v = s[n + m..n + m + k].to_vec();
            let u = s[n + m + k..].to_vec();
            let kin = KinState::new(x.clone(), mu.clone());
            let dyn_ = DynState::new(x, v.clone(), mu, vec![0.0; k]);
            let (kd, kr) = kinematic_abnormal_rhs(&e.algebroid, &dist, &kin, &v).map_err(|x| x.to_string())?;
            let (dd, dr) = dynamic_abnormal_rhs(&e.algebroid, &dist, &dyn_, &u).map_err(|x| x.to_string())?;
            if kd.x != dd.x || kd.mu != dd.mu {
                return Err(format!("{}: shared coordinates differ", e.name));
            }
            if dd.pi.iter().any(|p| *p != 0.0) || dd.y != u {
                return Err(format!("{}: pi or y rates wrong", e.name));
            }
            if kr.bracket_condition != dr.bracket_condition || kr.complementary_momentum != dr.complementary_momentum {
                return Err(format!("{}: residuals differ", e.name));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} states identical"))
}

fn rk4_order() -> Outcome {
    let e = rigid_body(1.0, 2.0).unwrap();
    let init = [0.1, 0.2, 0.3, 0.5, 1.0, -0.7];
    let (h, t1) = (0.1, 2.0);
    let end = |step: f64| -> Result<Vec<f64>, String> {
        Ok(run(&e, ProblemKind::Kinematic, &init, t1, step, &[])?.final_state().unwrap().to_vec())
    };
    let reference = end(h / 64.0)?;
    let e1 = max_abs_diff(&end(h)?, &reference);
    let e2 = max_abs_diff(&end(h / 2.0)?, &reference);
    let factor = e1 / e2;
    if (8.0..=32.0).contains(&factor) {
        Ok(format!("factor {factor:.2}"))
    } else {
        Err(format!("factor {factor:.3} (errors {e1:.3e}, {e2:.3e})"))
    }
}

struct Invocation {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn cli(args: &[&str]) -> Result<Invocation, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_algebroid-control"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(Invocation {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    })
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> Result<String, String> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| e.to_string())?;
    Ok(path.display().to_string())
}

fn command_line() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let good = write_scenario(
        dir.path(),
        "disc.toml",
        "example = \"rolling_disc\"\nkind = \"dynamic\"\ninitial = [0, 0, 0, 0.3, 1, -0.5, 0.2, 0.1, 0.4, -0.3, 0.5, 0.2]\nt1 = 1\nstep = 1e-3\n",
    )?;
    let mut tables = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name).display().to_string();
        let r = cli(&["run", "--scenario", &good, "--output", &out])?;
        if r.code != 0 {
            return Err(format!("good scenario exited {}: {}", r.code, r.stderr));
        }
        tables.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let piped = cli(&["run", "--scenario", &good])?.stdout;
    if tables[0] != tables[1] || tables[0] != piped || tables[0].is_empty() {
        return Err("repeated runs differ".into());
    }

    let base = ["run", "--example", "rigid_body", "--kind", "kinematic"];
    let with = |extra: &[&str]| -> Result<Invocation, String> {
        cli(&base.iter().chain(extra).copied().collect::<Vec<_>>())
    };
    let usage = with(&["--init", "0,0,0,1,1,0", "--t1", "1", "--step", "0"])?;
    if usage.code != 1 || !usage.stderr.contains("reason=\"nonpositive step\"") {
        return Err(format!("zero step exited {}: {}", usage.code, usage.stderr));
    }
    let validation = with(&["--init", "0,0,1", "--t1", "1", "--step", "0.1"])?;
    if validation.code != 2 || !validation.stderr.starts_with("error kind=validation") {
        return Err(format!("short state exited {}: {}", validation.code, validation.stderr));
    }
    let blow_up = with(&["--param", "I2=1", "--param", "I3=2", "--init", "0,0,0,10,10,10", "--t1", "100", "--step", "1"])?;
    if blow_up.code != 3 || !blow_up.stderr.starts_with("error kind=integration") || blow_up.stdout.is_empty() {
        return Err(format!("blow-up exited {}: {}", blow_up.code, blow_up.stderr));
    }

    let v = cli(&["validate"])?;
    let text = String::from_utf8_lossy(&v.stdout).into_owned();
    let lines: Vec<&str> = text.lines().collect();
    let all_pass = lines.len() == 9 && lines.iter().all(|l| l.ends_with(" PASS"));
    let covered = ["rolling_disc.", "rigid_body.", "rolling_ball."]
        .iter()
        .all(|p| lines.iter().filter(|l| l.starts_with(p)).count() == 3);
    if v.code != 0 || !all_pass || !covered {
        return Err(format!("validate exited {}:\n{text}", v.code));
    }
    Ok("byte-identical reruns, exit codes 0/1/2/3, validate PASS".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("axiom suite", axioms),
        ("equation reproduction", equation_reproduction),
        ("hamiltonian conservation", hamiltonian_conservation),
        ("conserved quantities", conserved_quantities),
        ("closed-form rotation", closed_form_rotation),
        ("third-order system", third_order_system),
        ("substituted equations", substituted_equations),
        ("abnormal consistency", abnormal_consistency),
        ("rk4 order", rk4_order),
        ("command line", command_line),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
