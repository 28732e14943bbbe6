//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
//! 3 integration failure. Every error also prints one line
//! `error kind=<class> reason="<text>"` on stderr.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::examples::{example_by_name, ProblemKind, EXAMPLE_NAMES};
use crate::sampling::uniform_points;
use crate::validate::check_axioms;

pub mod run;
pub mod scenario;

pub use run::{execute, render_csv, RunOutcome};
pub use scenario::{IntegratorChoice, Scenario, ScenarioFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    Validation = 2,
    Integration = 3,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }

    fn class(self) -> &'static str {
        match self {
            ExitStatus::Success => "none",
            ExitStatus::Usage => "usage",
            ExitStatus::Validation => "validation",
            ExitStatus::Integration => "integration",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub status: ExitStatus,
    pub reason: String,
}

impl CliError {
    pub fn usage(reason: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Usage,
            reason: reason.into(),
        }
    }

    pub fn validation(reason: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Validation,
            reason: reason.into(),
        }
    }

    pub fn integration(reason: impl Into<String>) -> Self {
        Self {
            status: ExitStatus::Integration,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for CliError {
    /// Single line: quotes and line breaks in the reason are flattened.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason: String = self
            .reason
            .chars()
            .map(|c| match c {
                '"' => '\'',
                '\n' | '\r' => ' ',
                c => c,
            })
            .collect();
        write!(f, "error kind={} reason=\"{}\"", self.status.class(), reason)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "algebroid-control", version, about = "Pontryagin extremals on Lie algebroids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate an extremal system and write its trajectory and report.
    Run(RunArgs),
    /// Check the Lie algebroid axioms of the shipped examples.
    Validate(ValidateArgs),
    /// List the examples with their parameters and state orders.
    ListExamples,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Scenario file (TOML); flags override its keys.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Run every `*.toml` scenario in a directory, in parallel.
    #[arg(long, conflicts_with = "scenario")]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub example: Option<String>,
    /// kinematic, dynamic, kinematic-abnormal or dynamic-abnormal.
    #[arg(long)]
    pub kind: Option<String>,
    /// Example parameter, e.g. `I2=1`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Initial state, comma separated, in the order shown by `list-examples`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Fixed step (rk4) or output spacing (rk45).
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// rk4 or rk45.
    #[arg(long)]
    pub integrator: Option<String>,
    /// Monitor to record besides H; repeatable. Default: all.
    #[arg(long = "monitor")]
    pub monitors: Vec<String>,
    /// Constant controls for abnormal kinds, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub control: Option<Vec<f64>>,
    /// Trajectory CSV path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report path; stdout when absent and the CSV goes to a file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Example to check; repeatable. Default: all three.
    #[arg(long = "example")]
    pub examples: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

/// Tolerances of the axiom checks run by `validate`.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
pub const DERIVATIVE_TOL: f64 = 1e-6;

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    raw.iter()
        .map(|p| {
            let (name, value) = p
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("parameter {p} is not NAME=VALUE")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("parameter {name} has non-numeric value {value}")))?;
            Ok((name.trim().to_string(), v))
        })
        .collect()
}

impl RunArgs {
    fn flags(&self) -> Result<ScenarioFile, CliError> {
        Ok(ScenarioFile {
            example: self.example.clone(),
            kind: self.kind.clone(),
            parameters: parse_params(&self.params)?,
            initial: self.init.clone(),
            t0: self.t0,
            t1: self.t1,
            step: self.step,
            integrator: self.integrator.clone(),
            monitors: (!self.monitors.is_empty()).then(|| self.monitors.clone()),
            control: self.control.clone(),
            output: self.output.clone(),
            report: self.report.clone(),
        })
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return ExitStatus::Success.code();
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(stderr, "{e}");
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let _ = writeln!(stderr, "{}", CliError::usage(first));
            return ExitStatus::Usage.code();
        }
    };
    let result = match cli.command {
        Command::Run(args) => run_command(&args, stdout, stderr),
        Command::Validate(args) => validate_command(&args, stdout),
        Command::ListExamples => list_examples(stdout),
    };
    match result {
        Ok(()) => ExitStatus::Success.code(),
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.status.code()
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes the outputs of one scenario; integration failures still leave the
/// partial table behind.
fn deliver(s: &Scenario, outcome: &RunOutcome, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(format!("cannot write to stdout: {e}"));
    match &s.output {
        Some(p) => write_file(p, &outcome.csv)?,
        None => stdout.write_all(outcome.csv.as_bytes()).map_err(io)?,
    }
    if let Some(reason) = &outcome.failure {
        return Err(CliError::integration(reason.clone()));
    }
    match (&s.report, &s.output) {
        (Some(p), _) => write_file(p, &outcome.report)?,
        (None, Some(_)) => stdout.write_all(outcome.report.as_bytes()).map_err(io)?,
        (None, None) => {}
    }
    Ok(())
}

fn run_command(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    if let Some(dir) = &args.batch {
        return run_batch(dir, args, stdout, stderr);
    }
    let base = match &args.scenario {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::default(),
    };
    let scenario = base.merge(args.flags()?).resolve()?;
    let outcome = execute(&scenario)?;
    deliver(&scenario, &outcome, stdout)
}

/// Scenarios of a batch run concurrently; outputs default to
/// `<stem>.csv` and `<stem>.report` beside each file. Messages are printed
/// in file-name order once all runs finish.
fn run_batch(dir: &Path, args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::usage(format!("cannot read batch directory {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::usage(format!("no scenarios in {}", dir.display())));
    }
    let flags = args.flags()?;
    let results: Vec<(PathBuf, Result<(), CliError>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| {
                let flags = flags.clone();
                scope.spawn(move || {
                    let one = || -> Result<(), CliError> {
                        let mut file = ScenarioFile::load(path)?.merge(flags);
                        file.output.get_or_insert_with(|| path.with_extension("csv"));
                        file.report.get_or_insert_with(|| path.with_extension("report"));
                        let s = file.resolve()?;
                        let outcome = execute(&s)?;
                        deliver(&s, &outcome, &mut std::io::sink())
                    };
                    one()
                })
            })
            .collect();
        files
            .iter()
            .cloned()
            .zip(handles.into_iter().map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::validation("scenario thread panicked")))
            }))
            .collect()
    });
    let mut worst = ExitStatus::Success;
    for (path, r) in &results {
        match r {
            Ok(()) => {
                let _ = writeln!(stdout, "{} ok", path.display());
            }
            Err(e) => {
                let _ = writeln!(stderr, "{} scenario=\"{}\"", e, path.display());
                worst = worst.max(e.status);
            }
        }
    }
    match worst {
        ExitStatus::Success => Ok(()),
        status => Err(CliError {
            status,
            reason: "batch had failing scenarios".into(),
        }),
    }
}

fn validate_command(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::usage("samples must be positive"));
    }
    let names: Vec<String> = if args.examples.is_empty() {
        EXAMPLE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.examples.clone()
    };
    let params = parse_params(&args.params)?;
    let mut all_passed = true;
    for name in &names {
        if !EXAMPLE_NAMES.contains(&name.as_str()) {
            return Err(CliError::usage(format!("unknown example {name}")));
        }
        // parameters apply to the examples that declare them
        let own: BTreeMap<String, f64> = match name.as_str() {
            "rigid_body" => params.iter().filter(|(k, _)| *k == "I2" || *k == "I3").map(|(k, v)| (k.clone(), *v)).collect(),
            "rolling_ball" => params.iter().filter(|(k, _)| *k == "r" || *k == "k").map(|(k, v)| (k.clone(), *v)).collect(),
            _ => BTreeMap::new(),
        };
        let example = example_by_name::<f64>(name, &own).map_err(|e| CliError::validation(e.to_string()))?;
        let points = uniform_points(example.n(), args.samples, args.seed, -1.0, 1.0);
        let reports = check_axioms(&example.algebroid, &points, ANTISYMMETRY_TOL, DERIVATIVE_TOL)
            .map_err(|e| CliError::validation(e.to_string()))?;
        for mut r in reports {
            all_passed &= r.passed;
            r.identity_name = format!("{name}.{}", r.identity_name);
            writeln!(stdout, "{r}").map_err(|e| CliError::usage(e.to_string()))?;
        }
    }
    if all_passed {
        Ok(())
    } else {
        Err(CliError::validation("axiom check failed"))
    }
}

fn list_examples(stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut text = String::new();
    for name in EXAMPLE_NAMES {
        let e = example_by_name::<f64>(name, &BTreeMap::new()).map_err(|e| CliError::validation(e.to_string()))?;
        let params: Vec<String> = e.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        text.push_str(&format!("{name} n={} m={} k={} params=[{}]\n", e.n(), e.m(), e.k(), params.join(",")));
        for kind in ProblemKind::ALL.into_iter().filter(|k| e.supports(*k)) {
            text.push_str(&format!("  {kind}: {}\n", e.state_names(kind).join(",")));
        }
    }
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with(std::iter::once("algebroid-control").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn error_line_is_single_line() {
        let e = CliError::usage("bad \"x\"\nsecond");
        assert_eq!(e.to_string(), "error kind=usage reason=\"bad 'x' second\"");
    }

    #[test]
    fn nonpositive_step_exit_1() {
        let (code, _, err) = run(&[
            "run", "--example", "rigid_body", "--kind", "kinematic", "--init", "0,0,0,1,1,0", "--t1", "1", "--step",
            "-0.1",
        ]);
        assert_eq!(code, 1);
        assert_eq!(err.trim(), "error kind=usage reason=\"nonpositive step\"");
    }

    #[test]
    fn unparsable_flag_exit_1() {
        let (code, _, err) = run(&["run", "--t1", "soon"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error kind=usage"), "{err}");
        assert_eq!(run(&["frobnicate"]).0, 1);
    }

    #[test]
    fn validate_single_example() {
        let (code, out, _) = run(&["validate", "--example", "rolling_ball", "--samples", "100"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.starts_with("rolling_ball.") && l.ends_with(" PASS")));
    }

    #[test]
    fn list_shows_state_orders() {
        let (code, out, _) = run(&["list-examples"]);
        assert_eq!(code, 0);
        assert!(out.contains("  dynamic: x1,x2,x3,x4,y3,y4,mu1,mu2,mu3,mu4,pi3,pi4"));
    }

    #[test]
    fn negative_initial_values_parse() {
        let (code, out, err) = run(&[
            "run", "--example", "rigid_body", "--kind", "kinematic", "--init", "-0.1,0,0,1,-1,0", "--t1", "0.002",
            "--step", "1e-3",
        ]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out.lines().count(), 4);
    }
}
