//! Scenario description: a flat TOML file, command-line flags, or both
//! (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::examples::ProblemKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegratorChoice {
    #[default]
    Rk4,
    Rk45,
}

impl std::str::FromStr for IntegratorChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "rk45" => Ok(Self::Rk45),
            other => Err(CliError::usage(format!("unknown integrator {other}"))),
        }
    }
}

/// Raw scenario file contents; every key is optional so flags can fill gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub example: Option<String>,
    pub kind: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub initial: Option<Vec<f64>>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub step: Option<f64>,
    pub integrator: Option<String>,
    pub monitors: Option<Vec<String>>,
    pub control: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl ScenarioFile {
    /// Parses a file; relative output paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read scenario {}: {e}", path.display())))?;
        let mut file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("scenario {}: {}", path.display(), e.message())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut file.output, &mut file.report].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(file)
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(mut self, other: ScenarioFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(example, kind, initial, t0, t1, step, integrator, monitors, control, output, report);
        self.parameters.extend(other.parameters);
        self
    }

    pub fn resolve(self) -> Result<Scenario, CliError> {
        let missing = |what: &str| CliError::usage(format!("missing {what}"));
        let example = self.example.ok_or_else(|| missing("example"))?;
        if example == "custom" {
            return Err(CliError::usage("custom problems are built through the library"));
        }
        let kind: ProblemKind = self
            .kind
            .ok_or_else(|| missing("kind"))?
            .parse()
            .map_err(|e: crate::error::Error| CliError::usage(e.to_string()))?;
        let t0 = self.t0.unwrap_or(0.0);
        let t1 = self.t1.ok_or_else(|| missing("t1"))?;
        let step = self.step.ok_or_else(|| missing("step"))?;
        if !(step > 0.0) || !step.is_finite() {
            return Err(CliError::usage("nonpositive step"));
        }
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(CliError::usage("empty time interval"));
        }
        Ok(Scenario {
            example,
            kind,
            parameters: self.parameters,
            initial: self.initial.ok_or_else(|| missing("initial state"))?,
            t0,
            t1,
            step,
            integrator: self.integrator.as_deref().map(str::parse).transpose()?.unwrap_or_default(),
            monitors: self.monitors.unwrap_or_default(),
            control: self.control,
            output: self.output,
            report: self.report,
        })
    }
}

/// A complete, syntactically valid scenario. Semantic checks against the
/// example happen when it runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub example: String,
    pub kind: ProblemKind,
    pub parameters: BTreeMap<String, f64>,
    /// Labeled state order, as printed by `list-examples`.
    pub initial: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
    pub integrator: IntegratorChoice,
    pub monitors: Vec<String>,
    /// Constant controls for abnormal kinds, labeled constrained order.
    pub control: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::ExitStatus;

    fn parse(text: &str) -> ScenarioFile {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn full_file_resolves() {
        let s = parse(
            r#"
            example = "rigid_body"
            kind = "kinematic"
            initial = [0, 0, 0, 1, 1, 0]
            t1 = 5
            step = 1e-3
            integrator = "rk45"
            [parameters]
            I2 = 1
            I3 = 1.5
            "#,
        )
        .resolve()
        .unwrap();
        assert_eq!(s.kind, ProblemKind::Kinematic);
        assert_eq!(s.initial, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(s.parameters["I3"], 1.5);
        assert_eq!(s.integrator, IntegratorChoice::Rk45);
        assert_eq!(s.t0, 0.0);
    }

    #[test]
    fn flags_override_file() {
        let file = parse("example = \"rolling_disc\"\nstep = 0.1\n[parameters]\na = 1\n");
        let flags = ScenarioFile {
            step: Some(0.2),
            parameters: BTreeMap::from([("b".into(), 2.0)]),
            ..Default::default()
        };
        let m = file.merge(flags);
        assert_eq!(m.step, Some(0.2));
        assert_eq!(m.example.as_deref(), Some("rolling_disc"));
        assert_eq!(m.parameters.len(), 2);
    }

    #[test]
    fn nonpositive_step_is_usage_error() {
        let e = parse("example = \"rigid_body\"\nkind = \"kinematic\"\ninitial = [0]\nt1 = 1\nstep = 0")
            .resolve()
            .unwrap_err();
        assert_eq!(e.status, ExitStatus::Usage);
        assert_eq!(e.reason, "nonpositive step");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<ScenarioFile>("stepsize = 1").is_err());
    }

    #[test]
    fn missing_and_bad_fields() {
        let e = parse("kind = \"dynamic\"").resolve().unwrap_err();
        assert_eq!(e.reason, "missing example");
        let e = parse("example = \"rigid_body\"\nkind = \"geodesic\"").resolve().unwrap_err();
        assert_eq!(e.status, ExitStatus::Usage);
    }
}
