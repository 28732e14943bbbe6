//! The rolling disc, the rigid body with one velocity constraint and the
//! rolling ball, packaged as ready-made problems.
//!
//! Internally every basis is ordered constrained-first. Each example carries
//! the label of every internal basis element; files and reference equations
//! use the labeled order (sections sorted by label).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebroid::{ConstraintDistribution, LieAlgebroid};
use crate::error::{Error, Result};
use crate::integrator::Monitor;
use crate::pontryagin::{DynamicCost, DynamicProblem, KinematicCost, KinematicProblem};
use crate::scalar::Real;

pub mod reference;
pub mod rigid_body;
pub mod rolling_ball;
pub mod rolling_disc;

pub use reference::{reference_rhs, Block};
pub use rigid_body::{rigid_body, third_order_residual};
pub use rolling_ball::{rolling_ball, rolling_ball_lagrangian};
pub use rolling_disc::rolling_disc;

pub const EXAMPLE_NAMES: [&str; 3] = ["rolling_disc", "rigid_body", "rolling_ball"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Kinematic,
    Dynamic,
    KinematicAbnormal,
    DynamicAbnormal,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Kinematic,
        ProblemKind::Dynamic,
        ProblemKind::KinematicAbnormal,
        ProblemKind::DynamicAbnormal,
    ];

    pub fn is_dynamic(self) -> bool {
        matches!(self, ProblemKind::Dynamic | ProblemKind::DynamicAbnormal)
    }

    pub fn is_abnormal(self) -> bool {
        matches!(self, ProblemKind::KinematicAbnormal | ProblemKind::DynamicAbnormal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Kinematic => "kinematic",
            ProblemKind::Dynamic => "dynamic",
            ProblemKind::KinematicAbnormal => "kinematic-abnormal",
            ProblemKind::DynamicAbnormal => "dynamic-abnormal",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "problem kind",
                name: s.to_string(),
            })
    }
}

pub type ReducedFn<T> = Arc<dyn Fn(&[T]) -> Result<Vec<T>> + Send + Sync>;
pub type LiftFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// A reduced system written directly in derivatives of the base
/// coordinates, plus the map taking a full internal extremal state to it.
/// Constants of the motion sit at the end of the reduced state with zero
/// derivative.
#[derive(Clone)]
pub struct ReducedSystem<T> {
    pub name: &'static str,
    pub kind: ProblemKind,
    pub names: Vec<&'static str>,
    pub rhs: ReducedFn<T>,
    pub lift: LiftFn<T>,
}

impl<T> fmt::Debug for ReducedSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedSystem")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("names", &self.names)
            .finish()
    }
}

#[derive(Clone)]
pub struct ExampleProblem<T> {
    pub name: &'static str,
    pub algebroid: LieAlgebroid<T>,
    pub distribution: ConstraintDistribution,
    pub kinematic_cost: Option<KinematicCost<T>>,
    pub dynamic_cost: Option<DynamicCost<T>>,
    pub parameters: BTreeMap<String, T>,
    /// Label of each internal basis element, e.g. `[3, 4, 1, 2]` for the disc.
    pub basis_labels: Vec<usize>,
    /// Force scaling `c_a` per constrained section for examples whose
    /// dynamic controls are forces: force `= c_a * acceleration`.
    pub force_scaling: Option<Vec<T>>,
    pub kinematic_conserved: Vec<Monitor<T>>,
    pub dynamic_conserved: Vec<Monitor<T>>,
    pub reduced: Vec<ReducedSystem<T>>,
    pub blocks: Vec<Block>,
}

impl<T> fmt::Debug for ExampleProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExampleProblem")
            .field("name", &self.name)
            .field("basis_labels", &self.basis_labels)
            .field("blocks", &self.blocks)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ExampleProblem<T> {
    pub fn n(&self) -> usize {
        self.algebroid.base_dim()
    }

    pub fn m(&self) -> usize {
        self.algebroid.rank()
    }

    pub fn k(&self) -> usize {
        self.distribution.k()
    }

    pub fn parameter(&self, name: &str) -> Result<T> {
        self.parameters.get(name).copied().ok_or_else(|| Error::Unknown {
            kind: "parameter",
            name: name.to_string(),
        })
    }

    pub fn supports(&self, kind: ProblemKind) -> bool {
        match kind {
            ProblemKind::Kinematic => self.kinematic_cost.is_some(),
            ProblemKind::Dynamic => self.dynamic_cost.is_some(),
            _ => true,
        }
    }

    pub fn kinematic_problem(&self) -> Result<KinematicProblem<T>> {
        let cost = self.kinematic_cost.clone().ok_or_else(|| Error::Invalid(format!(
            "{} has no kinematic cost",
            self.name
        )))?;
        Ok(KinematicProblem::new(self.algebroid.clone(), self.distribution, cost))
    }

    pub fn dynamic_problem(&self) -> Result<DynamicProblem<T>> {
        let cost = self.dynamic_cost.clone().ok_or_else(|| Error::Invalid(format!(
            "{} has no dynamic cost",
            self.name
        )))?;
        Ok(DynamicProblem::new(self.algebroid.clone(), self.distribution, cost))
    }

    pub fn state_dim(&self, kind: ProblemKind) -> usize {
        if kind.is_dynamic() {
            self.n() + self.m() + 2 * self.k()
        } else {
            self.n() + self.m()
        }
    }

    /// Internal basis index carrying `label`.
    pub fn internal_index(&self, label: usize) -> Result<usize> {
        self.basis_labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::Unknown {
                kind: "basis label",
                name: label.to_string(),
            })
    }

    /// Internal indices of all sections, sorted by label.
    fn labeled_all(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.m()).collect();
        idx.sort_by_key(|&i| self.basis_labels[i]);
        idx
    }

    /// Internal indices of the constrained sections, sorted by label.
    fn labeled_constrained(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.k()).collect();
        idx.sort_by_key(|&i| self.basis_labels[i]);
        idx
    }

    /// For each labeled slot, the internal flat index it reads from.
    fn labeled_slots(&self, kind: ProblemKind) -> Vec<usize> {
        let (n, m, k) = (self.n(), self.m(), self.k());
        let mut slots: Vec<usize> = (0..n).collect();
        if kind.is_dynamic() {
            let c = self.labeled_constrained();
            slots.extend(c.iter().map(|&a| n + a));
            slots.extend(self.labeled_all().iter().map(|&al| n + k + al));
            slots.extend(c.iter().map(|&a| n + k + m + a));
        } else {
            slots.extend(self.labeled_all().iter().map(|&al| n + al));
        }
        slots
    }

    pub fn state_names(&self, kind: ProblemKind) -> Vec<String> {
        let n = self.n();
        let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let constrained: Vec<usize> = self.labeled_constrained().iter().map(|&a| self.basis_labels[a]).collect();
        let all: Vec<usize> = self.labeled_all().iter().map(|&a| self.basis_labels[a]).collect();
        if kind.is_dynamic() {
            names.extend(constrained.iter().map(|l| format!("y{l}")));
        }
        names.extend(all.iter().map(|l| format!("mu{l}")));
        if kind.is_dynamic() {
            names.extend(constrained.iter().map(|l| format!("pi{l}")));
        }
        names
    }

    fn check_len(&self, kind: ProblemKind, len: usize) -> Result<()> {
        let expected = self.state_dim(kind);
        if len != expected {
            return Err(Error::DimensionMismatch {
                what: "example state",
                expected,
                got: len,
            });
        }
        Ok(())
    }

    pub fn to_labeled(&self, kind: ProblemKind, internal: &[T]) -> Result<Vec<T>> {
        self.check_len(kind, internal.len())?;
        Ok(self.labeled_slots(kind).iter().map(|&s| internal[s]).collect())
    }

    pub fn from_labeled(&self, kind: ProblemKind, labeled: &[T]) -> Result<Vec<T>> {
        self.check_len(kind, labeled.len())?;
        let mut out = vec![T::zero(); labeled.len()];
        for (v, s) in labeled.iter().zip(self.labeled_slots(kind)) {
            out[s] = *v;
        }
        Ok(out)
    }

    /// Reorders a vector over the constrained sections from labeled to internal order.
    pub fn constrained_from_labeled(&self, labeled: &[T]) -> Result<Vec<T>> {
        let k = self.k();
        if labeled.len() != k {
            return Err(Error::DimensionMismatch {
                what: "constrained vector",
                expected: k,
                got: labeled.len(),
            });
        }
        let mut out = vec![T::zero(); k];
        for (v, a) in labeled.iter().zip(self.labeled_constrained()) {
            out[a] = *v;
        }
        Ok(out)
    }

    pub fn conserved(&self, kind: ProblemKind) -> &[Monitor<T>] {
        match kind {
            ProblemKind::Kinematic => &self.kinematic_conserved,
            ProblemKind::Dynamic => &self.dynamic_conserved,
            _ => &[],
        }
    }

    pub fn reduced_system(&self, name: &str) -> Option<&ReducedSystem<T>> {
        self.reduced.iter().find(|r| r.name == name)
    }

    /// Flat offset of `mu_label` in the internal state of `kind`.
    pub fn mu_offset(&self, kind: ProblemKind, label: usize) -> Result<usize> {
        let base = if kind.is_dynamic() { self.n() + self.k() } else { self.n() };
        Ok(base + self.internal_index(label)?)
    }
}

/// Monitor reading a signed sum of momenta, named like `mu1+mu4`.
pub(crate) fn momentum_sum<T: Real>(name: &str, offsets: Vec<usize>) -> Monitor<T> {
    Monitor::new(name, move |s: &[T]| Ok(offsets.iter().map(|&o| s[o]).fold(T::zero(), |a, b| a + b)))
}

pub(crate) fn positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name: name.to_string(),
            reason: format!("must be positive, got {v}"),
        })
    }
}

/// Looks an example up by name. Missing parameters take their defaults
/// (`I2 = I3 = 1`, `r = k = 1`); unknown ones are rejected.
pub fn example_by_name<T: Real>(name: &str, params: &BTreeMap<String, f64>) -> Result<ExampleProblem<T>> {
    let allowed: &[&str] = match name {
        "rolling_disc" => &[],
        "rigid_body" => &["I2", "I3"],
        "rolling_ball" => &["r", "k"],
        _ => {
            return Err(Error::Unknown {
                kind: "example",
                name: name.to_string(),
            })
        }
    };
    if let Some(bad) = params.keys().find(|p| !allowed.contains(&p.as_str())) {
        return Err(Error::InvalidParameter {
            name: bad.clone(),
            reason: format!("not a parameter of {name}"),
        });
    }
    let get = |p: &str| T::lit(params.get(p).copied().unwrap_or(1.0));
    match name {
        "rolling_disc" => Ok(rolling_disc()),
        "rigid_body" => rigid_body(get("I2"), get("I3")),
        _ => rolling_ball(get("r"), get("k")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trip() {
        for k in ProblemKind::ALL {
            assert_eq!(k.as_str().parse::<ProblemKind>().unwrap(), k);
        }
        assert!("geodesic".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn disc_dynamic_columns() {
        let d = rolling_disc::<f64>();
        assert_eq!(
            d.state_names(ProblemKind::Dynamic).join(","),
            "x1,x2,x3,x4,y3,y4,mu1,mu2,mu3,mu4,pi3,pi4"
        );
        assert_eq!(d.state_names(ProblemKind::Kinematic).join(","), "x1,x2,x3,x4,mu1,mu2,mu3,mu4");
    }

    #[test]
    fn rigid_and_ball_columns() {
        let r = rigid_body::<f64>(1.0, 2.0).unwrap();
        assert_eq!(
            r.state_names(ProblemKind::Dynamic).join(","),
            "x1,x2,x3,y2,y3,mu1,mu2,mu3,pi2,pi3"
        );
        let b = rolling_ball::<f64>(1.0, 1.0).unwrap();
        assert_eq!(
            b.state_names(ProblemKind::Dynamic).join(","),
            "x1,x2,y1,y2,y3,mu1,mu2,mu3,mu4,mu5,pi1,pi2,pi3"
        );
    }

    #[test]
    fn labeled_round_trip() {
        let d = rolling_disc::<f64>();
        for kind in ProblemKind::ALL {
            let v: Vec<f64> = (0..d.state_dim(kind)).map(|i| i as f64).collect();
            let l = d.to_labeled(kind, &v).unwrap();
            assert_eq!(d.from_labeled(kind, &l).unwrap(), v);
        }
        // internal mu = [mu3, mu4, mu1, mu2]
        let internal = [0.0, 0.0, 0.0, 0.0, 3.0, 4.0, 1.0, 2.0];
        let l = d.to_labeled(ProblemKind::Kinematic, &internal).unwrap();
        assert_eq!(&l[4..], &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn lookup_defaults_and_errors() {
        let p = BTreeMap::new();
        for name in EXAMPLE_NAMES {
            assert_eq!(example_by_name::<f64>(name, &p).unwrap().name, name);
        }
        assert!(matches!(example_by_name::<f64>("se2", &p), Err(Error::Unknown { .. })));
        let bad = BTreeMap::from([("r".to_string(), 1.0)]);
        assert!(matches!(
            example_by_name::<f64>("rigid_body", &bad),
            Err(Error::InvalidParameter { .. })
        ));
        let neg = BTreeMap::from([("I2".to_string(), -1.0)]);
        assert!(example_by_name::<f64>("rigid_body", &neg).is_err());
    }
}
