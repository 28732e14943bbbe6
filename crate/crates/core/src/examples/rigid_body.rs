//! Free rigid body in type-I Euler angles with the constraint `y^1 = 0`.
//! Constrained sections `e2, e3`, internal basis `[e2, e3, e1]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::{ConstraintDistribution, LieAlgebroid, Matrix, StructureTensor};
use crate::error::{Error, Result};
use crate::integrator::Monitor;
use crate::pontryagin::{DynamicCost, KinematicCost};
use crate::scalar::Real;

use super::reference::Block;
use super::{momentum_sum, positive, ExampleProblem, ProblemKind, ReducedSystem};

pub fn rigid_body<T: Real>(i2: T, i3: T) -> Result<ExampleProblem<T>> {
    let i2 = positive("I2", i2)?;
    let i3 = positive("I3", i3)?;

    let anchor = |x: &[T]| {
        let (s2, c2) = x[1].sin_cos();
        let (s3, c3) = x[2].sin_cos();
        let (sec, tan) = (c2.recip(), s2 / c2);
        let (o, l) = (T::zero(), T::one());
        Matrix::from_columns(
            3,
            &[
                vec![sec * c3, -s3, tan * c3],
                vec![o, o, l],
                vec![sec * s3, c3, tan * s3],
            ],
        )
    };
    let structure = |_: &[T]| {
        let (e2, e3, e1) = (0, 1, 2);
        let mut t = StructureTensor::zeros(3);
        t.add_bracket(e1, e2, e3, T::one());
        t.add_bracket(e2, e3, e1, T::one());
        t.add_bracket(e3, e1, e2, T::one());
        t
    };
    let algebroid = LieAlgebroid::new("rigid_body", 3, 3, anchor, structure)?;
    let distribution = ConstraintDistribution::new(&algebroid, 2)?;

    let half = T::lit(0.5);
    let kinematic_cost = KinematicCost::new(move |_x: &[T], u: &[T]| half * (i2 * u[0] * u[0] + i3 * u[1] * u[1]))
        .with_grad_x(|x, _| vec![T::zero(); x.len()])
        .with_grad_u(move |_, u| vec![i2 * u[0], i3 * u[1]]);

    let (j2, j3, d) = (i2 * i2, i3 * i3, (i3 - i2) * (i3 - i2));
    let dynamic_cost = DynamicCost::new(move |_x: &[T], y: &[T], v: &[T]| {
        half * (j2 * v[0] * v[0] + j3 * v[1] * v[1] + d * y[0] * y[0] * y[1] * y[1])
    })
    .with_grad_x(|x, _, _| vec![T::zero(); x.len()])
    .with_grad_y(move |_, y, _| vec![d * y[0] * y[1] * y[1], d * y[0] * y[0] * y[1]])
    .with_grad_u(move |_, _, v| vec![j2 * v[0], j3 * v[1]]);

    let symmetric = i2 == i3;
    let mut kinematic_conserved = vec![casimir(3)];
    let mut reduced = Vec::new();
    if symmetric {
        kinematic_conserved.insert(0, momentum_sum("mu1", vec![3 + 2]));
        reduced.push(symmetric_kinematic(i2));
    }

    Ok(ExampleProblem {
        name: "rigid_body",
        algebroid,
        distribution,
        kinematic_cost: Some(kinematic_cost),
        dynamic_cost: Some(dynamic_cost),
        parameters: BTreeMap::from([("I2".to_string(), i2), ("I3".to_string(), i3)]),
        basis_labels: vec![2, 3, 1],
        force_scaling: None,
        kinematic_conserved,
        dynamic_conserved: vec![casimir(5)],
        reduced,
        blocks: vec![Block::RigidBodyKinematic, Block::RigidBodyDynamic],
    })
}

/// `mu1^2 + mu2^2 + mu3^2`, momenta starting at flat offset `base`.
fn casimir<T: Real>(base: usize) -> Monitor<T> {
    Monitor::new("casimir", move |s: &[T]| Ok(s[base..base + 3].iter().map(|m| *m * *m).sum()))
}

/// Reduced state `[mu1, mu2, mu3]` of the symmetric body with inertia `i`:
/// `mu2' = -mu1 u3`, `mu3' = mu1 u2`, `mu1' = 0`.
fn symmetric_kinematic<T: Real>(i: T) -> ReducedSystem<T> {
    let rhs = move |s: &[T]| -> Result<Vec<T>> {
        if s.len() != 3 {
            return Err(Error::DimensionMismatch {
                what: "rigid body reduced state",
                expected: 3,
                got: s.len(),
            });
        }
        let (u2, u3) = (s[1] / i, s[2] / i);
        Ok(vec![T::zero(), -s[0] * u3, s[0] * u2])
    };
    // internal kinematic layout [x1, x2, x3, mu2, mu3, mu1]
    let lift = |f: &[T]| vec![f[5], f[3], f[4]];
    ReducedSystem {
        name: "rigid_symmetric_kinematic",
        kind: ProblemKind::Kinematic,
        names: vec!["mu1", "mu2", "mu3"],
        rhs: Arc::new(rhs),
        lift: Arc::new(lift),
    }
}

/// Largest residual of the third-order system of the symmetric body,
/// `y2''' - mu1 y3 / I^2`, `y3''' + mu1 y2 / I^2` and
/// `mu1' - I^2 (y3'' y2 - y2'' y3)`, with every time derivative estimated by
/// central differences on the stored samples. `states` are internal dynamic
/// states on a uniform grid; samples next to a nonuniform spacing are skipped.
pub fn third_order_residual<T: Real>(example: &ExampleProblem<T>, times: &[T], states: &[Vec<T>]) -> Result<T> {
    if example.name != "rigid_body" {
        return Err(Error::Invalid(format!("third-order residual needs rigid_body, got {}", example.name)));
    }
    let (i2, i3) = (example.parameter("I2")?, example.parameter("I3")?);
    if i2 != i3 {
        return Err(Error::InvalidParameter {
            name: "I3".into(),
            reason: "the third-order system needs I2 = I3".into(),
        });
    }
    if times.len() != states.len() || times.len() < 5 {
        return Err(Error::Invalid("third-order residual needs at least five matched samples".into()));
    }
    let inertia_sq = i2 * i2;
    // internal dynamic layout [x1, x2, x3, y2, y3, mu2, mu3, mu1, pi2, pi3]
    let y2 = |j: usize| states[j][3];
    let y3 = |j: usize| states[j][4];
    let mu1 = |j: usize| states[j][7];

    let mut worst = T::zero();
    let mut checked = 0usize;
    for i in 2..times.len() - 2 {
        let h = times[i + 1] - times[i];
        let uniform = (i - 2..i + 2).all(|j| ((times[j + 1] - times[j]) - h).abs() <= h * T::lit(1e-9));
        if !uniform {
            continue;
        }
        let d1 = |f: &dyn Fn(usize) -> T| (f(i + 1) - f(i - 1)) / (T::lit(2.0) * h);
        let d2 = |f: &dyn Fn(usize) -> T| (f(i + 1) - T::lit(2.0) * f(i) + f(i - 1)) / (h * h);
        let d3 = |f: &dyn Fn(usize) -> T| {
            (f(i + 2) - T::lit(2.0) * f(i + 1) + T::lit(2.0) * f(i - 1) - f(i - 2)) / (T::lit(2.0) * h * h * h)
        };
        let r = [
            d3(&y2) - mu1(i) * y3(i) / inertia_sq,
            d3(&y3) + mu1(i) * y2(i) / inertia_sq,
            d1(&mu1) - inertia_sq * (d2(&y3) * y2(i) - d2(&y2) * y3(i)),
        ];
        worst = r.iter().fold(worst, |w, v| w.max(v.abs()));
        checked += 1;
    }
    if checked == 0 {
        return Err(Error::Invalid("no uniformly spaced interior samples".into()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::BasePoint;
    use crate::integrator::integrate;
    use crate::sampling::uniform_points;
    use crate::validate::check_axioms;

    #[test]
    fn anchor_of_e2_at_origin() {
        let r = rigid_body::<f64>(1.0, 2.0).unwrap();
        let rho = r.algebroid.anchor_at(&BasePoint::origin(3)).unwrap();
        assert_eq!(rho.column(0), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn e1_e2_bracket_is_e3_everywhere() {
        let r = rigid_body::<f64>(1.0, 2.0).unwrap();
        let (e2, e3, e1) = (0, 1, 2);
        for p in uniform_points::<f64>(3, 5, 7, -1.0, 1.0) {
            let c = r.algebroid.structure_at(&p).unwrap();
            assert_eq!(c[(e3, e1, e2)], 1.0);
            assert_eq!(c[(e3, e2, e1)], -1.0);
        }
    }

    #[test]
    fn axioms_hold() {
        let r = rigid_body::<f64>(1.0, 2.0).unwrap();
        let pts = uniform_points(3, 100, 11, -1.0, 1.0);
        for rep in check_axioms(&r.algebroid, &pts, 1e-12, 1e-6).unwrap() {
            assert!(rep.passed, "{rep}");
        }
    }

    #[test]
    fn nonpositive_inertia_rejected() {
        assert!(matches!(rigid_body(0.0, 1.0), Err(Error::InvalidParameter { .. })));
        assert!(matches!(rigid_body(1.0, -2.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn mu1_only_declared_for_symmetric_body() {
        let names = |e: &ExampleProblem<f64>| e.kinematic_conserved.iter().map(|m| m.name.clone()).collect::<Vec<_>>();
        assert_eq!(names(&rigid_body(1.0, 1.0).unwrap()), ["mu1", "casimir"]);
        assert_eq!(names(&rigid_body(1.0, 2.0).unwrap()), ["casimir"]);
    }

    #[test]
    fn rotation_at_rate_mu1() {
        let r = rigid_body::<f64>(1.0, 1.0).unwrap();
        let p = r.kinematic_problem().unwrap();
        let init = r
            .from_labeled(ProblemKind::Kinematic, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0])
            .unwrap();
        let traj = integrate(|s: &[f64]| p.extremal_rhs_flat(s), &init, 0.0, std::f64::consts::PI, 1e-3, &[]).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s[3] - t.cos()).abs() < 1e-6 && (s[4] - t.sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn third_order_system_on_symmetric_body() {
        let r = rigid_body::<f64>(1.0, 1.0).unwrap();
        let p = r.dynamic_problem().unwrap();
        let labeled = [0.1, 0.2, -0.1, 0.5, -0.3, 0.7, 0.4, -0.2, 0.3, 0.6];
        let init = r.from_labeled(ProblemKind::Dynamic, &labeled).unwrap();
        let traj = integrate(|s: &[f64]| p.extremal_rhs_flat(s), &init, 0.0, 1.0, 1e-3, &[]).unwrap();
        let res = third_order_residual(&r, &traj.times, &traj.states).unwrap();
        assert!(res < 1e-4, "{res}");
    }
}
