//! Vertical rolling disc on the plane. Coordinates `(x, y, theta, phi)`,
//! constrained sections `e3, e4`, internal basis `[e3, e4, e1, e2]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::{ConstraintDistribution, LieAlgebroid, Matrix, StructureTensor};
use crate::error::{Error, Result};
use crate::pontryagin::{DynamicCost, KinematicCost};
use crate::scalar::Real;

use super::reference::Block;
use super::{momentum_sum, ExampleProblem, ProblemKind, ReducedSystem};

/// Force per unit acceleration for the rolling and the turning direction.
pub const FORCE_SCALING: [f64; 2] = [1.5, 0.25];

pub fn rolling_disc<T: Real>() -> ExampleProblem<T> {
    let anchor = |x: &[T]| {
        let (s, c) = x[3].sin_cos();
        let (o, l) = (T::zero(), T::one());
        Matrix::from_columns(
            4,
            &[
                vec![c, s, l, o],
                vec![o, o, o, l],
                vec![l, o, o, o],
                vec![o, l, o, o],
            ],
        )
    };
    let structure = |x: &[T]| {
        let (s, c) = x[3].sin_cos();
        let mut t = StructureTensor::zeros(4);
        // [e3, e4] = sin(phi) e1 - cos(phi) e2
        t.add_bracket(0, 1, 2, s);
        t.add_bracket(0, 1, 3, -c);
        t
    };
    let algebroid = LieAlgebroid::new("rolling_disc", 4, 4, anchor, structure)
        .expect("rolling disc structure is antisymmetric");
    let distribution = ConstraintDistribution::new(&algebroid, 2).expect("k = 2 <= m = 4");

    let half = T::lit(0.5);
    let kinematic_cost = KinematicCost::new(move |_x: &[T], u: &[T]| half * (u[0] * u[0] + u[1] * u[1]))
        .with_grad_x(|x, _| vec![T::zero(); x.len()])
        .with_grad_u(|_, u| u.to_vec());

    let c = [T::lit(FORCE_SCALING[0]), T::lit(FORCE_SCALING[1])];
    let c2 = [c[0] * c[0], c[1] * c[1]];
    let dynamic_cost = DynamicCost::new(move |_x: &[T], _y: &[T], v: &[T]| {
        half * (c2[0] * v[0] * v[0] + c2[1] * v[1] * v[1])
    })
    .with_grad_x(|x, _, _| vec![T::zero(); x.len()])
    .with_grad_y(|_, y, _| vec![T::zero(); y.len()])
    .with_grad_u(move |_, _, v| vec![c2[0] * v[0], c2[1] * v[1]]);

    let parameters = BTreeMap::from([("c3".to_string(), c[0]), ("c4".to_string(), c[1])]);

    // internal mu = [mu3, mu4, mu1, mu2]
    let conserved = |base: usize| vec![momentum_sum("mu1", vec![base + 2]), momentum_sum("mu2", vec![base + 3])];

    ExampleProblem {
        name: "rolling_disc",
        algebroid,
        distribution,
        kinematic_cost: Some(kinematic_cost),
        dynamic_cost: Some(dynamic_cost),
        parameters,
        basis_labels: vec![3, 4, 1, 2],
        force_scaling: Some(c.to_vec()),
        kinematic_conserved: conserved(4),
        dynamic_conserved: conserved(6),
        reduced: vec![fourth_order(c2)],
        blocks: vec![Block::RollingDiscDynamic],
    }
}

/// Reduced state
/// `[x1, x2, x3, x3', x3'', x3''', x4, x4', x4'', x4''', mu1, mu2]`.
fn fourth_order<T: Real>(c2: [T; 2]) -> ReducedSystem<T> {
    let rhs = |s: &[T]| -> Result<Vec<T>> {
        if s.len() != 12 {
            return Err(Error::DimensionMismatch {
                what: "disc reduced state",
                expected: 12,
                got: s.len(),
            });
        }
        let (x4, dx3, dx4) = (s[6], s[3], s[7]);
        let (mu1, mu2) = (s[10], s[11]);
        let (sn, cs) = x4.sin_cos();
        Ok(vec![
            cs * dx3,
            sn * dx3,
            dx3,
            s[4],
            s[5],
            T::lit(4.0 / 9.0) * (mu1 * sn - mu2 * cs) * dx4,
            dx4,
            s[8],
            s[9],
            T::lit(16.0) * (-mu1 * sn + mu2 * cs) * dx3,
            T::zero(),
            T::zero(),
        ])
    };
    // internal dynamic layout [x1..x4, y3, y4, mu3, mu4, mu1, mu2, pi3, pi4]
    let lift = move |f: &[T]| {
        vec![
            f[0],
            f[1],
            f[2],
            f[4],
            f[10] / c2[0],
            -f[6] / c2[0],
            f[3],
            f[5],
            f[11] / c2[1],
            -f[7] / c2[1],
            f[8],
            f[9],
        ]
    };
    ReducedSystem {
        name: "disc_fourth_order",
        kind: ProblemKind::Dynamic,
        names: vec!["x1", "x2", "x3", "dx3", "d2x3", "d3x3", "x4", "dx4", "d2x4", "d3x4", "mu1", "mu2"],
        rhs: Arc::new(rhs),
        lift: Arc::new(lift),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::BasePoint;
    use crate::integrator::integrate;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn bracket_at_quarter_turn() {
        let d = rolling_disc::<f64>();
        let c = d.algebroid.structure_at(&BasePoint::new(vec![0.0, 0.0, 0.0, FRAC_PI_2]).unwrap()).unwrap();
        let (e1, e2, e3, e4) = (2, 3, 0, 1);
        assert!((c[(e1, e3, e4)] - 1.0).abs() < 1e-15);
        assert!(c[(e2, e3, e4)].abs() < 1e-15);
        assert!((c[(e1, e4, e3)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn anchor_of_e4_is_last_coordinate() {
        let d = rolling_disc::<f64>();
        for x4 in [0.0, 0.7, -2.0] {
            let rho = d.algebroid.anchor_at(&BasePoint::new(vec![0.3, -0.1, 1.2, x4]).unwrap()).unwrap();
            assert_eq!(rho.column(1), vec![0.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn acceleration_from_momentum() {
        // force u3 = (2/3) pi3, acceleration (2/3) u3
        let d = rolling_disc::<f64>();
        let p = d.dynamic_problem().unwrap();
        let s = p.solve_controls(&[0.0; 4], &[0.0, 0.0], &[3.0, 0.5], &[0.0, 0.0]).unwrap();
        let force = s.u[0] * 1.5;
        assert!((force - 2.0).abs() < 1e-9);
        assert!((s.u[1] - 16.0 * 0.5).abs() < 1e-9);
    }

    #[test]
    fn lift_matches_reduced_derivatives() {
        // the lifted generic field and the reduced field agree at a state
        let d = rolling_disc::<f64>();
        let p = d.dynamic_problem().unwrap();
        let red = d.reduced_system("disc_fourth_order").unwrap();
        let f = vec![0.1, -0.2, 0.3, 0.9, 1.1, -0.7, 0.4, -0.5, 1.3, 0.2, 0.6, -0.8];
        let df = p.extremal_rhs_flat(&f).unwrap();
        // chain rule through the linear lift (phi enters only through x4)
        let eps = 1e-6;
        let plus: Vec<f64> = f.iter().zip(&df).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = f.iter().zip(&df).map(|(a, b)| a - eps * b).collect();
        let (lp, lm) = ((red.lift)(&plus), (red.lift)(&minus));
        let expect = (red.rhs)(&(red.lift)(&f)).unwrap();
        for j in 0..expect.len() {
            let fd = (lp[j] - lm[j]) / (2.0 * eps);
            assert!((fd - expect[j]).abs() < 1e-8, "slot {} {fd} vs {}", red.names[j], expect[j]);
        }
    }

    #[test]
    fn co_integrated_reduced_system() {
        let d = rolling_disc::<f64>();
        let p = d.dynamic_problem().unwrap();
        let labeled = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let init = d.from_labeled(ProblemKind::Dynamic, &labeled).unwrap();
        let monitors = d.conserved(ProblemKind::Dynamic).to_vec();
        let full = integrate(|s: &[f64]| p.extremal_rhs_flat(s), &init, 0.0, 2.0, 1e-3, &monitors).unwrap();
        let red = d.reduced_system("disc_fourth_order").unwrap();
        let r0 = (red.lift)(&init);
        let reduced = integrate(|s: &[f64]| (red.rhs)(s), &r0, 0.0, 2.0, 1e-3, &[]).unwrap();
        for (a, b) in full.states.iter().zip(&reduced.states) {
            assert!((a[2] - b[2]).abs() < 1e-5);
            assert!((a[3] - b[6]).abs() < 1e-5);
        }
        for name in ["mu1", "mu2"] {
            let s = full.series(name).unwrap();
            assert!(s.iter().all(|v| (v - s[0]).abs() <= 1e-8));
        }
    }
}
