//! Ball of radius `r` and radius of gyration `k` rolling without slipping
//! on the plane, on the Atiyah algebroid `TQ/SO(3)` over `R^2`. Constrained
//! sections `f1, f2, f3`; the internal basis is `[f1, .., f5]`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::{ConstraintDistribution, LieAlgebroid, Matrix, StructureTensor};
use crate::error::{Error, Result};
use crate::pontryagin::{DynamicCost, KinematicCost};
use crate::scalar::Real;

use super::reference::Block;
use super::{momentum_sum, positive, ExampleProblem, ProblemKind, ReducedSystem};

/// `[c1, c2, c3] = [1 + k^2/r^2, 1 + k^2/r^2, k^2]`.
pub fn inertia_constants<T: Real>(r: T, k: T) -> [T; 3] {
    let c = T::one() + k * k / (r * r);
    [c, c, k * k]
}

/// The ball Lagrangian in quasi-velocities `y = (y1, .., y5)`.
pub fn rolling_ball_lagrangian<T: Real>(r: T, k: T, y: &[T; 5]) -> T {
    let [y1, y2, y3, y4, y5] = *y;
    let kr = k * k / (r * r);
    T::lit(0.5) * (y1 * y1 + y2 * y2 + kr * (y1 * y1 + y2 * y2 + y4 * y4 + y5 * y5 - y2 * y5 - y1 * y4) + k * k * y3 * y3)
}

pub fn rolling_ball<T: Real>(r: T, k: T) -> Result<ExampleProblem<T>> {
    let r = positive("r", r)?;
    let k = positive("k", k)?;

    let anchor = |_: &[T]| {
        let mut a = Matrix::zeros(2, 5);
        a[(0, 0)] = T::one();
        a[(1, 1)] = T::one();
        a
    };
    let inv_r2 = (r * r).recip();
    let structure = move |_: &[T]| {
        let (f1, f2, f3, f4, f5) = (0, 1, 2, 3, 4);
        let mut t = StructureTensor::zeros(5);
        for (a, b) in [(f2, f1), (f1, f5), (f4, f2), (f5, f4)] {
            t.add_bracket(a, b, f3, inv_r2);
        }
        for (a, b) in [(f3, f1), (f4, f3)] {
            t.add_bracket(a, b, f5, T::one());
        }
        for (a, b) in [(f2, f3), (f3, f5)] {
            t.add_bracket(a, b, f4, T::one());
        }
        t
    };
    let algebroid = LieAlgebroid::new("rolling_ball", 2, 5, anchor, structure)?;
    let distribution = ConstraintDistribution::new(&algebroid, 3)?;

    let c = inertia_constants(r, k);
    let half = T::lit(0.5);
    let kinematic_cost = KinematicCost::new(move |_x: &[T], u: &[T]| {
        let kr = k * k / (r * r);
        half * (u[0] * u[0] + u[1] * u[1] + kr * (u[1] * u[1] + u[0] * u[0]) + k * k * u[2] * u[2])
    })
    .with_grad_x(|x, _| vec![T::zero(); x.len()])
    .with_grad_u(move |_, u| (0..3).map(|a| c[a] * u[a]).collect());

    let csq = c.map(|v| v * v);
    let dynamic_cost = DynamicCost::new(move |_x: &[T], _y: &[T], v: &[T]| {
        half * (0..3).map(|a| csq[a] * v[a] * v[a]).sum::<T>()
    })
    .with_grad_x(|x, _, _| vec![T::zero(); x.len()])
    .with_grad_y(|_, y, _| vec![T::zero(); y.len()])
    .with_grad_u(move |_, _, v| (0..3).map(|a| csq[a] * v[a]).collect());

    let conserved = |base: usize| {
        vec![
            momentum_sum("mu1+mu4", vec![base, base + 3]),
            momentum_sum("mu2+mu5", vec![base + 1, base + 4]),
        ]
    };

    Ok(ExampleProblem {
        name: "rolling_ball",
        algebroid,
        distribution,
        kinematic_cost: Some(kinematic_cost),
        dynamic_cost: Some(dynamic_cost),
        parameters: BTreeMap::from([
            ("r".to_string(), r),
            ("k".to_string(), k),
            ("c1".to_string(), c[0]),
            ("c2".to_string(), c[1]),
            ("c3".to_string(), c[2]),
        ]),
        basis_labels: vec![1, 2, 3, 4, 5],
        force_scaling: Some(c.to_vec()),
        kinematic_conserved: conserved(2),
        dynamic_conserved: conserved(5),
        reduced: vec![reduced_kinematic(c), reduced_dynamic(r, c)],
        blocks: vec![Block::RollingBallKinematic, Block::RollingBallDynamic],
    })
}

fn check_len<T>(s: &[T], expected: usize, what: &'static str) -> Result<()> {
    if s.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got: s.len(),
        });
    }
    Ok(())
}

/// Reduced state `[x1, x2, x1', x2', w3, d1, d2]`.
fn reduced_kinematic<T: Real>(c: [T; 3]) -> ReducedSystem<T> {
    let rhs = move |s: &[T]| -> Result<Vec<T>> {
        check_len(s, 7, "ball kinematic reduced state")?;
        let (dx1, dx2, w3, d1, d2) = (s[2], s[3], s[4], s[5], s[6]);
        Ok(vec![
            dx1,
            dx2,
            (d2 * w3 - dx2 * w3) / c[0],
            (dx1 * w3 - d1 * w3) / c[1],
            (d1 * dx2 - d2 * dx1) / c[2],
            T::zero(),
            T::zero(),
        ])
    };
    // internal kinematic layout [x1, x2, mu1..mu5]
    let lift = move |f: &[T]| vec![f[0], f[1], f[2] / c[0], f[3] / c[1], f[4] / c[2], f[2] + f[5], f[3] + f[6]];
    ReducedSystem {
        name: "ball_kinematic",
        kind: ProblemKind::Kinematic,
        names: vec!["x1", "x2", "dx1", "dx2", "w3", "d1", "d2"],
        rhs: Arc::new(rhs),
        lift: Arc::new(lift),
    }
}

/// Reduced state
/// `[x1, x1', x1'', x1''', x2, x2', x2'', x2''', w3, w3', w3'', e1, e2]`.
fn reduced_dynamic<T: Real>(r: T, c: [T; 3]) -> ReducedSystem<T> {
    let rhs = move |s: &[T]| -> Result<Vec<T>> {
        check_len(s, 13, "ball dynamic reduced state")?;
        let (dx1, d3x1) = (s[1], s[3]);
        let (dx2, d3x2) = (s[5], s[7]);
        let (w3, d2w3) = (s[8], s[10]);
        let (e1, e2) = (s[11], s[12]);
        let sq = |v: T| v * v;
        let x1_4 = sq(c[2] / (c[0] * r)) * dx2 * d2w3 - w3 * d3x2 - e2 / sq(c[0]) * w3;
        let x2_4 = -sq(c[2] / (c[1] * r)) * dx1 * d2w3 + w3 * d3x1 + e1 / sq(c[1]) * w3;
        let w3_3 = sq(c[1] / c[2]) * dx1 * d3x2 - sq(c[0] / c[2]) * dx2 * d3x1 + e2 / sq(c[2]) * dx1
            - e1 / sq(c[2]) * dx2;
        Ok(vec![
            dx1,
            s[2],
            d3x1,
            x1_4,
            dx2,
            s[6],
            d3x2,
            x2_4,
            s[9],
            d2w3,
            w3_3,
            T::zero(),
            T::zero(),
        ])
    };
    // internal dynamic layout [x1, x2, y1, y2, y3, mu1..mu5, pi1, pi2, pi3]
    let csq = c.map(|v| v * v);
    let lift = move |f: &[T]| {
        vec![
            f[0],
            f[2],
            f[10] / csq[0],
            -f[5] / csq[0],
            f[1],
            f[3],
            f[11] / csq[1],
            -f[6] / csq[1],
            f[4],
            f[12] / csq[2],
            -f[7] / csq[2],
            f[5] + f[8],
            f[6] + f[9],
        ]
    };
    ReducedSystem {
        name: "ball_dynamic",
        kind: ProblemKind::Dynamic,
        names: vec!["x1", "dx1", "d2x1", "d3x1", "x2", "dx2", "d2x2", "d3x2", "w3", "dw3", "d2w3", "e1", "e2"],
        rhs: Arc::new(rhs),
        lift: Arc::new(lift),
    }
}
