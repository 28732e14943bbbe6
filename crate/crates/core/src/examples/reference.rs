//! Hand-written extremal equations of the three examples, kept independent
//! of the generic machinery so the two can be compared. States and
//! derivatives are in labeled order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{ExampleProblem, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    RollingDiscDynamic,
    RigidBodyKinematic,
    RigidBodyDynamic,
    RollingBallKinematic,
    RollingBallDynamic,
}

impl Block {
    pub const ALL: [Block; 5] = [
        Block::RollingDiscDynamic,
        Block::RigidBodyKinematic,
        Block::RigidBodyDynamic,
        Block::RollingBallKinematic,
        Block::RollingBallDynamic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Block::RollingDiscDynamic => "rolling_disc_dynamic",
            Block::RigidBodyKinematic => "rigid_body_kinematic",
            Block::RigidBodyDynamic => "rigid_body_dynamic",
            Block::RollingBallKinematic => "rolling_ball_kinematic",
            Block::RollingBallDynamic => "rolling_ball_dynamic",
        }
    }

    pub fn kind(self) -> ProblemKind {
        match self {
            Block::RigidBodyKinematic | Block::RollingBallKinematic => ProblemKind::Kinematic,
            _ => ProblemKind::Dynamic,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "block",
                name: s.to_string(),
            })
    }
}

/// Evaluates `block` of `example` at a labeled state.
pub fn reference_rhs<T: Real>(example: &ExampleProblem<T>, block: Block, state: &[T]) -> Result<Vec<T>> {
    if !example.blocks.contains(&block) {
        return Err(Error::Unknown {
            kind: "block",
            name: format!("{block} for {}", example.name),
        });
    }
    let expected = example.state_dim(block.kind());
    if state.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "reference state",
            expected,
            got: state.len(),
        });
    }
    let v = |x: f64| T::lit(x);
    Ok(match block {
        Block::RollingDiscDynamic => {
            let [_, _, _, x4, y3, y4, mu1, mu2, mu3, mu4, pi3, pi4] = take::<T, 12>(state);
            let (u3, u4) = (v(2.0 / 3.0) * pi3, v(4.0) * pi4);
            let (s, c) = x4.sin_cos();
            vec![
                c * y3,
                s * y3,
                y3,
                y4,
                v(2.0 / 3.0) * u3,
                v(4.0) * u4,
                T::zero(),
                T::zero(),
                (-mu1 * s + mu2 * c) * y4,
                (mu1 * s - mu2 * c) * y3,
                -mu3,
                -mu4,
            ]
        }
        Block::RigidBodyKinematic => {
            let (i2, i3) = (example.parameter("I2")?, example.parameter("I3")?);
            let [_, x2, x3, mu1, mu2, mu3] = take::<T, 6>(state);
            let (u2, u3) = (mu2 / i2, mu3 / i3);
            let mut d = euler_angle_rates(x2, x3, u2, u3);
            d.extend([-(i3 - i2) * u2 * u3, -mu1 * u3, mu1 * u2]);
            d
        }
        Block::RigidBodyDynamic => {
            let (i2, i3) = (example.parameter("I2")?, example.parameter("I3")?);
            let [_, x2, x3, y2, y3, mu1, mu2, mu3, pi2, pi3] = take::<T, 10>(state);
            let (u2, u3) = (pi2 / (i2 * i2), pi3 / (i3 * i3));
            let m1 = (i3 - i2) * y2 * y3;
            let mut d = euler_angle_rates(x2, x3, y2, y3);
            d.extend([
                u2,
                u3,
                -(mu3 * y2 - mu2 * y3),
                -mu1 * y3,
                mu1 * y2,
                m1 * m1 / y2 - mu2,
                m1 * m1 / y3 - mu3,
            ]);
            d
        }
        Block::RollingBallKinematic => {
            let (r, c1, c2, c3) = ball_constants(example)?;
            let [_, _, mu1, mu2, mu3, mu4, mu5] = take::<T, 7>(state);
            let r2 = r * r;
            vec![
                mu1 / c1,
                mu2 / c2,
                mu3 * mu2 / (c2 * r2) + mu5 * mu3 / c3,
                -mu4 * mu3 / c3 - mu3 * mu1 / (c1 * r2),
                -mu5 * mu1 / c1 + mu4 * mu2 / c2,
                -mu3 * mu2 / (c2 * r2) - mu5 * mu3 / c3,
                mu4 * mu3 / c3 + mu3 * mu1 / (c1 * r2),
            ]
        }
        Block::RollingBallDynamic => {
            let (r, c1, c2, c3) = ball_constants(example)?;
            let [_, _, y1, y2, y3, mu1, mu2, mu3, mu4, mu5, pi1, pi2, pi3] = take::<T, 13>(state);
            let r2 = r * r;
            let (u1, u2, u3) = (pi1 / c1, pi2 / c2, pi3 / c3);
            let dmu1 = mu3 * y2 / r2 + mu5 * y3;
            let dmu2 = -mu4 * y3 - mu3 * y1 / r2;
            vec![
                y1,
                y2,
                u1 / c1,
                u2 / c2,
                u3 / c3,
                dmu1,
                dmu2,
                -mu5 * y1 + mu4 * y2,
                -dmu1,
                -dmu2,
                -mu1,
                -mu2,
                -mu3,
            ]
        }
    })
}

fn take<T: Copy, const N: usize>(s: &[T]) -> [T; N] {
    std::array::from_fn(|i| s[i])
}

/// `(x1', x2', x3')` of the constrained body for rates `w2, w3` about the
/// second and third axes.
fn euler_angle_rates<T: Real>(x2: T, x3: T, w2: T, w3: T) -> Vec<T> {
    let (s3, c3) = x3.sin_cos();
    vec![c3 * w2 / x2.cos(), -s3 * w2, x2.tan() * c3 * w2 + w3]
}

fn ball_constants<T: Real>(example: &ExampleProblem<T>) -> Result<(T, T, T, T)> {
    Ok((
        example.parameter("r")?,
        example.parameter("c1")?,
        example.parameter("c2")?,
        example.parameter("c3")?,
    ))
}
