//! Lie algebroids in coordinates: anchor and structure functions over a chart
//! of the base, plus the adapted split of the basis into constrained and
//! complementary sections.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sampling::uniform_points;
use crate::scalar::{all_finite, Real};

/// Base coordinates `x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint<T>(Vec<T>);

impl<T: Real> BasePoint<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if !all_finite(&coords) {
            return Err(Error::NonFinite {
                what: "base point".into(),
            });
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![T::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> AsRef<[T]> for BasePoint<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

/// Dense row-major `rows x cols` matrix. Holds anchor values `rho^i_alpha`
/// with `i` the row and `alpha` the column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Structure functions `C^gamma_{alpha beta}`, indexed `(gamma, alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor<T> {
    rank: usize,
    data: Vec<T>,
}

impl<T: Real> StructureTensor<T> {
    pub fn zeros(rank: usize) -> Self {
        Self {
            rank,
            data: vec![T::zero(); rank * rank * rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Records `[e_alpha, e_beta] ∋ value * e_gamma` together with its
    /// antisymmetric partner. Accumulates, so several calls may build one bracket.
    pub fn add_bracket(&mut self, alpha: usize, beta: usize, gamma: usize, value: T) {
        self[(gamma, alpha, beta)] += value;
        self[(gamma, beta, alpha)] -= value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    /// Largest `|C^g_{ab} + C^g_{ba}|` together with its indices `(g, a, b)`.
    pub fn antisymmetry_defect(&self) -> (T, (usize, usize, usize)) {
        let m = self.rank;
        let mut worst = (T::zero(), (0, 0, 0));
        for g in 0..m {
            for a in 0..m {
                for b in a..m {
                    let r = (self[(g, a, b)] + self[(g, b, a)]).abs();
                    if r > worst.0 || r.is_nan() {
                        worst = (r, (g, a, b));
                    }
                }
            }
        }
        worst
    }
}

impl<T> std::ops::Index<(usize, usize, usize)> for StructureTensor<T> {
    type Output = T;
    fn index(&self, (g, a, b): (usize, usize, usize)) -> &T {
        &self.data[(g * self.rank + a) * self.rank + b]
    }
}

impl<T> std::ops::IndexMut<(usize, usize, usize)> for StructureTensor<T> {
    fn index_mut(&mut self, (g, a, b): (usize, usize, usize)) -> &mut T {
        &mut self.data[(g * self.rank + a) * self.rank + b]
    }
}

pub type AnchorFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;
pub type StructureFn<T> = Arc<dyn Fn(&[T]) -> StructureTensor<T> + Send + Sync>;

/// Probe tolerance for the construction-time antisymmetry check.
pub const ANTISYMMETRY_PROBE_TOL: f64 = 1e-12;
const PROBE_SEED: u64 = 0x5eed_a1ce;
const PROBE_COUNT: usize = 8;

/// A Lie algebroid over a chart of its base, given by evaluable anchor and
/// structure functions with respect to a fixed local basis of sections.
#[derive(Clone)]
pub struct LieAlgebroid<T> {
    label: String,
    base_dim: usize,
    rank: usize,
    anchor: AnchorFn<T>,
    structure: StructureFn<T>,
}

impl<T> fmt::Debug for LieAlgebroid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebroid")
            .field("label", &self.label)
            .field("base_dim", &self.base_dim)
            .field("rank", &self.rank)
            .finish_non_exhaustive()
    }
}

impl<T: Real> LieAlgebroid<T> {
    /// Builds an algebroid and probes its structure functions at the origin and
    /// eight pseudo-random points of `[-1, 1]^n`. Shapes, finiteness and
    /// antisymmetry (to 1e-12) are checked there.
    pub fn new<A, S>(
        label: impl Into<String>,
        base_dim: usize,
        rank: usize,
        anchor: A,
        structure: S,
    ) -> Result<Self>
    where
        A: Fn(&[T]) -> Matrix<T> + Send + Sync + 'static,
        S: Fn(&[T]) -> StructureTensor<T> + Send + Sync + 'static,
    {
        if base_dim == 0 {
            return Err(Error::Invalid("base dimension must be positive".into()));
        }
        if rank == 0 {
            return Err(Error::Invalid("algebroid rank must be positive".into()));
        }
        let algebroid = Self {
            label: label.into(),
            base_dim,
            rank,
            anchor: Arc::new(anchor),
            structure: Arc::new(structure),
        };

        let mut probes = vec![BasePoint::origin(base_dim)];
        probes.extend(uniform_points(base_dim, PROBE_COUNT, PROBE_SEED, -1.0, 1.0));
        for p in &probes {
            algebroid.anchor_at(p)?;
            let c = algebroid.raw_structure(p.coords())?;
            let (residual, (gamma, alpha, beta)) = c.antisymmetry_defect();
            if !(residual <= T::lit(ANTISYMMETRY_PROBE_TOL)) {
                return Err(Error::Antisymmetry {
                    gamma,
                    alpha,
                    beta,
                    residual: residual.to_f64_lossy(),
                });
            }
        }
        Ok(algebroid)
    }

    /// The tangent bundle `TR^n` with the coordinate frame: identity anchor,
    /// vanishing brackets.
    pub fn tangent_bundle(n: usize) -> Result<Self> {
        Self::new(
            format!("TR^{n}"),
            n,
            n,
            move |_| Matrix::identity(n),
            move |_| StructureTensor::zeros(n),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.base_dim {
            return Err(Error::DimensionMismatch {
                what: "base point",
                expected: self.base_dim,
                got: x.len(),
            });
        }
        if !all_finite(x) {
            return Err(Error::NonFinite {
                what: "base point".into(),
            });
        }
        Ok(())
    }

    /// `rho^i_alpha(x)` as an `n x m` matrix.
    pub fn anchor_at(&self, x: &BasePoint<T>) -> Result<Matrix<T>> {
        self.anchor_raw(x.coords())
    }

    pub(crate) fn anchor_raw(&self, x: &[T]) -> Result<Matrix<T>> {
        self.check_point(x)?;
        let a = (self.anchor)(x);
        if a.rows() != self.base_dim || a.cols() != self.rank {
            return Err(Error::DimensionMismatch {
                what: "anchor matrix",
                expected: self.base_dim * self.rank,
                got: a.rows() * a.cols(),
            });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite {
                what: format!("anchor of {}", self.label),
            });
        }
        Ok(a)
    }

    fn raw_structure(&self, x: &[T]) -> Result<StructureTensor<T>> {
        self.check_point(x)?;
        let c = (self.structure)(x);
        if c.rank() != self.rank {
            return Err(Error::DimensionMismatch {
                what: "structure tensor",
                expected: self.rank,
                got: c.rank(),
            });
        }
        if !c.is_finite() {
            return Err(Error::NonFinite {
                what: format!("structure functions of {}", self.label),
            });
        }
        Ok(c)
    }

    /// `C^gamma_{alpha beta}(x)`.
    pub fn structure_at(&self, x: &BasePoint<T>) -> Result<StructureTensor<T>> {
        self.raw_structure(x.coords())
    }

    pub(crate) fn structure_raw(&self, x: &[T]) -> Result<StructureTensor<T>> {
        self.raw_structure(x)
    }

    /// The same algebroid with one structure entry overwritten (no partner
    /// update). Skips the construction probe so corrupted data can be fed to
    /// the validators.
    pub fn with_structure_override(&self, gamma: usize, alpha: usize, beta: usize, value: T) -> Self {
        let inner = Arc::clone(&self.structure);
        Self {
            label: format!("{}*", self.label),
            base_dim: self.base_dim,
            rank: self.rank,
            anchor: Arc::clone(&self.anchor),
            structure: Arc::new(move |x| {
                let mut c = inner(x);
                c[(gamma, alpha, beta)] = value;
                c
            }),
        }
    }
}

/// Adapted split of the basis: sections `0..k` span the constraint
/// distribution (indices `a`), sections `k..m` complete the basis (indices `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintDistribution {
    constrained_rank: usize,
    rank: usize,
}

impl ConstraintDistribution {
    pub fn new<T: Real>(algebroid: &LieAlgebroid<T>, constrained_rank: usize) -> Result<Self> {
        let rank = algebroid.rank();
        if constrained_rank == 0 || constrained_rank > rank {
            return Err(Error::Invalid(format!(
                "constrained rank {constrained_rank} outside 1..={rank}"
            )));
        }
        Ok(Self {
            constrained_rank,
            rank,
        })
    }

    /// `k`, the number of constrained sections.
    pub fn k(&self) -> usize {
        self.constrained_rank
    }

    /// `m`, the algebroid rank.
    pub fn m(&self) -> usize {
        self.rank
    }

    pub fn constrained(&self) -> std::ops::Range<usize> {
        0..self.constrained_rank
    }

    pub fn complementary(&self) -> std::ops::Range<usize> {
        self.constrained_rank..self.rank
    }
}
