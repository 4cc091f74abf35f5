//! The symmetric-operator abstraction: either a dense, exactly symmetric
//! matrix or a matvec callback with a declared dimension.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Number of power iterations used when no norm estimate is supplied.
pub const POWER_ITERATIONS: usize = 20;
const POWER_SEED: u64 = 0x5eed_0f_a11;

type MatVec = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

#[derive(Clone)]
enum Repr {
    Dense(Arc<DMatrix<f64>>),
    Implicit(Arc<MatVec>),
}

/// A real symmetric operator. Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct SymmetricOperator {
    n: usize,
    repr: Repr,
    norm_estimate: f64,
}

impl fmt::Debug for SymmetricOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.repr {
            Repr::Dense(_) => "dense",
            Repr::Implicit(_) => "implicit",
        };
        f.debug_struct("SymmetricOperator")
            .field("n", &self.n)
            .field("kind", &kind)
            .field("norm_estimate", &self.norm_estimate)
            .finish()
    }
}

/// Largest `|A_ij - A_ji|`.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `(A + A^T) / 2`, exactly symmetric in floating point.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = a.clone();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

impl SymmetricOperator {
    /// Wraps a dense matrix with the default symmetry tolerance.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        Self::dense_with_tolerance(matrix, &Tolerances::default())
    }

    /// Wraps a dense matrix, rejecting it if it is not symmetric to
    /// `tol.sym_tol` (relative), and storing `(A + A^T)/2`.
    pub fn dense_with_tolerance(matrix: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let asymmetry = max_asymmetry(&matrix);
        let allowed = tol.sym_tol * scale;
        if asymmetry > allowed {
            return Err(Error::NotSymmetric { asymmetry, allowed });
        }
        let matrix = symmetrize(&matrix);
        let mut op = Self {
            n: matrix.nrows(),
            repr: Repr::Dense(Arc::new(matrix)),
            norm_estimate: 0.0,
        };
        op.norm_estimate = op.power_norm_estimate();
        Ok(op)
    }

    /// Wraps a matvec callback. When `norm_estimate` is `None` the spectral
    /// norm is estimated by [`POWER_ITERATIONS`] power steps from a fixed seed.
    pub fn implicit<F>(n: usize, matvec: F, norm_estimate: Option<f64>) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Dimension("operator dimension must be positive".into()));
        }
        if let Some(est) = norm_estimate {
            if !(est.is_finite() && est >= 0.0) {
                return Err(Error::InvalidArgument(format!("invalid norm estimate {est}")));
            }
        }
        let mut op = Self {
            n,
            repr: Repr::Implicit(Arc::new(matvec)),
            norm_estimate: norm_estimate.unwrap_or(0.0),
        };
        if norm_estimate.is_none() {
            op.norm_estimate = op.power_norm_estimate();
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    pub fn as_dense(&self) -> Option<&DMatrix<f64>> {
        match &self.repr {
            Repr::Dense(m) => Some(m),
            Repr::Implicit(_) => None,
        }
    }

    /// Upper estimate of `||A||_2` used to scale tolerances.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n, "operand length does not match operator dimension");
        match &self.repr {
            Repr::Dense(m) => &**m * x,
            Repr::Implicit(f) => {
                let y = f(x);
                assert_eq!(y.len(), self.n, "matvec callback returned a vector of wrong length");
                y
            }
        }
    }

    /// Applies the operator to every column of `x`.
    pub fn apply_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n, "operand rows do not match operator dimension");
        match &self.repr {
            Repr::Dense(m) => &**m * x,
            Repr::Implicit(_) => {
                let mut out = DMatrix::zeros(self.n, x.ncols());
                for j in 0..x.ncols() {
                    let y = self.apply(&x.column(j).into_owned());
                    out.set_column(j, &y);
                }
                out
            }
        }
    }

    /// Dense copy of the operator, assembled column by column for implicit
    /// operators and symmetrized.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Dense(m) => (**m).clone(),
            Repr::Implicit(_) => symmetrize(&self.apply_block(&DMatrix::identity(self.n, self.n))),
        }
    }

    /// The operator `-A`.
    pub fn negated(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(Arc::new(-(**m).clone())),
            Repr::Implicit(f) => {
                let f = Arc::clone(f);
                Repr::Implicit(Arc::new(move |x: &DVector<f64>| -f(x)))
            }
        };
        Self { n: self.n, repr, norm_estimate: self.norm_estimate }
    }

    /// Exact trace for dense operators; a Hutchinson estimate with
    /// `probes` Rademacher vectors otherwise.
    pub fn trace_estimate(&self, probes: usize, seed: u64) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.trace(),
            Repr::Implicit(_) => {
                use rand::Rng;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let probes = probes.max(1);
                let mut acc = 0.0;
                for _ in 0..probes {
                    let z = DVector::from_fn(self.n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
                    acc += z.dot(&self.apply(&z));
                }
                acc / probes as f64
            }
        }
    }

    fn power_norm_estimate(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
        let mut x = DVector::from_fn(self.n, |_, _| StandardNormal.sample(&mut rng));
        x /= x.norm();
        let mut est = 0.0;
        for _ in 0..POWER_ITERATIONS {
            let y = self.apply(&x);
            let ny = y.norm();
            if ny == 0.0 || !ny.is_finite() {
                break;
            }
            est = ny;
            x = y / ny;
        }
        est
    }
}
