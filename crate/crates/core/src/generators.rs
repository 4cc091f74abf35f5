//! Test matrices with prescribed spectra, and the fixed worked examples.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::{scale_columns, ExactEigendecomposition};
use crate::error::{Error, Result};
use crate::operator::{symmetrize, SymmetricOperator};

#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    /// `count` points `lo * (hi/lo)^(i/(count-1))`, endpoints included.
    Geometric { lo: f64, hi: f64, count: usize },
    /// `count` i.i.d. uniform draws on `(lo, hi)`.
    Uniform { lo: f64, hi: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Segment {
    pub fn count(&self) -> usize {
        match self {
            Segment::Geometric { count, .. } | Segment::Uniform { count, .. } => *count,
            Segment::Explicit(v) => v.len(),
        }
    }
}

/// A prescribed spectrum plus the seed of the random orthogonal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec {
    pub segments: Vec<Segment>,
    pub seed: u64,
    /// When set, the total segment count must equal this dimension.
    pub dim: Option<usize>,
}

impl SpectrumSpec {
    pub fn new(segments: Vec<Segment>, seed: u64) -> Self {
        Self { segments, seed, dim: None }
    }

    pub fn with_dim(mut self, n: usize) -> Self {
        self.dim = Some(n);
        self
    }

    pub fn total_count(&self) -> usize {
        self.segments.iter().map(Segment::count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total_count();
        if total == 0 {
            return Err(Error::InvalidArgument("spectrum must contain at least one eigenvalue".into()));
        }
        if let Some(n) = self.dim {
            if n != total {
                return Err(Error::InvalidArgument(format!(
                    "spectrum has {total} eigenvalues but dimension {n} was requested"
                )));
            }
        }
        for seg in &self.segments {
            match *seg {
                Segment::Geometric { lo, hi, .. } => {
                    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "geometric segment needs 0 < lo <= hi, got [{lo}, {hi}]"
                        )));
                    }
                }
                Segment::Uniform { lo, hi, .. } => {
                    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "uniform segment needs lo <= hi, got [{lo}, {hi}]"
                        )));
                    }
                }
                Segment::Explicit(ref v) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidArgument("explicit eigenvalues must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// The eigenvalue list, in segment order. Uniform draws consume `rng`.
    fn draw_values(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_count());
        for seg in &self.segments {
            match *seg {
                Segment::Geometric { lo, hi, count } => {
                    if count == 1 {
                        out.push(lo);
                    } else {
                        let ratio = hi / lo;
                        out.extend((0..count).map(|i| lo * ratio.powf(i as f64 / (count - 1) as f64)));
                    }
                }
                Segment::Uniform { lo, hi, count } => {
                    for _ in 0..count {
                        out.push(if lo == hi { lo } else { rng.random_range(lo..hi) });
                    }
                }
                Segment::Explicit(ref v) => out.extend_from_slice(v),
            }
        }
        out
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix,
/// with signs fixed so that `R` has a nonnegative diagonal.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `A = Q diag(lambda) Q^T` together with its known eigendecomposition.
pub fn matrix_from_spectrum(spec: &SpectrumSpec) -> Result<(SymmetricOperator, ExactEigendecomposition)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = spec.draw_values(&mut rng);
    let n = values.len();
    let q = random_orthogonal(n, &mut rng);
    let a = symmetrize(&(scale_columns(&q, &values) * q.transpose()));
    let op = SymmetricOperator::dense(a)?;
    let exact = ExactEigendecomposition::from_parts(DVector::from_vec(values), q);
    Ok((op, exact))
}

/// Default dimension of the gap-sweep family.
pub const GAP_FAMILY_DIM: usize = 500;

/// Twenty eigenvalues geometric on `[1e-10, 1]`, one at `epsilon`, one at
/// `-epsilon`, and `n - 22` uniform on `[-1, 0]`.
pub fn gap_family(epsilon: f64, n: usize, seed: u64) -> Result<SpectrumSpec> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if n < 23 {
        return Err(Error::InvalidArgument(format!("gap family needs n >= 23, got {n}")));
    }
    Ok(SpectrumSpec::new(
        vec![
            Segment::Geometric { lo: 1e-10, hi: 1.0, count: 20 },
            Segment::Explicit(vec![epsilon, -epsilon]),
            Segment::Uniform { lo: -1.0, hi: 0.0, count: n - 22 },
        ],
        seed,
    )
    .with_dim(n))
}

/// The 2x2 sharpness example: a Rayleigh-Ritz pair whose projection error
/// exceeds `||R||_F`.
#[derive(Clone, Debug)]
pub struct Example1Fixture {
    pub a: DMatrix<f64>,
    pub basis: DMatrix<f64>,
    pub values: DVector<f64>,
    pub expected_residual_frob: f64,
    /// `||V L V^T - P(A)||_F^2 / ||R||_F^2`.
    pub expected_frob_ratio: f64,
    /// `||V L V^T - P(A)||_2^2 / ||R||_2^2`.
    pub expected_spectral_ratio: f64,
    /// Closed form `[[sqrt5 + 3, -sqrt5 - 1], [-sqrt5 - 1, 2]] / (2 sqrt5)`.
    pub expected_projection: DMatrix<f64>,
}

pub fn example1() -> Example1Fixture {
    let s5 = 5f64.sqrt();
    let denom = 2.0 * s5;
    Example1Fixture {
        a: DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 0.0]),
        basis: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        values: DVector::from_vec(vec![1.0]),
        expected_residual_frob: 1.0,
        expected_frob_ratio: 1.2764,
        expected_spectral_ratio: 1.0935,
        expected_projection: DMatrix::from_row_slice(
            2,
            2,
            &[(s5 + 3.0) / denom, (-s5 - 1.0) / denom, (-s5 - 1.0) / denom, 2.0 / denom],
        ),
    }
}

/// `A = [[M, 1], [1, 1/M]]`, `B = diag(M + 1, -1 + 1/M)`.
pub fn spectral_counterexample(m: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m}")));
    }
    let a = DMatrix::from_row_slice(2, 2, &[m, 1.0, 1.0, 1.0 / m]);
    let b = DMatrix::from_row_slice(2, 2, &[m + 1.0, 0.0, 0.0, -1.0 + 1.0 / m]);
    Ok((a, b))
}

/// Limit of the spectral-norm expansion ratio as `M -> inf`.
pub fn spectral_counterexample_limit() -> f64 {
    (5f64.sqrt() + 1.0) / (2.0 * 2f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::symmetric_eigenvalues;

    #[test]
    fn one_by_one() {
        let spec = SpectrumSpec::new(vec![Segment::Explicit(vec![1.0])], 0);
        let (op, _) = matrix_from_spectrum(&spec).unwrap();
        assert_eq!(op.as_dense().unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn two_by_two_spectrum_preserved() {
        let spec = SpectrumSpec::new(vec![Segment::Explicit(vec![1.0, -1.0])], 42);
        let (op, _) = matrix_from_spectrum(&spec).unwrap();
        let ev = symmetric_eigenvalues(op.as_dense().unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_family_layout() {
        let spec = gap_family(1e-10, 500, 1).unwrap();
        assert_eq!(spec.total_count(), 500);
        assert_eq!(spec.segments[2].count(), 478);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values = spec.draw_values(&mut rng);
        assert_eq!(values[0], 1e-10);
        assert!((values[19] - 1.0).abs() < 1e-15);
        assert!(values[22..].iter().all(|&v| (-1.0..0.0).contains(&v)));
        assert!(gap_family(1.0, 500, 1).is_ok());
        assert!(gap_family(0.0, 500, 1).is_err());
        assert!(gap_family(0.5, 22, 1).is_err());
    }

    #[test]
    fn geometric_endpoints_and_ratio() {
        let spec = SpectrumSpec::new(vec![Segment::Geometric { lo: 1e-4, hi: 1.0, count: 5 }], 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = spec.draw_values(&mut rng);
        let expect = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-15 * b.max(1e-4) * 10.0);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = SpectrumSpec::new(vec![Segment::Geometric { lo: 0.0, hi: 1.0, count: 3 }], 0);
        assert!(matrix_from_spectrum(&bad).is_err());
        let mismatch = SpectrumSpec::new(vec![Segment::Explicit(vec![1.0, 2.0])], 0).with_dim(3);
        assert!(matrix_from_spectrum(&mismatch).is_err());
        assert!(matrix_from_spectrum(&SpectrumSpec::new(vec![], 0)).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = gap_family(1e-6, 60, 17).unwrap();
        let (a, _) = matrix_from_spectrum(&spec).unwrap();
        let (b, _) = matrix_from_spectrum(&spec).unwrap();
        assert_eq!(a.as_dense().unwrap().as_slice(), b.as_dense().unwrap().as_slice());
    }

    #[test]
    fn counterexample_rejects_nonpositive_m() {
        assert!(spectral_counterexample(0.0).is_err());
        assert!(spectral_counterexample(-1.0).is_err());
    }
}
