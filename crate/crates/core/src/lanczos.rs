//! Thick-restart Lanczos with full reorthogonalization and Rayleigh-Ritz
//! extraction of the algebraically largest eigenpairs.
//!
//! The projected matrix `Q^T A Q` is formed from explicit inner products
//! rather than the three-term recurrence, so after a thick restart (where it
//! is no longer tridiagonal) no special bookkeeping is needed. Residuals of
//! the Ritz pairs are computed explicitly from the stored `A Q`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::Tolerances;
use crate::eigen::{scale_columns, symmetric_eigen};
use crate::error::{Error, Result};
use crate::operator::{symmetrize, SymmetricOperator};
use crate::ritz::RitzBlock;

/// Solver settings. Reorthogonalization is always full (two-pass classical
/// Gram-Schmidt against the whole basis).
#[derive(Clone, Debug, PartialEq)]
pub struct LanczosConfig {
    pub num_wanted: usize,
    /// Krylov dimension cap; clamped to the operator dimension.
    pub max_basis_size: usize,
    /// Pair `i` is converged when `||r_i||_2 <= max(convergence_tol, floor) * ||A||_2`,
    /// where `floor = 10 u sqrt(n)` is the rounding level of an explicitly
    /// computed residual.
    pub convergence_tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    /// Keep a full Ritz-block snapshot for every outer iteration.
    pub record_snapshots: bool,
}

impl LanczosConfig {
    /// Defaults in the style of ARPACK's `eigs`: basis `max(2k, 20)`,
    /// tolerance `1e-14`.
    pub fn new(num_wanted: usize) -> Self {
        Self {
            num_wanted,
            max_basis_size: (2 * num_wanted).max(20),
            convergence_tol: 1e-14,
            max_restarts: 500,
            seed: 0,
            record_snapshots: false,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.convergence_tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_basis_size(mut self, m: usize) -> Self {
        self.max_basis_size = m;
        self
    }

    pub fn with_max_restarts(mut self, r: usize) -> Self {
        self.max_restarts = r;
        self
    }

    pub fn with_snapshots(mut self, on: bool) -> Self {
        self.record_snapshots = on;
        self
    }

    fn validate(&self, available: usize) -> Result<()> {
        if self.num_wanted == 0 {
            return Err(Error::InvalidArgument("num_wanted must be positive".into()));
        }
        if self.num_wanted > self.max_basis_size {
            return Err(Error::InvalidArgument(format!(
                "num_wanted = {} exceeds max_basis_size = {}",
                self.num_wanted, self.max_basis_size
            )));
        }
        if self.num_wanted > available {
            return Err(Error::InvalidArgument(format!(
                "num_wanted = {} exceeds the searchable dimension {available}",
                self.num_wanted
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidArgument("convergence_tol must be positive".into()));
        }
        Ok(())
    }
}

/// State of one outer iteration.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Current approximations to the wanted (largest) eigenvalues.
    pub values: DVector<f64>,
    pub residual_norms: DVector<f64>,
    pub num_converged: usize,
    /// `||R||_F` over the strictly positive wanted pairs.
    pub positive_residual_frob: f64,
    /// `sqrt(2) * positive_residual_frob`, the certificate when the
    /// complement is negative semidefinite.
    pub residual_certificate: f64,
    /// Present when snapshots are enabled.
    pub block: Option<RitzBlock>,
}

#[derive(Clone, Debug, Default)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// The `cfg.num_wanted` algebraically largest Ritz pairs of `A`.
///
/// On non-convergence the best available block is returned with
/// [`RitzBlock::converged`] set to `false`.
pub fn lanczos_largest(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    tol: &Tolerances,
) -> Result<(RitzBlock, IterationTrace)> {
    lanczos_impl(op, cfg, None, tol, true)
}

/// Lanczos restricted to the orthogonal complement of `constraints`
/// (orthonormal columns), i.e. on `P A P` with `P = I - C C^T`.
pub(crate) fn lanczos_constrained(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    constraints: Option<&DMatrix<f64>>,
    tol: &Tolerances,
) -> Result<(RitzBlock, IterationTrace)> {
    lanczos_impl(op, cfg, constraints, tol, false)
}

/// Verification probes allowed per solve.
const MAX_VERIFY_ROUNDS: usize = 8;

fn lanczos_impl(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    constraints: Option<&DMatrix<f64>>,
    tol: &Tolerances,
    verify: bool,
) -> Result<(RitzBlock, IterationTrace)> {
    let n = op.dim();
    let c = constraints.map_or(0, |c| c.ncols());
    if let Some(cm) = constraints {
        if cm.nrows() != n {
            return Err(Error::Dimension("constraint basis has wrong row count".into()));
        }
    }
    let available = n.saturating_sub(c);
    cfg.validate(available)?;
    let wanted = cfg.num_wanted;
    let m = cfg.max_basis_size.min(available).max((wanted + 1).min(available));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = DMatrix::<f64>::zeros(n, m);
    let mut aq = DMatrix::<f64>::zeros(n, m);
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut trace = IterationTrace::default();
    let mut norm_est = op.norm_estimate();

    let mut j = 0usize;
    let mut next = random_orthogonal_vector(&mut rng, constraints, &q, 0)
        .expect("a nonempty complement admits a start vector");
    let mut residual_vec = DVector::<f64>::zeros(n);
    let mut residual_beta = 0.0;
    let mut iteration = 0usize;
    let mut verify_rounds = 0usize;

    loop {
        let mut exhausted = false;
        while j < m {
            q.set_column(j, &next);
            let mut w = op.apply(&next);
            if let Some(cm) = constraints.filter(|cm| cm.ncols() > 0) {
                // restrict to P A P so residuals live in the complement
                let h = cm.tr_mul(&w);
                w -= cm * h;
            }
            for i in 0..=j {
                let h = q.column(i).dot(&w);
                t[(i, j)] = h;
                t[(j, i)] = h;
            }
            aq.set_column(j, &w);
            let mut f = w;
            orthogonalize(&mut f, constraints, &q, j + 1);
            let beta = f.norm();
            j += 1;
            residual_vec = f;
            residual_beta = beta;
            if j == m {
                break;
            }
            if beta > breakdown_threshold(tol, norm_est) {
                next = &residual_vec / beta;
            } else {
                match random_orthogonal_vector(&mut rng, constraints, &q, j) {
                    Some(v) => next = v,
                    None => {
                        exhausted = true;
                        break;
                    }
                }
            }
        }
        if j == available {
            exhausted = true;
        }

        let tj = symmetrize(&t.view((0, 0), (j, j)).into_owned());
        let (theta, s) = symmetric_eigen(&tj);
        let qj = q.columns(0, j);
        let y = qj * &s;
        let ay = aq.columns(0, j) * &s;
        let residual = &ay - scale_columns(&y, theta.as_slice());
        let norms: Vec<f64> = residual.column_iter().map(|col| col.norm()).collect();
        norm_est = norm_est.max(theta.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())));
        let threshold = cfg.convergence_tol.max(residual_floor(n)) * norm_est;
        let take = wanted.min(j);
        let num_converged = norms[..take].iter().filter(|&&r| r <= threshold).count();
        let converged = exhausted || num_converged == take;
        iteration += 1;

        let block = RitzBlock::solver_block(
            y.columns(0, take).into_owned(),
            theta.rows(0, take).into_owned(),
            residual.columns(0, take).into_owned(),
        );
        let positive_residual_frob = (0..take)
            .filter(|&i| theta[i] > 0.0)
            .map(|i| norms[i] * norms[i])
            .sum::<f64>()
            .sqrt();
        trace.records.push(TraceRecord {
            iteration,
            values: theta.rows(0, take).into_owned(),
            residual_norms: DVector::from_column_slice(&norms[..take]),
            num_converged,
            positive_residual_frob,
            residual_certificate: std::f64::consts::SQRT_2 * positive_residual_frob,
            block: cfg.record_snapshots.then(|| block.clone()),
        });

        // a Krylov space from one start vector sees a single copy of a
        // repeated eigenvalue; probe the complement before accepting
        let mut missed = None;
        if converged && !exhausted && verify && verify_rounds < MAX_VERIFY_ROUNDS && take > 0 && c + take < n {
            let yt = y.columns(0, take).into_owned();
            missed = missed_direction(op, cfg, constraints, &yt, theta[take - 1] + threshold, tol)?;
            verify_rounds += 1;
        }
        if (converged && missed.is_none()) || iteration > cfg.max_restarts {
            return Ok((block.with_converged(converged && missed.is_none()), trace));
        }

        // thick restart: keep the leading Ritz vectors, continue from the
        // residual (or from a missed direction, keeping just the wanted block)
        let keep = if missed.is_some() { take } else { (wanted + (m - wanted) / 2).min(m - 1).min(j) };
        // A Y is recomputed rather than rotated so rounding does not build up
        // across restarts
        let yk = y.columns(0, keep).into_owned();
        let mut ayk = op.apply_block(&yk);
        if let Some(cm) = constraints.filter(|cm| cm.ncols() > 0) {
            ayk -= cm * cm.tr_mul(&ayk);
        }
        let tk = symmetrize(&yk.tr_mul(&ayk));
        q.columns_mut(0, keep).copy_from(&yk);
        aq.columns_mut(0, keep).copy_from(&ayk);
        t.fill(0.0);
        t.view_mut((0, 0), (keep, keep)).copy_from(&tk);
        j = keep;
        next = if let Some(mut v) = missed {
            orthogonalize(&mut v, constraints, &q, j);
            let nv = v.norm();
            v / nv
        } else if residual_beta > breakdown_threshold(tol, norm_est) {
            let mut v = &residual_vec / residual_beta;
            // the residual is orthogonal to the old basis; one more pass against
            // the kept vectors keeps rounding in check
            orthogonalize(&mut v, constraints, &q, j);
            let nv = v.norm();
            v / nv
        } else {
            match random_orthogonal_vector(&mut rng, constraints, &q, j) {
                Some(v) => v,
                None => return Ok((block.with_converged(true), trace)),
            }
        };
    }
}

/// A unit vector orthogonal to `constraints` and `y` whose Rayleigh quotient
/// exceeds `floor`, found by a short Lanczos run on the complement.
fn missed_direction(
    op: &SymmetricOperator,
    cfg: &LanczosConfig,
    constraints: Option<&DMatrix<f64>>,
    y: &DMatrix<f64>,
    floor: f64,
    tol: &Tolerances,
) -> Result<Option<DVector<f64>>> {
    let c = match constraints.filter(|cm| cm.ncols() > 0) {
        Some(cm) => {
            let mut both = DMatrix::zeros(cm.nrows(), cm.ncols() + y.ncols());
            both.columns_mut(0, cm.ncols()).copy_from(cm);
            both.columns_mut(cm.ncols(), y.ncols()).copy_from(y);
            both
        }
        None => y.clone(),
    };
    let available = op.dim() - c.ncols();
    let probe = LanczosConfig {
        num_wanted: 1,
        max_basis_size: 20.min(available),
        convergence_tol: 1e-8,
        max_restarts: 50,
        seed: cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
        record_snapshots: false,
    };
    let (blk, _) = lanczos_impl(op, &probe, Some(&c), tol, false)?;
    Ok((blk.values()[0] > floor).then(|| blk.basis().column(0).into_owned()))
}

/// Relative residual below which explicit residuals are rounding noise.
pub fn residual_floor(n: usize) -> f64 {
    10.0 * f64::EPSILON * (n as f64).sqrt()
}

fn breakdown_threshold(tol: &Tolerances, norm_est: f64) -> f64 {
    tol.breakdown_tol * norm_est
}

/// Two passes of classical Gram-Schmidt against the constraints and the
/// first `cols` columns of `q`.
fn orthogonalize(v: &mut DVector<f64>, constraints: Option<&DMatrix<f64>>, q: &DMatrix<f64>, cols: usize) {
    for _ in 0..2 {
        if let Some(c) = constraints {
            if c.ncols() > 0 {
                let h = c.tr_mul(v);
                *v -= c * h;
            }
        }
        if cols > 0 {
            let qb = q.columns(0, cols);
            let h = qb.tr_mul(v);
            *v -= qb * h;
        }
    }
}

fn random_orthogonal_vector(
    rng: &mut ChaCha8Rng,
    constraints: Option<&DMatrix<f64>>,
    q: &DMatrix<f64>,
    cols: usize,
) -> Option<DVector<f64>> {
    let n = q.nrows();
    for _ in 0..5 {
        let mut v = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let before = v.norm();
        orthogonalize(&mut v, constraints, q, cols);
        let after = v.norm();
        if after > 1e-8 * before {
            return Some(v / after);
        }
    }
    None
}
