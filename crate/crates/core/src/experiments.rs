//! Drivers for the gap sweep, the convergence trace with and without
//! Ritz-pair filtering, and the checks on the fixed worked examples.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bounds::{corollary1_bound, drop_ritz_pairs, exact_projection_error, naive_gap_bound};
use crate::config::Tolerances;
use crate::deflation::dplus_exact;
use crate::eigen::ExactEigendecomposition;
use crate::error::{Error, Result};
use crate::generators::{
    example1, gap_family, matrix_from_spectrum, spectral_counterexample, spectral_counterexample_limit,
    GAP_FAMILY_DIM,
};
use crate::lanczos::{lanczos_largest, LanczosConfig};
use crate::linalg::spectral_norm;
use crate::operator::SymmetricOperator;
use crate::projector::{project_approx_positive, project_exact, CertOptions, DPlusMode};
use crate::ritz::{split_by_sign, RitzBlock, Side};

/// `{1e-2, 1e-3, ..., 1e-10}`.
pub fn default_epsilons() -> Vec<f64> {
    (2..=10).map(|e| 10f64.powi(-e)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapSweepConfig {
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub wanted: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for GapSweepConfig {
    fn default() -> Self {
        Self { epsilons: default_epsilons(), n: GAP_FAMILY_DIM, wanted: 25, tol: 1e-14, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSweepRow {
    pub epsilon: f64,
    pub gap: f64,
    pub exact_error: f64,
    pub cor1_bound: f64,
    pub naive_bound: f64,
    pub residual_frob: f64,
}

/// One row per epsilon, sorted by decreasing epsilon. `D_+` comes from the
/// dense oracle so that the bound column is exact.
pub fn gap_sweep(cfg: &GapSweepConfig) -> Result<Vec<GapSweepRow>> {
    let mut eps = cfg.epsilons.clone();
    if eps.is_empty() {
        return Err(Error::InvalidArgument("at least one epsilon is required".into()));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    let opts = CertOptions::default().with_dplus(DPlusMode::Oracle);
    let lcfg = LanczosConfig::new(cfg.wanted).with_tol(cfg.tol).with_seed(cfg.seed);
    let mut rows = Vec::with_capacity(eps.len());
    for &epsilon in &eps {
        let (op, exact) = matrix_from_spectrum(&gap_family(epsilon, cfg.n, cfg.seed)?)?;
        let proj = project_approx_positive(&op, &lcfg, &opts)?;
        let cert = proj.certificate();
        let exact_error = exact_projection_error(&proj.to_dense(), &exact);
        let (naive_bound, gap) = naive_gap_bound(proj.ritz(), &exact);
        rows.push(GapSweepRow {
            epsilon,
            gap,
            exact_error,
            cor1_bound: corollary1_bound(cert.residual_frob, cert.dplus_frob)?,
            naive_bound,
            residual_frob: cert.residual_frob,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceConfig {
    pub n: usize,
    pub epsilon: f64,
    pub wanted: usize,
    pub tol: f64,
    pub seed: u64,
    /// Compute the filtered columns.
    pub filter: bool,
    /// Krylov dimension; `None` keeps the solver default.
    pub max_basis_size: Option<usize>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { n: GAP_FAMILY_DIM, epsilon: 1e-6, wanted: 25, tol: 1e-14, seed: 0, filter: true, max_basis_size: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub exact_error_unfiltered: f64,
    pub bound_unfiltered: f64,
    pub exact_error_filtered: Option<f64>,
    pub bound_filtered: Option<f64>,
    pub num_dropped: Option<usize>,
}

/// Error and Corollary-1 bound after every outer Lanczos iteration, before
/// and after dropping Ritz pairs with large residuals. `D_+` is recomputed
/// by the dense oracle for both blocks.
pub fn convergence_trace(cfg: &TraceConfig) -> Result<Vec<TraceRow>> {
    let (op, exact) = matrix_from_spectrum(&gap_family(cfg.epsilon, cfg.n, cfg.seed)?)?;
    let mut lcfg = LanczosConfig::new(cfg.wanted).with_tol(cfg.tol).with_seed(cfg.seed).with_snapshots(true);
    if let Some(m) = cfg.max_basis_size {
        lcfg = lcfg.with_max_basis_size(m);
    }
    let (_, trace) = lanczos_largest(&op, &lcfg, &Tolerances::default())?;
    let a = op.as_dense().expect("generated operators are dense");
    let target = exact.positive_part();
    let mut rows = Vec::with_capacity(trace.len());
    for rec in &trace.records {
        let block = rec.block.as_ref().expect("snapshots were requested");
        let rb = split_by_sign(block, Side::Positive);
        let (err_u, bound_u, lambda_max) = block_error_and_bound(a, &rb, &target)?;
        let (err_f, bound_f, dropped) = if cfg.filter {
            let (kept, dropped) = drop_ritz_pairs(&rb, lambda_max);
            if dropped.is_empty() {
                (Some(err_u), Some(bound_u), Some(0))
            } else {
                let (e, b, _) = block_error_and_bound(a, &kept, &target)?;
                (Some(e), Some(b), Some(dropped.len()))
            }
        } else {
            (None, None, None)
        };
        rows.push(TraceRow {
            iter: rec.iteration,
            exact_error_unfiltered: err_u,
            bound_unfiltered: bound_u,
            exact_error_filtered: err_f,
            bound_filtered: bound_f,
            num_dropped: dropped,
        });
    }
    Ok(rows)
}

fn block_error_and_bound(a: &DMatrix<f64>, rb: &RitzBlock, target: &DMatrix<f64>) -> Result<(f64, f64, f64)> {
    let dplus = dplus_exact(a, rb.basis());
    let err = (rb.assemble() - target).norm();
    Ok((err, corollary1_bound(rb.residual_frob(), dplus.frob)?, dplus.lambda_max))
}

/// Writes rows as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("CSV serialization failed: {other:?}")),
    }
}

/// The CSV text of a set of rows.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleCheck {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ExampleCheck {
    fn new(name: &'static str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self { name, value, expected, tolerance, passed: (value - expected).abs() <= tolerance }
    }
}

/// Large-`M` parameter used for the spectral-norm counterexample check.
pub const COUNTEREXAMPLE_M: f64 = 1e6;

/// `||P_+(A) - P_+(B)||_2 / ||A - B||_2` for the counterexample pair.
pub fn spectral_expansion_ratio(m: f64) -> Result<f64> {
    let (a, b) = spectral_counterexample(m)?;
    let tol = Tolerances::default();
    let (pa, _) = project_exact(&SymmetricOperator::dense(a.clone())?, &tol)?;
    let (pb, _) = project_exact(&SymmetricOperator::dense(b.clone())?, &tol)?;
    Ok(spectral_norm(&(pa - pb)) / spectral_norm(&(a - b)))
}

/// Reproduces the sharpness example and the spectral-norm counterexample.
pub fn verify_examples() -> Result<Vec<ExampleCheck>> {
    let fx = example1();
    let op = SymmetricOperator::dense(fx.a.clone())?;
    let tol = Tolerances::default();
    let rb = RitzBlock::new(&op, fx.basis.clone(), fx.values.clone(), Some(Side::Positive), &tol)?;
    let (p, _) = project_exact(&op, &tol)?;
    let diff = rb.assemble() - &p;
    let frob_ratio = diff.norm_squared() / rb.residual_frob().powi(2);
    let spec_ratio = spectral_norm(&diff).powi(2) / spectral_norm(rb.residual()).powi(2);
    let closed_form = (&p - &fx.expected_projection).amax();
    Ok(vec![
        ExampleCheck::new("example1 residual norm", rb.residual_frob(), fx.expected_residual_frob, 1e-12),
        ExampleCheck::new("example1 Frobenius ratio", frob_ratio, fx.expected_frob_ratio, 1e-3),
        ExampleCheck::new("example1 spectral ratio", spec_ratio, fx.expected_spectral_ratio, 1e-3),
        ExampleCheck::new("example1 projection closed form", closed_form, 0.0, 1e-12),
        ExampleCheck::new(
            "spectral counterexample limit",
            spectral_expansion_ratio(COUNTEREXAMPLE_M)?,
            spectral_counterexample_limit(),
            1e-3,
        ),
    ])
}

/// Largest observed `||X - P_+(A)||_2^2 / ||R||_2^2` over random small
/// Rayleigh-Ritz instances. Exploratory; no bound is claimed.
pub fn spectral_ratio_survey(trials: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerances::default();
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(1..n);
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let op = SymmetricOperator::dense((&g + g.transpose()) * 0.5)?;
        let q = DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng)).qr().q();
        let rb = split_by_sign(&crate::ritz::rayleigh_ritz(&op, &q, &tol)?, Side::Positive);
        let r2 = spectral_norm(rb.residual());
        if r2 <= 1e-12 {
            continue;
        }
        let exact = ExactEigendecomposition::of_operator(&op, tol.dense_threshold)?;
        let e2 = spectral_norm(&(rb.assemble() - exact.positive_part()));
        worst = worst.max(e2 * e2 / (r2 * r2));
    }
    Ok(worst)
}
