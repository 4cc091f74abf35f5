//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use psdcert::experiments::{self, GapSweepConfig};
use psdcert::{
    project_approx_negative, project_approx_positive, project_auto, ApproxProjection, CertOptions, DPlusMode, Error,
    LanczosConfig, SymmetricOperator, Tolerances,
};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn operator(rows: Vec<Vec<f64>>) -> PyResult<SymmetricOperator> {
    SymmetricOperator::dense(to_matrix(rows)?).map_err(to_py_err)
}

/// Certificate of an approximate projection.
#[pyclass(frozen, get_all, skip_from_py_object, module = "pypsdcert")]
#[derive(Clone)]
pub struct Certificate {
    residual_frob: f64,
    cross_term_frob: f64,
    dplus_frob: f64,
    dplus_tag: String,
    bound: f64,
    formula: String,
    side: String,
    n: usize,
    k: usize,
    conservative: bool,
}

#[pymethods]
impl Certificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(side={}, formula={}, bound={:e}, conservative={})",
            self.side,
            self.formula,
            self.bound,
            if self.conservative { "True" } else { "False" }
        )
    }
}

/// Factored approximate projection with its certificate.
#[pyclass(frozen, module = "pypsdcert")]
pub struct Projection {
    inner: ApproxProjection,
}

#[pymethods]
impl Projection {
    #[getter]
    fn side(&self) -> &'static str {
        self.inner.side().as_str()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.ritz().values().iter().copied().collect()
    }

    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.ritz().basis())
    }

    #[getter]
    fn certificate(&self) -> Certificate {
        let c = self.inner.certificate();
        Certificate {
            residual_frob: c.residual_frob,
            cross_term_frob: c.cross_term_frob,
            dplus_frob: c.dplus_frob,
            dplus_tag: c.dplus_tag.as_str().to_owned(),
            bound: c.bound_value,
            formula: c.formula.as_str().to_owned(),
            side: c.side.as_str().to_owned(),
            n: c.n,
            k: c.k,
            conservative: c.conservative,
        }
    }

    /// The projection as a dense matrix.
    fn to_dense(&self) -> Vec<Vec<f64>> {
        to_rows(&self.inner.to_dense())
    }
}

/// Approximate projection of a symmetric matrix onto the PSD cone.
#[pyfunction]
#[pyo3(signature = (matrix, side = "auto", wanted = 25, tol = 1e-14, seed = 0, dplus = "auto"))]
fn project(matrix: Vec<Vec<f64>>, side: &str, wanted: usize, tol: f64, seed: u64, dplus: &str) -> PyResult<Projection> {
    let op = operator(matrix)?;
    let cfg = LanczosConfig::new(wanted.max(1)).with_tol(tol).with_seed(seed);
    let opts = CertOptions::default().with_dplus(dplus.parse::<DPlusMode>().map_err(to_py_err)?);
    let inner = match side {
        "auto" => project_auto(&op, &cfg, &opts),
        "pos" | "positive" => project_approx_positive(&op, &cfg, &opts),
        "neg" | "negative" => project_approx_negative(&op, &cfg, &opts),
        other => return Err(PyValueError::new_err(format!("unknown side {other:?}"))),
    }
    .map_err(to_py_err)?;
    Ok(Projection { inner })
}

/// Exact projection from a full eigendecomposition.
#[pyfunction]
fn project_exact(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let (p, _) = psdcert::project_exact(&operator(matrix)?, &Tolerances::default()).map_err(to_py_err)?;
    Ok(to_rows(&p))
}

#[pyfunction]
fn theorem1_bound(residual_frob: f64, cross_term_frob: f64, dplus_frob: f64) -> PyResult<f64> {
    psdcert::theorem1_bound(residual_frob, cross_term_frob, dplus_frob).map_err(to_py_err)
}

#[pyfunction]
fn corollary1_bound(residual_frob: f64, dplus_frob: f64) -> PyResult<f64> {
    psdcert::corollary1_bound(residual_frob, dplus_frob).map_err(to_py_err)
}

#[pyfunction]
fn corollary2_bound(residual_frob: f64) -> PyResult<f64> {
    psdcert::corollary2_bound(residual_frob).map_err(to_py_err)
}

#[pyfunction]
fn subspace_error_bound(residual_frob: f64, dplus_frob: f64) -> PyResult<f64> {
    psdcert::subspace_error_bound(residual_frob, dplus_frob).map_err(to_py_err)
}

/// `(name, value, expected, passed)` for each worked example.
#[pyfunction]
fn verify_examples() -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = experiments::verify_examples().map_err(to_py_err)?;
    Ok(checks.into_iter().map(|c| (c.name.to_owned(), c.value, c.expected, c.passed)).collect())
}

/// Rows `(epsilon, gap, exact_error, cor1_bound, naive_bound, residual_frob)`.
#[pyfunction]
#[pyo3(signature = (epsilons, n = 500, wanted = 25, tol = 1e-14, seed = 0))]
fn gap_sweep(
    epsilons: Vec<f64>,
    n: usize,
    wanted: usize,
    tol: f64,
    seed: u64,
) -> PyResult<Vec<(f64, f64, f64, f64, f64, f64)>> {
    let cfg = GapSweepConfig { epsilons, n, wanted, tol, seed };
    let rows = experiments::gap_sweep(&cfg).map_err(to_py_err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.epsilon, r.gap, r.exact_error, r.cor1_bound, r.naive_bound, r.residual_frob))
        .collect())
}

#[pyfunction]
fn read_matrix_market(path: &str) -> PyResult<Vec<Vec<f64>>> {
    psdcert::read_matrix_market(path).map(|m| to_rows(&m)).map_err(to_py_err)
}

#[pyfunction]
fn write_matrix_market(path: &str, matrix: Vec<Vec<f64>>) -> PyResult<()> {
    psdcert::write_matrix_market(path, &to_matrix(matrix)?).map_err(to_py_err)
}

#[pymodule]
fn pypsdcert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Certificate>()?;
    m.add_class::<Projection>()?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(project_exact, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(corollary1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(corollary2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(subspace_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify_examples, m)?)?;
    m.add_function(wrap_pyfunction!(gap_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix_market, m)?)?;
    Ok(())
}
