//! Python bindings for the `rough-laplace` numerics.
//!
//! Vector fields and functionals cross the boundary as JSON strings in the
//! same tagged format the CLI configuration uses, e.g.
//! `{"kind": "endpoint_quadratic", "v": [0.5, 0.5], "q": [0.4, 0, 0, 0.4]}`.

use std::fmt::Display;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rough_laplace::fbm::{CmBasis, FbmSampler, HurstParams};
use rough_laplace::functional::{FieldSpec, FunctionalSpec};
use rough_laplace::grid::{pvar_exact, SampledPath, TimeGrid};
use rough_laplace::hessian::{det2_mc, hessian_matrix, log_det2};
use rough_laplace::laplace::{
    expansion_constants, expansion_fit, kappa_ladder, mc_laplace, minimize_f_lambda, LaplaceProblem, McConfig, OptConfig,
};
use rough_laplace::ode::solve_young_ode;
use rough_laplace::rough::{chen_residual, lift, RoughPath};
use rough_laplace::taylor::TaylorContext;

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field_from(json: &str) -> PyResult<FieldSpec> {
    serde_json::from_str(json).map_err(|e| value_err(format!("field: {e}")))
}

fn functional_from(json: &str) -> PyResult<FunctionalSpec> {
    serde_json::from_str(json).map_err(|e| value_err(format!("functional: {e}")))
}

fn uniform_grid(steps: usize) -> PyResult<Arc<TimeGrid>> {
    Ok(Arc::new(TimeGrid::uniform(steps).map_err(value_err)?))
}

/// Hurst index with its variation exponents `p` and Besov index `q`.
#[pyclass(name = "HurstParams", frozen)]
struct PyHurstParams(HurstParams);

#[pymethods]
impl PyHurstParams {
    /// Both exponents must be given together; otherwise defaults are derived from `hurst`.
    #[new]
    #[pyo3(signature = (hurst, p=None, q=None))]
    fn new(hurst: f64, p: Option<f64>, q: Option<f64>) -> PyResult<Self> {
        let params = match (p, q) {
            (Some(p), Some(q)) => HurstParams::with_exponents(hurst, p, q),
            (None, None) => HurstParams::new(hurst),
            _ => return Err(value_err("give both p and q or neither")),
        };
        params.map(Self).map_err(value_err)
    }

    #[getter]
    fn hurst(&self) -> f64 {
        self.0.hurst
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    fn __repr__(&self) -> String {
        format!("HurstParams(hurst={}, p={}, q={})", self.0.hurst, self.0.p, self.0.q)
    }
}

/// A path in `ℝ^d` sampled on a grid of `[0, 1]`.
#[pyclass(name = "Path", frozen)]
struct PyPath(SampledPath);

#[pymethods]
impl PyPath {
    /// `values` holds one row of length `d` per grid time.
    #[new]
    fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> PyResult<Self> {
        let grid = Arc::new(TimeGrid::new(times).map_err(value_err)?);
        let dim = values.first().map_or(0, Vec::len);
        if values.iter().any(|r| r.len() != dim) {
            return Err(value_err("rows of `values` differ in length"));
        }
        SampledPath::new(grid, dim, values.concat()).map(Self).map_err(value_err)
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        (0..self.0.len()).map(|i| self.0.point(i).to_vec()).collect()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Linear interpolation at time `t`.
    fn eval(&self, t: f64) -> Vec<f64> {
        self.0.eval(t)
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }

    /// Exact p-variation over grid partitions: `(value, optimal partition indices)`.
    fn pvar(&self, p: f64) -> PyResult<(f64, Vec<usize>)> {
        let r = pvar_exact(&self.0, p).map_err(value_err)?;
        Ok((r.value, r.optimal_partition))
    }
}

/// Level-2 or level-3 lift of a path, indexed by grid positions `i ≤ j`.
#[pyclass(name = "RoughPath", frozen)]
struct PyRoughPath(RoughPath);

impl PyRoughPath {
    fn check(&self, i: usize, j: usize) -> PyResult<()> {
        if i > j || j >= self.0.len() {
            return Err(value_err(format!("need i ≤ j < {}, got ({i}, {j})", self.0.len())));
        }
        Ok(())
    }
}

#[pymethods]
impl PyRoughPath {
    #[getter]
    fn level(&self) -> usize {
        self.0.level()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn x1(&self, i: usize, j: usize) -> PyResult<Vec<f64>> {
        self.check(i, j)?;
        Ok(self.0.x1(i, j).to_vec())
    }

    /// Row-major `d×d` second-level increment.
    fn x2(&self, i: usize, j: usize) -> PyResult<Vec<f64>> {
        self.check(i, j)?;
        Ok(self.0.x2(i, j).to_vec())
    }

    /// Lévy area between components `a` and `b`.
    fn area(&self, i: usize, j: usize, a: usize, b: usize) -> PyResult<f64> {
        self.check(i, j)?;
        if a >= self.0.dim() || b >= self.0.dim() {
            return Err(value_err("component index out of range"));
        }
        Ok(self.0.area(i, j, a, b))
    }

    /// Largest violation of Chen's identity over all triples.
    fn chen_residual(&self) -> f64 {
        chen_residual(&self.0)
    }
}

/// fBm on a uniform grid; `(seed, stream)` fixes the sample.
#[pyfunction]
#[pyo3(signature = (steps, hurst, dim, seed, stream=0))]
fn sample_fbm(steps: usize, hurst: f64, dim: usize, seed: u64, stream: u64) -> PyResult<PyPath> {
    let sampler = FbmSampler::new(uniform_grid(steps)?, hurst).map_err(value_err)?;
    Ok(PyPath(sampler.sample_indexed(dim, seed, stream)))
}

#[pyfunction(name = "lift")]
#[pyo3(signature = (path, level=2))]
fn lift_path(py: Python<'_>, path: &PyPath, level: usize) -> PyResult<PyRoughPath> {
    py.detach(|| lift(&path.0, level)).map(PyRoughPath).map_err(value_err)
}

/// Young ODE `dy = σ(y) dx + β(y) dt` driven by `driver`.
#[pyfunction]
#[pyo3(signature = (field, driver, y0, drift=true))]
fn solve_ode(py: Python<'_>, field: &str, driver: &PyPath, y0: Vec<f64>, drift: bool) -> PyResult<PyPath> {
    let field = field_from(field)?.build().map_err(value_err)?;
    py.detach(|| solve_young_ode(field.as_ref(), &driver.0, &y0, drift)).map(|s| PyPath(s.path)).map_err(value_err)
}

/// Exponent ladder as `(value, n1, n2)` triples.
#[pyfunction(name = "kappa_ladder")]
fn kappa(hurst: f64, count: usize) -> PyResult<Vec<(f64, u32, u32)>> {
    let l = kappa_ladder(hurst, count).map_err(value_err)?;
    Ok(l.entries.iter().map(|e| (e.value, e.n1, e.n2)).collect())
}

/// `log det₂(I + αA)` from the eigenvalues of `A`.
#[pyfunction(name = "log_det2")]
#[pyo3(signature = (eigenvalues, alpha=2.0))]
fn py_log_det2(eigenvalues: Vec<f64>, alpha: f64) -> PyResult<f64> {
    log_det2(&eigenvalues, alpha).map_err(value_err)
}

/// Monte Carlo estimate of `det₂(I + 2A)^{-1/2}` as `(mean, std_error)`.
#[pyfunction(name = "det2_mc")]
fn py_det2_mc(py: Python<'_>, eigenvalues: Vec<f64>, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let e = py.detach(|| det2_mc(&eigenvalues, samples, seed)).map_err(value_err)?;
    Ok((e.mean, e.std_error))
}

/// Truncated Hessian of `F∘Ψ` at the Cameron–Martin path with the given
/// coefficients: `(matrix rows, ascending eigenvalues)`.
#[pyfunction]
#[pyo3(signature = (field, f, y0, gamma_coeffs, hurst=0.4, grid_steps=64))]
fn hessian(
    py: Python<'_>,
    field: &str,
    f: &str,
    y0: Vec<f64>,
    gamma_coeffs: Vec<f64>,
    hurst: f64,
    grid_steps: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let field = field_from(field)?.build().map_err(value_err)?;
    let f = functional_from(f)?.build(field.state_dim()).map_err(value_err)?;
    let d = field.noise_dim();
    if gamma_coeffs.is_empty() || !gamma_coeffs.len().is_multiple_of(d) {
        return Err(value_err(format!("gamma_coeffs must be a non-empty multiple of d = {d}")));
    }
    let params = HurstParams::new(hurst).map_err(value_err)?;
    let basis = CmBasis::new(uniform_grid(grid_steps)?, params, d, gamma_coeffs.len() / d).map_err(value_err)?;
    py.detach(|| {
        let gamma = basis.path(&gamma_coeffs)?;
        let ctx = TaylorContext::new(field.as_ref(), gamma, &y0)?;
        let h = hessian_matrix(f.as_ref(), &ctx, &basis, basis.len())?;
        let rows = h.a.row_iter().map(|r| r.iter().copied().collect()).collect();
        Ok::<_, rough_laplace::Error>((rows, h.eigenvalues()))
    })
    .map_err(value_err)
}

/// Full Laplace pipeline: minimiser, expansion constants, Monte Carlo table
/// and fit. Returns the report as a dict with an added `mc` table.
#[pyfunction]
#[pyo3(signature = (field, f, g, y0, eps_list, hurst=0.4, grid_steps=64, truncation=None, samples=1000, seed=0, fit_degree=1))]
#[allow(clippy::too_many_arguments)]
fn laplace<'py>(
    py: Python<'py>,
    field: &str,
    f: &str,
    g: &str,
    y0: Vec<f64>,
    eps_list: Vec<f64>,
    hurst: f64,
    grid_steps: usize,
    truncation: Option<usize>,
    samples: usize,
    seed: u64,
    fit_degree: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let field = field_from(field)?.build().map_err(value_err)?;
    let n = field.state_dim();
    let d = field.noise_dim();
    let f = functional_from(f)?.build(n).map_err(value_err)?;
    let g = functional_from(g)?.build(n).map_err(value_err)?;
    let truncation = truncation.unwrap_or(4 * d);
    if truncation == 0 || !truncation.is_multiple_of(d) {
        return Err(value_err(format!("truncation must be a positive multiple of d = {d}")));
    }
    let params = HurstParams::new(hurst).map_err(value_err)?;
    let basis = CmBasis::new(uniform_grid(grid_steps)?, params, d, truncation / d).map_err(value_err)?;
    let json = py
        .detach(|| {
            let problem = LaplaceProblem::new(field.as_ref(), f.as_ref(), g.as_ref(), &basis, &y0)?;
            let min = minimize_f_lambda(&problem, &OptConfig { seed, ..OptConfig::default() })?;
            let mut report = expansion_constants(&problem, &min, McConfig { samples, seed: seed.wrapping_add(1) })?;
            let table = mc_laplace(&problem, &eps_list, Some(&min.gamma.coeffs), McConfig { samples, seed: seed.wrapping_add(2) })?;
            report.fit = Some(expansion_fit(&table, report.f_lambda_min, report.c_coef, fit_degree, Some((report.alpha0, report.alpha0_se)))?);
            let mut value = serde_json::to_value(&report).map_err(|e| rough_laplace::Error::Numerical(e.to_string()))?;
            value["mc"] = serde_json::to_value(&table).map_err(|e| rough_laplace::Error::Numerical(e.to_string()))?;
            Ok::<_, rough_laplace::Error>(value.to_string())
        })
        .map_err(value_err)?;
    py.import("json")?.call_method1("loads", (json,))
}

#[pymodule]
#[pyo3(name = "rough_laplace")]
fn rough_laplace_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHurstParams>()?;
    m.add_class::<PyPath>()?;
    m.add_class::<PyRoughPath>()?;
    m.add_function(wrap_pyfunction!(sample_fbm, m)?)?;
    m.add_function(wrap_pyfunction!(lift_path, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ode, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(py_log_det2, m)?)?;
    m.add_function(wrap_pyfunction!(py_det2_mc, m)?)?;
    m.add_function(wrap_pyfunction!(hessian, m)?)?;
    m.add_function(wrap_pyfunction!(laplace, m)?)?;
    Ok(())
}
