//! Python bindings for the `cubesum` lattice search.
//!
//! Exact quantities cross the boundary as `fractions.Fraction` and Python
//! `int`; window parameters may be given as decimal strings (converted
//! exactly), ints or floats.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

use cubesum::cli::{verify_line, RowCheck};
use cubesum::curve::{build_basis, build_window, CurveParams, SearchWindow};
use cubesum::driver::{self, DriverConfig, SearchOptions};
use cubesum::io;
use cubesum::lattice::ReducedLattice;
use cubesum::pyramid::{enumerate_candidates, map_candidate, CandidateVector, PointSource, DEFAULT_BOX_CAP};
use cubesum::real::{from_f64, parse_decimal, Rational};
use cubesum::verify::{self, TargetSet};
use cubesum::{QMat3, Region};

fn py_err(e: cubesum::Error) -> PyErr {
    match e {
        cubesum::Error::Io(_) | cubesum::Error::CorruptCheckpoint { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rational_arg(v: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(s) = v.cast::<PyString>() {
        return parse_decimal(s.to_str()?).map_err(py_err);
    }
    if let Ok(n) = v.extract::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    from_f64(v.extract::<f64>()?).map_err(py_err)
}

fn fraction<'py>(py: Python<'py>, q: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((q.numer().clone(), q.denom().clone()))
}

fn fraction_rows<'py>(py: Python<'py>, m: &QMat3) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
    m.rows().iter().map(|r| r.iter().map(|q| fraction(py, q)).collect()).collect()
}

/// One window of the curve `Y^3 = 1 - c X^3` with its tangent data.
#[pyclass(name = "Window", module = "cubesum", frozen)]
struct PyWindow {
    inner: SearchWindow,
}

#[pymethods]
impl PyWindow {
    #[new]
    #[pyo3(signature = (x0, h, k, l, c = 2, precision_bits = 128))]
    fn new(
        x0: &Bound<'_, PyAny>,
        h: &Bound<'_, PyAny>,
        k: &Bound<'_, PyAny>,
        l: &Bound<'_, PyAny>,
        c: u32,
        precision_bits: u32,
    ) -> PyResult<Self> {
        let params = CurveParams::new(c, precision_bits).map_err(py_err)?;
        let inner = build_window(&params, &rational_arg(x0)?, &rational_arg(h)?, &rational_arg(k)?, &rational_arg(l)?)
            .map_err(py_err)?;
        Ok(PyWindow { inner })
    }

    /// The hand-worked window `X0 = 0.31415, h = 0.001, K = 1e-5, L = 1000`.
    #[staticmethod]
    fn worked_example() -> PyResult<Self> {
        PyWindow::from_config(&DriverConfig::worked_example())
    }

    #[getter]
    fn c(&self) -> u32 {
        self.inner.params.c
    }

    #[getter]
    fn bits(&self) -> u32 {
        self.inner.bits
    }

    #[getter]
    fn x0<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.x0)
    }

    #[getter]
    fn h<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.h)
    }

    #[getter]
    fn k<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.k)
    }

    #[getter]
    fn l<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.l)
    }

    #[getter]
    fn y0<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.y0)
    }

    /// Tangent slope at `X0`.
    #[getter]
    fn a<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.a)
    }

    /// Midline intercept.
    #[getter]
    fn b<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.b)
    }

    /// `"A"`, `"B"` or `"C"`.
    #[getter]
    fn region(&self) -> &'static str {
        match self.inner.region {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
        }
    }

    /// The scaled basis `F` as rows of fractions.
    fn basis<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        fraction_rows(py, &build_basis(&self.inner).matrix)
    }

    /// LLL-reduce the basis with Lovasz parameter `delta`.
    #[pyo3(signature = (delta = "0.75"))]
    fn reduce(&self, delta: &str) -> PyResult<PyReduced> {
        let delta = parse_decimal(delta).map_err(py_err)?;
        let inner = build_basis(&self.inner).reduce(&delta).map_err(py_err)?;
        Ok(PyReduced { inner, c: self.inner.params.c })
    }

    fn __repr__(&self) -> String {
        let s = self.inner.summary();
        format!("Window(x0={}, h={}, k={}, l={}, c={})", s.x0, s.h, s.k, s.l, self.inner.params.c)
    }
}

impl PyWindow {
    fn from_config(cfg: &DriverConfig) -> PyResult<Self> {
        let inner = driver::sample_window(&mut driver::trial_rng(cfg.seed, 0), cfg).map_err(py_err)?;
        Ok(PyWindow { inner })
    }
}

/// A reduced basis `H = F M` with its unimodular transform `M`.
#[pyclass(name = "ReducedLattice", module = "cubesum", frozen)]
struct PyReduced {
    inner: ReducedLattice,
    c: u32,
}

#[pymethods]
impl PyReduced {
    /// Integer rows of `M`.
    #[getter]
    fn m(&self) -> Vec<Vec<BigInt>> {
        self.inner.m.matrix().rows().iter().map(|r| r.to_vec()).collect()
    }

    /// Rows of `H` as fractions.
    fn h<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        fraction_rows(py, &self.inner.h)
    }

    fn is_reduced(&self) -> bool {
        self.inner.is_reduced()
    }

    /// Candidate vectors `(x, y, z_s)` from every cone point and probe.
    #[pyo3(signature = (eps = "0.000000001", box_cap = DEFAULT_BOX_CAP))]
    fn candidates(&self, eps: &str, box_cap: u128) -> PyResult<Vec<(BigInt, BigInt, BigInt, bool)>> {
        let eps = parse_decimal(eps).map_err(py_err)?;
        let e = enumerate_candidates(&self.inner, &eps, box_cap).map_err(py_err)?;
        Ok(e.points
            .iter()
            .map(|p| {
                let v = map_candidate(&self.inner.m, &p.v);
                (v.x, v.y, v.z_s, p.source == PointSource::Cone)
            })
            .collect())
    }

    /// Distinct canonical solutions among the candidates, with no target filter.
    #[pyo3(signature = (eps = "0.000000001", box_cap = DEFAULT_BOX_CAP))]
    fn solutions(&self, eps: &str, box_cap: u128) -> PyResult<Vec<PySolution>> {
        let mut seen = BTreeSet::new();
        for (x, y, z_s, _) in self.candidates(eps, box_cap)? {
            if let Some(s) = verify::canonicalize(self.c, &CandidateVector { x, y, z_s }) {
                seen.insert(s);
            }
        }
        Ok(seen.into_iter().map(|inner| PySolution { inner }).collect())
    }
}

/// A verified solution `d = c x^3 + y^3 + z^3`, `d > 0`.
#[pyclass(name = "Solution", module = "cubesum", frozen, eq)]
#[derive(PartialEq)]
struct PySolution {
    inner: verify::Solution,
}

#[pymethods]
impl PySolution {
    #[new]
    #[pyo3(signature = (x, y, z, c = 2))]
    fn new(x: BigInt, y: BigInt, z: BigInt, c: u32) -> Self {
        PySolution { inner: verify::Solution::new(c, x, y, z) }
    }

    #[getter]
    fn c(&self) -> u32 {
        self.inner.c
    }

    #[getter]
    fn d(&self) -> BigInt {
        self.inner.d.clone()
    }

    #[getter]
    fn x(&self) -> BigInt {
        self.inner.x.clone()
    }

    #[getter]
    fn y(&self) -> BigInt {
        self.inner.y.clone()
    }

    #[getter]
    fn z(&self) -> BigInt {
        self.inner.z.clone()
    }

    fn holds(&self) -> bool {
        self.inner.holds()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!("Solution(d={}, x={}, y={}, z={}, c={})", s.d, s.x, s.y, s.z, s.c)
    }
}

/// `c x^3 + y^3 + z^3`.
#[pyfunction]
#[pyo3(signature = (x, y, z, c = 2))]
fn eval_report_form(x: BigInt, y: BigInt, z: BigInt, c: u32) -> BigInt {
    verify::eval_report_form(c, &x, &y, &z)
}

/// `c x^3 + y^3 - z_s^3`.
#[pyfunction]
#[pyo3(signature = (x, y, z_s, c = 2))]
fn eval_search_form(x: BigInt, y: BigInt, z_s: BigInt, c: u32) -> BigInt {
    verify::eval_search_form(c, &x, &y, &z_s)
}

/// Reporting-form solution with `d > 0`, or `None` when `d = 0`.
#[pyfunction]
#[pyo3(signature = (x, y, z_s, c = 2))]
fn canonicalize(x: BigInt, y: BigInt, z_s: BigInt, c: u32) -> Option<PySolution> {
    verify::canonicalize(c, &CandidateVector { x, y, z_s }).map(|inner| PySolution { inner })
}

/// Whether `d` passes the local congruence obstructions for `c`.
#[pyfunction]
#[pyo3(signature = (d, c = 2))]
fn residue_admissible(d: BigInt, c: u32) -> bool {
    verify::residue_admissible(c, &d)
}

/// Every solution with `|x|, |y|, |z| <= box_bound` and `0 < d <= d_max`.
#[pyfunction]
#[pyo3(signature = (box_bound, d_max, c = 2))]
fn brute_force_oracle(py: Python<'_>, box_bound: u32, d_max: u64, c: u32) -> PyResult<Vec<(u64, Vec<PySolution>)>> {
    let found = py.detach(|| verify::brute_force_oracle(c, box_bound, d_max)).map_err(py_err)?;
    Ok(found.into_iter().map(|(d, sols)| (d, sols.into_iter().map(|inner| PySolution { inner }).collect())).collect())
}

/// Check one `d x y z` row or JSONL result line: `True`/`False`, or `None`
/// for blank and comment lines. Raises `ValueError` on unparsable input.
#[pyfunction]
#[pyo3(signature = (line, c = 2))]
fn verify_row(line: &str, c: u32) -> PyResult<Option<bool>> {
    match verify_line(line, c) {
        None => Ok(None),
        Some(RowCheck::Pass) => Ok(Some(true)),
        Some(RowCheck::Fail { .. }) => Ok(Some(false)),
        Some(RowCheck::Unparsable(msg)) => Err(PyValueError::new_err(msg)),
    }
}

/// Run a seeded search and return its solutions as result-line dicts.
///
/// Keyword arguments mirror the `cubesum search` flags.
#[pyfunction]
#[pyo3(signature = (
    trials = 1000, seed = 0, c = 2, targets = None, d_max = 10000, min_yz = 100, workers = 1,
    h_range = (1e-5, 1e-2), x0_range = (-10.0, 10.0), kappa = 10.0, lambda_ = 1.0,
))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    trials: u64,
    seed: u64,
    c: u32,
    targets: Option<Vec<u64>>,
    d_max: u64,
    min_yz: u64,
    workers: usize,
    h_range: (f64, f64),
    x0_range: (f64, f64),
    kappa: f64,
    lambda_: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = DriverConfig {
        c,
        trials,
        seed,
        workers,
        h_low: h_range.0,
        h_high: h_range.1,
        x0_low: x0_range.0,
        x0_high: x0_range.1,
        kappa,
        lambda: lambda_,
        ..Default::default()
    };
    let targets = TargetSet::new(targets.unwrap_or_default(), d_max, min_yz).map_err(py_err)?;
    let mut records = Vec::new();
    py.detach(|| driver::search(&cfg, &targets, &mut records, &SearchOptions::default())).map_err(py_err)?;
    let json = py.import("json")?;
    records
        .iter()
        .map(|r| {
            let line = io::format_result_line(r, None).map_err(py_err)?;
            Ok(json.call_method1("loads", (line,))?.cast_into::<PyDict>()?)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "cubesum")]
fn cubesum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyReduced>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(eval_report_form, m)?)?;
    m.add_function(wrap_pyfunction!(eval_search_form, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(residue_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(verify_row, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
