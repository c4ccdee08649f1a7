//! Python bindings: Green's functions, kernels, the ground-state solver and
//! the acceptance suite. Potentials are passed as "kind:V0:a[:s]" strings.

use fracbound::birman_schwinger::{assemble, rule_for, top_eigenpair, RuleKind};
use fracbound::greens::{self, GreensContext, ORACLE_TOL, SERIES_M_MAX};
use fracbound::ground_state::{self, GroundStateSolution, GroundStateSolver};
use fracbound::validation::{self, Category};
use fracbound::weyl::{grid_ground_energy as grid_energy, SpectralGrid};
use fracbound::{special, Error, FractionalIndex, Potential};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_)
        | Error::InvalidParameter(_)
        | Error::ResonantAlpha { .. }
        | Error::AsymptoticRange { .. }
        | Error::LengthMismatch { .. }
        | Error::NonFinite(_)
        | Error::Divergent(_)
        | Error::WeakCouplingViolated(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn index(alpha: f64) -> PyResult<FractionalIndex> {
    FractionalIndex::new(alpha).map_err(to_py)
}

fn context(alpha: f64, k_alpha: f64, kappa: f64) -> PyResult<GreensContext> {
    GreensContext::new(index(alpha)?, k_alpha, kappa).map_err(to_py)
}

fn potential(spec: &str) -> PyResult<Potential> {
    spec.parse().map_err(to_py)
}

fn rule_kind(name: &str) -> PyResult<RuleKind> {
    match name {
        "trapezoid" => Ok(RuleKind::Trapezoid),
        "gauss-legendre" | "gauss_legendre" => Ok(RuleKind::GaussLegendre),
        other => Err(PyValueError::new_err(format!("unknown rule '{other}'"))),
    }
}

/// G(r; κ) and the branch that produced it.
#[pyfunction]
#[pyo3(signature = (r, alpha, k_alpha = 1.0, kappa = 1.0))]
fn greens_eval(r: f64, alpha: f64, k_alpha: f64, kappa: f64) -> PyResult<(f64, &'static str)> {
    let v = greens::greens_eval(r, &context(alpha, k_alpha, kappa)?).map_err(to_py)?;
    Ok((v.value, v.branch.as_str()))
}

/// G(r; κ) by direct quadrature.
#[pyfunction]
#[pyo3(signature = (r, alpha, k_alpha = 1.0, kappa = 1.0, tol = ORACLE_TOL))]
fn greens_oracle(r: f64, alpha: f64, k_alpha: f64, kappa: f64, tol: f64) -> PyResult<f64> {
    greens::greens_oracle(r, &context(alpha, k_alpha, kappa)?, tol).map_err(to_py)
}

/// ∂G/∂κ from the residue series.
#[pyfunction]
#[pyo3(signature = (r, alpha, k_alpha = 1.0, kappa = 1.0))]
fn dgreens(r: f64, alpha: f64, k_alpha: f64, kappa: f64) -> PyResult<f64> {
    greens::dgreens_series(r, &context(alpha, k_alpha, kappa)?, SERIES_M_MAX).map_err(to_py)
}

/// (singular, constant, regular) parts of the small-distance series.
#[pyfunction]
#[pyo3(signature = (r, alpha, k_alpha = 1.0, kappa = 1.0))]
fn greens_decompose(r: f64, alpha: f64, k_alpha: f64, kappa: f64) -> PyResult<(f64, f64, f64)> {
    let d = greens::greens_decompose(r, &context(alpha, k_alpha, kappa)?, SERIES_M_MAX).map_err(to_py)?;
    Ok((d.singular, d.constant, d.regular))
}

#[pyfunction]
fn resonance_check(alpha: f64) -> PyResult<bool> {
    Ok(special::resonance_check(
        index(alpha)?,
        special::RESONANCE_M_MAX,
        special::RESONANCE_THRESHOLD,
    ))
}

#[pyfunction]
#[pyo3(signature = (u, alpha, n_terms = 60))]
fn mellin_exp_partial_sum(u: f64, alpha: f64, n_terms: usize) -> PyResult<f64> {
    special::mellin_exp_partial_sum(u, index(alpha)?, n_terms).map_err(to_py)
}

/// (first order, second order, sum) prediction for κ*^{2(1-1/α)}.
#[pyfunction]
#[pyo3(signature = (g, potential_spec, alpha, k_alpha = 1.0))]
fn weak_coupling_expansion(g: f64, potential_spec: &str, alpha: f64, k_alpha: f64) -> PyResult<(f64, f64, f64)> {
    let e = ground_state::weak_coupling_expansion(g, &potential(potential_spec)?, index(alpha)?, k_alpha)
        .map_err(to_py)?;
    Ok((e.first_order, e.second_order, e.value))
}

/// (full, fin, sing, lambda_max) with matrices as nested lists.
#[pyfunction]
#[pyo3(signature = (potential_spec, alpha, k_alpha = 1.0, kappa = 1.0, n = 101, rule = "trapezoid", half_width = 50.0))]
#[allow(clippy::type_complexity)]
fn kernel(
    potential_spec: &str,
    alpha: f64,
    k_alpha: f64,
    kappa: f64,
    n: usize,
    rule: &str,
    half_width: f64,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>, f64)> {
    let v = potential(potential_spec)?;
    let rule = rule_for(&v, n, rule_kind(rule)?, half_width).map_err(to_py)?;
    let k = assemble(&v, &rule, &context(alpha, k_alpha, kappa)?).map_err(to_py)?;
    let rows = |m: &nalgebra::DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    let (lambda, _) = top_eigenpair(&k).map_err(to_py)?;
    Ok((rows(&k.full_operator()), rows(&k.fin_operator()), rows(&k.sing), lambda))
}

/// Ground energy of the periodic grid Hamiltonian on [-L, L) with N points.
#[pyfunction]
#[pyo3(signature = (potential_spec, g, alpha, k_alpha = 1.0, half_width = 400.0, points = 16384))]
fn grid_ground_energy(
    potential_spec: &str,
    g: f64,
    alpha: f64,
    k_alpha: f64,
    half_width: f64,
    points: usize,
) -> PyResult<f64> {
    let grid = SpectralGrid::new(half_width, points).map_err(to_py)?;
    let s = grid_energy(&potential(potential_spec)?, g, &grid, index(alpha)?, k_alpha).map_err(to_py)?;
    Ok(s.energy)
}

fn solution_dict<'py>(py: Python<'py>, s: &GroundStateSolution) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("g", s.g)?;
    d.set_item("alpha", s.alpha)?;
    d.set_item("K", s.k_alpha)?;
    d.set_item("kappa_star", s.kappa_star)?;
    d.set_item("E", s.energy)?;
    d.set_item("kappa_pow", s.kappa_pow)?;
    d.set_item("expansion", s.expansion)?;
    d.set_item("expansion_discrepancy", s.expansion_discrepancy)?;
    d.set_item("H", s.h_value)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("residual", s.residual)?;
    d.set_item("full_kernel_check", s.full_kernel_check)?;
    d.set_item("n", s.n)?;
    d.set_item("L", s.half_width)?;
    Ok(d)
}

/// Weak-coupling bound-state solver for one potential and α.
#[pyclass(name = "GroundStateSolver", frozen)]
struct PySolver {
    inner: GroundStateSolver,
}

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (potential_spec, alpha, k_alpha = 1.0, n = 401, rule = "trapezoid", half_width = 50.0))]
    fn new(potential_spec: &str, alpha: f64, k_alpha: f64, n: usize, rule: &str, half_width: f64) -> PyResult<Self> {
        let inner = GroundStateSolver::new(
            potential(potential_spec)?,
            index(alpha)?,
            k_alpha,
            n,
            rule_kind(rule)?,
            half_width,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    fn solve<'py>(&self, py: Python<'py>, g: f64) -> PyResult<Bound<'py, PyDict>> {
        let s = py.detach(|| self.inner.solve_kappa(g)).map_err(to_py)?;
        solution_dict(py, &s)
    }

    /// κ solving g λ_max(κ) = 1 on the full kernel.
    fn kappa_full_kernel(&self, py: Python<'_>, g: f64) -> PyResult<f64> {
        py.detach(|| self.inner.kappa_full_kernel(g)).map_err(to_py)
    }

    /// H(g, κ) = ⟨u, (1 - gF)^{-1} u⟩.
    fn h_function(&self, g: f64, kappa: f64) -> PyResult<f64> {
        self.inner.h_function(g, kappa).map_err(to_py)
    }

    #[pyo3(signature = (g, kappa_lo = 1e-6, kappa_hi = 1.0, samples = 40))]
    fn uniqueness<'py>(
        &self,
        py: Python<'py>,
        g: f64,
        kappa_lo: f64,
        kappa_hi: f64,
        samples: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = py
            .detach(|| self.inner.uniqueness_certificate(g, (kappa_lo, kappa_hi), samples))
            .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("sign_changes", r.sign_changes)?;
        d.set_item("h_variation", r.h_variation)?;
        d.set_item("rhs_variation", r.rhs_variation)?;
        d.set_item("modulus", r.modulus)?;
        Ok(d)
    }
}

/// Runs the acceptance criteria (all, or the given categories); returns
/// (id, name, passed, report text) tuples.
#[pyfunction]
#[pyo3(signature = (only = Vec::new()))]
fn validate(py: Python<'_>, only: Vec<String>) -> PyResult<Vec<(u8, &'static str, bool, String)>> {
    let only: Vec<Category> = only
        .iter()
        .map(|s| s.parse().map_err(to_py))
        .collect::<PyResult<_>>()?;
    let reports = py.detach(|| validation::run(&only, |_| {}));
    Ok(reports
        .into_iter()
        .map(|r| (r.id, r.name, r.passed(), r.to_string()))
        .collect())
}

#[pymodule]
fn fracbound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(greens_eval, m)?)?;
    m.add_function(wrap_pyfunction!(greens_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(dgreens, m)?)?;
    m.add_function(wrap_pyfunction!(greens_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(resonance_check, m)?)?;
    m.add_function(wrap_pyfunction!(mellin_exp_partial_sum, m)?)?;
    m.add_function(wrap_pyfunction!(weak_coupling_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(grid_ground_energy, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_class::<PySolver>()?;
    Ok(())
}
