use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sgh::config::RunConfig;
use sgh::driver::{AuditRecord, Simulation as Core};
use sgh::output::VtkData;
use sgh::SghError;

fn to_py(e: SghError) -> PyErr {
    match e {
        SghError::Config(_) | SghError::InvalidInput(_) | SghError::InvalidOrder { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn record(py: Python<'_>, r: &AuditRecord) -> PyResult<Py<PyAny>> {
    let d = pyo3::types::PyDict::new(py);
    d.set_item("step", r.step)?;
    d.set_item("t", r.t)?;
    d.set_item("dt", r.dt)?;
    d.set_item("kinetic", r.kinetic)?;
    d.set_item("internal", r.internal)?;
    d.set_item("total", r.total)?;
    d.set_item("balance", r.balance)?;
    d.set_item("mass", r.mass)?;
    d.set_item("max_drho", r.max_drho)?;
    d.set_item("min_det", r.min_det)?;
    d.set_item("distortion", r.distortion)?;
    Ok(d.into_any().unbind())
}

/// One benchmark problem advanced in time.
///
/// Keyword options are the run-configuration keys (`order`, `nx`, `cfl`,
/// `hourglass`, ...), given as strings, numbers or booleans.
#[pyclass(module = "sgh_py")]
struct Simulation {
    inner: Core,
    config: RunConfig,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (problem, **options))]
    fn new(problem: &str, options: Option<HashMap<String, Bound<'_, PyAny>>>) -> PyResult<Self> {
        let mut pairs = vec![("problem".to_string(), problem.to_string())];
        for (k, v) in options.unwrap_or_default() {
            let text = if let Ok(b) = v.extract::<bool>() {
                if b { "on" } else { "off" }.to_string()
            } else {
                v.str()?.to_string()
            };
            pairs.push((k, text));
        }
        let config = RunConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .map_err(to_py)?;
        let spec = config.problem_spec().map_err(to_py)?;
        let inner = Core::new(&spec, config.solver_options()).map_err(to_py)?;
        Ok(Self { inner, config })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.state.t
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn problem(&self) -> &'static str {
        self.config.problem.name()
    }

    /// `(kinematic, thermodynamic)` DOF counts.
    #[getter]
    fn dofs(&self) -> (usize, usize) {
        let mesh = &self.inner.solver.mesh;
        (mesh.n_dofs(), mesh.n_thermo_dofs())
    }

    /// Takes one time step (never past `t_final`) and returns its audit record.
    fn step(&mut self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let t_stop = self.inner.t_final;
        if self.inner.state.t >= t_stop {
            return Err(PyRuntimeError::new_err("already at the final time"));
        }
        let rec = self.inner.advance(t_stop).map_err(to_py)?;
        record(py, &rec)
    }

    /// Runs to `t_stop` (default: the problem's final time).
    #[pyo3(signature = (t_stop=None))]
    fn run(&mut self, py: Python<'_>, t_stop: Option<f64>) -> PyResult<Py<PyAny>> {
        let t_stop = t_stop.unwrap_or(self.inner.t_final);
        let mut last = self.inner.snapshot_record().map_err(to_py)?;
        while self.inner.state.t < t_stop {
            last = self.inner.advance(t_stop).map_err(to_py)?;
        }
        record(py, &last)
    }

    fn total_energy(&self) -> f64 {
        self.inner.solver.total_energy(&self.inner.state)
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.state.kin.position.iter().map(|x| (x[0], x[1])).collect()
    }

    fn velocities(&self) -> Vec<(f64, f64)> {
        self.inner.state.kin.velocity.iter().map(|x| (x[0], x[1])).collect()
    }

    /// `(radius, density, pressure, reference density or None)` at every
    /// thermodynamic point.
    fn scatter(&self) -> Vec<(f64, f64, f64, Option<f64>)> {
        self.inner
            .scatter()
            .into_iter()
            .map(|p| (p.radius, p.rho, p.p, p.reference))
            .collect()
    }

    fn write_vtk(&self, path: PathBuf) -> PyResult<()> {
        let title = format!("{} t={}", self.config.problem.name(), self.inner.state.t);
        VtkData::from_simulation(&self.inner).write(&path, &title).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Simulation(problem='{}', order={}, t={:.6}, steps={})",
            self.config.problem.name(),
            self.config.order,
            self.inner.state.t,
            self.inner.steps
        )
    }
}

/// Points and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[pyfunction]
fn gauss_legendre(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    sgh::basis::gauss_legendre_1d(n).map_err(to_py)
}

/// Points and weights of the `n`-point Gauss–Lobatto rule on `[-1, 1]`.
#[pyfunction]
fn gauss_lobatto(n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    sgh::basis::gauss_lobatto_1d(n).map_err(to_py)
}

/// Rows of the `(m+1)² × m²` matrix taking thermodynamic values to the
/// high-order points.
#[pyfunction]
fn interp_matrix(m: usize) -> PyResult<Vec<Vec<f64>>> {
    let mat = sgh::basis::build_interp_matrix(m).map_err(to_py)?;
    Ok((0..(m + 1) * (m + 1)).map(|r| mat.row(r).to_vec()).collect())
}

/// Smallest eigenvalue and unit eigenvector of a symmetric 2×2 matrix.
#[pyfunction]
fn min_eig(a: [[f64; 2]; 2]) -> (f64, (f64, f64)) {
    let (l, e) = sgh::viscosity::min_eig_2x2(&a);
    (l, (e[0], e[1]))
}

#[pyfunction]
fn min_singular_value(a: [[f64; 2]; 2]) -> f64 {
    sgh::viscosity::min_singular_value(&a)
}

#[pymodule]
pub fn sgh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(gauss_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_lobatto, m)?)?;
    m.add_function(wrap_pyfunction!(interp_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(min_eig, m)?)?;
    m.add_function(wrap_pyfunction!(min_singular_value, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
