//! Python module `qfim`. Matrices cross the boundary as nested lists of
//! `complex` (states, derivatives) or `float` (QFIM, Γ).

use pyo3::create_exception;
use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qfim_core::closed_forms;
use qfim_core::imaging::{self, GeneratorMoments};
use qfim_core::{CMatrix, QfimError, QfimOptions, RealMatrix, C64};

create_exception!(qfim, RankDeficientError, PyValueError);
create_exception!(qfim, SingularMatrixError, PyValueError);

fn to_py(e: QfimError) -> PyErr {
    match &e {
        QfimError::RankDeficient { indices, .. } => {
            let err = RankDeficientError::new_err(e.to_string());
            Python::with_gil(|py| {
                let _ = err.value(py).setattr("indices", indices.clone());
            });
            err
        }
        QfimError::SingularMatrix { .. } => SingularMatrixError::new_err(e.to_string()),
        QfimError::DivisionByZero(_) => PyZeroDivisionError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn cmatrix(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_rows(&rows))
}

fn complex_rows(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn options(rank_tol: Option<f64>, solve_tol: Option<f64>) -> QfimOptions {
    let d = QfimOptions::default();
    QfimOptions {
        rank_tol: rank_tol.unwrap_or(d.rank_tol),
        solve_tol: solve_tol.unwrap_or(d.solve_tol),
    }
}

/// Linearly independent kets; the first `support_size` span the state's support.
#[pyclass(name = "BasisSet", module = "qfim")]
#[derive(Clone)]
struct PyBasisSet(qfim_core::BasisSet);

#[pymethods]
impl PyBasisSet {
    #[new]
    #[pyo3(signature = (kets, support_size, rank_tol = qfim_core::RANK_TOL))]
    fn new(kets: Vec<Vec<C64>>, support_size: usize, rank_tol: f64) -> PyResult<Self> {
        qfim_core::BasisSet::new(kets, support_size, rank_tol).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn standard(n: usize) -> Self {
        Self(qfim_core::BasisSet::standard(n))
    }

    fn gram(&self) -> Vec<Vec<C64>> {
        complex_rows(self.0.gram())
    }

    #[getter]
    fn support_size(&self) -> usize {
        self.0.support_size()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Appends kets for a parameter's derivative; kets already in the span
    /// are dropped.
    #[pyo3(signature = (kets, rank_tol = qfim_core::RANK_TOL))]
    fn extend(&self, kets: Vec<Vec<C64>>, rank_tol: f64) -> PyResult<Self> {
        self.0.extend(&kets, rank_tol).map(|e| Self(e.basis)).map_err(to_py)
    }
}

/// A density matrix and its parameter derivatives in basis coordinates.
#[pyclass(name = "StateModel", module = "qfim")]
#[derive(Clone)]
struct PyStateModel(qfim_core::StateModel);

#[pymethods]
impl PyStateModel {
    /// `params` is a list of `(name, drho)` or `(name, drho, basis)`; without
    /// a basis the derivative lives on the support.
    #[new]
    fn new(basis: PyBasisSet, rho: Vec<Vec<C64>>, params: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let mut slots = Vec::with_capacity(params.len());
        for p in params {
            let slot = if let Ok((name, drho, b)) = p.extract::<(String, Vec<Vec<C64>>, PyBasisSet)>() {
                qfim_core::ParameterSlot {
                    name,
                    basis: b.0,
                    drho: cmatrix(drho)?,
                }
            } else {
                let (name, drho) = p.extract::<(String, Vec<Vec<C64>>)>()?;
                qfim_core::ParameterSlot::in_support(name, &basis.0, cmatrix(drho)?)
            };
            slots.push(slot);
        }
        qfim_core::StateModel::new(basis.0, cmatrix(rho)?, slots).map(Self).map_err(to_py)
    }

    fn param_names(&self) -> Vec<String> {
        self.0.param_names()
    }

    fn rho_ambient(&self) -> PyResult<Vec<Vec<C64>>> {
        self.0.rho_ambient().map(|m| complex_rows(&m)).map_err(to_py)
    }

    fn drho_ambient(&self, mu: usize) -> PyResult<Vec<Vec<C64>>> {
        self.0.drho_ambient(mu).map(|m| complex_rows(&m)).map_err(to_py)
    }
}

#[pyclass(name = "QfimReport", module = "qfim", get_all)]
struct PyQfimReport {
    labels: Vec<String>,
    h: Vec<Vec<f64>>,
    gamma: Vec<Vec<f64>>,
    relative_residuals: Vec<f64>,
    cond_c: Vec<f64>,
    cond_d: Vec<f64>,
    rank_tol: f64,
    solve_tol: f64,
}

impl From<qfim_core::QfimReport> for PyQfimReport {
    fn from(r: qfim_core::QfimReport) -> Self {
        let d = &r.diagnostics;
        Self {
            labels: r.labels.clone(),
            h: r.h.to_rows(),
            gamma: r.gamma.to_rows(),
            relative_residuals: d.params.iter().map(|p| p.relative_residual).collect(),
            cond_c: d.params.iter().map(|p| p.cond_c).collect(),
            cond_d: d.params.iter().map(|p| p.cond_d).collect(),
            rank_tol: d.rank_tol,
            solve_tol: d.solve_tol,
        }
    }
}

#[pymethods]
impl PyQfimReport {
    fn __repr__(&self) -> String {
        format!("QfimReport(labels={:?}, h={:?})", self.labels, self.h)
    }
}

#[pyfunction]
#[pyo3(name = "qfim", signature = (model, rank_tol = None, solve_tol = None))]
fn qfim_of(model: &PyStateModel, rank_tol: Option<f64>, solve_tol: Option<f64>) -> PyResult<PyQfimReport> {
    qfim_core::qfim_with_options(&model.0, options(rank_tol, solve_tol)).map(Into::into).map_err(to_py)
}

/// QFIM of `exp(−iΣθK) ρ0 exp(iΣθK)` for commuting `generators`.
#[pyfunction]
#[pyo3(signature = (model, generators, rank_tol = None, solve_tol = None))]
fn qfim_unitary(
    model: &PyStateModel,
    generators: Vec<Vec<Vec<C64>>>,
    rank_tol: Option<f64>,
    solve_tol: Option<f64>,
) -> PyResult<PyQfimReport> {
    let ks = generators.into_iter().map(cmatrix).collect::<PyResult<Vec<_>>>()?;
    qfim_core::unitary::qfim_unitary_report(&model.0, &ks, options(rank_tol, solve_tol))
        .map(Into::into)
        .map_err(to_py)
}

fn ambient(rho: Vec<Vec<C64>>, drhos: Vec<Vec<Vec<C64>>>) -> PyResult<(CMatrix, Vec<CMatrix>)> {
    Ok((cmatrix(rho)?, drhos.into_iter().map(cmatrix).collect::<PyResult<_>>()?))
}

/// Reference QFIM from the eigendecomposition of an ambient density matrix.
#[pyfunction]
fn qfim_oracle_eigen(rho: Vec<Vec<C64>>, drhos: Vec<Vec<Vec<C64>>>) -> PyResult<Vec<Vec<f64>>> {
    let (rho, d) = ambient(rho, drhos)?;
    qfim_core::qfim_oracle_eigen(&rho, &d).map(|h| h.to_rows()).map_err(to_py)
}

/// Vectorized QFIM for full-rank density matrices in an orthonormal basis.
#[pyfunction]
fn qfim_safranek(rho: Vec<Vec<C64>>, drhos: Vec<Vec<Vec<C64>>>) -> PyResult<Vec<Vec<f64>>> {
    let (rho, d) = ambient(rho, drhos)?;
    qfim_core::qfim_safranek(&rho, &d).map(|h| h.to_rows()).map_err(to_py)
}

/// Point sources observed through collection points; see the scene JSON schema.
#[pyclass(name = "ImagingScene", module = "qfim")]
#[derive(Clone)]
struct PyImagingScene(imaging::ImagingScene);

#[pymethods]
impl PyImagingScene {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let scene: imaging::ImagingScene =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        scene.validate().map_err(to_py)?;
        Ok(Self(scene))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("scenes always serialize")
    }

    fn labels(&self) -> Vec<String> {
        self.0.labels()
    }

    #[pyo3(signature = (rank_tol = qfim_core::RANK_TOL))]
    fn state_model(&self, rank_tol: f64) -> PyResult<PyStateModel> {
        imaging::build_state_model(&self.0, rank_tol).map(PyStateModel).map_err(to_py)
    }

    #[pyo3(signature = (rank_tol = None, solve_tol = None))]
    fn qfim(&self, rank_tol: Option<f64>, solve_tol: Option<f64>) -> PyResult<PyQfimReport> {
        let opts = options(rank_tol, solve_tol);
        let m = imaging::build_state_model(&self.0, opts.rank_tol).map_err(to_py)?;
        qfim_core::qfim_with_options(&m, opts).map(Into::into).map_err(to_py)
    }

    fn moments(&self) -> PyGeneratorMoments {
        PyGeneratorMoments(imaging::generator_moments(&self.0))
    }

    fn paraxial_warnings(&self) -> Vec<String> {
        self.0.paraxial_warnings()
    }
}

/// Moments of `(g_x, g_y, g_z)` over the collection points.
#[pyclass(name = "GeneratorMoments", module = "qfim")]
#[derive(Clone)]
struct PyGeneratorMoments(GeneratorMoments);

#[pymethods]
impl PyGeneratorMoments {
    /// Samples `(g_x, g_y, g_z)`, one per collection point.
    #[new]
    fn new(samples: Vec<[f64; 3]>) -> Self {
        Self(GeneratorMoments::from_samples(samples))
    }

    fn mean(&self) -> [f64; 3] {
        self.0.mean()
    }

    fn cov(&self) -> [[f64; 3]; 3] {
        self.0.cov()
    }

    fn two_source_qfim(&self, p1: f64, delta: [f64; 3]) -> PyResult<Vec<Vec<f64>>> {
        closed_forms::two_source_qfim(&self.0, p1, delta).map(|r| r.h.to_rows()).map_err(to_py)
    }

    fn two_source_gamma(&self, p1: f64, delta: [f64; 3]) -> PyResult<Vec<Vec<f64>>> {
        closed_forms::two_source_gamma(&self.0, p1, delta).map(|g| g.to_rows()).map_err(to_py)
    }

    fn three_source_distance_qfi(&self, p2: f64) -> f64 {
        closed_forms::three_source_distance_qfi(&self.0, p2)
    }

    fn two_source_scaled_qfi(&self, q: f64, p2: f64) -> f64 {
        closed_forms::two_source_scaled_qfi(&self.0, q, p2)
    }

    fn three_source_intensity_qfim(&self, p1: f64, p2: f64, delta_x: f64) -> PyResult<Vec<Vec<f64>>> {
        closed_forms::three_source_intensity_qfim(&self.0, p1, p2, delta_x)
            .map(|h| h.to_rows())
            .map_err(to_py)
    }
}

/// `Jᵀ H J` for a Jacobian `J[a][b] = ∂old_a/∂new_b`.
#[pyfunction]
fn reparameterize(h: Vec<Vec<f64>>, jacobian: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let h = RealMatrix::from_rows(&h).map_err(to_py)?;
    let j = RealMatrix::from_rows(&jacobian).map_err(to_py)?;
    qfim_core::reparameterize(&h, &j).map(|m| m.to_rows()).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "qfim")]
fn qfim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyBasisSet>()?;
    m.add_class::<PyStateModel>()?;
    m.add_class::<PyQfimReport>()?;
    m.add_class::<PyImagingScene>()?;
    m.add_class::<PyGeneratorMoments>()?;
    m.add_function(wrap_pyfunction!(qfim_of, m)?)?;
    m.add_function(wrap_pyfunction!(qfim_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(qfim_oracle_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(qfim_safranek, m)?)?;
    m.add_function(wrap_pyfunction!(reparameterize, m)?)?;
    m.add("RankDeficientError", py.get_type::<RankDeficientError>())?;
    m.add("SingularMatrixError", py.get_type::<SingularMatrixError>())?;
    m.add("RANK_TOL", qfim_core::RANK_TOL)?;
    let defaults = PyDict::new(py);
    defaults.set_item("rank_tol", QfimOptions::default().rank_tol)?;
    defaults.set_item("solve_tol", QfimOptions::default().solve_tol)?;
    m.add("DEFAULT_OPTIONS", defaults)?;
    Ok(())
}
