//! Python bindings for the spectral flow laboratory: truncated Fourier
//! fields, curl-eigen data generators, critical-space norms, the direct
//! solver, and the mild fixed-point iteration.

use std::collections::HashMap;
use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nslab::beltrami::{self, Helicity};
use nslab::config::Config;
use nslab::cylinder::CylinderGrid;
use nslab::experiments::{ExperimentConfig, Scenario};
use nslab::norms::{self, BesovQ};
use nslab::trajectory::{self, Trajectory as CoreTrajectory};
use nslab::{operators, picard, snapshot, solver, Error, SpectralField, Wavevector};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Io { .. } => PyIOError::new_err(msg),
        e if e.exit_code() == 2 => PyValueError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn parse_helicity(s: &str) -> PyResult<Helicity> {
    match s {
        "plus" | "+" => Ok(Helicity::Plus),
        "minus" | "-" => Ok(Helicity::Minus),
        other => Err(PyValueError::new_err(format!(
            "helicity must be plus or minus, got {other:?}"
        ))),
    }
}

/// Truncated Fourier velocity or scalar field on the periodic box.
#[pyclass(name = "Field", skip_from_py_object)]
struct Field {
    inner: SpectralField,
}

#[pymethods]
impl Field {
    /// Zero field with `components` components on an `n^3` grid.
    #[new]
    #[pyo3(signature = (n, components = 3))]
    fn new(n: usize, components: usize) -> Field {
        Field {
            inner: SpectralField::zeros(n, components),
        }
    }

    /// Seeded divergence-free mean-zero draw with modes up to `max_mode`.
    #[staticmethod]
    fn random_div_free(n: usize, max_mode: i64, seed: u64) -> Field {
        Field {
            inner: operators::random_div_free(n, max_mode, seed),
        }
    }

    /// Unit-energy curl eigenfield on the lattice shell `|k|^2 = lambda_sq`.
    #[staticmethod]
    #[pyo3(signature = (n, lambda_sq, seed, helicity = "plus"))]
    fn random_curl_eigenfield(
        n: usize,
        lambda_sq: i64,
        seed: u64,
        helicity: &str,
    ) -> PyResult<Field> {
        let h = parse_helicity(helicity)?;
        Ok(Field {
            inner: beltrami::random_beltrami_field(n, lambda_sq, h, seed).map_err(to_py)?,
        })
    }

    /// Read a binary snapshot.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Field> {
        Ok(Field {
            inner: snapshot::read_snapshot(&path).map_err(to_py)?,
        })
    }

    /// Write a binary snapshot.
    fn write(&self, path: PathBuf) -> PyResult<()> {
        snapshot::write_snapshot(&self.inner, &path).map_err(to_py)
    }

    #[getter]
    fn grid_n(&self) -> usize {
        self.inner.grid_n()
    }

    #[getter]
    fn components(&self) -> usize {
        self.inner.components()
    }

    #[getter]
    fn is_real(&self) -> bool {
        self.inner.is_real()
    }

    #[getter]
    fn label(&self) -> Option<String> {
        self.inner.label().map(str::to_string)
    }

    fn coeff(&self, component: usize, mode: (i64, i64, i64)) -> Complex64 {
        self.inner
            .coeff(component, Wavevector([mode.0, mode.1, mode.2]))
    }

    fn set_coeff(&mut self, component: usize, mode: (i64, i64, i64), value: Complex64) {
        self.inner
            .set_coeff(component, Wavevector([mode.0, mode.1, mode.2]), value);
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn enstrophy(&self) -> f64 {
        self.inner.enstrophy()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    fn sup_norm(&self) -> f64 {
        operators::sup_norm(&self.inner)
    }

    fn mean_magnitude(&self) -> f64 {
        self.inner.mean_magnitude()
    }

    fn divergence_residual(&self) -> f64 {
        self.inner.divergence_residual()
    }

    fn scale(&mut self, s: f64) {
        self.inner.scale(s);
    }

    fn add(&self, other: &Field) -> Field {
        Field {
            inner: self.inner.add(&other.inner),
        }
    }

    fn sub(&self, other: &Field) -> Field {
        Field {
            inner: self.inner.sub(&other.inner),
        }
    }

    fn curl(&self) -> Field {
        Field {
            inner: operators::curl(&self.inner),
        }
    }

    fn laplacian(&self) -> Field {
        Field {
            inner: operators::laplacian(&self.inner),
        }
    }

    fn leray_project(&self) -> Field {
        Field {
            inner: operators::leray_project(&self.inner),
        }
    }

    /// Heat flow of the field at time `t`.
    fn heat(&self, t: f64) -> PyResult<Field> {
        Ok(Field {
            inner: operators::heat_semigroup(&self.inner, t).map_err(to_py)?,
        })
    }

    /// Split into plus- and minus-polarized parts.
    fn split_pm(&self) -> PyResult<(Field, Field)> {
        let (p, m) = beltrami::split_pm(&self.inner).map_err(to_py)?;
        Ok((Field { inner: p }, Field { inner: m }))
    }

    /// Split into (rest, plus band, minus part) around shell radius `lam`.
    fn band_split(&self, lam: f64) -> PyResult<(Field, Field, Field)> {
        let (rest, band, minus) = beltrami::band_split(&self.inner, lam).map_err(to_py)?;
        Ok((
            Field { inner: rest },
            Field { inner: band },
            Field { inner: minus },
        ))
    }

    /// Carleson-measure norm of the heat extension (critical space).
    fn bmo_minus1(&self) -> PyResult<f64> {
        let grid = CylinderGrid::for_grid(self.inner.grid_n());
        Ok(norms::bmo_minus1_norm(&self.inner, &grid)
            .map_err(to_py)?
            .value)
    }

    /// Same functional one derivative lower (upper bound).
    fn bmo_minus2(&self) -> PyResult<f64> {
        let grid = CylinderGrid::for_grid(self.inner.grid_n());
        Ok(norms::bmo_minus2_upper(&self.inner, &grid)
            .map_err(to_py)?
            .value)
    }

    /// Dyadic-block norm of smoothness `s`, summability `q` ("2" or "inf").
    fn besov(&self, s: f64, q: &str) -> PyResult<f64> {
        let q = match q {
            "2" => BesovQ::Two,
            "inf" => BesovQ::Infinity,
            other => {
                return Err(PyValueError::new_err(format!(
                    "summability must be 2 or inf, got {other:?}"
                )))
            }
        };
        Ok(norms::besov_norm(&self.inner, s, q).value)
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(n={}, components={}, l2={:.6e})",
            self.inner.grid_n(),
            self.inner.components(),
            self.inner.l2_norm()
        )
    }
}

/// Time-indexed sequence of fields produced by a solver.
#[pyclass(name = "Trajectory")]
struct Trajectory {
    inner: CoreTrajectory,
}

#[pymethods]
impl Trajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn sample(&self, i: usize) -> PyResult<Field> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "sample index {i} out of range for {} samples",
                self.inner.len()
            )));
        }
        Ok(Field {
            inner: self.inner.sample(i),
        })
    }

    /// Linear interpolation in time.
    fn eval(&self, t: f64) -> PyResult<Field> {
        Ok(Field {
            inner: self.inner.eval(t).map_err(to_py)?,
        })
    }

    /// Per-record rows (t, energy, enstrophy, sup, div residual,
    /// analyticity rate); empty when the producer recorded none.
    fn diagnostics(&self) -> Vec<(f64, f64, f64, f64, f64, f64)> {
        self.inner
            .diagnostics()
            .unwrap_or(&[])
            .iter()
            .map(|r| {
                (
                    r.time,
                    r.energy,
                    r.enstrophy,
                    r.sup_norm,
                    r.div_residual,
                    r.analyticity_rate,
                )
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory({} samples on [{:.3e}, {:.3e}])",
            self.inner.len(),
            self.inner.times().first().copied().unwrap_or(f64::NAN),
            self.inner.times().last().copied().unwrap_or(f64::NAN)
        )
    }
}

/// Convergence record of the mild fixed-point iteration.
#[pyclass(name = "PicardReport")]
struct PicardReport {
    #[pyo3(get)]
    iterates: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    differences: Vec<f64>,
    #[pyo3(get)]
    ratios: Vec<f64>,
    #[pyo3(get)]
    t1: f64,
}

/// Integrate the full rotation-form equations with integrating-factor RK4.
#[pyfunction]
#[pyo3(signature = (u0, dt, horizon, record_every = 1))]
fn solve(u0: &Field, dt: f64, horizon: f64, record_every: usize) -> PyResult<Trajectory> {
    let mut cfg = solver::SolverConfig::new(dt, horizon);
    cfg.record_every = record_every.max(1);
    Ok(Trajectory {
        inner: solver::solve(&u0.inner, &cfg).map_err(to_py)?,
    })
}

/// Iterate the mild perturbation map around the heat flow of `background`
/// on a uniform mesh of `nodes` points over `[0, t1]`.
#[pyfunction]
#[pyo3(signature = (u01, background, t1, nodes = 17, tol = 1e-8, max_iter = 25))]
fn picard_solve(
    u01: &Field,
    background: &Field,
    t1: f64,
    nodes: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<(Trajectory, PicardReport)> {
    let nodes = nodes.max(2);
    let mesh: Vec<f64> = (0..nodes)
        .map(|i| t1 * i as f64 / (nodes - 1) as f64)
        .collect();
    let bg = trajectory::heat_extension(&background.inner, &mesh).map_err(to_py)?;
    let (v, rep) = picard::picard_solve(&u01.inner, &bg, t1, tol, max_iter).map_err(to_py)?;
    Ok((
        Trajectory { inner: v },
        PicardReport {
            iterates: rep.iterates,
            converged: rep.converged,
            differences: rep.differences,
            ratios: rep.ratios,
            t1: rep.t1,
        },
    ))
}

/// Existence horizon of the mild iteration for data of size `m0` with
/// defect level `epsilon` at shell radius `lam`.
#[pyfunction]
fn t1_horizon(m0: f64, epsilon: f64, lam: f64, b: f64, c: f64) -> PyResult<f64> {
    picard::t1_horizon(m0, epsilon, lam, b, c).map_err(to_py)
}

/// Multi-shell curl-eigen data plus its admissibility table
/// `(condition, lhs, rhs, holds)`.
#[pyfunction]
#[pyo3(signature = (n, lambda_sqs, amplitudes = None, b = 0.5, epsilon = 0.5, seed = 7))]
fn shell_data(
    n: usize,
    lambda_sqs: Vec<i64>,
    amplitudes: Option<Vec<f64>>,
    b: f64,
    epsilon: f64,
    seed: u64,
) -> PyResult<(Field, Vec<(String, f64, f64, bool)>)> {
    let amps = amplitudes.unwrap_or_else(|| vec![1.0; lambda_sqs.len()]);
    let (field, rows) =
        beltrami::corollary18_data(n, &lambda_sqs, &amps, b, epsilon, None, seed).map_err(to_py)?;
    Ok((
        Field { inner: field },
        rows.into_iter()
            .map(|r| (r.condition, r.lhs, r.rhs, r.holds))
            .collect(),
    ))
}

/// Run a scripted scenario ("theorem13", "corollary18", "estimate_suite",
/// "beltrami_exactness") and return its verdict rows
/// `(name, measured, bound, passed)`.
#[pyfunction]
#[pyo3(signature = (scenario, options = None, out_dir = None))]
fn run_experiment(
    scenario: &str,
    options: Option<HashMap<String, String>>,
    out_dir: Option<PathBuf>,
) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let scenario = Scenario::parse(scenario).map_err(to_py)?;
    let options = options.unwrap_or_default();
    let pairs: Vec<(&str, &str)> = options
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    let cfg = ExperimentConfig::from_config(scenario, &Config::from_pairs(&pairs), out_dir)
        .map_err(to_py)?;
    let report = nslab::experiments::run(&cfg).map_err(to_py)?;
    Ok(report
        .rows
        .into_iter()
        .map(|r| (r.name, r.measured, r.bound, r.pass))
        .collect())
}

#[pymodule]
fn nslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<PicardReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(picard_solve, m)?)?;
    m.add_function(wrap_pyfunction!(t1_horizon, m)?)?;
    m.add_function(wrap_pyfunction!(shell_data, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
