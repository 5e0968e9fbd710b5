//! Python bindings: `import pywronsk`.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wronsk::solver::{self, Mixture, Refiner, SolverError, SolverOptions, XEval};
use wronsk::{Params, PotentialError};

fn solver_err(e: SolverError) -> PyErr {
    match e {
        SolverError::InvalidInput(_) | SolverError::DegenerateMixture => {
            PyValueError::new_err(e.to_string())
        }
        SolverError::Potential(p) => potential_err(p),
        other => PyArithmeticError::new_err(other.to_string()),
    }
}

fn potential_err(e: PotentialError) -> PyErr {
    match e {
        PotentialError::Tail { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params_from(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Params> {
    let mut params = Params::new();
    if let Some(d) = kwargs {
        for (k, v) in d.iter() {
            params.insert(k.extract()?, v.extract()?);
        }
    }
    Ok(params)
}

fn options(
    h: f64,
    x_eval: Option<f64>,
    tol: f64,
    n_scan: usize,
    jobs: usize,
    brent: bool,
) -> SolverOptions {
    SolverOptions {
        h,
        x_eval: x_eval.map_or(XEval::Auto, XEval::Fixed),
        tol,
        n_scan,
        jobs: jobs.max(1),
        refiner: if brent {
            Refiner::Brent
        } else {
            Refiner::Bisection
        },
        ..Default::default()
    }
}

/// A dimensionless potential `v(x)`.
#[pyclass(frozen, skip_from_py_object, module = "pywronsk")]
#[derive(Clone)]
pub struct Potential {
    inner: wronsk::Potential,
}

#[pymethods]
impl Potential {
    /// Built-in well, e.g. `Potential.builtin("gaussian", v0=5)`.
    #[staticmethod]
    #[pyo3(signature = (name, **params))]
    fn builtin(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let inner = wronsk::builtin(name, &params_from(params)?).map_err(potential_err)?;
        Ok(Potential { inner })
    }

    /// Expression in `x`, e.g. `"-6/cosh(x)^2"`.
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        let inner = wronsk::parse_potential(src).map_err(potential_err)?;
        Ok(Potential { inner })
    }

    fn evaluate(&self, x: f64) -> f64 {
        self.inner.evaluate(x)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.evaluate(x)
    }

    /// `v(x - shift)`.
    fn translated(&self, shift: f64) -> PyResult<Self> {
        let inner = self.inner.translated(shift).map_err(potential_err)?;
        Ok(Potential { inner })
    }

    fn scaled(&self, factor: f64) -> Self {
        Potential {
            inner: self.inner.scaled(factor),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    /// `"even"` or `"general"`.
    #[getter]
    fn parity(&self) -> &'static str {
        match self.inner.parity() {
            wronsk::Parity::EvenSymmetric => "even",
            wronsk::Parity::General => "general",
        }
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold()
    }

    fn __repr__(&self) -> String {
        format!("Potential({:?})", self.inner.label())
    }
}

#[pyclass(frozen, get_all, module = "pywronsk")]
pub struct BoundState {
    index: usize,
    energy: f64,
    parity: &'static str,
    divergent_coefficient: f64,
    residual: f64,
    bracket_width: f64,
    k: f64,
    x_eval: f64,
    low_confidence: bool,
}

#[pymethods]
impl BoundState {
    fn __repr__(&self) -> String {
        format!(
            "BoundState(index={}, energy={:.12}, parity={:?})",
            self.index, self.energy, self.parity
        )
    }
}

impl From<solver::BoundState> for BoundState {
    fn from(s: solver::BoundState) -> Self {
        BoundState {
            index: s.index,
            energy: s.energy,
            parity: s.parity.name(),
            divergent_coefficient: s.residual_divergent,
            residual: s.wronskian_residual,
            bracket_width: s.bracket_width,
            k: s.k,
            x_eval: s.x_eval,
            low_confidence: s.low_confidence,
        }
    }
}

#[pyclass(frozen, get_all, module = "pywronsk")]
pub struct Wavefunction {
    energy: f64,
    x: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    truncation_x: f64,
    k: f64,
    x_eval: f64,
    divergent_coefficient: Option<f64>,
}

/// All bound states, sorted by energy.
#[pyfunction]
#[pyo3(signature = (potential, *, h=0.01, x_eval=None, tol=1e-9, n_scan=400, emin=None, emax=None, jobs=1, brent=false))]
#[allow(clippy::too_many_arguments)]
fn find_bound_states(
    py: Python<'_>,
    potential: &Potential,
    h: f64,
    x_eval: Option<f64>,
    tol: f64,
    n_scan: usize,
    emin: Option<f64>,
    emax: Option<f64>,
    jobs: usize,
    brent: bool,
) -> PyResult<Vec<BoundState>> {
    let opts = SolverOptions {
        eps_floor: emin,
        eps_ceiling: emax,
        ..options(h, x_eval, tol, n_scan, jobs, brent)
    };
    let states = py
        .detach(|| solver::find_bound_states(&potential.inner, &opts))
        .map_err(solver_err)?;
    Ok(states.into_iter().map(BoundState::from).collect())
}

/// Critical couplings of a family: either a built-in name (varying
/// `coupling`, other parameters from `params`) or a `Potential` shape `s`
/// giving the family `v0 * s(x)`. Returns `(coupling, parity)` pairs.
#[pyfunction]
#[pyo3(signature = (family, v_min=0.2, v_max=10.0, *, coupling="v0", params=None, h=0.01, x_eval=None, tol=1e-9, n_scan=400, jobs=1))]
#[allow(clippy::too_many_arguments)]
fn critical_couplings(
    py: Python<'_>,
    family: &Bound<'_, PyAny>,
    v_min: f64,
    v_max: f64,
    coupling: &str,
    params: Option<&Bound<'_, PyDict>>,
    h: f64,
    x_eval: Option<f64>,
    tol: f64,
    n_scan: usize,
    jobs: usize,
) -> PyResult<Vec<(f64, &'static str)>> {
    let opts = options(h, x_eval, tol, n_scan, jobs, false);
    let base = params_from(params)?;
    let found = if let Ok(shape) = family.cast::<Potential>() {
        let shape = shape.get().inner.clone();
        py.detach(|| {
            solver::critical_couplings(&|v| Ok(shape.scaled(v)), v_min, v_max, n_scan, tol, &opts)
        })
    } else {
        let name: String = family.extract()?;
        let member = |v: f64| {
            let mut p = base.clone();
            p.insert(coupling.to_string(), v);
            wronsk::builtin(&name, &p)
        };
        member(v_min).map_err(potential_err)?;
        py.detach(|| solver::critical_couplings(&member, v_min, v_max, n_scan, tol, &opts))
    }
    .map_err(solver_err)?;
    Ok(found
        .into_iter()
        .map(|c| (c.coupling, c.parity.name()))
        .collect())
}

/// Closed-form Poschl-Teller levels for `-v0 / cosh(x)^2`.
#[pyfunction]
fn exact_poschl_teller(v0: f64) -> PyResult<Vec<f64>> {
    solver::exact_poschl_teller(v0).map_err(solver_err)
}

/// Samples `a2 C + b2 S` at `energy`; `mixture` is `"even"`, `"odd"` or
/// a pair `(a2, b2)`.
#[pyfunction]
#[pyo3(signature = (potential, energy, mixture=None, *, h=0.01, x_eval=None))]
fn wavefunction(
    py: Python<'_>,
    potential: &Potential,
    energy: f64,
    mixture: Option<&Bound<'_, PyAny>>,
    h: f64,
    x_eval: Option<f64>,
) -> PyResult<Wavefunction> {
    let mixture = match mixture {
        None => Mixture::Even,
        Some(m) => match m.extract::<String>() {
            Ok(s) if s == "even" => Mixture::Even,
            Ok(s) if s == "odd" => Mixture::Odd,
            Ok(s) => return Err(PyValueError::new_err(format!("unknown mixture {s:?}"))),
            Err(_) => {
                let (a2, b2): (f64, f64) = m.extract()?;
                Mixture::Custom { a2, b2 }
            }
        },
    };
    let opts = options(h, x_eval, 1e-9, 400, 1, false);
    let wf = py
        .detach(|| solver::wavefunction(&potential.inner, energy, mixture, &opts))
        .map_err(solver_err)?;
    Ok(Wavefunction {
        energy: wf.energy,
        x: wf.samples.iter().map(|s| s.x).collect(),
        phi: wf.samples.iter().map(|s| s.phi).collect(),
        dphi: wf.samples.iter().map(|s| s.phi_prime).collect(),
        truncation_x: wf.truncation_x,
        k: wf.k,
        x_eval: wf.x_eval,
        divergent_coefficient: wf.divergent_coefficient,
    })
}

/// Quantization conditions on an energy lattice: `(energies, columns)`
/// where `columns` holds `[even, odd]` or `[det]` per energy.
#[pyfunction]
#[pyo3(signature = (potential, emin, emax, n=400, *, h=0.01, x_eval=None, jobs=1))]
#[allow(clippy::too_many_arguments)]
fn scan_energy(
    py: Python<'_>,
    potential: &Potential,
    emin: f64,
    emax: f64,
    n: usize,
    h: f64,
    x_eval: Option<f64>,
    jobs: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let opts = options(h, x_eval, 1e-9, n, jobs, false);
    let table = py
        .detach(|| solver::scan_energy(&potential.inner, emin, emax, n, &opts))
        .map_err(solver_err)?;
    Ok(table
        .rows
        .into_iter()
        .map(|r| (r.abscissa, r.values))
        .unzip())
}

/// Coordinates `(left, right)` beyond which `|v - v_limit| < tol`.
#[pyfunction]
#[pyo3(signature = (potential, tol=1e-10))]
fn tail_cut(potential: &Potential, tol: f64) -> PyResult<(f64, f64)> {
    let cut = wronsk::tail_cut(&potential.inner, tol).map_err(potential_err)?;
    Ok((cut.left, cut.right))
}

#[pymodule]
fn pywronsk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Potential>()?;
    m.add_class::<BoundState>()?;
    m.add_class::<Wavefunction>()?;
    m.add_function(wrap_pyfunction!(find_bound_states, m)?)?;
    m.add_function(wrap_pyfunction!(critical_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(exact_poschl_teller, m)?)?;
    m.add_function(wrap_pyfunction!(wavefunction, m)?)?;
    m.add_function(wrap_pyfunction!(scan_energy, m)?)?;
    m.add_function(wrap_pyfunction!(tail_cut, m)?)?;
    Ok(())
}
