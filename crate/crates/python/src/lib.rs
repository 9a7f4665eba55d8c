//! Python bindings: `import qwalk`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyString;
use qwalk_core::{analysis, continuum, initcond, spectral, walk};
use qwalk_core::{Branch, CoinParameter, Complex64, Metric, ProbabilityDistribution, TruncationOrder, WalkerState};

fn err(e: qwalk_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn branch(s: i8) -> PyResult<Branch> {
    match s {
        1 => Ok(Branch::Plus),
        -1 => Ok(Branch::Minus),
        _ => Err(PyValueError::new_err(format!("branch must be 1 or -1, got {s}"))),
    }
}

/// Converts a serializable report into plain Python dicts and lists.
fn to_python<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Reads a JSON string, or any object `json.dumps` accepts, into a typed value.
fn from_python<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if obj.is_instance_of::<PyString>() {
        obj.extract()?
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Coin angle `θ ∈ [0, π/2]`; `π/4` is the Hadamard coin.
#[pyclass(name = "Coin", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Coin(CoinParameter);

#[pymethods]
impl Coin {
    #[new]
    fn new(theta: f64) -> PyResult<Self> {
        CoinParameter::new(theta).map(Coin).map_err(err)
    }

    #[staticmethod]
    fn hadamard() -> Self {
        Coin(CoinParameter::hadamard())
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    fn __repr__(&self) -> String {
        format!("Coin(theta={})", self.0.theta())
    }
}

#[pyclass(name = "WalkerState", frozen, from_py_object)]
#[derive(Clone)]
struct State(WalkerState);

#[pymethods]
impl State {
    /// Normalized state from `R` and `L` amplitudes starting at site `x_min`.
    #[new]
    fn new(x_min: i64, r: Vec<Complex64>, l: Vec<Complex64>) -> PyResult<Self> {
        WalkerState::new(x_min, r, l).map(State).map_err(err)
    }

    #[staticmethod]
    fn localized(x: i64, r: Complex64, l: Complex64) -> PyResult<Self> {
        WalkerState::localized(x, [r, l]).map(State).map_err(err)
    }

    #[getter]
    fn t(&self) -> u64 {
        self.0.t()
    }

    #[getter]
    fn x_min(&self) -> i64 {
        self.0.x_min()
    }

    #[getter]
    fn x_max(&self) -> i64 {
        self.0.x_max()
    }

    #[getter]
    fn r(&self) -> Vec<Complex64> {
        self.0.r().to_vec()
    }

    #[getter]
    fn l(&self) -> Vec<Complex64> {
        self.0.l().to_vec()
    }

    fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    fn probability(&self) -> Distribution {
        Distribution(walk::probability(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("WalkerState(t={}, x_min={}, x_max={})", self.0.t(), self.0.x_min(), self.0.x_max())
    }
}

#[pyclass(name = "Distribution", frozen, from_py_object)]
#[derive(Clone)]
struct Distribution(ProbabilityDistribution);

#[pymethods]
impl Distribution {
    #[new]
    fn new(t: u64, x_min: i64, p: Vec<f64>) -> PyResult<Self> {
        ProbabilityDistribution::new(t, x_min, p).map(Distribution).map_err(err)
    }

    #[getter]
    fn t(&self) -> u64 {
        self.0.t
    }

    #[getter]
    fn x_min(&self) -> i64 {
        self.0.x_min
    }

    #[getter]
    fn x_max(&self) -> i64 {
        self.0.x_max()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.0.p.clone()
    }

    /// Site coordinates matching `p`.
    #[getter]
    fn x(&self) -> Vec<i64> {
        (self.0.x_min..=self.0.x_max()).collect()
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn __len__(&self) -> usize {
        self.0.p.len()
    }
}

/// Builds an initial state from a spec given as a dict or JSON string, e.g.
/// `{"envelope": {"family": "sinc", "sigma0": 15}, "carrier_k0": "pi/2",
///   "coin": {"eigenspinor": {"k0": "pi/2", "s": 1}}}`.
#[pyfunction]
fn build(spec: &Bound<'_, PyAny>, coin: Coin) -> PyResult<State> {
    let spec: initcond::InitialConditionSpec = from_python(spec)?;
    initcond::build(&spec, coin.0).map(State).map_err(err)
}

#[pyfunction]
fn step(state: &State, coin: Coin) -> State {
    State(walk::step(&state.0, coin.0))
}

/// Iterates the walk map `steps` times.
#[pyfunction]
fn evolve(py: Python<'_>, state: &State, coin: Coin, steps: u64) -> PyResult<State> {
    let s = state.0.clone();
    py.detach(move || walk::evolve(&s, coin.0, steps)).map(State).map_err(err)
}

/// Spectral propagation on a ring of `n` sites (smallest valid ring when omitted).
#[pyfunction]
#[pyo3(signature = (state, coin, steps, n=None))]
fn exact_evolve(py: Python<'_>, state: &State, coin: Coin, steps: u64, n: Option<usize>) -> PyResult<State> {
    let s = state.0.clone();
    let n = n.unwrap_or_else(|| spectral::min_ring_size(&s, steps));
    py.detach(move || spectral::exact_evolve(&s, coin.0, steps, n)).map(State).map_err(err)
}

/// Lattice distribution after propagating each branch envelope around carrier `k0`.
#[pyfunction]
#[pyo3(signature = (state, coin, k0, t, truncation="exact"))]
fn envelope_evolve(state: &State, coin: Coin, k0: f64, t: u64, truncation: &str) -> PyResult<Distribution> {
    let trunc: TruncationOrder = serde_json::from_value(serde_json::Value::String(truncation.into()))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let mut total: Option<ProbabilityDistribution> = None;
    for (_, weight, field) in continuum::split_into_envelopes(&state.0, k0, coin.0).map_err(err)? {
        let moved = continuum::propagate_envelope(&field.padded(t as usize + 64), coin.0, t as f64, trunc).map_err(err)?;
        let dist = moved.lattice_probability(weight, t).map_err(err)?;
        match total.as_mut() {
            Some(acc) => acc.p.iter_mut().zip(&dist.p).for_each(|(a, b)| *a += b),
            None => total = Some(dist),
        }
    }
    total
        .map(Distribution)
        .ok_or_else(|| PyValueError::new_err("state has no envelope weight"))
}

#[pyfunction]
fn omega(k: f64, coin: Coin) -> f64 {
    spectral::omega(k, coin.0)
}

#[pyfunction]
#[pyo3(signature = (k, coin, s=1))]
fn group_velocity(k: f64, coin: Coin, s: i8) -> PyResult<f64> {
    spectral::group_velocity(k, coin.0, branch(s)?).map_err(err)
}

/// `(R, L)` components of the eigenspinor `Φ_k^{(s)}`.
#[pyfunction]
#[pyo3(signature = (k, coin, s=1))]
fn eigenspinor(k: f64, coin: Coin, s: i8) -> PyResult<(Complex64, Complex64)> {
    let phi = spectral::eigenspinor(k, coin.0, branch(s)?).map_err(err)?;
    Ok((phi.components[0], phi.components[1]))
}

#[pyfunction]
#[pyo3(signature = (coin, samples=1024))]
fn dispersion_curve<'py>(py: Python<'py>, coin: Coin, samples: usize) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &spectral::dispersion_curve(coin.0, samples).map_err(err)?)
}

#[pyfunction]
fn branch_weights(state: &State, k0: f64, coin: Coin) -> PyResult<(f64, f64)> {
    initcond::branch_weights(&state.0, k0, coin.0).map_err(err)
}

#[pyfunction]
fn moments<'py>(py: Python<'py>, dist: &Distribution) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &analysis::moments(&dist.0).map_err(err)?)
}

#[pyfunction]
fn parity_zeros(dist: &Distribution, t: u64) -> bool {
    analysis::parity_zeros(&dist.0, t)
}

#[pyfunction]
#[pyo3(signature = (dist, sigma0, coin, rho=0.8))]
fn flatness<'py>(py: Python<'py>, dist: &Distribution, sigma0: f64, coin: Coin, rho: f64) -> PyResult<Bound<'py, PyAny>> {
    let prediction = continuum::flat_top_prediction(sigma0, coin.0, dist.0.t as f64).map_err(err)?;
    to_python(py, &analysis::flatness(&dist.0, &prediction, rho).map_err(err)?)
}

#[pyfunction]
fn track_packets<'py>(py: Python<'py>, dists: Vec<Distribution>) -> PyResult<Bound<'py, PyAny>> {
    let dists: Vec<_> = dists.into_iter().map(|d| d.0).collect();
    to_python(py, &analysis::track_packets(&dists).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (a, b, metric="l1"))]
fn distance(a: &Distribution, b: &Distribution, metric: &str) -> PyResult<f64> {
    let metric: Metric = metric.parse().map_err(err)?;
    Ok(analysis::distance(&a.0, &b.0, metric))
}

#[pyfunction]
fn width_law(t: f64, sigma0: f64, coin: Coin) -> PyResult<f64> {
    continuum::width_law(t, sigma0, coin.0).map_err(err)
}

#[pyfunction]
fn flat_top_prediction<'py>(py: Python<'py>, sigma0: f64, coin: Coin, t: f64) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &continuum::flat_top_prediction(sigma0, coin.0, t).map_err(err)?)
}

#[pyfunction]
fn talbot_period(lambda: f64, coin: Coin) -> PyResult<f64> {
    continuum::talbot_period(lambda, coin.0).map_err(err)
}

#[pymodule]
fn qwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Coin>()?;
    m.add_class::<State>()?;
    m.add_class::<Distribution>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(group_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(eigenspinor, m)?)?;
    m.add_function(wrap_pyfunction!(dispersion_curve, m)?)?;
    m.add_function(wrap_pyfunction!(branch_weights, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(parity_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(flatness, m)?)?;
    m.add_function(wrap_pyfunction!(track_packets, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(width_law, m)?)?;
    m.add_function(wrap_pyfunction!(flat_top_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(talbot_period, m)?)?;
    Ok(())
}
