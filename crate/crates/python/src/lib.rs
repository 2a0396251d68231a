//! Python bindings: states, channels, information quantities and rate regions.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qmac_core::channels::{self, QuantumChannel};
use qmac_core::information::{self, SuiteConfig};
use qmac_core::linalg::{ComplexMatrix, SubsystemLayout};
use qmac_core::regions::{self, OptimizerConfig, RatePoint, RegionKind};
use qmac_core::states;

create_exception!(qmac, QmacError, PyValueError);

fn err(e: impl std::fmt::Display) -> PyErr {
    QmacError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != m) {
        return Err(err(format!(
            "row {i} has {} entries, expected {m}",
            rows[i].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_matrix(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn layout(
    dims: Option<Vec<usize>>,
    labels: Option<Vec<String>>,
    dim: usize,
    default: &str,
) -> PyResult<SubsystemLayout> {
    let dims = dims.unwrap_or_else(|| vec![dim]);
    let labels = labels.unwrap_or_else(|| {
        if dims.len() == 1 {
            vec![default.to_string()]
        } else {
            (0..dims.len())
                .map(|i| ((b'A' + i as u8) as char).to_string())
                .collect()
        }
    });
    SubsystemLayout::new(dims, labels).map_err(err)
}

#[pyclass(name = "DensityMatrix", module = "qmac", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(states::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// `matrix` is a square nested list of complex numbers; `dims` and
    /// `labels` describe the tensor factors (default: one factor "S").
    #[new]
    #[pyo3(signature = (matrix, dims=None, labels=None))]
    fn new(
        matrix: Vec<Vec<Complex64>>,
        dims: Option<Vec<usize>>,
        labels: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let m = to_matrix(matrix)?;
        let l = layout(dims, labels, m.nrows(), "S")?;
        states::density_from_matrix(m, l, states::STATE_TOL)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (dims, labels=None))]
    fn maximally_mixed(dims: Vec<usize>, labels: Option<Vec<String>>) -> PyResult<Self> {
        let total = dims.iter().product();
        Ok(Self(states::DensityMatrix::maximally_mixed(layout(
            Some(dims),
            labels,
            total,
            "S",
        )?)))
    }

    /// Projector onto the maximally entangled state of two `d`-dim factors.
    #[staticmethod]
    #[pyo3(signature = (d, first="A", second="B"))]
    fn maximally_entangled(d: usize, first: &str, second: &str) -> PyResult<Self> {
        states::maximally_entangled_on(d, first, second)
            .map(|s| Self(s.projector()))
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (dim, rank=None, seed=0))]
    fn random(dim: usize, rank: Option<usize>, seed: u64) -> PyResult<Self> {
        states::random_density(dim, rank.unwrap_or(dim), seed)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.layout().dims().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.0.layout().labels().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        from_matrix(self.0.matrix())
    }

    fn partial_trace(&self, keep: Vec<String>) -> PyResult<Self> {
        let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
        self.0.partial_trace(&keep).map(Self).map_err(err)
    }

    fn tensor(&self, other: &Self) -> PyResult<Self> {
        self.0.tensor(&other.0).map(Self).map_err(err)
    }

    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn entropy(&self) -> PyResult<f64> {
        information::entropy(&self.0).map(|b| b.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(dims={:?}, labels={:?})",
            self.0.layout().dims(),
            self.0.layout().labels()
        )
    }
}

#[pyclass(name = "Channel", module = "qmac", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannel(QuantumChannel);

#[pymethods]
impl PyChannel {
    /// Channel from Kraus operators with input and output factor dims.
    #[new]
    #[pyo3(signature = (kraus, din, dout, input_labels=None, output_labels=None))]
    fn new(
        kraus: Vec<Vec<Vec<Complex64>>>,
        din: Vec<usize>,
        dout: Vec<usize>,
        input_labels: Option<Vec<String>>,
        output_labels: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let ops = kraus
            .into_iter()
            .map(to_matrix)
            .collect::<PyResult<Vec<_>>>()?;
        let (ti, to) = (din.iter().product(), dout.iter().product());
        let input = layout(Some(din), input_labels, ti, "A'")?;
        let output = layout(Some(dout), output_labels, to, "B")?;
        channels::channel_from_kraus(ops, input, output, channels::CHANNEL_TOL)
            .map(Self)
            .map_err(err)
    }

    /// Two-sender erasure channel: A' (2) controls whether B' (d) reaches C.
    #[staticmethod]
    fn erasure_mac(d: usize) -> PyResult<Self> {
        channels::erasure_mac(d).map(Self).map_err(err)
    }

    #[staticmethod]
    fn collective_phase_flip(p: f64) -> PyResult<Self> {
        channels::collective_phase_flip(p).map(Self).map_err(err)
    }

    #[staticmethod]
    fn dephasing(p: f64) -> PyResult<Self> {
        channels::dephasing(p).map(Self).map_err(err)
    }

    #[getter]
    fn din(&self) -> usize {
        self.0.din()
    }

    #[getter]
    fn dout(&self) -> usize {
        self.0.dout()
    }

    #[getter]
    fn input_labels(&self) -> Vec<String> {
        self.0.input_layout().labels().to_vec()
    }

    #[getter]
    fn output_labels(&self) -> Vec<String> {
        self.0.output_layout().labels().to_vec()
    }

    fn kraus(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.0.kraus().iter().map(from_matrix).collect()
    }

    fn apply(&self, rho: &PyDensityMatrix) -> PyResult<PyDensityMatrix> {
        let rho = rho
            .0
            .clone()
            .with_layout(self.0.input_layout().clone())
            .map_err(err)?;
        self.0.apply(&rho).map(PyDensityMatrix).map_err(err)
    }

    fn complementary(&self) -> Self {
        Self(self.0.complementary())
    }

    fn tensor_power(&self, k: usize) -> PyResult<Self> {
        self.0.tensor_power(k).map(Self).map_err(err)
    }

    /// `I_c(rho, N)`; the state is reinterpreted on the channel input.
    fn coherent_information(&self, rho: &PyDensityMatrix) -> PyResult<f64> {
        let rho = rho
            .0
            .clone()
            .with_layout(self.0.input_layout().clone())
            .map_err(err)?;
        information::channel_coherent_information(&rho, &self.0)
            .map(|b| b.0)
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(din={:?}, dout={:?})",
            self.0.input_layout().labels(),
            self.0.output_layout().labels()
        )
    }
}

#[pyclass(name = "RateRegion", module = "qmac", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRateRegion(regions::RateRegion);

#[pymethods]
impl PyRateRegion {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(err)
    }

    /// `(a_max, b_max, sum_max)` per generating pentagon.
    #[getter]
    fn generators(&self) -> Vec<(f64, f64, f64)> {
        self.0
            .generators
            .iter()
            .map(|g| (g.a_max, g.b_max, g.sum_max))
            .collect()
    }

    #[getter]
    fn frontier(&self) -> Vec<(f64, f64)> {
        self.0.frontier.iter().map(|p| (p.0, p.1)).collect()
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn time_sharing(&self) -> bool {
        self.0.time_sharing
    }

    #[pyo3(signature = (rate1, rate2, tol=1e-9))]
    fn contains(&self, rate1: f64, rate2: f64, tol: f64) -> bool {
        self.0.contains(RatePoint(rate1, rate2), tol)
    }

    #[pyo3(signature = (other, tol=1e-9))]
    fn contains_region(&self, other: &Self, tol: f64) -> bool {
        self.0.contains_region(&other.0, tol)
    }

    fn max_sum_rate(&self) -> f64 {
        self.0.max_sum_rate()
    }

    fn support(&self, weight: f64) -> f64 {
        self.0.support(weight)
    }

    fn __len__(&self) -> usize {
        self.0.generators.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RateRegion(kind={:?}, k={}, generators={}, frontier={})",
            self.0.metadata.kind,
            self.0.k,
            self.0.generators.len(),
            self.0.frontier.len()
        )
    }
}

#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    information::binary_entropy(p).map(|b| b.0).map_err(err)
}

#[pyfunction]
fn entropy(rho: &PyDensityMatrix) -> PyResult<f64> {
    rho.entropy()
}

/// `I(A;B)` of a bipartite state.
#[pyfunction]
fn mutual_information(rho: &PyDensityMatrix) -> PyResult<f64> {
    information::mutual_information(&rho.0)
        .map(|b| b.0)
        .map_err(err)
}

/// `I_c(A⟩B)` of a bipartite state.
#[pyfunction]
fn coherent_information(rho: &PyDensityMatrix) -> PyResult<f64> {
    information::coherent_information(&rho.0)
        .map(|b| b.0)
        .map_err(err)
}

#[pyfunction]
fn fidelity(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<f64> {
    information::fidelity(&rho.0, &sigma.0).map_err(err)
}

#[pyfunction]
fn trace_distance(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<f64> {
    information::trace_distance(&rho.0, &sigma.0).map_err(err)
}

#[allow(clippy::too_many_arguments)]
fn config(
    restarts: usize,
    max_iters: usize,
    weights: usize,
    seed: u64,
    ensemble_size: Option<usize>,
    dim_cap: usize,
) -> PyResult<OptimizerConfig> {
    let cfg = OptimizerConfig {
        restarts,
        max_iters,
        weights,
        seed,
        ensemble_size,
        dim_cap,
        ..OptimizerConfig::default()
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// CQ (or QQ) region of `channel`'s `k`-th tensor power, scaled by `1/k`.
#[pyfunction]
#[pyo3(signature = (channel, kind="cq", k=1, restarts=20, max_iters=2000, weights=21, seed=0, ensemble_size=None, dim_cap=64))]
#[allow(clippy::too_many_arguments)]
fn optimize_region(
    py: Python<'_>,
    channel: &PyChannel,
    kind: &str,
    k: usize,
    restarts: usize,
    max_iters: usize,
    weights: usize,
    seed: u64,
    ensemble_size: Option<usize>,
    dim_cap: usize,
) -> PyResult<PyRateRegion> {
    let kind: RegionKind = kind.parse().map_err(err)?;
    let cfg = config(restarts, max_iters, weights, seed, ensemble_size, dim_cap)?;
    let ch = channel.0.clone();
    py.detach(move || regions::regularized_region(&ch, kind, k, &cfg))
        .map(PyRateRegion)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d=2, samples=51))]
fn analytic_erasure_region(d: usize, samples: usize) -> PyResult<PyRateRegion> {
    regions::analytic_erasure_region(d, samples)
        .map(PyRateRegion)
        .map_err(err)
}

#[pyfunction]
fn analytic_phase_flip_region(p: f64) -> PyResult<PyRateRegion> {
    regions::analytic_phase_flip_region(p)
        .map(PyRateRegion)
        .map_err(err)
}

/// Labels of the two sender factors of a single-use channel.
fn single_use_senders(ch: &QuantumChannel) -> PyResult<(String, String)> {
    let l = ch.input_layout();
    let (alice, bob) = regions::mac_split(l).map_err(err)?;
    match (alice.as_slice(), bob.as_slice()) {
        ([a], [b]) => Ok((l.labels()[*a].clone(), l.labels()[*b].clone())),
        _ => Err(err(
            "expected a single-use channel with one factor per sender",
        )),
    }
}

/// `(r_max, s_max)` of the ensemble `{probs[x]: |states[x]>}` on A' with B'
/// maximally entangled with its reference.
#[pyfunction]
fn cq_point(
    channel: &PyChannel,
    probs: Vec<f64>,
    states: Vec<Vec<Complex64>>,
) -> PyResult<(f64, f64)> {
    let ch = &channel.0;
    let (alice, bob) = single_use_senders(ch)?;
    let da = ch.input_layout().dim_of(&alice).map_err(err)?;
    let db = ch.input_layout().dim_of(&bob).map_err(err)?;
    let pure = states
        .into_iter()
        .map(|v| {
            states::PureState::new(
                qmac_core::linalg::ComplexVector::from_vec(v),
                SubsystemLayout::single(da, &alice),
            )
        })
        .collect::<qmac_core::Result<Vec<_>>>()
        .map_err(err)?;
    let reference = states::maximally_entangled_on(db, "B", &bob).map_err(err)?;
    let ens = states::CqEnsemble::new(probs, pure, reference).map_err(err)?;
    let p = regions::cq_point(ch, &ens).map_err(err)?;
    Ok((p.rectangle.a_max, p.rectangle.b_max))
}

/// `(a_max, b_max, sum_max)` when each sender inputs half of a maximally
/// entangled pair.
#[pyfunction]
fn qq_corners_maximally_entangled(channel: &PyChannel) -> PyResult<(f64, f64, f64)> {
    let ch = &channel.0;
    let (alice, bob) = single_use_senders(ch)?;
    let da = ch.input_layout().dim_of(&alice).map_err(err)?;
    let db = ch.input_layout().dim_of(&bob).map_err(err)?;
    let pa = states::maximally_entangled_on(da, "A", &alice).map_err(err)?;
    let pb = states::maximally_entangled_on(db, "B", &bob).map_err(err)?;
    let p = regions::qq_corners(ch, &pa, &pb).map_err(err)?;
    Ok((p.a_max, p.b_max, p.sum_max))
}

/// Randomized entropy-inequality suite; returns the JSON report list.
#[pyfunction]
#[pyo3(signature = (trials=1000, dims=vec![2, 3, 4], seed=42))]
fn run_property_suite(
    py: Python<'_>,
    trials: usize,
    dims: Vec<usize>,
    seed: u64,
) -> PyResult<String> {
    let cfg = SuiteConfig { trials, dims, seed };
    let reports = py.detach(move || information::run_property_suite(&cfg));
    serde_json::to_string(&reports).map_err(err)
}

#[pymodule]
fn qmac(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QmacError", m.py().get_type::<QmacError>())?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyRateRegion>()?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_information, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_region, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_erasure_region, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_phase_flip_region, m)?)?;
    m.add_function(wrap_pyfunction!(cq_point, m)?)?;
    m.add_function(wrap_pyfunction!(qq_corners_maximally_entangled, m)?)?;
    m.add_function(wrap_pyfunction!(run_property_suite, m)?)?;
    Ok(())
}
