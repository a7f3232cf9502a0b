//! Python bindings: `import oneway`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::IntoPyObjectExt;

use oneway_core::compile::{self as search, CompileBundle, CompileConfig, CompileOutcome, ExhaustionReport, PlanRecord};
use oneway_core::flow::cover::cover_from_successor;
use oneway_core::flow::{find_dependency_order, FlowError};
use oneway_core::graphmatch::GraphMatcher;
use oneway_core::io::{self, BundleJson, FlowJson, GeometryJson, PatternJson, PhaseMapJson, PlanJson, UnitaryJson};
use oneway_core::pattern::{self as pat, Command};
use oneway_core::sim::{self, SimLimits};
use oneway_core::types::MATRIX_EQ_TOL;
use oneway_core::QubitIndexing;

create_exception!(oneway, OnewayError, PyException);
create_exception!(oneway, NoMatchError, OnewayError);
create_exception!(oneway, NoFlowError, OnewayError);

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    OnewayError::new_err(e.to_string())
}

fn bad<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn flow_err(e: FlowError) -> PyErr {
    match e {
        FlowError::NoPathCover { .. } | FlowError::DependencyCycle { .. } => NoFlowError::new_err(e.to_string()),
        _ => bad(e),
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct Unitary(oneway_core::UnitaryMatrix);

#[pymethods]
impl Unitary {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        oneway_core::UnitaryMatrix::from_rows(rows).map(Self).map_err(bad)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.matrix();
        (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json(&UnitaryJson::from_unitary(&self.0)).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::from_json::<UnitaryJson>(text).and_then(|u| u.into_unitary()).map(Self).map_err(bad)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct PhaseMap {
    diagonal: oneway_core::PhaseMapDiagonal,
    indexing: QubitIndexing,
}

#[pymethods]
impl PhaseMap {
    #[new]
    #[pyo3(signature = (diagonal, inputs, outputs, vertices=None))]
    fn new(diagonal: Vec<Complex64>, inputs: Vec<u32>, outputs: Vec<u32>, vertices: Option<Vec<u32>>) -> PyResult<Self> {
        let diagonal = oneway_core::PhaseMapDiagonal::new(diagonal).map_err(bad)?;
        let vertices = vertices.unwrap_or_else(|| (1..=diagonal.num_qubits() as u32).collect());
        let indexing = QubitIndexing::new(&vertices, &inputs, &outputs).map_err(bad)?;
        Ok(Self { diagonal, indexing })
    }

    #[getter]
    fn diagonal(&self) -> Vec<Complex64> {
        self.diagonal.entries().to_vec()
    }

    #[getter]
    fn inputs(&self) -> Vec<u32> {
        self.indexing.inputs().to_vec()
    }

    #[getter]
    fn outputs(&self) -> Vec<u32> {
        self.indexing.outputs().to_vec()
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json(&PhaseMapJson::new(&self.diagonal, Some(&self.indexing))).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: PhaseMapJson = io::from_json(text).map_err(bad)?;
        Ok(Self { diagonal: file.phase_map().map_err(bad)?, indexing: file.indexing(None, None).map_err(bad)? })
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct Geometry {
    inner: oneway_core::Geometry,
    angles: BTreeMap<u32, f64>,
}

#[pymethods]
impl Geometry {
    #[new]
    #[pyo3(signature = (vertices, edges, inputs, outputs, angles=None))]
    fn new(
        vertices: Vec<u32>,
        edges: Vec<(u32, u32)>,
        inputs: Vec<u32>,
        outputs: Vec<u32>,
        angles: Option<BTreeMap<u32, f64>>,
    ) -> PyResult<Self> {
        let inner = oneway_core::Geometry::new(&vertices, edges, inputs, outputs).map_err(bad)?;
        Ok(Self { inner, angles: angles.unwrap_or_default() })
    }

    #[getter]
    fn vertices(&self) -> Vec<u32> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32)> {
        self.inner.edges().iter().copied().collect()
    }

    #[getter]
    fn inputs(&self) -> Vec<u32> {
        self.inner.inputs().to_vec()
    }

    #[getter]
    fn outputs(&self) -> Vec<u32> {
        self.inner.outputs().to_vec()
    }

    #[getter]
    fn angles(&self) -> BTreeMap<u32, f64> {
        self.angles.clone()
    }

    fn find_flow(&self) -> PyResult<Flow> {
        find_flow(self)
    }

    fn to_json(&self) -> PyResult<String> {
        let mut file = GeometryJson::from_geometry(&self.inner);
        if !self.angles.is_empty() {
            file.angles = Some(self.angles.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        }
        io::to_json(&file).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: GeometryJson = io::from_json(text).map_err(bad)?;
        Ok(Self { inner: file.geometry().map_err(bad)?, angles: file.angles().map_err(bad)? })
    }

    fn __repr__(&self) -> String {
        format!("Geometry(vertices={:?}, edges={:?}, inputs={:?}, outputs={:?})", self.vertices(), self.edges(), self.inputs(), self.outputs())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct Flow(oneway_core::Flow);

#[pymethods]
impl Flow {
    #[getter]
    fn successor(&self) -> BTreeMap<u32, u32> {
        self.0.successor_map()
    }

    #[getter]
    fn chains(&self) -> Vec<Vec<u32>> {
        self.0.order.chains().to_vec()
    }

    fn precedes(&self, x: u32, y: u32) -> bool {
        self.0.precedes(x, y)
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json(&FlowJson::from_flow(&self.0)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Flow(successor={:?})", self.0.successor_map())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct Pattern(pat::Pattern);

#[pymethods]
impl Pattern {
    #[getter]
    fn inputs(&self) -> Vec<u32> {
        self.0.inputs.clone()
    }

    #[getter]
    fn outputs(&self) -> Vec<u32> {
        self.0.outputs.clone()
    }

    /// Commands as tuples: ("N", q), ("E", a, b), ("M", q, angle), ("X", q, s), ("Z", q, s).
    #[getter]
    fn commands<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.0
            .commands
            .iter()
            .map(|c| match *c {
                Command::Prep(q) => ("N", q).into_bound_py_any(py),
                Command::Ent(a, b) => ("E", a, b).into_bound_py_any(py),
                Command::Meas { qubit, angle } => ("M", qubit, angle).into_bound_py_any(py),
                Command::CorrX { qubit, signal } => ("X", qubit, signal).into_bound_py_any(py),
                Command::CorrZ { qubit, signal } => ("Z", qubit, signal).into_bound_py_any(py),
            })
            .collect()
    }

    fn measurement_order(&self) -> Vec<u32> {
        self.0.measurement_order()
    }

    /// Branch maps keyed by outcome string, first measurement leftmost.
    #[pyo3(signature = (all_branches=true))]
    fn branch_maps(&self, all_branches: bool) -> PyResult<Vec<(String, Vec<Vec<Complex64>>)>> {
        let mut maps = sim::branch_maps(&self.0, SimLimits::default()).map_err(err)?;
        if !all_branches {
            maps.truncate(1);
        }
        Ok(maps
            .iter()
            .map(|b| {
                let key = b.outcomes.iter().map(|&o| if o { '1' } else { '0' }).collect();
                (key, (0..b.map.rows()).map(|r| b.map.row(r).to_vec()).collect())
            })
            .collect())
    }

    #[pyo3(signature = (unitary, tol=MATRIX_EQ_TOL))]
    fn verify(&self, unitary: &Unitary, tol: f64) -> PyResult<Report> {
        verify(self, unitary, tol)
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json(&PatternJson::from_pattern(&self.0)).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let p = io::from_json::<PatternJson>(text).map_err(bad)?.into_pattern();
        p.validate().map_err(bad)?;
        Ok(Self(p))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Pattern({})", self.0)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "oneway")]
#[derive(Clone)]
struct Report(sim::VerificationReport);

#[pymethods]
impl Report {
    #[getter]
    fn deterministic(&self) -> bool {
        self.0.deterministic
    }

    #[getter]
    fn matches_unitary(&self) -> bool {
        self.0.matches_unitary
    }

    #[getter]
    fn max_branch_discrepancy(&self) -> f64 {
        self.0.max_branch_discrepancy
    }

    #[getter]
    fn max_entry_error(&self) -> f64 {
        self.0.max_entry_error
    }

    #[getter]
    fn success(&self) -> bool {
        self.0.success()
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        let py_bool = |b: bool| if b { "True" } else { "False" };
        format!(
            "Report(deterministic={}, matches_unitary={}, max_entry_error={:e})",
            py_bool(self.0.deterministic),
            py_bool(self.0.matches_unitary),
            self.0.max_entry_error
        )
    }
}

/// Either a bundle or an exhaustion report.
#[pyclass(frozen, skip_from_py_object, module = "oneway")]
struct CompileResult {
    bundle: Option<Box<CompileBundle>>,
    exhausted: Option<ExhaustionReport>,
}

#[pymethods]
impl CompileResult {
    #[getter]
    fn success(&self) -> bool {
        self.bundle.is_some()
    }

    #[getter]
    fn trials(&self) -> usize {
        match (&self.bundle, &self.exhausted) {
            (Some(b), _) => b.trials,
            (None, Some(r)) => r.trials,
            _ => 0,
        }
    }

    /// Stage that stopped the search, `None` on success.
    #[getter]
    fn classification(&self) -> Option<&'static str> {
        self.exhausted.as_ref().map(|r| r.classification.name())
    }

    #[getter]
    fn failures(&self) -> BTreeMap<&'static str, usize> {
        self.exhausted.iter().flat_map(|r| r.failures.iter().map(|(k, &v)| (k.name(), v))).collect()
    }

    #[getter]
    fn pattern(&self) -> Option<Pattern> {
        self.bundle.as_ref().map(|b| Pattern(b.pattern.clone()))
    }

    #[getter]
    fn geometry(&self) -> Option<Geometry> {
        self.bundle.as_ref().map(|b| Geometry { inner: b.geometry.clone(), angles: b.matched.angles.clone() })
    }

    #[getter]
    fn flow(&self) -> Option<Flow> {
        self.bundle.as_ref().map(|b| Flow(b.flow.clone()))
    }

    #[getter]
    fn phase_map(&self) -> PyResult<Option<PhaseMap>> {
        self.bundle
            .as_ref()
            .map(|b| Ok(PhaseMap { diagonal: b.phase_map.clone(), indexing: b.plan.indexing().map_err(err)? }))
            .transpose()
    }

    #[getter]
    fn report(&self) -> Option<Report> {
        self.bundle.as_ref().map(|b| Report(b.report.clone()))
    }

    /// Plan JSON, accepted by `decompose(plan=...)`.
    fn plan_json(&self) -> PyResult<Option<String>> {
        self.bundle.as_ref().map(|b| io::to_json(&PlanJson::from_record(&b.plan)).map_err(err)).transpose()
    }

    fn to_json(&self) -> PyResult<String> {
        match (&self.bundle, &self.exhausted) {
            (Some(b), _) => io::to_json(&BundleJson::from_bundle(b).map_err(err)?).map_err(err),
            (None, Some(r)) => io::to_json(r).map_err(err),
            _ => unreachable!(),
        }
    }

    fn __repr__(&self) -> String {
        match (&self.bundle, &self.exhausted) {
            (Some(b), _) => format!("CompileResult(success, trials={}, pattern={})", b.trials, b.pattern),
            (None, Some(r)) => format!("CompileResult({}, trials={})", r.classification.name(), r.trials),
            _ => unreachable!(),
        }
    }
}

#[pyfunction]
#[pyo3(signature = (
    unitary, aux=None, max_aux=None, outputs=None, max_perms=256, max_slots=64,
    max_trials=10_000, tol=MATRIX_EQ_TOL, seed=0, perm_seed=None
))]
#[allow(clippy::too_many_arguments)]
fn compile(
    py: Python<'_>,
    unitary: &Unitary,
    aux: Option<usize>,
    max_aux: Option<usize>,
    outputs: Option<Vec<u32>>,
    max_perms: usize,
    max_slots: usize,
    max_trials: usize,
    tol: f64,
    seed: u64,
    perm_seed: Option<u64>,
) -> PyResult<CompileResult> {
    let cfg = CompileConfig {
        aux,
        max_aux,
        outputs,
        max_perms,
        max_slot_solutions: max_slots,
        max_trials,
        tol,
        seed,
        perm_seed,
        limits: SimLimits::default(),
    };
    let u = unitary.0.clone();
    let outcome = py.detach(move || search::compile(&u, &cfg)).map_err(bad)?;
    Ok(match outcome {
        CompileOutcome::Success(b) => CompileResult { bundle: Some(b), exhausted: None },
        CompileOutcome::Exhausted(r) => CompileResult { bundle: None, exhausted: Some(r) },
    })
}

/// Phase map for a plan: either a plan JSON string or aux/outputs/seed.
#[pyfunction]
#[pyo3(signature = (unitary, aux=None, outputs=None, seed=0, plan=None))]
fn decompose(unitary: &Unitary, aux: Option<usize>, outputs: Option<Vec<u32>>, seed: u64, plan: Option<&str>) -> PyResult<PhaseMap> {
    let k = unitary.0.num_qubits();
    let record: PlanRecord = match plan {
        Some(text) => io::from_json::<PlanJson>(text).and_then(|p| p.into_record()).map_err(bad)?,
        None => {
            let aux = aux.unwrap_or(2 * k);
            let (inputs, aux_labels) = search::default_labels(k, aux);
            let outputs = outputs.unwrap_or_else(|| aux_labels[..k.min(aux_labels.len())].to_vec());
            PlanJson { inputs, outputs, aux, perm_seed: None, max_trials: 10_000, seed, slot_solution: 0, permutations: None }
                .into_record()
                .map_err(bad)?
        }
    };
    let indexing = record.indexing().map_err(bad)?;
    let diagonal = search::phase_map_for(&unitary.0, &record, 1).map_err(err)?;
    Ok(PhaseMap { diagonal, indexing })
}

/// Graph and angles read off a phase map; raises `NoMatchError` otherwise.
#[pyfunction]
#[pyo3(signature = (phase_map, tol=MATRIX_EQ_TOL))]
fn match_graph(phase_map: &PhaseMap, tol: f64) -> PyResult<Geometry> {
    let matcher = GraphMatcher { tol };
    let m = matcher.extract(&phase_map.diagonal, &phase_map.indexing).map_err(|e| NoMatchError::new_err(e.to_string()))?;
    if !matcher.verify_full(&phase_map.diagonal, &m, &phase_map.indexing) {
        return Err(NoMatchError::new_err("the full diagonal does not factor over the extracted graph"));
    }
    let inner = m.geometry(&phase_map.indexing).map_err(err)?;
    Ok(Geometry { inner, angles: m.angles })
}

/// Raises `NoFlowError` when the geometry has no causal flow.
#[pyfunction]
fn find_flow(geometry: &Geometry) -> PyResult<Flow> {
    oneway_core::find_flow(&geometry.inner).map(Flow).map_err(flow_err)
}

/// Flow built from a given successor map.
#[pyfunction]
fn flow_from_successor(geometry: &Geometry, successor: BTreeMap<u32, u32>) -> PyResult<Flow> {
    let cover = cover_from_successor(&geometry.inner, &successor).map_err(flow_err)?;
    let order = find_dependency_order(&geometry.inner, &cover).map_err(flow_err)?;
    Ok(Flow(oneway_core::Flow { cover, order }))
}

#[pyfunction]
#[pyo3(signature = (geometry, flow=None, angles=None))]
fn synthesize(geometry: &Geometry, flow: Option<&Flow>, angles: Option<BTreeMap<u32, f64>>) -> PyResult<Pattern> {
    let flow = match flow {
        Some(f) => f.0.clone(),
        None => oneway_core::find_flow(&geometry.inner).map_err(flow_err)?,
    };
    let angles = angles.unwrap_or_else(|| geometry.angles.clone());
    pat::synthesize(&geometry.inner, &flow, &angles).map(Pattern).map_err(bad)
}

#[pyfunction]
#[pyo3(signature = (pattern, unitary, tol=MATRIX_EQ_TOL))]
fn verify(pattern: &Pattern, unitary: &Unitary, tol: f64) -> PyResult<Report> {
    sim::check_against_matrix(&pattern.0, unitary.0.matrix(), tol, SimLimits::default()).map(Report).map_err(err)
}

#[pymodule]
fn oneway(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("OnewayError", m.py().get_type::<OnewayError>())?;
    m.add("NoMatchError", m.py().get_type::<NoMatchError>())?;
    m.add("NoFlowError", m.py().get_type::<NoFlowError>())?;
    m.add_class::<Unitary>()?;
    m.add_class::<PhaseMap>()?;
    m.add_class::<Geometry>()?;
    m.add_class::<Flow>()?;
    m.add_class::<Pattern>()?;
    m.add_class::<Report>()?;
    m.add_class::<CompileResult>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(match_graph, m)?)?;
    m.add_function(wrap_pyfunction!(find_flow, m)?)?;
    m.add_function(wrap_pyfunction!(flow_from_successor, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
