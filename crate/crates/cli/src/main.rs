//! `oneway`: compile unitaries into one-way patterns, or run single stages.
//!
//! Exit status: 0 success, 1 definite negative result, 2 malformed input.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use oneway_core::compile::{compile, phase_map_for, CompileConfig, CompileOutcome, ExhaustionReport, FailureKind};
use oneway_core::flow::cover::cover_from_successor;
use oneway_core::flow::{find_dependency_order, find_flow, Flow, FlowError};
use oneway_core::graphmatch::GraphMatcher;
use oneway_core::io::{
    self, BranchMapJson, BundleJson, FlowJson, GeometryJson, PatternJson, PhaseMapJson, PlanJson, UnitaryJson,
};
use oneway_core::pattern::{synthesize, Command, Pattern};
use oneway_core::sim::{branch_maps, check_against_matrix, SimLimits};
use oneway_core::types::MATRIX_EQ_TOL;

#[derive(Parser)]
#[command(name = "oneway", version, about = "Compile unitaries into deterministic one-way measurement patterns")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full search: decompose, match, flow, synthesize, verify
    Compile(CompileArgs),
    /// Phase map of a unitary for one plan
    Decompose(DecomposeArgs),
    /// Read a graph and angles off a phase map
    Match(MatchArgs),
    /// Find a causal flow
    Flow(FlowArgs),
    /// Emit the corrected pattern of a flow
    Synth(SynthArgs),
    /// Branch maps of a pattern
    Simulate(SimulateArgs),
    /// Check a pattern against a unitary
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OutArg {
    /// write the JSON artifact here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    unitary: PathBuf,
    #[arg(long)]
    aux: Option<usize>,
    #[arg(long)]
    max_aux: Option<usize>,
    /// comma separated output labels, e.g. "3,5"
    #[arg(long, value_parser = parse_labels)]
    outputs: Option<Labels>,
    #[arg(long, default_value_t = 256)]
    max_perms: usize,
    #[arg(long, default_value_t = 64)]
    max_slots: usize,
    #[arg(long, default_value_t = 10_000)]
    max_trials: usize,
    #[arg(long, default_value_t = MATRIX_EQ_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    perm_seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    unitary: PathBuf,
    /// plan file; overrides --aux, --outputs and --seed
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    aux: Option<usize>,
    #[arg(long, value_parser = parse_labels)]
    outputs: Option<Labels>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    phasemap: PathBuf,
    #[arg(long, value_parser = parse_labels)]
    inputs: Option<Labels>,
    #[arg(long, value_parser = parse_labels)]
    outputs: Option<Labels>,
    #[arg(long, default_value_t = MATRIX_EQ_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SynthArgs {
    /// geometry with angles, as written by `match`
    #[arg(long)]
    geometry: PathBuf,
    /// flow file; found from the geometry when absent
    #[arg(long)]
    flow: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// every branch instead of the positive one
    #[arg(long)]
    all_branches: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    unitary: PathBuf,
    #[arg(long, default_value_t = MATRIX_EQ_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone)]
struct Labels(Vec<u32>);

fn parse_labels(s: &str) -> Result<Labels, String> {
    s.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| format!("bad label {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Labels)
}

/// How a run ended.
enum Outcome {
    Success,
    Negative,
}

/// Malformed input; exit 2.
struct Malformed(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Malformed {
    fn from(e: E) -> Self {
        Malformed(e.into())
    }
}

type Run = Result<Outcome, Malformed>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Malformed> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(io::from_json(&text).with_context(|| format!("parsing {}", path.display()))?)
}

/// Writes the artifact, then the summary lines, to the right streams.
fn emit<T: Serialize>(value: &T, out: &OutArg, summary: &[String]) -> Result<(), Malformed> {
    let text = io::to_json(value)?;
    match &out.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            summary.iter().for_each(|l| println!("{l}"));
        }
        None => {
            print!("{text}");
            summary.iter().for_each(|l| eprintln!("{l}"));
        }
    }
    Ok(())
}

/// `pi/4` multiples get a symbolic note.
fn show_angle(a: f64) -> String {
    let q = a / FRAC_PI_4;
    if (q - q.round()).abs() < 1e-12 {
        let n = q.round() as i64;
        let sym = match n {
            0 => "0".to_string(),
            4 => "pi".to_string(),
            _ => format!("{n}pi/4"),
        };
        format!("{a} (= {sym})")
    } else {
        a.to_string()
    }
}

fn pattern_summary(p: &Pattern) -> Vec<String> {
    let mut lines = vec![format!("pattern: {} commands on {} qubits", p.commands.len(), p.space.len())];
    for c in &p.commands {
        if let Command::Meas { qubit, angle } = c {
            lines.push(format!("  measure {qubit} at {}", show_angle(*angle)));
        }
    }
    lines.push(format!("  {p}"));
    lines
}

fn exhaustion_summary(r: &ExhaustionReport) -> Vec<String> {
    let mut lines = vec![format!(
        "no pattern found: {} ({} trials{})",
        r.classification.name(),
        r.trials,
        if r.cap_exhausted { ", trial cap reached" } else { "" }
    )];
    for kind in FailureKind::STAGES {
        lines.push(format!("  {}: {}", kind.name(), r.failures.get(&kind).copied().unwrap_or(0)));
    }
    lines
}

fn run_compile(a: CompileArgs) -> Run {
    let u = read_json::<UnitaryJson>(&a.unitary)?.into_unitary()?;
    let cfg = CompileConfig {
        aux: a.aux,
        max_aux: a.max_aux,
        outputs: a.outputs.map(|l| l.0),
        max_perms: a.max_perms,
        max_slot_solutions: a.max_slots,
        max_trials: a.max_trials,
        tol: a.tol,
        seed: a.seed,
        perm_seed: a.perm_seed,
        limits: SimLimits::default(),
    };
    match compile(&u, &cfg)? {
        CompileOutcome::Success(b) => {
            let mut summary = vec![format!(
                "compiled after {} trials: aux {}, outputs {:?}, {} edges",
                b.trials,
                b.plan.aux,
                b.plan.outputs,
                b.matched.edges.len()
            )];
            summary.extend(pattern_summary(&b.pattern));
            summary.push(format!(
                "deterministic: {}, matches: {}, max entry error {:.3e}",
                b.report.deterministic, b.report.matches_unitary, b.report.max_entry_error
            ));
            emit(&BundleJson::from_bundle(&b)?, &a.out, &summary)?;
            Ok(Outcome::Success)
        }
        CompileOutcome::Exhausted(r) => {
            let summary = exhaustion_summary(&r);
            emit(&r, &a.out, &summary)?;
            Ok(Outcome::Negative)
        }
    }
}

fn run_decompose(a: DecomposeArgs) -> Run {
    let u = read_json::<UnitaryJson>(&a.unitary)?.into_unitary()?;
    let k = u.num_qubits();
    let record = match &a.plan {
        Some(path) => read_json::<PlanJson>(path)?.into_record()?,
        None => {
            let aux = a.aux.unwrap_or(2 * k);
            let (inputs, aux_labels) = oneway_core::compile::default_labels(k, aux);
            let outputs = a.outputs.map(|l| l.0).unwrap_or_else(|| aux_labels[..k.min(aux_labels.len())].to_vec());
            PlanJson {
                inputs,
                outputs,
                aux,
                perm_seed: None,
                max_trials: 10_000,
                seed: a.seed,
                slot_solution: 0,
                permutations: None,
            }
            .into_record()?
        }
    };
    if record.inputs.len() != k {
        return Err(anyhow!("plan has {} inputs, the unitary acts on {k} qubits", record.inputs.len()).into());
    }
    let ix = record.indexing()?;
    let phi = match phase_map_for(&u, &record, 1) {
        Ok(phi) => phi,
        Err(e @ oneway_core::compile::CompileError::Decompose(
            oneway_core::DecomposeError::BoundViolated { .. } | oneway_core::DecomposeError::SingleSlotModulus { .. },
        )) => {
            let msg = format!("no decomposition with {} auxiliaries: {e}", record.aux);
            eprintln!("{msg}");
            return Ok(Outcome::Negative);
        }
        Err(e) => return Err(e.into()),
    };
    let err = oneway_core::decompose::decomposition_error(&u, &phi, &ix);
    let summary = vec![format!(
        "phase map on {} qubits (inputs {:?}, outputs {:?}), R.Phi.P error {err:.3e}",
        phi.num_qubits(),
        ix.inputs(),
        ix.outputs()
    )];
    emit(&PhaseMapJson::new(&phi, Some(&ix)), &a.out, &summary)?;
    Ok(Outcome::Success)
}

fn run_match(a: MatchArgs) -> Run {
    let file: PhaseMapJson = read_json(&a.phasemap)?;
    let phi = file.phase_map()?;
    let ix = file.indexing(a.inputs.as_ref().map(|l| &l.0[..]), a.outputs.as_ref().map(|l| &l.0[..]))?;
    let matcher = GraphMatcher { tol: a.tol };
    let m = match matcher.extract(&phi, &ix) {
        Ok(m) => m,
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{msg}");
            return Ok(Outcome::Negative);
        }
    };
    if !matcher.verify_full(&phi, &m, &ix) {
        let msg = "no matching graph: pairwise checks pass but the full diagonal does not factor".to_string();
        eprintln!("{msg}");
        return Ok(Outcome::Negative);
    }
    let mut summary = vec![format!("edges {:?}", m.edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>())];
    for (v, a) in &m.angles {
        summary.push(format!("  angle {v}: {}", show_angle(*a)));
    }
    emit(&GeometryJson::from_match(&m, &ix), &a.out, &summary)?;
    Ok(Outcome::Success)
}

fn flow_negative(e: &FlowError) -> Option<String> {
    match e {
        FlowError::NoPathCover { .. } | FlowError::DependencyCycle { .. } => Some(e.to_string()),
        _ => None,
    }
}

fn run_flow(a: FlowArgs) -> Run {
    let g = read_json::<GeometryJson>(&a.geometry)?.geometry()?;
    match find_flow(&g) {
        Ok(flow) => {
            let f = flow.successor_map();
            let summary = vec![format!("flow found: f = {f:?}, {} chains", flow.order.chains().len())];
            emit(&FlowJson::from_flow(&flow), &a.out, &summary)?;
            Ok(Outcome::Success)
        }
        Err(e) => match flow_negative(&e) {
            Some(msg) => {
                eprintln!("{msg}");
                Ok(Outcome::Negative)
            }
            None => Err(e.into()),
        },
    }
}

fn run_synth(a: SynthArgs) -> Run {
    let file: GeometryJson = read_json(&a.geometry)?;
    let g = file.geometry()?;
    let angles = file.angles()?;
    let flow = match &a.flow {
        Some(path) => {
            let f = read_json::<FlowJson>(path)?.successor()?;
            let cover = cover_from_successor(&g, &f)?;
            match find_dependency_order(&g, &cover) {
                Ok(order) => Flow { cover, order },
                Err(e) => {
                    let msg = e.to_string();
                    eprintln!("{msg}");
                    return Ok(Outcome::Negative);
                }
            }
        }
        None => match find_flow(&g) {
            Ok(flow) => flow,
            Err(e) => match flow_negative(&e) {
                Some(msg) => {
                    eprintln!("{msg}");
                    return Ok(Outcome::Negative);
                }
                None => return Err(e.into()),
            },
        },
    };
    let pattern = synthesize(&g, &flow, &angles)?;
    emit(&PatternJson::from_pattern(&pattern), &a.out, &pattern_summary(&pattern))?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct BranchesJson {
    measured: Vec<u32>,
    branches: Vec<BranchMapJson>,
}

fn run_simulate(a: SimulateArgs) -> Run {
    let p = read_json::<PatternJson>(&a.pattern)?.into_pattern();
    p.validate()?;
    let mut maps = branch_maps(&p, SimLimits::default())?;
    if !a.all_branches {
        maps.truncate(1);
    }
    let summary = vec![format!("{} branch maps, {} measured qubits", maps.len(), p.num_measured())];
    let out = BranchesJson { measured: p.measurement_order(), branches: maps.iter().map(BranchMapJson::from_branch).collect() };
    emit(&out, &a.out, &summary)?;
    Ok(Outcome::Success)
}

fn run_verify(a: VerifyArgs) -> Run {
    let p = read_json::<PatternJson>(&a.pattern)?.into_pattern();
    let u = read_json::<UnitaryJson>(&a.unitary)?.into_unitary()?;
    let r = check_against_matrix(&p, u.matrix(), a.tol, SimLimits::default())?;
    let line = format!(
        "deterministic: {}, matches: {} (branch discrepancy {:.3e}, entry error {:.3e})",
        r.deterministic, r.matches_unitary, r.max_branch_discrepancy, r.max_entry_error
    );
    emit(&r, &a.out, &[line])?;
    Ok(if r.success() { Outcome::Success } else { Outcome::Negative })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Cmd::Compile(a) => run_compile(a),
        Cmd::Decompose(a) => run_decompose(a),
        Cmd::Match(a) => run_match(a),
        Cmd::Flow(a) => run_flow(a),
        Cmd::Synth(a) => run_synth(a),
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Verify(a) => run_verify(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(Malformed(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
