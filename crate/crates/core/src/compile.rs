//! The compile driver: decomposition, graph match, flow, synthesis and
//! verification, with backtracking over output sets, slot solutions,
//! permutations and the number of auxiliaries.
//!
//! Search order, outermost first: auxiliary count `n` from `aux` to `max_aux`;
//! output sets in lexicographic order; slot solutions (canonical, then
//! phase-aligned variants, then seeded random ones); permutation assignments
//! (lexicographic odometer, the last coefficient turning fastest, or seeded
//! random samples). Every candidate costs one trial.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::{random_slots, solve_slots, slot_geometry, DecomposeError, DecompositionPlan, LazyDiagonal, SlotSolution};
use crate::flow::{find_dependency_order, find_path_cover, Flow, FlowError, Geometry};
use crate::graphmatch::{GraphMatcher, MatchResult};
use crate::linalg::{cis, normalize_angle};
use crate::pattern::{synthesize, Pattern};
use crate::sim::{check_against_matrix, SimLimits, VerificationReport};
use crate::types::{CoreError, PhaseMapDiagonal, QubitIndexing, UnitaryMatrix, MATRIX_EQ_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct CompileConfig {
    /// auxiliary qubits to start with; `2|I|` when unset
    pub aux: Option<usize>,
    /// largest auxiliary count to expand to; `aux` when unset
    pub max_aux: Option<usize>,
    /// explicit output labels; otherwise every `|I|`-subset of the
    /// auxiliaries
    pub outputs: Option<Vec<u32>>,
    /// permutation assignments tried per slot solution
    pub max_perms: usize,
    /// slot solutions tried per output set
    pub max_slot_solutions: usize,
    /// global trial cap
    pub max_trials: usize,
    pub tol: f64,
    /// seeds the random slot solutions
    pub seed: u64,
    /// switches permutation search to seeded random sampling
    pub perm_seed: Option<u64>,
    pub limits: SimLimits,
}

impl Default for CompileConfig {
    fn default() -> Self {
        Self {
            aux: None,
            max_aux: None,
            outputs: None,
            max_perms: 256,
            max_slot_solutions: 64,
            max_trials: 10_000,
            tol: MATRIX_EQ_TOL,
            seed: 0,
            perm_seed: None,
            limits: SimLimits::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    LemmaBound,
    NoMatchingGraph,
    NoPathCover,
    DependencyCycle,
    VerificationMismatch,
    CapExhausted,
}

impl FailureKind {
    pub const STAGES: [FailureKind; 5] = [
        FailureKind::LemmaBound,
        FailureKind::NoMatchingGraph,
        FailureKind::NoPathCover,
        FailureKind::DependencyCycle,
        FailureKind::VerificationMismatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FailureKind::LemmaBound => "lemma-bound",
            FailureKind::NoMatchingGraph => "no-matching-graph",
            FailureKind::NoPathCover => "no-path-cover",
            FailureKind::DependencyCycle => "dependency-cycle",
            FailureKind::VerificationMismatch => "verification-mismatch",
            FailureKind::CapExhausted => "cap-exhausted",
        }
    }
}

/// Where a candidate sits in the search, enough to rebuild its phase map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub aux: usize,
    /// index into the slot-solution sequence
    pub slot_solution: usize,
    /// one permutation per coefficient `p * 2^|I| + q`
    pub permutations: Vec<Vec<usize>>,
    pub seed: u64,
    pub perm_seed: Option<u64>,
    pub max_trials: usize,
}

impl PlanRecord {
    pub fn indexing(&self) -> Result<QubitIndexing, CoreError> {
        let vertices: Vec<u32> = (1..=(self.inputs.len() + self.aux) as u32).collect();
        QubitIndexing::new(&vertices, &self.inputs, &self.outputs)
    }

    pub fn plan(&self) -> Result<DecompositionPlan, DecomposeError> {
        DecompositionPlan::new(self.indexing()?, self.permutations.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompileBundle {
    pub plan: PlanRecord,
    pub phase_map: PhaseMapDiagonal,
    pub matched: MatchResult,
    pub geometry: Geometry,
    pub flow: Flow,
    pub pattern: Pattern,
    pub report: VerificationReport,
    /// trials spent, the successful one included
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    pub trials: usize,
    /// failed trials per stage
    pub failures: BTreeMap<FailureKind, usize>,
    pub successes: usize,
    /// the trial cap stopped the search before the space ran out
    pub cap_exhausted: bool,
    pub classification: FailureKind,
    pub aux_tried: Vec<usize>,
}

impl ExhaustionReport {
    pub fn failure_total(&self) -> usize {
        self.failures.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompileOutcome {
    Success(Box<CompileBundle>),
    Exhausted(ExhaustionReport),
}

impl CompileOutcome {
    pub fn bundle(&self) -> Option<&CompileBundle> {
        match self {
            CompileOutcome::Success(b) => Some(b),
            CompileOutcome::Exhausted(_) => None,
        }
    }
}

/// Input labels `1..=k`, auxiliaries `k+1..=k+n`.
pub fn default_labels(k: usize, n: usize) -> (Vec<u32>, Vec<u32>) {
    ((1..=k as u32).collect(), (k as u32 + 1..=(k + n) as u32).collect())
}

fn output_sets(aux_labels: &[u32], k: usize) -> Vec<Vec<u32>> {
    fn rec(from: &[u32], k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for (i, &v) in from.iter().enumerate() {
            if from.len() - i < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(&from[i + 1..], k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(aux_labels, k, &mut Vec::new(), &mut out);
    out
}

/// The first `cap` slot solutions of the search sequence. Entry 0 is
/// canonical; then come the phase-aligned variants, in which
/// every zero coefficient is split as `[e^{i phi} r, -e^{i phi} r, ...]` with
/// `phi` ranging over 0 and the phases of the other canonical terms; the rest
/// are random, seeded by `seed` and their position.
pub fn slot_candidates(
    u: &UnitaryMatrix,
    aux: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<Vec<SlotSolution>>, DecomposeError> {
    let k = u.num_qubits();
    let (m, _) = slot_geometry(aux, k)?;
    let mut canonical = Vec::with_capacity(1 << (2 * k));
    for p in 0..1 << k {
        for q in 0..1 << k {
            canonical.push(SlotSolution { output: p, input: q, terms: solve_slots(u.coefficient(p, q), aux, k)? });
        }
    }
    let mut out = vec![canonical.clone()];
    if cap <= 1 {
        out.truncate(cap);
        return Ok(out);
    }

    let zero: Vec<usize> = (0..canonical.len()).filter(|&c| u.coefficient(c >> k, c & ((1 << k) - 1)).norm() == 0.0).collect();
    if !zero.is_empty() && m % 2 == 0 {
        let mut phases = vec![0.0];
        for (c, s) in canonical.iter().enumerate() {
            if !zero.contains(&c) {
                for t in &s.terms {
                    let a = normalize_angle(t.arg());
                    if !phases.iter().any(|&b: &f64| (b - a).abs() < 1e-12) {
                        phases.push(a);
                    }
                }
            }
        }
        phases.sort_by(f64::total_cmp);
        let mut digits = vec![0usize; zero.len()];
        'variants: loop {
            let mut variant = canonical.clone();
            for (&c, &d) in zero.iter().zip(&digits) {
                let rot = cis(phases[d] - FRAC_PI_2);
                variant[c].terms.iter_mut().for_each(|t| *t *= rot);
            }
            if variant != canonical {
                out.push(variant);
                if out.len() >= cap {
                    return Ok(out);
                }
            }
            for j in (0..digits.len()).rev() {
                digits[j] += 1;
                if digits[j] < phases.len() {
                    continue 'variants;
                }
                digits[j] = 0;
            }
            break;
        }
    }

    while out.len() < cap {
        let index = out.len() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut sol = Vec::with_capacity(canonical.len());
        for s in &canonical {
            let terms = random_slots(u.coefficient(s.output, s.input), aux, k, &mut rng)?;
            sol.push(SlotSolution { output: s.output, input: s.input, terms });
        }
        out.push(sol);
    }
    Ok(out)
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a larger suffix element");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Lexicographic odometer over per-coefficient permutations.
fn advance_odometer(perms: &mut [Vec<usize>]) -> bool {
    for perm in perms.iter_mut().rev() {
        if next_permutation(perm) {
            return true;
        }
        perm.sort_unstable();
    }
    false
}

struct Search<'a> {
    u: &'a UnitaryMatrix,
    cfg: &'a CompileConfig,
    failures: BTreeMap<FailureKind, usize>,
    trials: usize,
}

enum Trial {
    Done(Box<CompileBundle>),
    Failed(FailureKind),
}

impl Search<'_> {
    fn cap_hit(&self) -> bool {
        self.trials >= self.cfg.max_trials
    }

    fn fail(&mut self, kind: FailureKind) {
        *self.failures.entry(kind).or_insert(0) += 1;
    }

    fn evaluate(&self, record: &PlanRecord, plan: &DecompositionPlan, slots: &[SlotSolution]) -> Result<Trial, CompileError> {
        use FailureKind::*;
        let ix = plan.indexing();
        let lazy = LazyDiagonal::new(plan, slots)?;
        let matcher = GraphMatcher { tol: self.cfg.tol };
        let Ok(matched) = matcher.extract(&lazy, ix) else {
            return Ok(Trial::Failed(NoMatchingGraph));
        };
        if !matcher.verify_full(&lazy, &matched, ix) {
            return Ok(Trial::Failed(NoMatchingGraph));
        }
        let geometry = matched.geometry(ix).expect("matched edges lie on the indexing's vertices");
        let cover = match find_path_cover(&geometry) {
            Ok(c) => c,
            Err(_) => return Ok(Trial::Failed(NoPathCover)),
        };
        let order = match find_dependency_order(&geometry, &cover) {
            Ok(o) => o,
            Err(FlowError::DependencyCycle { .. }) => return Ok(Trial::Failed(DependencyCycle)),
            Err(_) => return Ok(Trial::Failed(NoPathCover)),
        };
        let flow = Flow { cover, order };
        let Ok(pattern) = synthesize(&geometry, &flow, &matched.angles) else {
            return Ok(Trial::Failed(VerificationMismatch));
        };
        let report = match check_against_matrix(&pattern, self.u.matrix(), self.cfg.tol, self.cfg.limits) {
            Ok(r) if r.success() => r,
            _ => return Ok(Trial::Failed(VerificationMismatch)),
        };
        Ok(Trial::Done(Box::new(CompileBundle {
            plan: record.clone(),
            phase_map: lazy.materialize()?,
            matched,
            geometry,
            flow,
            pattern,
            report,
            trials: self.trials + 1,
        })))
    }

    /// Permutation assignments for one slot solution.
    fn assignments(&self, coefficients: usize, slots: usize, solution: usize) -> Box<dyn Iterator<Item = Vec<Vec<usize>>>> {
        let identity: Vec<Vec<usize>> = vec![(0..slots).collect(); coefficients];
        let budget = self.cfg.max_perms;
        match self.cfg.perm_seed {
            None => {
                let mut cur = Some(identity);
                Box::new(
                    std::iter::from_fn(move || {
                        let out = cur.clone()?;
                        let mut next = out.clone();
                        cur = advance_odometer(&mut next).then_some(next);
                        Some(out)
                    })
                    .take(budget),
                )
            }
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (solution as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
                let mut first = true;
                Box::new(
                    std::iter::from_fn(move || {
                        let mut perms = identity.clone();
                        if !std::mem::take(&mut first) {
                            perms.iter_mut().for_each(|p| p.shuffle(&mut rng));
                        }
                        Some(perms)
                    })
                    .take(budget),
                )
            }
        }
    }

    fn run(&mut self, k: usize, aux_range: std::ops::RangeInclusive<usize>) -> Result<CompileOutcome, CompileError> {
        let mut aux_tried = Vec::new();
        for n in aux_range {
            if self.cap_hit() {
                break;
            }
            aux_tried.push(n);
            let (inputs, aux_labels) = default_labels(k, n);
            let sets = match &self.cfg.outputs {
                Some(o) => vec![o.clone()],
                None => output_sets(&aux_labels, k),
            };
            let candidates = slot_candidates(self.u, n, self.cfg.seed, self.cfg.max_slot_solutions);
            for outputs in sets {
                if self.cap_hit() {
                    break;
                }
                let candidates = match &candidates {
                    Ok(c) => c,
                    Err(DecomposeError::BoundViolated { .. } | DecomposeError::SingleSlotModulus { .. }) => {
                        self.trials += 1;
                        self.fail(FailureKind::LemmaBound);
                        continue;
                    }
                    Err(e) => return Err(e.clone().into()),
                };
                let vertices: Vec<u32> = inputs.iter().chain(&aux_labels).copied().collect();
                let ix = QubitIndexing::new(&vertices, &inputs, &outputs)?;
                let (slots, _) = slot_geometry(n, k)?;
                for (si, slot_solution) in candidates.iter().enumerate() {
                    for perms in self.assignments(1 << (2 * k), slots, si) {
                        if self.cap_hit() {
                            break;
                        }
                        let record = PlanRecord {
                            inputs: inputs.clone(),
                            outputs: outputs.clone(),
                            aux: n,
                            slot_solution: si,
                            permutations: perms,
                            seed: self.cfg.seed,
                            perm_seed: self.cfg.perm_seed,
                            max_trials: self.cfg.max_trials,
                        };
                        let plan = DecompositionPlan::new(ix.clone(), record.permutations.clone())?;
                        let result = self.evaluate(&record, &plan, slot_solution)?;
                        self.trials += 1;
                        match result {
                            Trial::Done(b) => return Ok(CompileOutcome::Success(b)),
                            Trial::Failed(kind) => self.fail(kind),
                        }
                    }
                }
            }
        }
        let cap_exhausted = self.cap_hit();
        let classification = if cap_exhausted {
            FailureKind::CapExhausted
        } else {
            // the latest stage any candidate reached
            FailureKind::STAGES
                .iter()
                .rev()
                .copied()
                .find(|s| self.failures.get(s).copied().unwrap_or(0) > 0)
                .unwrap_or(FailureKind::CapExhausted)
        };
        Ok(CompileOutcome::Exhausted(ExhaustionReport {
            trials: self.trials,
            failures: self.failures.clone(),
            successes: 0,
            cap_exhausted,
            classification,
            aux_tried,
        }))
    }
}

/// Searches for a plan whose phase map is a graph state with a flow, and
/// returns the verified pattern or a per-stage account of the failures.
pub fn compile(u: &UnitaryMatrix, cfg: &CompileConfig) -> Result<CompileOutcome, CompileError> {
    let k = u.num_qubits();
    let aux = cfg.aux.unwrap_or(2 * k);
    let max_aux = cfg.max_aux.unwrap_or(aux);
    if aux < k || aux == 0 {
        return Err(CompileError::Config(format!("{aux} auxiliaries for {k} inputs; need at least max(1, |I|)")));
    }
    if max_aux < aux {
        return Err(CompileError::Config(format!("max_aux {max_aux} is below aux {aux}")));
    }
    if cfg.max_perms == 0 || cfg.max_trials == 0 || cfg.max_slot_solutions == 0 {
        return Err(CompileError::Config("caps must be positive".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(CompileError::Config("tolerance must be positive".into()));
    }
    if let Some(o) = &cfg.outputs {
        let (inputs, aux_labels) = default_labels(k, aux);
        if o.len() != k {
            return Err(CompileError::Config(format!("{} outputs for {k} inputs", o.len())));
        }
        if let Some(v) = o.iter().find(|v| inputs.contains(v)) {
            return Err(CompileError::Config(format!("output {v} is an input")));
        }
        if let Some(v) = o.iter().find(|v| !aux_labels.contains(v)) {
            return Err(CompileError::Config(format!("output {v} is not an auxiliary label ({:?})", aux_labels)));
        }
    }
    let mut search = Search { u, cfg, failures: BTreeMap::new(), trials: 0 };
    search.run(k, aux..=max_aux)
}

/// The phase map a plan record stands for.
pub fn phase_map_for(u: &UnitaryMatrix, record: &PlanRecord, cap: usize) -> Result<PhaseMapDiagonal, CompileError> {
    let plan = record.plan()?;
    let candidates = slot_candidates(u, record.aux, record.seed, cap.max(record.slot_solution + 1))?;
    let slots = candidates
        .get(record.slot_solution)
        .ok_or_else(|| CompileError::Config(format!("slot solution {} is past the sequence", record.slot_solution)))?;
    Ok(LazyDiagonal::new(&plan, slots)?.materialize()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, C64, ONE};
    use crate::pattern::Command;
    use std::collections::BTreeSet;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4};

    fn j_alpha(a: f64) -> UnitaryMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        UnitaryMatrix::from_rows(vec![vec![h, h * cis(-a)], vec![h, -h * cis(-a)]]).unwrap()
    }

    #[test]
    fn permutation_odometer() {
        let mut p = vec![0, 1, 2];
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 2, 1]);
        let mut perms = vec![vec![0, 1], vec![0, 1]];
        assert!(advance_odometer(&mut perms));
        assert_eq!(perms, vec![vec![0, 1], vec![1, 0]]);
        assert!(advance_odometer(&mut perms));
        assert_eq!(perms, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn output_set_order() {
        assert_eq!(output_sets(&[2, 3, 4], 2), vec![vec![2, 3], vec![2, 4], vec![3, 4]]);
    }

    #[test]
    fn example_one_compiles_first_try() {
        let cfg = CompileConfig { aux: Some(1), outputs: Some(vec![2]), ..Default::default() };
        let CompileOutcome::Success(b) = compile(&j_alpha(FRAC_PI_4), &cfg).unwrap() else {
            panic!("no success");
        };
        assert_eq!(b.trials, 1);
        assert_eq!(b.matched.edges, BTreeSet::from([(1, 2)]));
        assert!((b.matched.angles[&1] - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(b.flow.successor_map(), BTreeMap::from([(1, 2)]));
    }

    #[test]
    fn example_two_compiles_to_the_path() {
        let u = UnitaryMatrix::new(Matrix::diagonal(&[ONE, cis(FRAC_PI_3)])).unwrap();
        let cfg = CompileConfig { aux: Some(2), outputs: Some(vec![3]), ..Default::default() };
        let CompileOutcome::Success(b) = compile(&u, &cfg).unwrap() else {
            panic!("no success");
        };
        assert_eq!(b.matched.edges, BTreeSet::from([(1, 2), (2, 3)]));
        assert!((b.matched.angles[&1] - normalize_angle(-FRAC_PI_3)).abs() < 1e-12);
        assert!(b.matched.angles[&2].abs() < 1e-12);
        assert!(b.pattern.commands.contains(&Command::CorrZ { qubit: 3, signal: 1 }));
        let again = phase_map_for(&u, &b.plan, cfg.max_slot_solutions).unwrap();
        assert_eq!(again, b.phase_map);
    }

    #[test]
    fn one_trial_cap_reports_counts() {
        let u = UnitaryMatrix::from_rows(vec![
            vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            vec![C64::new(0.0, 0.8), C64::new(0.6, 0.0)],
        ])
        .unwrap();
        let cfg = CompileConfig { max_trials: 1, ..Default::default() };
        let CompileOutcome::Exhausted(r) = compile(&u, &cfg).unwrap() else {
            panic!("unexpected success");
        };
        assert_eq!(r.trials, 1);
        assert!(r.cap_exhausted);
        assert_eq!(r.classification, FailureKind::CapExhausted);
        assert_eq!(r.trials, r.failure_total() + r.successes);
    }

    #[test]
    fn bad_config_rejected() {
        let u = j_alpha(0.3);
        let cfg = CompileConfig { outputs: Some(vec![1]), ..Default::default() };
        assert!(matches!(compile(&u, &cfg), Err(CompileError::Config(_))));
        let cfg = CompileConfig { max_trials: 0, ..Default::default() };
        assert!(matches!(compile(&u, &cfg), Err(CompileError::Config(_))));
    }
}
