//! Phase map decompositions `U = R . Phi . P`.
//!
//! Every coefficient `u_pq` of `U` is split into slot terms (see [`slots`]),
//! and each slot term lands on the diagonal entry whose output bits spell `p`,
//! whose input bits spell `q`, and whose remaining (free) bits pick the slot
//! through a per-coefficient permutation.

pub mod slots;

use thiserror::Error;

use crate::linalg::C64;
use crate::maps::compose_rphip;
use crate::types::{
    gather_bits, CoreError, DiagonalSource, PhaseMapDiagonal, QubitIndexing, UnitaryMatrix, MATRIX_EQ_TOL,
};

pub use slots::{random_slots, slot_geometry, slot_residuals, solve_slots};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("no joint solution: |u| = {modulus} exceeds the bound {bound}")]
    BoundViolated { modulus: f64, bound: f64 },
    #[error("a single slot needs |u| = {required}, got {modulus}")]
    SingleSlotModulus { modulus: f64, required: f64 },
    #[error("{aux} auxiliary qubits is fewer than the {inputs} inputs")]
    TooFewAuxiliaries { aux: usize, inputs: usize },
    #[error("inputs and outputs must be disjoint")]
    OverlappingIo,
    #[error("{inputs} inputs but {outputs} outputs")]
    UnequalIo { inputs: usize, outputs: usize },
    #[error("unitary acts on {unitary} qubits but the plan has {inputs} inputs")]
    UnitarySize { unitary: usize, inputs: usize },
    #[error("bad slot permutation for coefficient {coefficient}")]
    BadPermutation { coefficient: usize },
    #[error("expected {expected} slot solutions of {slots} terms each")]
    SlotTable { expected: usize, slots: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// The terms that sum into coefficient `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotSolution {
    pub output: usize,
    pub input: usize,
    pub terms: Vec<C64>,
}

/// A fixed choice of computation space and per-coefficient slot permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionPlan {
    indexing: QubitIndexing,
    aux: usize,
    slots: usize,
    /// indexed by `p * 2^|I| + q`; maps a slot index to a term index
    permutations: Vec<Vec<usize>>,
}

impl DecompositionPlan {
    /// Plan with identity permutations.
    pub fn identity(indexing: QubitIndexing) -> Result<Self, DecomposeError> {
        let (coefficients, slots) = Self::shape(&indexing)?;
        let permutations = vec![(0..slots).collect(); coefficients];
        Self::new(indexing, permutations)
    }

    pub fn new(indexing: QubitIndexing, permutations: Vec<Vec<usize>>) -> Result<Self, DecomposeError> {
        let (coefficients, slots) = Self::shape(&indexing)?;
        if permutations.len() != coefficients {
            return Err(DecomposeError::BadPermutation { coefficient: permutations.len().min(coefficients) });
        }
        for (c, perm) in permutations.iter().enumerate() {
            let mut seen = vec![false; slots];
            if perm.len() != slots || !perm.iter().all(|&i| i < slots && !std::mem::replace(&mut seen[i], true)) {
                return Err(DecomposeError::BadPermutation { coefficient: c });
            }
        }
        let aux = indexing.num_qubits() - indexing.inputs().len();
        Ok(Self { indexing, aux, slots, permutations })
    }

    /// Number of coefficients and slots per coefficient.
    fn shape(indexing: &QubitIndexing) -> Result<(usize, usize), DecomposeError> {
        let k = indexing.inputs().len();
        if indexing.outputs().len() != k {
            return Err(DecomposeError::UnequalIo { inputs: k, outputs: indexing.outputs().len() });
        }
        if !indexing.io_disjoint() {
            return Err(DecomposeError::OverlappingIo);
        }
        let (slots, _) = slot_geometry(indexing.num_qubits() - k, k)?;
        Ok((1 << (2 * k), slots))
    }

    pub fn indexing(&self) -> &QubitIndexing {
        &self.indexing
    }

    /// Number of auxiliary qubits `n = |I^c|`.
    pub fn aux(&self) -> usize {
        self.aux
    }

    /// Slots per coefficient, `2^{n - |I|}`.
    pub fn slots_per_coefficient(&self) -> usize {
        self.slots
    }

    pub fn num_coefficients(&self) -> usize {
        self.permutations.len()
    }

    pub fn permutation(&self, p: usize, q: usize) -> &[usize] {
        &self.permutations[p * (1 << self.indexing.inputs().len()) + q]
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.permutations
    }
}

/// Canonical slot solutions for every coefficient of `u`, ordered
/// `p * 2^|I| + q`.
pub fn canonical_slots(u: &UnitaryMatrix, plan: &DecompositionPlan) -> Result<Vec<SlotSolution>, DecomposeError> {
    check_unitary_size(u, plan)?;
    let k = plan.indexing.inputs().len();
    let mut out = Vec::with_capacity(plan.num_coefficients());
    for p in 0..1 << k {
        for q in 0..1 << k {
            let terms = solve_slots(u.coefficient(p, q), plan.aux, k)?;
            out.push(SlotSolution { output: p, input: q, terms });
        }
    }
    Ok(out)
}

fn check_unitary_size(u: &UnitaryMatrix, plan: &DecompositionPlan) -> Result<(), DecomposeError> {
    let inputs = plan.indexing.inputs().len();
    if u.num_qubits() != inputs {
        return Err(DecomposeError::UnitarySize { unitary: u.num_qubits(), inputs });
    }
    Ok(())
}

/// Diagonal entries computed on demand from a plan and its slot solutions.
pub struct LazyDiagonal<'a> {
    plan: &'a DecompositionPlan,
    slots: &'a [SlotSolution],
    out_shifts: Vec<u32>,
    in_shifts: Vec<u32>,
    free_shifts: Vec<u32>,
    scale: f64,
}

impl<'a> LazyDiagonal<'a> {
    pub fn new(plan: &'a DecompositionPlan, slots: &'a [SlotSolution]) -> Result<Self, DecomposeError> {
        let per = plan.slots_per_coefficient();
        if slots.len() != plan.num_coefficients() || slots.iter().any(|s| s.terms.len() != per) {
            return Err(DecomposeError::SlotTable { expected: plan.num_coefficients(), slots: per });
        }
        let ix = &plan.indexing;
        let free: Vec<u32> =
            ix.vertices().iter().copied().filter(|&v| !ix.is_input(v) && !ix.is_output(v)).collect();
        Ok(Self {
            plan,
            slots,
            out_shifts: ix.shifts(ix.outputs()),
            in_shifts: ix.shifts(ix.inputs()),
            free_shifts: ix.shifts(&free),
            scale: 2f64.powf(plan.aux as f64 / 2.0),
        })
    }

    /// `(p(k), q(k), slot(k))` for a diagonal index.
    pub fn split_index(&self, k: usize) -> (usize, usize, usize) {
        (gather_bits(k, &self.out_shifts), gather_bits(k, &self.in_shifts), gather_bits(k, &self.free_shifts))
    }

    pub fn materialize(&self) -> Result<PhaseMapDiagonal, DecomposeError> {
        let n = self.num_qubits();
        Ok(PhaseMapDiagonal::new((0..1usize << n).map(|k| self.entry(k)).collect())?)
    }
}

impl DiagonalSource for LazyDiagonal<'_> {
    fn num_qubits(&self) -> usize {
        self.plan.indexing.num_qubits()
    }

    fn entry(&self, k: usize) -> C64 {
        let (p, q, slot) = self.split_index(k);
        let c = (p << self.in_shifts.len()) | q;
        self.slots[c].terms[self.plan.permutations[c][slot]] * self.scale
    }
}

/// `d_kk = sqrt(2^n) x_{p(k) q(k)}^{(sigma_pq(slot(k)))}` for every `k`.
pub fn enumerate_diagonal(
    u: &UnitaryMatrix,
    plan: &DecompositionPlan,
    slots: &[SlotSolution],
) -> Result<PhaseMapDiagonal, DecomposeError> {
    check_unitary_size(u, plan)?;
    LazyDiagonal::new(plan, slots)?.materialize()
}

/// Largest entrywise distance between `R . Phi . P` and `U`.
pub fn decomposition_error(u: &UnitaryMatrix, phi: &PhaseMapDiagonal, indexing: &QubitIndexing) -> f64 {
    match compose_rphip(indexing, phi) {
        Ok(m) => m.max_abs_diff(u.matrix()),
        Err(_) => f64::INFINITY,
    }
}

/// `true` iff `R . Phi . P` matches `U` within `1e-9`.
pub fn verify_decomposition(u: &UnitaryMatrix, phi: &PhaseMapDiagonal, indexing: &QubitIndexing) -> bool {
    decomposition_error(u, phi, indexing) < MATRIX_EQ_TOL
}
