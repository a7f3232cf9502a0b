//! Domain values shared by every stage of the compiler.
//!
//! Basis convention: for a set of qubit labels sorted ascending, the smallest
//! label is the most significant bit of a computational-basis index. With
//! labels `{1, 2, 3}` the index `0b100` is the string `x1 = 1, x2 = 0, x3 = 0`.

use std::cell::Cell;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::linalg::{Matrix, C64};

pub const UNITARY_TOL: f64 = 1e-10;
pub const UNIT_MODULUS_TOL: f64 = 1e-10;
pub const MATRIX_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("matrix is not unitary (max deviation from identity {0:.3e})")]
    NotUnitary(f64),
    #[error("diagonal entry {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error("expected {expected} amplitudes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("duplicate qubit label {0}")]
    DuplicateLabel(u32),
    #[error("qubit labels must be positive")]
    ZeroLabel,
    #[error("label {0} is not part of the computation space")]
    UnknownLabel(u32),
    #[error("state is defined on {got:?}, expected {expected:?}")]
    LabelMismatch { expected: Vec<u32>, got: Vec<u32> },
    #[error("phase map has {got} qubits, the computation space has {expected}")]
    QubitCount { expected: usize, got: usize },
}

/// Checks `dim == 2^k` and returns `k`.
pub fn log2_exact(dim: usize) -> Result<usize, CoreError> {
    if dim.is_power_of_two() {
        Ok(dim.trailing_zeros() as usize)
    } else {
        Err(CoreError::NotPowerOfTwo(dim))
    }
}

/// Dense unitary on `num_qubits` qubits. Rows index outputs, columns inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    num_qubits: usize,
    matrix: Matrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: Matrix) -> Result<Self, CoreError> {
        let dim = matrix.rows();
        if matrix.cols() != dim {
            return Err(CoreError::Shape { expected: dim, rows: matrix.rows(), cols: matrix.cols() });
        }
        let num_qubits = log2_exact(dim)?;
        if num_qubits == 0 {
            return Err(CoreError::NotPowerOfTwo(1));
        }
        let dev = (&matrix * &matrix.adjoint()).max_abs_diff(&Matrix::identity(dim));
        if !(dev < UNITARY_TOL) {
            return Err(CoreError::NotUnitary(dev));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, CoreError> {
        let n = rows.len();
        let m = Matrix::from_rows(rows).ok_or(CoreError::Shape { expected: n, rows: n, cols: 0 })?;
        Self::new(m)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `<p|U|q>`
    #[inline]
    pub fn coefficient(&self, p: usize, q: usize) -> C64 {
        self.matrix.get(p, q)
    }
}

/// Computation space `V` with its input and output subsets.
///
/// All three label lists are stored sorted, which fixes the bit position of
/// every label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitIndexing {
    vertices: Vec<u32>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
}

impl QubitIndexing {
    pub fn new(vertices: &[u32], inputs: &[u32], outputs: &[u32]) -> Result<Self, CoreError> {
        let vertices = sorted_distinct(vertices)?;
        if vertices.first() == Some(&0) {
            return Err(CoreError::ZeroLabel);
        }
        let inputs = sorted_distinct(inputs)?;
        let outputs = sorted_distinct(outputs)?;
        for &l in inputs.iter().chain(&outputs) {
            if vertices.binary_search(&l).is_err() {
                return Err(CoreError::UnknownLabel(l));
            }
        }
        Ok(Self { vertices, inputs, outputs })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    pub fn num_qubits(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_input(&self, label: u32) -> bool {
        self.inputs.binary_search(&label).is_ok()
    }

    pub fn is_output(&self, label: u32) -> bool {
        self.outputs.binary_search(&label).is_ok()
    }

    /// `I^c`, sorted.
    pub fn non_inputs(&self) -> Vec<u32> {
        self.vertices.iter().copied().filter(|&v| !self.is_input(v)).collect()
    }

    /// `O^c`, sorted.
    pub fn non_outputs(&self) -> Vec<u32> {
        self.vertices.iter().copied().filter(|&v| !self.is_output(v)).collect()
    }

    pub fn io_disjoint(&self) -> bool {
        self.inputs.iter().all(|&i| !self.is_output(i))
    }

    /// Bit shift of `label` inside a `V`-index.
    pub fn shift(&self, label: u32) -> Option<u32> {
        let pos = self.vertices.binary_search(&label).ok()?;
        Some((self.vertices.len() - 1 - pos) as u32)
    }

    /// Shifts for a list of labels, in the given (most significant first) order.
    pub fn shifts(&self, labels: &[u32]) -> Vec<u32> {
        labels.iter().map(|&l| self.shift(l).expect("label belongs to V")).collect()
    }
}

fn sorted_distinct(labels: &[u32]) -> Result<Vec<u32>, CoreError> {
    let mut seen = BTreeSet::new();
    for &l in labels {
        if !seen.insert(l) {
            return Err(CoreError::DuplicateLabel(l));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Collects the bits of `index` at `shifts` into a packed integer, first shift
/// most significant.
#[inline]
pub fn gather_bits(index: usize, shifts: &[u32]) -> usize {
    shifts.iter().fold(0, |acc, &s| (acc << 1) | ((index >> s) & 1))
}

/// Inverse of [`gather_bits`]: spreads `packed` onto `shifts`.
#[inline]
pub fn scatter_bits(packed: usize, shifts: &[u32]) -> usize {
    let n = shifts.len();
    shifts.iter().enumerate().fold(0, |acc, (i, &s)| acc | (((packed >> (n - 1 - i)) & 1) << s))
}

/// Random-access view of a phase-map diagonal.
///
/// Graph matching reads entries through this trait so that a diagonal can be
/// produced lazily and abandoned after a handful of queries.
pub trait DiagonalSource {
    fn num_qubits(&self) -> usize;
    fn entry(&self, index: usize) -> C64;
}

/// Diagonal of unit-modulus entries, length `2^num_qubits`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMapDiagonal {
    num_qubits: usize,
    diagonal: Vec<C64>,
}

impl PhaseMapDiagonal {
    pub fn new(diagonal: Vec<C64>) -> Result<Self, CoreError> {
        let num_qubits = log2_exact(diagonal.len())?;
        if let Some((index, d)) =
            diagonal.iter().enumerate().find(|(_, d)| !((d.norm() - 1.0).abs() < UNIT_MODULUS_TOL))
        {
            return Err(CoreError::NotUnitModulus { index, modulus: d.norm() });
        }
        Ok(Self { num_qubits, diagonal })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.diagonal
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.num_qubits != other.num_qubits {
            return f64::INFINITY;
        }
        self.diagonal.iter().zip(&other.diagonal).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl DiagonalSource for PhaseMapDiagonal {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn entry(&self, index: usize) -> C64 {
        self.diagonal[index]
    }
}

/// Wraps a diagonal and counts entry reads.
pub struct CountingDiagonal<'a, D: ?Sized> {
    inner: &'a D,
    reads: Cell<usize>,
}

impl<'a, D: DiagonalSource + ?Sized> CountingDiagonal<'a, D> {
    pub fn new(inner: &'a D) -> Self {
        Self { inner, reads: Cell::new(0) }
    }

    pub fn reads(&self) -> usize {
        self.reads.get()
    }
}

impl<D: DiagonalSource + ?Sized> DiagonalSource for CountingDiagonal<'_, D> {
    fn num_qubits(&self) -> usize {
        self.inner.num_qubits()
    }

    fn entry(&self, index: usize) -> C64 {
        self.reads.set(self.reads.get() + 1);
        self.inner.entry(index)
    }
}

/// Un-normalized pure state on an ordered list of qubit labels; the first
/// label is the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    labels: Vec<u32>,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(labels: Vec<u32>, amplitudes: Vec<C64>) -> Result<Self, CoreError> {
        sorted_distinct(&labels)?;
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(CoreError::Length { expected, got: amplitudes.len() });
        }
        Ok(Self { labels, amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(labels: Vec<u32>, index: usize) -> Result<Self, CoreError> {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << labels.len()];
        let len = amplitudes.len();
        *amplitudes.get_mut(index).ok_or(CoreError::Length { expected: len, got: index })? = C64::new(1.0, 0.0);
        Self::new(labels, amplitudes)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn into_parts(self) -> (Vec<u32>, Vec<C64>) {
        (self.labels, self.amplitudes)
    }
}
