//! Dense statevector execution of patterns along forced measurement branches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::Geometry;
use crate::linalg::{cis, Matrix, C64, ZERO};
use crate::pattern::{Command, Pattern, Violation};
use crate::types::{CoreError, PhaseMapDiagonal, StateVector, UnitaryMatrix, MATRIX_EQ_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid pattern: {0}")]
    Invalid(#[from] Violation),
    #[error("pattern has {qubits} qubits and {measured} measurements; limits are {max_qubits} and {max_measured}")]
    TooLarge { qubits: usize, measured: usize, max_qubits: usize, max_measured: usize },
    #[error("expected {expected} outcomes, got {got}")]
    OutcomeCount { expected: usize, got: usize },
    #[error("reference matrix is {rows}x{cols}, the pattern maps {inputs} to {outputs} qubits")]
    Dimension { rows: usize, cols: usize, inputs: usize, outputs: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimLimits {
    pub max_qubits: usize,
    pub max_measured: usize,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self { max_qubits: 20, max_measured: 12 }
    }
}

impl SimLimits {
    fn check(&self, p: &Pattern) -> Result<(), SimError> {
        let measured = p.num_measured();
        if p.space.len() > self.max_qubits || measured > self.max_measured {
            return Err(SimError::TooLarge {
                qubits: p.space.len(),
                measured,
                max_qubits: self.max_qubits,
                max_measured: self.max_measured,
            });
        }
        Ok(())
    }
}

/// Working state; `qubits[0]` is the most significant bit.
struct Register {
    qubits: Vec<u32>,
    amps: Vec<C64>,
}

impl Register {
    fn shift(&self, q: u32) -> usize {
        let pos = self.qubits.iter().position(|&x| x == q).expect("qubit present (pattern validated)");
        self.qubits.len() - 1 - pos
    }

    fn prep(&mut self, q: u32) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.amps = self.amps.iter().flat_map(|&a| [a * h, a * h]).collect();
        self.qubits.push(q);
    }

    fn cz(&mut self, a: u32, b: u32) {
        let mask = (1 << self.shift(a)) | (1 << self.shift(b));
        for (k, amp) in self.amps.iter_mut().enumerate() {
            if k & mask == mask {
                *amp = -*amp;
            }
        }
    }

    fn x(&mut self, q: u32) {
        let bit = 1 << self.shift(q);
        for k in 0..self.amps.len() {
            if k & bit == 0 {
                self.amps.swap(k, k | bit);
            }
        }
    }

    fn z(&mut self, q: u32) {
        let bit = 1 << self.shift(q);
        for (k, amp) in self.amps.iter_mut().enumerate() {
            if k & bit != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Applies `<+_angle|` (outcome false) or `<-_angle|` (outcome true) with
    /// `<+-_a| = (<0| +- e^{-ia} <1|) / sqrt 2`, removing the qubit.
    fn measure(&mut self, q: u32, angle: f64, outcome: bool) {
        let s = self.shift(q);
        let low = (1usize << s) - 1;
        let sign = if outcome { -1.0 } else { 1.0 };
        let w = cis(-angle) * (sign * std::f64::consts::FRAC_1_SQRT_2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.amps = (0..self.amps.len() / 2)
            .map(|r| {
                let k0 = ((r & !low) << 1) | (r & low);
                self.amps[k0] * h + self.amps[k0 | (1 << s)] * w
            })
            .collect();
        let pos = self.qubits.len() - 1 - s;
        self.qubits.remove(pos);
    }
}

fn run_unchecked(p: &Pattern, input: &[C64], outcomes: &[bool]) -> Vec<C64> {
    let mut reg = Register { qubits: p.inputs.clone(), amps: input.to_vec() };
    let mut signals: BTreeMap<u32, bool> = BTreeMap::new();
    let mut next = 0;
    for c in &p.commands {
        match *c {
            Command::Prep(q) => reg.prep(q),
            Command::Ent(a, b) => reg.cz(a, b),
            Command::Meas { qubit, angle } => {
                let s = outcomes[next];
                next += 1;
                reg.measure(qubit, angle, s);
                signals.insert(qubit, s);
            }
            Command::CorrX { qubit, signal } => {
                if signals[&signal] {
                    reg.x(qubit);
                }
            }
            Command::CorrZ { qubit, signal } => {
                if signals[&signal] {
                    reg.z(qubit);
                }
            }
        }
    }
    // reorder to ascending output labels
    let mut sorted = reg.qubits.clone();
    sorted.sort_unstable();
    if sorted == reg.qubits {
        return reg.amps;
    }
    let m = sorted.len();
    let src_shift: Vec<usize> = sorted.iter().map(|&q| reg.shift(q)).collect();
    (0..reg.amps.len())
        .map(|k| {
            let src = (0..m).fold(0, |acc, j| acc | (((k >> (m - 1 - j)) & 1) << src_shift[j]));
            reg.amps[src]
        })
        .collect()
}

/// Runs one branch on an input state labelled by the sorted inputs. The
/// result is labelled by the sorted outputs and is not renormalized.
pub fn run_branch(p: &Pattern, input: &StateVector, outcomes: &[bool]) -> Result<StateVector, SimError> {
    p.validate()?;
    let mut inputs = p.inputs.clone();
    inputs.sort_unstable();
    if input.labels() != inputs {
        return Err(CoreError::LabelMismatch { expected: inputs, got: input.labels().to_vec() }.into());
    }
    let measured = p.num_measured();
    if outcomes.len() != measured {
        return Err(SimError::OutcomeCount { expected: measured, got: outcomes.len() });
    }
    let mut outputs = p.outputs.clone();
    outputs.sort_unstable();
    let canonical = Pattern { inputs, ..p.clone() };
    Ok(StateVector::new(outputs, run_unchecked(&canonical, input.amplitudes(), outcomes))?)
}

/// The linear map `H_I -> H_O` along one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchMap {
    /// outcome per measurement, in measurement order
    pub outcomes: Vec<bool>,
    pub map: Matrix,
}

/// Outcome bits of branch `index`; the first measurement is the most
/// significant bit.
pub fn branch_outcomes(index: usize, measured: usize) -> Vec<bool> {
    (0..measured).map(|j| (index >> (measured - 1 - j)) & 1 == 1).collect()
}

fn branch_matrix(p: &Pattern, outcomes: &[bool]) -> Matrix {
    let (k_in, k_out) = (p.inputs.len(), p.outputs.len());
    let mut m = Matrix::zeros(1 << k_out, 1 << k_in);
    let mut basis = vec![ZERO; 1 << k_in];
    for q in 0..1usize << k_in {
        basis[q] = C64::new(1.0, 0.0);
        m.set_column(q, &run_unchecked(p, &basis, outcomes));
        basis[q] = ZERO;
    }
    m
}

fn sorted_io(p: &Pattern) -> Pattern {
    let mut q = p.clone();
    q.inputs.sort_unstable();
    q.outputs.sort_unstable();
    q
}

/// All `2^{|O^c|}` branch maps, built column by column.
pub fn branch_maps(p: &Pattern, limits: SimLimits) -> Result<Vec<BranchMap>, SimError> {
    p.validate()?;
    limits.check(p)?;
    let p = sorted_io(p);
    let measured = p.num_measured();
    Ok((0..1usize << measured)
        .map(|s| {
            let outcomes = branch_outcomes(s, measured);
            let map = branch_matrix(&p, &outcomes);
            BranchMap { outcomes, map }
        })
        .collect())
}

/// The all-zero-outcome branch map.
pub fn positive_branch(p: &Pattern, limits: SimLimits) -> Result<Matrix, SimError> {
    p.validate()?;
    limits.check(p)?;
    let p = sorted_io(p);
    Ok(branch_matrix(&p, &vec![false; p.num_measured()]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub deterministic: bool,
    /// largest entrywise distance of any branch map from the positive one
    pub max_branch_discrepancy: f64,
    pub matches_unitary: bool,
    /// largest entrywise distance of `2^{|O^c|/2}` times the positive branch
    /// from the reference
    pub max_entry_error: f64,
}

impl VerificationReport {
    pub fn success(&self) -> bool {
        self.deterministic && self.matches_unitary
    }
}

/// Determinism across all branches and agreement of the scaled positive
/// branch with `reference`, both at tolerance `tol`.
pub fn check_against_matrix(p: &Pattern, reference: &Matrix, tol: f64, limits: SimLimits) -> Result<VerificationReport, SimError> {
    let (k_in, k_out) = (p.inputs.len(), p.outputs.len());
    if reference.rows() != 1 << k_out || reference.cols() != 1 << k_in {
        return Err(SimError::Dimension { rows: reference.rows(), cols: reference.cols(), inputs: k_in, outputs: k_out });
    }
    let maps = branch_maps(p, limits)?;
    let positive = &maps[0].map;
    let max_branch_discrepancy = maps.iter().map(|b| b.map.max_abs_diff(positive)).fold(0.0, f64::max);
    let scale = 2f64.powf(p.num_measured() as f64 / 2.0);
    let max_entry_error = positive.scale(C64::new(scale, 0.0)).max_abs_diff(reference);
    Ok(VerificationReport {
        deterministic: max_branch_discrepancy < tol,
        max_branch_discrepancy,
        matches_unitary: max_entry_error < tol,
        max_entry_error,
    })
}

/// [`check_against_matrix`] at the default tolerance.
pub fn check_deterministic_and_equal(p: &Pattern, u: &UnitaryMatrix) -> Result<VerificationReport, SimError> {
    check_against_matrix(p, u.matrix(), MATRIX_EQ_TOL, SimLimits::default())
}

/// `e^{-i sum_j a_j x_j} (-1)^{sum_{jk in E} x_j x_k}` over the geometry's
/// sorted labels, the smallest label being the most significant bit.
pub fn positive_branch_phase_map(g: &Geometry, angles: &BTreeMap<u32, f64>) -> Result<PhaseMapDiagonal, CoreError> {
    let n = g.num_vertices();
    if n > 30 {
        return Err(CoreError::QubitCount { expected: 30, got: n });
    }
    let shift = |label: u32| n - 1 - g.index_of(label).expect("edge endpoint is a vertex");
    let angle_terms: Vec<(usize, f64)> = angles
        .iter()
        .filter_map(|(&v, &a)| g.index_of(v).filter(|&i| !g.is_output(i)).map(|_| (shift(v), a)))
        .collect();
    let edge_masks: Vec<usize> = g.edges().iter().map(|&(a, b)| (1 << shift(a)) | (1 << shift(b))).collect();
    let diagonal = (0..1usize << n)
        .map(|x| {
            let theta: f64 = angle_terms.iter().filter(|(s, _)| (x >> s) & 1 == 1).map(|(_, a)| a).sum();
            let parity = edge_masks.iter().filter(|&&m| x & m == m).count() % 2;
            let d = cis(-theta);
            if parity == 1 {
                -d
            } else {
                d
            }
        })
        .collect();
    PhaseMapDiagonal::new(diagonal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::find_flow;
    use crate::linalg::ONE;
    use crate::pattern::synthesize;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4};

    fn j_alpha_matrix(a: f64) -> Matrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Matrix::from_rows(vec![vec![h, h * cis(a)], vec![h, -h * cis(a)]]).unwrap()
    }

    fn j_alpha_pattern(a: f64) -> Pattern {
        let g = Geometry::new(&[1, 2], [(1, 2)], [1], [2]).unwrap();
        synthesize(&g, &find_flow(&g).unwrap(), &BTreeMap::from([(1, a)])).unwrap()
    }

    fn z_alpha_pattern(a: f64) -> Pattern {
        let g = Geometry::new(&[1, 2, 3], [(1, 2), (2, 3)], [1], [3]).unwrap();
        synthesize(&g, &find_flow(&g).unwrap(), &BTreeMap::from([(1, -a), (2, 0.0)])).unwrap()
    }

    #[test]
    fn j_alpha_branches() {
        let a = FRAC_PI_4;
        let p = j_alpha_pattern(a);
        let expected = j_alpha_matrix(-a).scale(C64::new(FRAC_1_SQRT_2, 0.0));
        let maps = branch_maps(&p, SimLimits::default()).unwrap();
        assert_eq!(maps.len(), 2);
        for b in &maps {
            assert!(b.map.approx_eq(&expected, 1e-12), "{:?}", b.map);
        }
        let zero = StateVector::basis(vec![1], 0).unwrap();
        for s in [false, true] {
            let out = run_branch(&p, &zero, &[s]).unwrap();
            // column 0 of J / sqrt 2
            assert!(out.amplitudes().iter().all(|x| (x - C64::new(0.5, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn z_alpha_branches() {
        let a = FRAC_PI_3;
        let p = z_alpha_pattern(a);
        let u = UnitaryMatrix::new(Matrix::diagonal(&[ONE, cis(a)])).unwrap();
        let maps = branch_maps(&p, SimLimits::default()).unwrap();
        assert_eq!(maps.len(), 4);
        let r = check_deterministic_and_equal(&p, &u).unwrap();
        assert!(r.deterministic && r.matches_unitary, "{r:?}");
    }

    #[test]
    fn dropping_the_x_before_a_zero_angle_measurement_flips_a_branch_sign() {
        let a = FRAC_PI_3;
        let mut p = z_alpha_pattern(a);
        p.commands.retain(|c| *c != Command::CorrX { qubit: 2, signal: 1 });
        let maps = branch_maps(&p, SimLimits::default()).unwrap();
        let positive = &maps[0].map;
        for b in &maps {
            let both = b.outcomes == [true, true];
            let target = if both { positive.scale(C64::new(-1.0, 0.0)) } else { positive.clone() };
            assert!(b.map.approx_eq(&target, 1e-12), "{:?}", b.outcomes);
        }
    }

    #[test]
    fn perturbed_reference_is_deterministic_but_unequal() {
        let p = j_alpha_pattern(0.7);
        let r = check_against_matrix(&p, &j_alpha_matrix(-0.8), MATRIX_EQ_TOL, SimLimits::default()).unwrap();
        assert!(r.deterministic && !r.matches_unitary);
    }

    #[test]
    fn uncorrected_pattern_is_not_deterministic() {
        let p = Pattern {
            space: vec![1, 2],
            inputs: vec![1],
            outputs: vec![2],
            commands: vec![Command::Prep(2), Command::Ent(1, 2), Command::Meas { qubit: 1, angle: 0.0 }],
        };
        let maps = branch_maps(&p, SimLimits::default()).unwrap();
        assert!(maps[0].map.max_abs_diff(&maps[1].map) > 0.1);
    }

    #[test]
    fn entangler_only_pattern_preserves_norm() {
        let p = Pattern { space: vec![1, 2], inputs: vec![1, 2], outputs: vec![1, 2], commands: vec![Command::Ent(1, 2)] };
        let input = StateVector::new(vec![1, 2], vec![C64::new(0.5, 0.0); 4]).unwrap();
        let out = run_branch(&p, &input, &[]).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert!((out.amplitudes()[3] + C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_maps_of_the_examples() {
        let a = 0.9;
        let g = Geometry::new(&[1, 2], [(1, 2)], [1], [2]).unwrap();
        let d = positive_branch_phase_map(&g, &BTreeMap::from([(1, a)])).unwrap();
        let expect = [ONE, ONE, cis(-a), -cis(-a)];
        assert!(d.entries().iter().zip(expect).all(|(x, y)| (x - y).norm() < 1e-12));

        let g = Geometry::new(&[1, 2, 3], [(1, 2), (2, 3)], [1], [3]).unwrap();
        let d = positive_branch_phase_map(&g, &BTreeMap::from([(1, -a), (2, 0.0)])).unwrap();
        let e = cis(a);
        let expect = [ONE, ONE, ONE, -ONE, e, e, -e, e];
        assert!(d.entries().iter().zip(expect).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn limits_enforced() {
        let p = j_alpha_pattern(0.1);
        let tight = SimLimits { max_qubits: 20, max_measured: 0 };
        assert!(matches!(branch_maps(&p, tight), Err(SimError::TooLarge { .. })));
    }
}
