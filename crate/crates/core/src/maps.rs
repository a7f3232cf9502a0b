//! Preparation and restriction maps, and the `R . Phi . P` composition.

use crate::linalg::{Matrix, C64};
use crate::types::{gather_bits, CoreError, PhaseMapDiagonal, QubitIndexing, StateVector};

fn expect_labels(state: &StateVector, expected: &[u32]) -> Result<(), CoreError> {
    if state.labels() != expected {
        return Err(CoreError::LabelMismatch { expected: expected.to_vec(), got: state.labels().to_vec() });
    }
    Ok(())
}

/// `|x> -> |x> (x) |+...+>` on the non-inputs. The state must be labelled by
/// the sorted inputs; the result is labelled by the sorted vertices.
pub fn apply_preparation(state: &StateVector, indexing: &QubitIndexing) -> Result<StateVector, CoreError> {
    expect_labels(state, indexing.inputs())?;
    let in_shifts = indexing.shifts(indexing.inputs());
    let aux = indexing.num_qubits() - indexing.inputs().len();
    let amp = 0.5f64.powf(aux as f64 / 2.0);
    let amps = state.amplitudes();
    let out = (0..1usize << indexing.num_qubits()).map(|k| amps[gather_bits(k, &in_shifts)] * amp).collect();
    StateVector::new(indexing.vertices().to_vec(), out)
}

/// Projects every non-output onto `<+|`. This is the adjoint of
/// [`apply_preparation`] with the roles of inputs and outputs exchanged.
pub fn apply_restriction(state: &StateVector, indexing: &QubitIndexing) -> Result<StateVector, CoreError> {
    expect_labels(state, indexing.vertices())?;
    let out_shifts = indexing.shifts(indexing.outputs());
    let dropped = indexing.num_qubits() - indexing.outputs().len();
    let amp = 0.5f64.powf(dropped as f64 / 2.0);
    let mut out = vec![C64::new(0.0, 0.0); 1 << indexing.outputs().len()];
    for (k, &a) in state.amplitudes().iter().enumerate() {
        out[gather_bits(k, &out_shifts)] += a * amp;
    }
    StateVector::new(indexing.outputs().to_vec(), out)
}

/// The `2^|O| x 2^|I|` matrix `R . Phi . P`, built one input basis state at a
/// time.
///
/// Here `R` is the summing restriction `2^{|O^c|/2} <+...+|`, so that a phase
/// map whose slot values satisfy the decomposition equations reproduces the
/// unitary exactly.
pub fn compose_rphip(indexing: &QubitIndexing, phi: &PhaseMapDiagonal) -> Result<Matrix, CoreError> {
    if phi.num_qubits() != indexing.num_qubits() {
        return Err(CoreError::QubitCount { expected: indexing.num_qubits(), got: phi.num_qubits() });
    }
    let n_in = indexing.inputs().len();
    let n_out = indexing.outputs().len();
    let scale = 2f64.powf((indexing.num_qubits() - n_out) as f64 / 2.0);
    let mut m = Matrix::zeros(1 << n_out, 1 << n_in);
    for q in 0..1usize << n_in {
        let basis = StateVector::basis(indexing.inputs().to_vec(), q)?;
        let prepared = apply_preparation(&basis, indexing)?;
        let (labels, mut amps) = prepared.into_parts();
        for (a, d) in amps.iter_mut().zip(phi.entries()) {
            *a *= d;
        }
        let restricted = apply_restriction(&StateVector::new(labels, amps)?, indexing)?;
        let column: Vec<C64> = restricted.amplitudes().iter().map(|&a| a * scale).collect();
        m.set_column(q, &column);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, ONE, ZERO};

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-12)
    }

    #[test]
    fn preparation_one_auxiliary() {
        let ix = QubitIndexing::new(&[1, 2], &[1], &[2]).unwrap();
        let out = apply_preparation(&StateVector::basis(vec![1], 0).unwrap(), &ix).unwrap();
        assert!(close(out.amplitudes(), &[C64::new(S, 0.0), C64::new(S, 0.0), ZERO, ZERO]));
    }

    #[test]
    fn preparation_two_auxiliaries() {
        let ix = QubitIndexing::new(&[1, 2, 3], &[1], &[3]).unwrap();
        let out = apply_preparation(&StateVector::basis(vec![1], 1).unwrap(), &ix).unwrap();
        let h = C64::new(0.5, 0.0);
        assert!(close(out.amplitudes(), &[ZERO, ZERO, ZERO, ZERO, h, h, h, h]));
    }

    #[test]
    fn preparation_without_auxiliaries_is_identity() {
        let ix = QubitIndexing::new(&[1, 2], &[1, 2], &[1, 2]).unwrap();
        let s = StateVector::new(vec![1, 2], vec![ONE, cis(0.2), ZERO, C64::new(0.3, -0.1)]).unwrap();
        assert_eq!(apply_preparation(&s, &ix).unwrap(), s);
        assert_eq!(apply_restriction(&s, &ix).unwrap(), s);
    }

    #[test]
    fn preparation_rejects_wrong_labels() {
        let ix = QubitIndexing::new(&[1, 2], &[1], &[2]).unwrap();
        let s = StateVector::basis(vec![2], 0).unwrap();
        assert!(matches!(apply_preparation(&s, &ix), Err(CoreError::LabelMismatch { .. })));
        assert!(matches!(apply_restriction(&s, &ix), Err(CoreError::LabelMismatch { .. })));
    }

    #[test]
    fn restriction_of_plus_factor() {
        // (|00> + |01>)/sqrt2 with O = {1}
        let ix = QubitIndexing::new(&[1, 2], &[2], &[1]).unwrap();
        let s = StateVector::new(vec![1, 2], vec![C64::new(S, 0.0), C64::new(S, 0.0), ZERO, ZERO]).unwrap();
        let out = apply_restriction(&s, &ix).unwrap();
        assert!(close(out.amplitudes(), &[ONE, ZERO]));
    }

    #[test]
    fn restriction_of_basis_state() {
        let ix = QubitIndexing::new(&[1, 2], &[1], &[2]).unwrap();
        let out = apply_restriction(&StateVector::basis(vec![1, 2], 3).unwrap(), &ix).unwrap();
        assert!(close(out.amplitudes(), &[ZERO, C64::new(S, 0.0)]));
    }

    #[test]
    fn restriction_after_preparation_is_identity_when_io_coincide() {
        let ix = QubitIndexing::new(&[1, 2, 3, 4], &[2, 4], &[2, 4]).unwrap();
        for q in 0..4 {
            let s = StateVector::basis(vec![2, 4], q).unwrap();
            let back = apply_restriction(&apply_preparation(&s, &ix).unwrap(), &ix).unwrap();
            assert!(close(back.amplitudes(), s.amplitudes()));
        }
    }

    #[test]
    fn preparation_spreads_evenly() {
        let ix = QubitIndexing::new(&[1, 2, 3, 5], &[3], &[5]).unwrap();
        for q in 0..2 {
            let out = apply_preparation(&StateVector::basis(vec![3], q).unwrap(), &ix).unwrap();
            let nonzero: Vec<_> = out.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
            assert_eq!(nonzero.len(), 8);
            assert!(nonzero.iter().all(|a| (a.norm() - 0.5f64.powf(1.5)).abs() < 1e-15));
            assert!((out.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn compose_example_one() {
        let alpha = 0.7;
        let ix = QubitIndexing::new(&[1, 2], &[1], &[2]).unwrap();
        let phi = PhaseMapDiagonal::new(vec![ONE, ONE, cis(-alpha), -cis(-alpha)]).unwrap();
        let m = compose_rphip(&ix, &phi).unwrap();
        let j = Matrix::from_rows(vec![vec![ONE, cis(-alpha)], vec![ONE, -cis(-alpha)]]).unwrap().scale(C64::new(S, 0.0));
        assert!(m.approx_eq(&j, 1e-12), "{m:?}");
    }

    #[test]
    fn compose_example_two() {
        let a = 1.1;
        let e = cis(a);
        let ix = QubitIndexing::new(&[1, 2, 3], &[1], &[3]).unwrap();
        let phi = PhaseMapDiagonal::new(vec![ONE, ONE, ONE, -ONE, e, e, -e, e]).unwrap();
        let m = compose_rphip(&ix, &phi).unwrap();
        assert!(m.approx_eq(&Matrix::diagonal(&[ONE, e]), 1e-12), "{m:?}");
    }

    #[test]
    fn compose_identity_diagonal() {
        let ix = QubitIndexing::new(&[1, 2, 3], &[1, 2, 3], &[1, 2, 3]).unwrap();
        let phi = PhaseMapDiagonal::new(vec![ONE; 8]).unwrap();
        assert!(compose_rphip(&ix, &phi).unwrap().approx_eq(&Matrix::identity(8), 1e-14));
    }

    #[test]
    fn compose_checks_size() {
        let ix = QubitIndexing::new(&[1, 2], &[1], &[2]).unwrap();
        let phi = PhaseMapDiagonal::new(vec![ONE; 8]).unwrap();
        assert_eq!(compose_rphip(&ix, &phi), Err(CoreError::QubitCount { expected: 2, got: 3 }));
    }
}
