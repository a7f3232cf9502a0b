//! Preparation, restriction and `R . Phi . P` against explicit Kronecker
//! products conjugated by qubit-reordering permutations.

use oneway_core::linalg::{cis, Matrix, C64, ONE};
use oneway_core::maps::{apply_preparation, apply_restriction, compose_rphip};
use oneway_core::{PhaseMapDiagonal, QubitIndexing, StateVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Permutation taking the basis ordered by `order` to the basis ordered by
/// sorted labels.
fn reorder(sorted: &[u32], order: &[u32]) -> Matrix {
    let n = sorted.len();
    let mut m = Matrix::zeros(1 << n, 1 << n);
    for j in 0..1usize << n {
        let mut s = 0;
        for (t, label) in order.iter().enumerate() {
            let bit = (j >> (n - 1 - t)) & 1;
            let pos = sorted.iter().position(|l| l == label).unwrap();
            s |= bit << (n - 1 - pos);
        }
        m.set(s, j, ONE);
    }
    m
}

fn plus_column(m: usize) -> Matrix {
    let a = C64::new(0.5f64.powf(m as f64 / 2.0), 0.0);
    Matrix::from_row_major(1 << m, 1, vec![a; 1 << m]).unwrap()
}

fn complement(all: &[u32], part: &[u32]) -> Vec<u32> {
    all.iter().copied().filter(|v| !part.contains(v)).collect()
}

fn preparation_matrix(ix: &QubitIndexing) -> Matrix {
    let rest = complement(ix.vertices(), ix.inputs());
    let order: Vec<u32> = ix.inputs().iter().chain(&rest).copied().collect();
    let body = Matrix::identity(1 << ix.inputs().len()).kron(&plus_column(rest.len()));
    &reorder(ix.vertices(), &order) * &body
}

fn restriction_matrix(ix: &QubitIndexing) -> Matrix {
    let rest = complement(ix.vertices(), ix.outputs());
    let order: Vec<u32> = ix.outputs().iter().chain(&rest).copied().collect();
    let body = Matrix::identity(1 << ix.outputs().len()).kron(&plus_column(rest.len()).adjoint());
    &body * &reorder(ix.vertices(), &order).adjoint()
}

fn random_indexing(rng: &mut ChaCha8Rng) -> QubitIndexing {
    let n = rng.gen_range(1..=5);
    let mut pool: Vec<u32> = (1..=12).collect();
    pool.shuffle(rng);
    let vertices = pool[..n].to_vec();
    let ki = rng.gen_range(0..=n);
    let ko = rng.gen_range(0..=n);
    let inputs: Vec<u32> = vertices.choose_multiple(rng, ki).copied().collect();
    let outputs: Vec<u32> = vertices.choose_multiple(rng, ko).copied().collect();
    QubitIndexing::new(&vertices, &inputs, &outputs).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn column(v: &[C64]) -> Matrix {
    Matrix::from_row_major(v.len(), 1, v.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn maps_match_kronecker_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ix = random_indexing(&mut rng);
        let p = preparation_matrix(&ix);
        let r = restriction_matrix(&ix);

        let psi = random_vector(&mut rng, 1 << ix.inputs().len());
        let prepared = apply_preparation(&StateVector::new(ix.inputs().to_vec(), psi.clone()).unwrap(), &ix).unwrap();
        prop_assert!(column(prepared.amplitudes()).approx_eq(&(&p * &column(&psi)), 1e-12));

        let chi = random_vector(&mut rng, 1 << ix.num_qubits());
        let restricted = apply_restriction(&StateVector::new(ix.vertices().to_vec(), chi.clone()).unwrap(), &ix).unwrap();
        prop_assert!(column(restricted.amplitudes()).approx_eq(&(&r * &column(&chi)), 1e-12));

        let d: Vec<C64> = (0..1 << ix.num_qubits()).map(|_| cis(rng.gen_range(0.0..6.3))).collect();
        let phi = PhaseMapDiagonal::new(d.clone()).unwrap();
        let dropped = ix.num_qubits() - ix.outputs().len();
        let scale = C64::new(2f64.powf(dropped as f64 / 2.0), 0.0);
        let expected = (&(&r * &Matrix::diagonal(&d)) * &p).scale(scale);
        prop_assert!(compose_rphip(&ix, &phi).unwrap().approx_eq(&expected, 1e-12));
    }
}

#[test]
fn restriction_is_adjoint_of_preparation_with_roles_swapped() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let ix = random_indexing(&mut rng);
        let swapped = QubitIndexing::new(ix.vertices(), ix.outputs(), ix.inputs()).unwrap();
        assert_adjoint(&restriction_matrix(&ix), &preparation_matrix(&swapped));
    }
}

fn assert_adjoint(a: &Matrix, b: &Matrix) {
    assert!(a.approx_eq(&b.adjoint(), 1e-12));
}
