use oneway_core::compile::slot_candidates;
use oneway_core::decompose::slots::{random_slots, slot_geometry, slot_residuals, solve_slots};
use oneway_core::decompose::{canonical_slots, enumerate_diagonal, verify_decomposition, LazyDiagonal};
use oneway_core::linalg::{cis, Matrix, C64};
use oneway_core::maps::compose_rphip;
use oneway_core::types::DiagonalSource;
use oneway_core::{DecompositionPlan, QubitIndexing, UnitaryMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gram-Schmidt on random columns.
fn random_unitary(rng: &mut ChaCha8Rng, k: usize) -> UnitaryMatrix {
    let d = 1 << k;
    let mut cols: Vec<Vec<C64>> = Vec::new();
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for c in &cols {
            let dot: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut m = Matrix::zeros(d, d);
    for (c, col) in cols.iter().enumerate() {
        m.set_column(c, col);
    }
    UnitaryMatrix::new(m).unwrap()
}

fn random_plan(rng: &mut ChaCha8Rng, k: usize, n: usize) -> DecompositionPlan {
    let vertices: Vec<u32> = (1..=(k + n) as u32).collect();
    let inputs = &vertices[..k];
    let outputs: Vec<u32> = vertices[k..].choose_multiple(rng, k).copied().collect();
    let ix = QubitIndexing::new(&vertices, inputs, &outputs).unwrap();
    let (m, _) = slot_geometry(n, k).unwrap();
    let perms = (0..1 << (2 * k))
        .map(|_| {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    DecompositionPlan::new(ix, perms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn slot_solutions_satisfy_both_equations(seed in any::<u64>(), k in 1usize..=3, extra in 0usize..=5, frac in 0.0f64..=1.0, arg in -3.2f64..3.2) {
        let n = k + extra;
        let (m, r) = slot_geometry(n, k).unwrap();
        let u = if m == 1 { cis(arg) * r } else { cis(arg) * (frac * m as f64 * r) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for terms in [solve_slots(u, n, k).unwrap(), random_slots(u, n, k, &mut rng).unwrap()] {
            prop_assert_eq!(terms.len(), m);
            let (e1, e2) = slot_residuals(u, n, &terms);
            prop_assert!(e1 < 1e-12, "sum residual {}", e1);
            prop_assert!(e2 < 1e-12, "modulus residual {}", e2);
        }
    }

    #[test]
    fn out_of_bound_coefficients_are_rejected(k in 1usize..=3, extra in 0usize..=5, over in 1.001f64..4.0, arg in -3.2f64..3.2) {
        let n = k + extra;
        let (m, r) = slot_geometry(n, k).unwrap();
        let u = cis(arg) * (over * m as f64 * r);
        prop_assert!(solve_slots(u, n, k).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposition_round_trip(seed in any::<u64>(), k in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(&mut rng, k);
        let plan = random_plan(&mut rng, k, 2 * k);
        let slots = canonical_slots(&u, &plan).unwrap();
        let phi = enumerate_diagonal(&u, &plan, &slots).unwrap();
        let err = compose_rphip(plan.indexing(), &phi).unwrap().max_abs_diff(u.matrix());
        prop_assert!(err < 1e-12, "canonical slots: error {}", err);
        prop_assert!(phi.entries().iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));

        let seeded = slot_candidates(&u, 2 * k, seed, 3).unwrap();
        for slots in &seeded {
            let lazy = LazyDiagonal::new(&plan, slots).unwrap();
            let phi = lazy.materialize().unwrap();
            prop_assert!(verify_decomposition(&u, &phi, plan.indexing()));
            let i = rng.gen_range(0..phi.entries().len());
            prop_assert_eq!(lazy.entry(i), phi.entries()[i]);
        }
    }
}
