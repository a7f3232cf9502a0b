//! Splitting a single unitary coefficient across the diagonal slots that sum
//! into it.
//!
//! With `n` auxiliary qubits and `k` inputs, each coefficient `u` is the sum of
//! `m = 2^{n-k}` terms, each of modulus `r = 2^{-n/2}`. Such terms exist iff
//! `|u| <= m r`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::linalg::{cis, C64};

use super::DecomposeError;

/// Slack on the modulus bound.
pub const BOUND_TOL: f64 = 1e-12;
/// How far `|u|` may be from `r` when there is a single slot.
pub const SINGLE_SLOT_TOL: f64 = 1e-10;

/// Number of slots and per-slot modulus for `n` auxiliaries and `num_inputs`
/// inputs.
pub fn slot_geometry(n: usize, num_inputs: usize) -> Result<(usize, f64), DecomposeError> {
    if n < num_inputs || n - num_inputs >= usize::BITS as usize {
        return Err(DecomposeError::TooFewAuxiliaries { aux: n, inputs: num_inputs });
    }
    Ok((1usize << (n - num_inputs), 0.5f64.powf(n as f64 / 2.0)))
}

fn check_bound(u: C64, n: usize, num_inputs: usize) -> Result<(usize, f64), DecomposeError> {
    let (m, r) = slot_geometry(n, num_inputs)?;
    let bound = m as f64 * r;
    if u.norm() > bound + BOUND_TOL {
        return Err(DecomposeError::BoundViolated { modulus: u.norm(), bound });
    }
    if m == 1 && !((u.norm() - r).abs() < SINGLE_SLOT_TOL) {
        return Err(DecomposeError::SingleSlotModulus { modulus: u.norm(), required: r });
    }
    Ok((m, r))
}

/// The canonical solution: all terms aligned with `u`, then pairs rotated to
/// `+-pi/2` (contributing nothing) and one last pair rotated to `+-theta`
/// until the sum shrinks to `|u|`.
///
/// For `u = 0` the reference direction is the real axis, so a single pair
/// comes out as `[i r, -i r]`.
pub fn solve_slots(u: C64, n: usize, num_inputs: usize) -> Result<Vec<C64>, DecomposeError> {
    let (m, r) = check_bound(u, n, num_inputs)?;
    let phase = if u.norm() > 0.0 { u.arg() } else { 0.0 };
    if m == 1 {
        return Ok(vec![cis(phase) * r]);
    }
    let deficit = (m as f64 * r - u.norm()).max(0.0);
    let pair_drop = 2.0 * r;
    let full_pairs = ((deficit / pair_drop).floor() as usize).min(m / 2);
    let rest = (deficit - full_pairs as f64 * pair_drop).clamp(0.0, pair_drop);
    let mut angles = Vec::with_capacity(m);
    for _ in 0..full_pairs {
        angles.push(FRAC_PI_2);
        angles.push(-FRAC_PI_2);
    }
    if angles.len() < m {
        let theta = (1.0 - rest / pair_drop).clamp(-1.0, 1.0).acos();
        angles.push(theta);
        angles.push(-theta);
    }
    angles.resize(m, 0.0);
    Ok(angles.into_iter().map(|a| cis(phase + a) * r).collect())
}

/// A uniformly-phased random solution: terms are drawn one at a time on the
/// arc that keeps the remainder reachable, and the final pair is solved in
/// closed form.
pub fn random_slots<R: Rng + ?Sized>(
    u: C64,
    n: usize,
    num_inputs: usize,
    rng: &mut R,
) -> Result<Vec<C64>, DecomposeError> {
    let (m, r) = check_bound(u, n, num_inputs)?;
    if m == 1 {
        return solve_slots(u, n, num_inputs);
    }
    let mut terms = Vec::with_capacity(m);
    let mut remainder = u;
    for j in 0..m - 2 {
        // after this term, m - j - 1 terms must still reach the remainder
        let reach = (m - j - 1) as f64 * r;
        let len = remainder.norm();
        let phi = if len + r <= reach || len == 0.0 {
            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
        } else {
            let c = ((len * len + r * r - reach * reach) / (2.0 * len * r)).clamp(-1.0, 1.0);
            let spread = c.acos();
            remainder.arg() + if spread > 0.0 { rng.gen_range(-spread..=spread) } else { 0.0 }
        };
        let term = cis(phi) * r;
        terms.push(term);
        remainder -= term;
    }
    let zero_base = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    terms.extend(solve_pair(remainder, r, rng.gen_bool(0.5), zero_base));
    Ok(terms)
}

/// Two terms of modulus `r` summing to `target` (`|target| <= 2r`, up to
/// rounding). A zero target leaves the direction free; `zero_base` picks it.
fn solve_pair(target: C64, r: f64, flip: bool, zero_base: f64) -> [C64; 2] {
    let len = target.norm();
    let base = if len > 0.0 { target.arg() } else { zero_base };
    let theta = (len / (2.0 * r)).clamp(-1.0, 1.0).acos();
    let theta = if flip { -theta } else { theta };
    [cis(base + theta) * r, cis(base - theta) * r]
}

/// Residuals of the two slot equations: `|sum - u|` and
/// `max_i |2^{n/2} |x_i| - 1|`.
pub fn slot_residuals(u: C64, n: usize, terms: &[C64]) -> (f64, f64) {
    let sum: C64 = terms.iter().sum();
    let scale = 2f64.powf(n as f64 / 2.0);
    let modulus = terms.iter().map(|x| (scale * x.norm() - 1.0).abs()).fold(0.0, f64::max);
    ((sum - u).norm(), modulus)
}
