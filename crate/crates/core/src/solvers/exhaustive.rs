use std::time::Instant;

use rayon::prelude::*;

use super::local::Dense;
use super::make_report;
use crate::data::SolveReport;
use crate::error::{Error, Result};
use crate::qubo::QuboModel;

/// Largest model [`solve_exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 30;
/// Largest number of weight-`k` states [`solve_exhaustive_fixed_weight`] visits.
pub const FIXED_WEIGHT_LIMIT: u128 = 10_000_000;

const RESYNC_EVERY: u64 = 4096;
const MAX_PREFIX_BITS: usize = 10;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k as u128 {
        r = match r.checked_mul(n as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    r
}

/// Visits every `k`-subset of `0..n` as ascending indices, in lexicographic
/// order.
pub(crate) fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Running minimum keyed by `(energy, key)` where energies within `tol` tie
/// and the smaller key wins.
#[derive(Clone, Copy)]
struct Best {
    energy: f64,
    key: u64,
}

impl Best {
    fn offer(&mut self, energy: f64, key: u64, tol: f64) {
        if energy < self.energy - tol {
            *self = Best { energy, key };
        } else if energy <= self.energy + tol && key < self.key {
            self.energy = self.energy.min(energy);
            self.key = key;
        }
    }
}

/// Global minimum by Gray-code enumeration of all `2^N` assignments.
///
/// The key of an assignment reads variable 0 as its most significant bit, so
/// the smallest key is the lowest bitstring. The top variables are fixed per
/// chunk and chunks run in parallel; within a chunk each step flips one
/// variable and updates the local fields in `O(N)`.
pub fn solve_exhaustive(model: &QuboModel) -> Result<SolveReport> {
    let started = Instant::now();
    let n = model.num_vars();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyVariables {
            num_vars: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let dense = Dense::new(model);
    let prefix = MAX_PREFIX_BITS.min(n.saturating_sub(16));
    let low = n - prefix;
    let chunks: Vec<Best> = (0..1u64 << prefix)
        .into_par_iter()
        .map(|c| scan_chunk(&dense, c << low, low))
        .collect();
    let mut best = chunks[0];
    for c in &chunks[1..] {
        best.offer(c.energy, c.key, dense.tol);
    }
    let bits = (0..n).map(|i| best.key >> (n - 1 - i) & 1 == 1).collect();
    Ok(make_report(
        model,
        bits,
        "exhaustive",
        0,
        1,
        1u64 << n,
        started,
    ))
}

fn scan_chunk(dense: &Dense, start: u64, low: usize) -> Best {
    let n = dense.n;
    let x = (0..n).map(|i| start >> (n - 1 - i) & 1 == 1).collect();
    let mut state = dense.state(x);
    let mut key = start;
    let mut best = Best {
        energy: state.energy,
        key,
    };
    for t in 1..1u64 << low {
        let b = t.trailing_zeros() as usize;
        state.flip(dense, n - 1 - b);
        key ^= 1 << b;
        if t % RESYNC_EVERY == 0 {
            state.resync(dense);
        }
        best.offer(state.energy, key, dense.tol);
    }
    best
}

/// Minimum over the `C(N, k)` assignments of Hamming weight exactly `k`,
/// each evaluated exactly. Ties go to the lowest bitstring.
pub fn solve_exhaustive_fixed_weight(model: &QuboModel, k: usize) -> Result<SolveReport> {
    let started = Instant::now();
    let n = model.num_vars();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "weight {k} exceeds {n} variables"
        )));
    }
    let count = binomial(n, k);
    if count > FIXED_WEIGHT_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: FIXED_WEIGHT_LIMIT,
        });
    }
    let tol = 1e-10 * (1.0 + model.sum_abs_coeffs());
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_combination(n, k, |support| {
        let e = model.energy_of_support(support);
        // later combinations in lexicographic order are lower bitstrings
        match &mut best {
            Some((be, bs)) if e <= *be + tol => {
                *be = if e < *be - tol { e } else { be.min(e) };
                bs.clear();
                bs.extend_from_slice(support);
            }
            Some(_) => {}
            None => best = Some((e, support.to_vec())),
        }
    });
    let (_, support) = best.expect("at least one combination");
    let mut bits = vec![false; n];
    for i in support {
        bits[i] = true;
    }
    Ok(make_report(
        model,
        bits,
        "exhaustive-fixed-weight",
        0,
        1,
        count as u64,
        started,
    ))
}
