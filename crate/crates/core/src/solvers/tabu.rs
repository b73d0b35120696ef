use std::time::Instant;

use super::local::Dense;
use super::{best_of_reads, make_report, read_rng, SolverConfig};
use crate::data::SolveReport;
use crate::error::Result;
use crate::qubo::QuboModel;

/// One move of a tabu walk, as recorded by [`tabu_trace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabuStep {
    pub iter: usize,
    /// Best energy seen before this move.
    pub best_before: f64,
    /// Lowest energy reachable by a tabu move that beats `best_before`.
    pub best_aspirating: Option<f64>,
    pub var: usize,
    pub was_tabu: bool,
    pub energy_after: f64,
}

fn tenure_for(config: &SolverConfig, n: usize) -> usize {
    config.tabu.tenure.unwrap_or((n / 4).clamp(1, 20))
}

fn iters_for(config: &SolverConfig, n: usize) -> usize {
    config.tabu.max_iters.unwrap_or((10 * n).max(100))
}

/// Single-flip tabu search with aspiration over `num_reads` restarts from
/// uniformly random states.
///
/// Each iteration takes the best admissible flip, even when it climbs. A
/// flip is admissible when its variable is not tabu, or when it would beat
/// the best energy seen so far. When nothing is admissible the variable whose
/// tabu status expires first is flipped. Flipped variables stay tabu for
/// `tenure` iterations.
pub fn solve_tabu(model: &QuboModel, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let started = Instant::now();
    let dense = Dense::new(model);
    let n = dense.n;
    let (tenure, iters) = (tenure_for(config, n), iters_for(config, n));
    let bits = best_of_reads(model, config.num_reads, |r| {
        walk(&dense, tenure, iters, config.seed, r, None)
    });
    Ok(make_report(
        model,
        bits,
        "tabu",
        config.seed,
        config.num_reads,
        (config.num_reads * iters) as u64,
        started,
    ))
}

/// Replays read `read` of [`solve_tabu`] and returns every move.
pub fn tabu_trace(model: &QuboModel, config: &SolverConfig, read: u64) -> Result<Vec<TabuStep>> {
    config.validate()?;
    let dense = Dense::new(model);
    let n = dense.n;
    let mut trace = Vec::new();
    walk(
        &dense,
        tenure_for(config, n),
        iters_for(config, n),
        config.seed,
        read,
        Some(&mut trace),
    );
    Ok(trace)
}

fn walk(
    dense: &Dense,
    tenure: usize,
    iters: usize,
    seed: u64,
    read: u64,
    mut trace: Option<&mut Vec<TabuStep>>,
) -> Vec<bool> {
    let n = dense.n;
    let mut rng = read_rng(seed, read);
    let mut state = dense.random_state(&mut rng);
    let mut best_x = state.x.clone();
    let mut best_e = state.energy;
    let mut tabu_until = vec![0usize; n];
    if n == 0 {
        return best_x;
    }
    for iter in 0..iters {
        let mut free = (f64::INFINITY, usize::MAX);
        let mut aspiring = (f64::INFINITY, usize::MAX);
        let mut expiring = (usize::MAX, usize::MAX);
        for i in 0..n {
            let d = state.delta(i);
            if tabu_until[i] <= iter {
                if d < free.0 {
                    free = (d, i);
                }
            } else {
                if state.energy + d < best_e - dense.tol && d < aspiring.0 {
                    aspiring = (d, i);
                }
                if tabu_until[i] < expiring.0 {
                    expiring = (tabu_until[i], i);
                }
            }
        }
        let var = if aspiring.1 != usize::MAX && aspiring.0 < free.0 {
            aspiring.1
        } else if free.1 != usize::MAX {
            free.1
        } else {
            expiring.1
        };
        let was_tabu = tabu_until[var] > iter;
        let best_before = best_e;
        let energy_before = state.energy;
        state.flip(dense, var);
        tabu_until[var] = iter + 1 + tenure;
        if state.energy < best_e - dense.tol {
            best_e = state.energy;
            best_x.copy_from_slice(&state.x);
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(TabuStep {
                iter,
                best_before,
                best_aspirating: (aspiring.1 != usize::MAX).then_some(energy_before + aspiring.0),
                var,
                was_tabu,
                energy_after: state.energy,
            });
        }
    }
    let mut best = dense.state(best_x);
    best.polish(dense);
    best.x
}
