use std::time::Instant;

use rand::seq::index;
use rand::Rng;

use super::{best_of_reads, make_report, read_rng, SolverConfig};
use crate::data::SolveReport;
use crate::error::{Error, Result};
use crate::qubo::QuboModel;

/// Uniformly random assignment with exactly `k` of `n` bits set.
pub(crate) fn sample_weight_k<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<bool> {
    let mut bits = vec![false; n];
    for i in index::sample(rng, n, k) {
        bits[i] = true;
    }
    bits
}

/// Best of `num_reads` uniformly random weight-`k` assignments, where `k`
/// comes from the baseline parameters or else the model's cardinality.
pub fn solve_random_baseline(model: &QuboModel, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let started = Instant::now();
    let n = model.num_vars();
    let k = config.baseline.k.or(model.cardinality()).ok_or_else(|| {
        Error::InvalidParameter("random baseline needs k or a model cardinality".into())
    })?;
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "baseline k = {k} exceeds {n} variables"
        )));
    }
    let bits = best_of_reads(model, config.num_reads, |r| {
        sample_weight_k(&mut read_rng(config.seed, r), n, k)
    });
    Ok(make_report(
        model,
        bits,
        "random-baseline",
        config.seed,
        config.num_reads,
        config.num_reads as u64,
        started,
    ))
}
