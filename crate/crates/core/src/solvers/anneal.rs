use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::local::Dense;
use super::{candidate_order, make_report, read_rng, SaParams, SolverConfig};
use crate::data::SolveReport;
use crate::error::Result;
use crate::qubo::QuboModel;

const AUTO_SAMPLES: usize = 100;
const RESYNC_SWEEPS: usize = 64;

/// Geometric temperature schedule: sweep `s` runs at
/// `t_max * (t_min / t_max)^(s / sweeps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_max: f64,
    pub t_min: f64,
    pub sweeps: usize,
}

impl Schedule {
    /// Fills unset temperatures from the model: `t_max` is the largest
    /// single-flip energy change seen over 100 random states and `t_min` is
    /// a thousandth of it.
    pub fn resolve(model: &QuboModel, params: &SaParams, seed: u64) -> Self {
        let t_max = params.t_max.unwrap_or_else(|| {
            let auto = auto_t_max(model, seed);
            params.t_min.map_or(auto, |lo| auto.max(lo))
        });
        let t_min = params.t_min.unwrap_or(1e-3 * t_max);
        Self {
            t_max,
            t_min,
            sweeps: params.sweeps,
        }
    }

    pub fn temperature(&self, sweep: usize) -> f64 {
        let ratio = (self.t_min / self.t_max).powf(1.0 / self.sweeps as f64);
        self.t_max * ratio.powi(sweep as i32)
    }
}

fn auto_t_max(model: &QuboModel, seed: u64) -> f64 {
    let dense = Dense::new(model);
    let mut rng = read_rng(seed, u64::MAX);
    let mut max = 0.0f64;
    for _ in 0..AUTO_SAMPLES {
        let state = dense.random_state(&mut rng);
        for i in 0..dense.n {
            max = max.max(state.delta(i).abs());
        }
    }
    if max > 0.0 && max.is_finite() {
        max
    } else {
        1.0
    }
}

/// Counters summed over all reads.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnnealStats {
    pub proposals: u64,
    pub accepted: u64,
    /// Accepted proposals that raised the energy.
    pub uphill_accepted: u64,
}

impl AnnealStats {
    fn merge(self, o: Self) -> Self {
        Self {
            proposals: self.proposals + o.proposals,
            accepted: self.accepted + o.accepted,
            uphill_accepted: self.uphill_accepted + o.uphill_accepted,
        }
    }
}

/// Simulated annealing with Metropolis acceptance over `num_reads`
/// independent restarts from uniformly random states.
pub fn solve_sa(model: &QuboModel, config: &SolverConfig) -> Result<SolveReport> {
    solve_sa_with_stats(model, config).map(|(r, _)| r)
}

pub fn solve_sa_with_stats(
    model: &QuboModel,
    config: &SolverConfig,
) -> Result<(SolveReport, AnnealStats)> {
    config.validate()?;
    let started = Instant::now();
    let dense = Dense::new(model);
    let schedule = Schedule::resolve(model, &config.sa, config.seed);
    let temps: Vec<f64> = (0..schedule.sweeps)
        .map(|s| schedule.temperature(s))
        .collect();
    let (bits, stats) = (0..config.num_reads as u64)
        .into_par_iter()
        .map(|r| {
            let (bits, stats) = anneal_read(&dense, &temps, config.seed, r);
            ((model.energy(&bits), bits), stats)
        })
        .reduce_with(|a, b| {
            let stats = a.1.merge(b.1);
            let best = if candidate_order(&a.0, &b.0).is_le() {
                a.0
            } else {
                b.0
            };
            (best, stats)
        })
        .map(|((_, bits), stats)| (bits, stats))
        .expect("at least one read");
    let evaluations = stats.proposals;
    let report = make_report(
        model,
        bits,
        "simulated-annealing",
        config.seed,
        config.num_reads,
        evaluations,
        started,
    );
    Ok((report, stats))
}

fn anneal_read(dense: &Dense, temps: &[f64], seed: u64, read: u64) -> (Vec<bool>, AnnealStats) {
    let mut rng = read_rng(seed, read);
    let mut stats = AnnealStats::default();
    let mut state = dense.random_state(&mut rng);
    let mut best_x = state.x.clone();
    let mut best_e = state.energy;
    let mut order: Vec<usize> = (0..dense.n).collect();
    for (s, &t) in temps.iter().enumerate() {
        order.shuffle(&mut rng);
        for &i in &order {
            stats.proposals += 1;
            let d = state.delta(i);
            let accept = d <= 0.0 || rng.random::<f64>() < (-d / t).exp();
            if !accept {
                continue;
            }
            stats.accepted += 1;
            if d > 0.0 {
                stats.uphill_accepted += 1;
            }
            state.flip(dense, i);
            if state.energy < best_e {
                best_e = state.energy;
                best_x.copy_from_slice(&state.x);
            }
        }
        if s % RESYNC_SWEEPS == RESYNC_SWEEPS - 1 {
            state.resync(dense);
        }
    }
    let mut best = dense.state(best_x);
    best.polish(dense);
    (best.x, stats)
}

#[cfg(test)]
mod tests {
    use super::super::{solve_exhaustive, Backend};
    use super::*;
    use crate::data::DistanceMatrix;
    use crate::objective::{compile_qubo, SelectorProblem, Sense};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sa(seed: u64) -> SolverConfig {
        SolverConfig::new(Backend::SimulatedAnnealing, seed)
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> QuboModel {
        let d = DistanceMatrix::from_upper(n, |_, _| Ok(rng.random_range(0.0..2.0))).unwrap();
        let k = rng.random_range(1..=n / 2);
        let sense = if rng.random_bool(0.5) {
            Sense::Cohesive
        } else {
            Sense::Dispersed
        };
        compile_qubo(&SelectorProblem::new(d, k, 2.0).unwrap().with_sense(sense))
    }

    #[test]
    fn schedule_is_geometric() {
        let s = Schedule {
            t_max: 10.0,
            t_min: 0.01,
            sweeps: 3,
        };
        assert_eq!(s.temperature(0), 10.0);
        assert!((s.temperature(1) - 1.0).abs() < 1e-12);
        assert!((s.temperature(2) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn schedule_resolution() {
        let mut m = QuboModel::new(3);
        m.add_linear(0, 4.0);
        m.add_pair(0, 1, -1.0);
        let auto = Schedule::resolve(&m, &SaParams::default(), 0);
        assert!(auto.t_max > 0.0 && auto.t_max <= 4.0 + 1e-12);
        assert!((auto.t_min - 1e-3 * auto.t_max).abs() < 1e-15);
        let params = SaParams {
            t_max: Some(2.0),
            ..SaParams::default()
        };
        assert_eq!(Schedule::resolve(&m, &params, 0).t_min, 2e-3);
        let flat = Schedule::resolve(&QuboModel::new(2), &SaParams::default(), 0);
        assert_eq!(flat.t_max, 1.0);
    }

    #[test]
    fn finds_zero_state() {
        let mut m = QuboModel::new(10);
        for i in 0..10 {
            m.add_linear(i, 1.0 + i as f64);
        }
        for seed in 0..5 {
            let r = solve_sa(&m, &sa(seed).with_reads(10)).unwrap();
            assert_eq!(r.best_bits, vec![false; 10]);
        }
    }

    #[test]
    fn two_point_instance() {
        let d = DistanceMatrix::from_full(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = compile_qubo(&SelectorProblem::new(d, 1, 2.0).unwrap());
        let r = solve_sa(&m, &sa(0)).unwrap();
        assert!((r.energy + 0.5).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_problem(&mut rng, 12);
        let c = sa(99).with_reads(40);
        let (a, sa_) = solve_sa_with_stats(&m, &c).unwrap();
        let (b, sb) = solve_sa_with_stats(&m, &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa_, sb);
        assert_eq!(sa_.proposals, 40 * 12 * c.sa.sweeps as u64);
    }

    #[test]
    fn never_below_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let m = random_problem(&mut rng, 10);
            let ex = solve_exhaustive(&m).unwrap();
            let r = solve_sa(&m, &sa(rng.random()).with_reads(20)).unwrap();
            assert!(ex.energy <= r.energy + 1e-9);
        }
    }

    #[test]
    fn frozen_chain_never_climbs() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let m = random_problem(&mut rng, 12);
            let mut c = sa(rng.random()).with_reads(20);
            c.sa.t_max = Some(1e-9);
            c.sa.t_min = Some(1e-9);
            let (_, stats) = solve_sa_with_stats(&m, &c).unwrap();
            assert_eq!(stats.uphill_accepted, 0);
            assert!(stats.accepted > 0);
        }
    }

    #[test]
    fn hot_chain_climbs() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let m = random_problem(&mut rng, 12);
        let (_, stats) = solve_sa_with_stats(&m, &sa(1).with_reads(5)).unwrap();
        assert!(stats.uphill_accepted > 0);
    }
}
