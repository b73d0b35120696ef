//! Minimizers for [`QuboModel`]: exhaustive enumeration, simulated annealing,
//! tabu search and a random fixed-weight baseline, plus a seeded trial runner.
//!
//! Every backend breaks energy ties towards the lowest bitstring, reading
//! index 0 as the most significant bit, and reports the exact energy of the
//! returned state.

mod anneal;
mod baseline;
mod exhaustive;
mod local;
mod tabu;

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{bits_to_string, SolveReport};
use crate::error::{Error, Result};
use crate::qubo::QuboModel;

pub use anneal::{solve_sa, solve_sa_with_stats, AnnealStats, Schedule};
pub use baseline::solve_random_baseline;
pub use exhaustive::{
    binomial, solve_exhaustive, solve_exhaustive_fixed_weight, EXHAUSTIVE_LIMIT, FIXED_WEIGHT_LIMIT,
};
pub use tabu::{solve_tabu, tabu_trace, TabuStep};

pub(crate) use exhaustive::for_each_combination;

pub const DEFAULT_NUM_READS: usize = 1000;
pub const DEFAULT_SWEEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Exhaustive,
    SimulatedAnnealing,
    TabuSearch,
    RandomBaseline,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exhaustive => "exhaustive",
            Backend::SimulatedAnnealing => "sa",
            Backend::TabuSearch => "tabu",
            Backend::RandomBaseline => "random",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Backend::Exhaustive),
            "sa" | "simulated-annealing" => Ok(Backend::SimulatedAnnealing),
            "tabu" | "tabu-search" => Ok(Backend::TabuSearch),
            "random" | "random-baseline" => Ok(Backend::RandomBaseline),
            other => Err(Error::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

/// Annealing schedule. Unset temperatures are derived from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub t_max: Option<f64>,
    pub t_min: Option<f64>,
    pub sweeps: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            t_max: None,
            t_min: None,
            sweeps: DEFAULT_SWEEPS,
        }
    }
}

/// Unset values are derived from the number of variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TabuParams {
    pub tenure: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Falls back to the model's cardinality when unset.
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: Backend,
    pub seed: u64,
    pub num_reads: usize,
    pub sa: SaParams,
    pub tabu: TabuParams,
    pub baseline: BaselineParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            backend: Backend::default(),
            seed: 0,
            num_reads: DEFAULT_NUM_READS,
            sa: SaParams::default(),
            tabu: TabuParams::default(),
            baseline: BaselineParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn new(backend: Backend, seed: u64) -> Self {
        Self {
            backend,
            seed,
            ..Self::default()
        }
    }

    pub fn with_reads(mut self, num_reads: usize) -> Self {
        self.num_reads = num_reads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.num_reads == 0 {
            return bad("num_reads must be >= 1".into());
        }
        if self.sa.sweeps == 0 {
            return bad("sweeps must be >= 1".into());
        }
        for (name, t) in [("t_max", self.sa.t_max), ("t_min", self.sa.t_min)] {
            if let Some(t) = t {
                if !(t.is_finite() && t > 0.0) {
                    return bad(format!("{name} must be finite and > 0, got {t}"));
                }
            }
        }
        if let (Some(hi), Some(lo)) = (self.sa.t_max, self.sa.t_min) {
            if hi < lo {
                return bad(format!("t_max {hi} is below t_min {lo}"));
            }
        }
        if self.tabu.tenure == Some(0) {
            return bad("tenure must be >= 1".into());
        }
        if self.tabu.max_iters == Some(0) {
            return bad("max_iters must be >= 1".into());
        }
        Ok(())
    }
}

/// Runs the configured backend. The exhaustive backend switches to
/// fixed-weight enumeration when the model is too large for full enumeration
/// but has a cardinality target and few enough weight-`k` states.
pub fn solve(model: &QuboModel, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    match config.backend {
        Backend::Exhaustive => {
            if model.num_vars() > EXHAUSTIVE_LIMIT {
                if let Some(k) = model.cardinality() {
                    if model.num_selection_vars() == model.num_vars() {
                        return solve_exhaustive_fixed_weight(model, k);
                    }
                }
            }
            solve_exhaustive(model)
        }
        Backend::SimulatedAnnealing => solve_sa(model, config),
        Backend::TabuSearch => solve_tabu(model, config),
        Backend::RandomBaseline => solve_random_baseline(model, config),
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when unset.
/// Results never depend on the worker count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("threads must be >= 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// SplitMix64 mix of `master` and `index`, giving well-separated per-trial
/// seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for read `read` under `seed`.
pub(crate) fn read_rng(seed: u64, read: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    rng
}

/// Total order used to pick between candidate states.
pub(crate) fn candidate_order(a: &(f64, Vec<bool>), b: &(f64, Vec<bool>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Best candidate over `reads` independent reads, each scored exactly.
pub(crate) fn best_of_reads<F>(model: &QuboModel, reads: usize, read: F) -> Vec<bool>
where
    F: Fn(u64) -> Vec<bool> + Sync,
{
    (0..reads as u64)
        .into_par_iter()
        .map(|r| {
            let bits = read(r);
            (model.energy(&bits), bits)
        })
        .min_by(candidate_order)
        .expect("at least one read")
        .1
}

pub(crate) fn make_report(
    model: &QuboModel,
    bits: Vec<bool>,
    solver_name: &str,
    seed: u64,
    reads: usize,
    evaluations: u64,
    started: Instant,
) -> SolveReport {
    let energy = model.energy(&bits);
    let hamming_weight = model.hamming_weight(&bits);
    SolveReport {
        best_bits: bits,
        energy,
        hamming_weight,
        k: None,
        constraint_satisfied: true,
        solver_name: solver_name.to_string(),
        seed,
        reads,
        evaluations,
        wall_time: started.elapsed(),
    }
    .with_cardinality(model.cardinality())
}

/// Reports from repeated seeded solves of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub reports: Vec<SolveReport>,
    pub k: usize,
    pub satisfied_fraction: f64,
    pub mean_energy: f64,
    /// Population standard deviation.
    pub std_energy: f64,
}

impl TrialBatch {
    pub fn from_reports(reports: Vec<SolveReport>, k: usize) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        let reports: Vec<SolveReport> = reports
            .into_iter()
            .map(|r| r.with_cardinality(Some(k)))
            .collect();
        let t = reports.len() as f64;
        let satisfied = reports.iter().filter(|r| r.constraint_satisfied).count();
        let mean = reports.iter().map(|r| r.energy).sum::<f64>() / t;
        let var = reports
            .iter()
            .map(|r| (r.energy - mean).powi(2))
            .sum::<f64>()
            / t;
        Ok(Self {
            k,
            satisfied_fraction: satisfied as f64 / t,
            mean_energy: mean,
            std_energy: var.sqrt(),
            reports,
        })
    }

    pub fn total_wall_time(&self) -> Duration {
        self.reports.iter().map(|r| r.wall_time).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per trial.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "trial",
            "seed",
            "solver",
            "energy",
            "hamming_weight",
            "k",
            "constraint_satisfied",
            "evaluations",
            "best_bits",
        ])?;
        for (t, r) in self.reports.iter().enumerate() {
            w.write_record([
                t.to_string(),
                r.seed.to_string(),
                r.solver_name.clone(),
                r.energy.to_string(),
                r.hamming_weight.to_string(),
                self.k.to_string(),
                r.constraint_satisfied.to_string(),
                r.evaluations.to_string(),
                bits_to_string(&r.best_bits),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `model` once per trial, trial `t` using seed
/// `derive_seed(config.seed, t)`, and checks each result against weight `k`.
pub fn run_trials(
    model: &QuboModel,
    config: &SolverConfig,
    trials: usize,
    k: usize,
) -> Result<TrialBatch> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    config.validate()?;
    let reports = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial = SolverConfig {
                seed: derive_seed(config.seed, t),
                ..config.clone()
            };
            solve(model, &trial)
        })
        .collect::<Result<Vec<_>>>()?;
    TrialBatch::from_reports(reports, k)
}
