//! Representative subset selection as a QUBO problem, with classical solvers,
//! synthetic data generators and an index-reconstruction pipeline.

pub mod data;
pub mod distance;
pub mod error;
pub mod finance;
pub mod objective;
pub mod qubo;
pub mod solvers;
pub mod synth;

pub use data::{DataMatrix, DistanceMatrix, Selection, SolveReport};
pub use distance::{build_distance_matrix, MetricKind};
pub use error::{Error, Result};
pub use objective::{
    compile_qubo, compile_weighted_qubo, evaluate_cost, evaluate_weighted_cost, expand_weight,
    SelectorProblem, Sense, WeightedConfig, WeightedLayout,
};
pub use qubo::{QuboModel, VarRole};
pub use solvers::{
    run_trials, solve, solve_exhaustive, solve_random_baseline, solve_sa, solve_tabu, Backend,
    SolverConfig, TrialBatch,
};
pub use synth::{gen_blobs, gen_sde, gen_sde_population, gen_trig, LabeledData};
