use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use selector_core::solvers::{Backend, SolverConfig};
use selector_core::synth::ParamSampler;
use selector_core::{MetricKind, Sense, WeightedConfig};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "selector",
    version,
    about = "Representative selection as a QUBO"
)]
pub struct Cli {
    /// Master seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Encoding of the primary tabular result.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker thread cap. Results do not depend on it.
    #[arg(long, global = true, value_parser = positive)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic dataset.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Pick k representative rows of a data CSV.
    Select(SelectArgs),
    /// Write the QUBO for a data CSV.
    Compile(CompileArgs),
    /// Solve a QUBO file.
    Solve(SolveArgs),
    /// Accuracy of pair selection on sine/cosine data across noise levels.
    SweepSigma(SweepArgs),
    /// Track an equal-weight index with k selected assets.
    Reconstruct(ReconstructArgs),
    /// Evaluate the objective on every combination.
    Enumerate(EnumerateArgs),
    /// Repeat a solve over derived seeds and report constraint satisfaction.
    Trials(TrialsArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenCommand {
    /// Isotropic Gaussian blobs in the plane.
    Blobs(BlobArgs),
    /// Noisy sine and cosine curves.
    Trig(TrigArgs),
    /// Paths of a coupled geometric SDE.
    Sde(SdeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BlobArgs {
    /// Blob centers as `x,y` pairs separated by `;`.
    #[arg(long, default_value = "-15,0;15,0", value_parser = parse_centers)]
    pub centers: Centers,
    #[arg(long, default_value_t = 90)]
    pub points: usize,
    #[arg(long, default_value_t = 2.0)]
    pub std: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Centers(pub Vec<[f64; 2]>);

#[derive(Debug, Args, Serialize)]
pub struct TrigArgs {
    /// Curves per class.
    #[arg(long, default_value_t = 50)]
    pub curves: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SdeArgs {
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Independent paths of the shared system; rows are grouped by dimension.
    #[arg(long, default_value_t = 1)]
    pub realizations: usize,
    /// Drift vector, comma separated. Used with `--sampler fixed`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Option<Vec<f64>>,
    /// Volatility matrix, row major, comma separated. Used with `--sampler fixed`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub vol: Option<Vec<f64>>,
    /// Initial values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0 / 253.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 253)]
    pub steps: usize,
    /// `fixed`, `uniform:<low>:<high>` or `gaussian:<mean>:<std>`.
    #[arg(long, default_value = "fixed", value_parser = parse_sampler)]
    pub sampler: ParamSampler,
    /// First date of the `date,ticker,close` price table.
    #[arg(long, default_value = "2020-01-01")]
    pub start_date: chrono::NaiveDate,
}

#[derive(Debug, Args, Serialize)]
pub struct ProblemArgs {
    /// Data CSV: optional header, optional leading label column.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = positive)]
    pub k: usize,
    /// Cardinality penalty A.
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
    /// euclidean, correlation, cosine, minkowski:<p> or seuclidean.
    #[arg(long, default_value = "euclidean")]
    pub metric: MetricKind,
    /// cohesive or dispersed.
    #[arg(long, default_value = "cohesive")]
    pub sense: Sense,
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// exhaustive, sa, tabu or random.
    #[arg(long, default_value = "exhaustive")]
    pub solver: Backend,
    #[arg(long, value_parser = positive)]
    pub reads: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub tmin: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub tenure: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub iters: Option<usize>,
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> SolverConfig {
        let mut c = SolverConfig::new(self.solver, seed);
        if let Some(r) = self.reads {
            c.num_reads = r;
        }
        if let Some(s) = self.sweeps {
            c.sa.sweeps = s;
        }
        c.sa.t_max = self.tmax;
        c.sa.t_min = self.tmin;
        c.tabu.tenure = self.tenure;
        c.tabu.max_iters = self.iters;
        c
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightedArgs {
    /// Add per-row weights with this many binary digits.
    #[arg(long = "weight-digits", value_parser = positive)]
    pub n_d: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub w_min: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub w_max: f64,
    /// Budget penalty B.
    #[arg(long, default_value_t = 2.0)]
    pub budget_penalty: f64,
    /// Weight budget W; defaults to k.
    #[arg(long)]
    pub budget: Option<f64>,
}

impl WeightedArgs {
    pub fn config(&self, k: usize) -> Option<WeightedConfig> {
        self.n_d.map(|n_d| WeightedConfig {
            n_d,
            w_min: self.w_min,
            w_max: self.w_max,
            budget_penalty: self.budget_penalty,
            budget: self.budget.unwrap_or(k as f64),
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CompileArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub weighted: WeightedArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// QUBO in JSON (`.json`) or coordinate text format.
    #[arg(long)]
    pub qubo: PathBuf,
    /// Expected Hamming weight; overrides the cardinality stored in the file.
    #[arg(long, value_parser = positive)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TrialsArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long, default_value_t = 100, value_parser = positive)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Noise levels, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigmas: Vec<f64>,
    #[arg(long, default_value_t = 200, value_parser = positive)]
    pub trials: usize,
    #[arg(long, default_value_t = 50)]
    pub curves: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
    #[arg(long, default_value = "correlation")]
    pub metric: MetricKind,
    #[arg(long, default_value = "cohesive")]
    pub sense: Sense,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    /// Price CSV with columns `date,ticker,close`.
    #[arg(long)]
    pub prices: PathBuf,
    /// First date of the window (inclusive).
    #[arg(long)]
    pub from: Option<chrono::NaiveDate>,
    /// Last date of the window (inclusive).
    #[arg(long)]
    pub to: Option<chrono::NaiveDate>,
    /// Subset sizes, comma separated.
    #[arg(long = "ks", value_delimiter = ',', required = true, value_parser = positive)]
    pub k_values: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
    #[arg(long, default_value = "correlation")]
    pub metric: MetricKind,
    #[arg(long, default_value = "cohesive")]
    pub sense: Sense,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Only enumerate selections of this size.
    #[arg(long)]
    pub k_filter: Option<usize>,
    /// Target selection as comma separated row indices; defaults to the
    /// exhaustive optimum.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<usize>>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_centers(s: &str) -> Result<Centers, String> {
    s.split(';')
        .map(|pair| {
            let xy: Vec<f64> = pair
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
                .collect::<Result<_, _>>()?;
            match xy[..] {
                [x, y] => Ok([x, y]),
                _ => Err(format!("center `{pair}` needs two coordinates")),
            }
        })
        .collect::<Result<_, _>>()
        .map(Centers)
}

fn parse_sampler(s: &str) -> Result<ParamSampler, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    match parts[..] {
        ["fixed"] => Ok(ParamSampler::Fixed),
        ["uniform", lo, hi] => Ok(ParamSampler::Uniform {
            low: num(lo)?,
            high: num(hi)?,
        }),
        ["gaussian", m, sd] => Ok(ParamSampler::Gaussian {
            mean: num(m)?,
            std: num(sd)?,
        }),
        _ => Err(format!(
            "unknown sampler `{s}`; use fixed, uniform:<low>:<high> or gaussian:<mean>:<std>"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samplers() {
        assert_eq!(parse_sampler("fixed").unwrap(), ParamSampler::Fixed);
        assert_eq!(
            parse_sampler("uniform:-1:1").unwrap(),
            ParamSampler::Uniform {
                low: -1.0,
                high: 1.0
            }
        );
        assert!(parse_sampler("gaussian:0").is_err());
    }

    #[test]
    fn centers() {
        assert_eq!(
            parse_centers("-15,0;15,0").unwrap().0,
            vec![[-15.0, 0.0], [15.0, 0.0]]
        );
        assert!(parse_centers("1,2,3").is_err());
    }

    #[test]
    fn zero_k_is_rejected() {
        let r = Cli::try_parse_from(["selector", "select", "--data", "d.csv", "--k", "0"]);
        assert!(r.is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
