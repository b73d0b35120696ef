use std::fs;
use std::io::BufReader;
use std::path::Path;

use chrono::Duration;
use serde::Serialize;

use selector_core::data::bits_to_string;
use selector_core::finance::{
    cumulative_returns, enumerate_combinations, mse_curve, proxy_index, subset_index,
    CombinationStats, CurveParams, MsePoint, PriceTable, SweepParams, SweepPoint,
};
use selector_core::solvers::{run_trials, solve, Backend, SolverConfig, TrialBatch};
use selector_core::synth::{
    gen_blobs, gen_sde_population, gen_trig, BlobSpec, LabeledData, SdeSpec, TrigSpec,
};
use selector_core::{
    build_distance_matrix, compile_qubo, compile_weighted_qubo, evaluate_cost, DataMatrix,
    QuboModel, Selection, SelectorProblem, SolveReport,
};

use crate::args::*;
use crate::error::{CliError, EXIT_CONSTRAINT};
use crate::output::{csv_bytes, Run};

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut out = Run::new(&cli.out)?;
    let (name, code) = match &cli.command {
        Command::Gen(GenCommand::Blobs(a)) => ("gen blobs", gen_blobs_cmd(cli, a, &mut out)?),
        Command::Gen(GenCommand::Trig(a)) => ("gen trig", gen_trig_cmd(cli, a, &mut out)?),
        Command::Gen(GenCommand::Sde(a)) => ("gen sde", gen_sde_cmd(cli, a, &mut out)?),
        Command::Select(a) => ("select", select(cli, a, &mut out)?),
        Command::Compile(a) => ("compile", compile(a, &mut out)?),
        Command::Solve(a) => ("solve", solve_cmd(cli, a, &mut out)?),
        Command::Trials(a) => ("trials", trials(cli, a, &mut out)?),
        Command::SweepSigma(a) => ("sweep-sigma", sweep_sigma(cli, a, &mut out)?),
        Command::Reconstruct(a) => ("reconstruct", reconstruct(cli, a, &mut out)?),
        Command::Enumerate(a) => ("enumerate", enumerate(cli, a, &mut out)?),
    };
    out.finish(name, cli, code)?;
    Ok(code)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<fs::File>, CliError> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_labeled(data: &LabeledData, out: &mut Run) -> Result<(), CliError> {
    let mut buf = Vec::new();
    data.data.write_csv(&mut buf)?;
    out.write("data.csv", &buf)?;
    let mut buf = Vec::new();
    data.write_classes_csv(&mut buf)?;
    out.write("classes.csv", &buf)
}

fn gen_blobs_cmd(cli: &Cli, a: &BlobArgs, out: &mut Run) -> Result<i32, CliError> {
    let data = gen_blobs(&BlobSpec {
        centers: a.centers.0.clone(),
        points_per_blob: a.points,
        std_dev: a.std,
        seed: cli.seed,
    })?;
    write_labeled(&data, out)?;
    Ok(0)
}

fn gen_trig_cmd(cli: &Cli, a: &TrigArgs, out: &mut Run) -> Result<i32, CliError> {
    let data = gen_trig(&TrigSpec {
        curves_per_class: a.curves,
        num_samples: a.samples,
        sigma: a.sigma,
        seed: cli.seed,
    })?;
    write_labeled(&data, out)?;
    Ok(0)
}

fn gen_sde_cmd(cli: &Cli, a: &SdeArgs, out: &mut Run) -> Result<i32, CliError> {
    let mut spec = SdeSpec {
        dt: a.dt,
        steps: a.steps,
        seed: cli.seed,
        ..SdeSpec::with_dims(a.dims)
    };
    if let Some(mu) = &a.mu {
        spec.mu = mu.clone();
    }
    if let Some(vol) = &a.vol {
        if vol.len() != a.dims * a.dims {
            return Err(CliError::Usage(format!(
                "--vol needs {} entries for {} dimensions, got {}",
                a.dims * a.dims,
                a.dims,
                vol.len()
            )));
        }
        spec.sigma = vol.chunks(a.dims).map(<[f64]>::to_vec).collect();
    }
    if let Some(x0) = &a.x0 {
        spec.x0 = x0.clone();
    }
    let data = gen_sde_population(&spec, a.realizations, a.sampler)?;
    write_labeled(&data, out)?;
    let table = PriceTable {
        tickers: (0..data.data.n()).map(|i| format!("S{i:04}")).collect(),
        dates: (0..=a.steps as i64)
            .map(|t| a.start_date + Duration::days(t))
            .collect(),
        prices: data.data.rows().map(<[f64]>::to_vec).collect(),
    };
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    out.write("prices.csv", &buf)?;
    Ok(0)
}

fn load_problem(p: &ProblemArgs) -> Result<(DataMatrix, SelectorProblem), CliError> {
    let data = DataMatrix::read_csv(open(&p.data)?)?;
    if p.k > data.n() {
        return Err(CliError::Usage(format!(
            "--k {} exceeds {} rows",
            p.k,
            data.n()
        )));
    }
    let d = build_distance_matrix(&data, p.metric)?;
    let problem = SelectorProblem::new(d, p.k, p.penalty)?.with_sense(p.sense);
    Ok((data, problem))
}

fn constraint_code(report: &SolveReport) -> i32 {
    if report.constraint_satisfied {
        0
    } else {
        EXIT_CONSTRAINT
    }
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    selection: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    cost: f64,
    report: &'a SolveReport,
}

fn report_csv(report: &SolveReport, selection: &Selection) -> Result<Vec<u8>, CliError> {
    csv_bytes(|w| {
        w.write_record([
            "solver",
            "seed",
            "energy",
            "hamming_weight",
            "k",
            "constraint_satisfied",
            "reads",
            "evaluations",
            "selection",
            "best_bits",
        ])?;
        w.write_record([
            report.solver_name.clone(),
            report.seed.to_string(),
            report.energy.to_string(),
            report.hamming_weight.to_string(),
            report.k.map(|k| k.to_string()).unwrap_or_default(),
            report.constraint_satisfied.to_string(),
            report.reads.to_string(),
            report.evaluations.to_string(),
            join(selection.indices()),
            bits_to_string(&report.best_bits),
        ])
    })
}

fn join(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn select(cli: &Cli, a: &SelectArgs, out: &mut Run) -> Result<i32, CliError> {
    let (data, problem) = load_problem(&a.problem)?;
    let model = compile_qubo(&problem);
    let report = solve(&model, &a.solver.config(cli.seed))?;
    let selection = report.selection(data.n());
    match cli.format {
        Format::Json => out.write_json(
            "report.json",
            &SelectOutput {
                selection: selection.indices(),
                labels: data
                    .labels()
                    .map(|_| selection.indices().iter().map(|&i| data.label(i)).collect()),
                cost: evaluate_cost(&problem, &report.best_bits)?,
                report: &report,
            },
        )?,
        Format::Csv => {
            out.write("report.csv", &report_csv(&report, &selection)?)?;
            let rows = csv_bytes(|w| {
                w.write_record(["index", "label"])?;
                for &i in selection.indices() {
                    w.write_record([i.to_string(), data.label(i)])?;
                }
                Ok(())
            })?;
            out.write("selection.csv", &rows)?;
        }
    }
    Ok(constraint_code(&report))
}

fn compile(a: &CompileArgs, out: &mut Run) -> Result<i32, CliError> {
    let (_, problem) = load_problem(&a.problem)?;
    let model = match a.weighted.config(problem.k()) {
        Some(cfg) => compile_weighted_qubo(&problem, &cfg)?,
        None => compile_qubo(&problem),
    };
    let mut json = model.to_json()?;
    json.push('\n');
    out.write("qubo.json", json.as_bytes())?;
    let mut coo = Vec::new();
    model.write_coordinate(&mut coo)?;
    out.write("qubo.coo", &coo)?;
    Ok(0)
}

fn load_model(a: &SolveArgs) -> Result<QuboModel, CliError> {
    let mut model = if a.qubo.extension().is_some_and(|e| e == "json") {
        QuboModel::from_json(&read_text(&a.qubo)?)?
    } else {
        QuboModel::read_coordinate(open(&a.qubo)?)?
    };
    if let Some(k) = a.k {
        if k > model.num_vars() {
            return Err(CliError::Usage(format!(
                "--k {k} exceeds {} variables",
                model.num_vars()
            )));
        }
        model.set_cardinality(Some(k));
    }
    Ok(model)
}

fn solve_cmd(cli: &Cli, a: &SolveArgs, out: &mut Run) -> Result<i32, CliError> {
    let model = load_model(a)?;
    let report = solve(&model, &a.solver.config(cli.seed))?;
    match cli.format {
        Format::Json => out.write_json("report.json", &report)?,
        Format::Csv => {
            let span = match model.num_selection_vars() {
                0 => model.num_vars(),
                s => s,
            };
            let selection = report.selection(span);
            out.write("report.csv", &report_csv(&report, &selection)?)?;
        }
    }
    Ok(constraint_code(&report))
}

fn trials(cli: &Cli, a: &TrialsArgs, out: &mut Run) -> Result<i32, CliError> {
    let model = load_model(&a.solve)?;
    let k = model
        .cardinality()
        .ok_or_else(|| CliError::Usage("the model has no cardinality; pass --k".into()))?;
    let batch: TrialBatch = run_trials(&model, &a.solve.solver.config(cli.seed), a.trials, k)?;
    match cli.format {
        Format::Json => {
            let mut json = batch.to_json()?;
            json.push('\n');
            out.write("trials.json", json.as_bytes())?;
        }
        Format::Csv => {
            let mut buf = Vec::new();
            batch.write_csv(&mut buf)?;
            out.write("trials.csv", &buf)?;
        }
    }
    Ok(0)
}

fn sweep_sigma(cli: &Cli, a: &SweepArgs, out: &mut Run) -> Result<i32, CliError> {
    let params = SweepParams {
        curves_per_class: a.curves,
        num_samples: a.samples,
        metric: a.metric,
        penalty: a.penalty,
        sense: a.sense,
    };
    let config = a.solver.config(cli.seed);
    let points = a
        .sigmas
        .iter()
        .map(|&s| selector_core::finance::sigma_accuracy(s, a.trials, cli.seed, &params, &config))
        .collect::<Result<Vec<SweepPoint>, _>>()?;
    match cli.format {
        Format::Json => out.write_json("sweep.json", &points)?,
        Format::Csv => {
            let rows = csv_bytes(|w| {
                w.write_record(["sigma", "trials", "accuracy", "wrong_size"])?;
                for p in &points {
                    w.write_record([
                        p.sigma.to_string(),
                        p.trials.to_string(),
                        p.accuracy.to_string(),
                        p.wrong_size.to_string(),
                    ])?;
                }
                Ok(())
            })?;
            out.write("sweep.csv", &rows)?;
        }
    }
    Ok(0)
}

fn reconstruct(cli: &Cli, a: &ReconstructArgs, out: &mut Run) -> Result<i32, CliError> {
    let prices = PriceTable::read_csv(open(&a.prices)?)?.between(a.from, a.to)?;
    let returns = prices.returns()?;
    if let Some(k) = a.k_values.iter().find(|&&k| k > returns.n()) {
        return Err(CliError::Usage(format!(
            "--ks entry {k} exceeds {} assets",
            returns.n()
        )));
    }
    let params = CurveParams {
        metric: a.metric,
        penalty: a.penalty,
        sense: a.sense,
    };
    let curve: Vec<MsePoint> =
        mse_curve(&returns, &a.k_values, &params, &a.solver.config(cli.seed))?;
    match cli.format {
        Format::Json => out.write_json("mse.json", &curve)?,
        Format::Csv => {
            let rows = csv_bytes(|w| {
                w.write_record([
                    "k",
                    "mse",
                    "energy",
                    "hamming_weight",
                    "constraint_satisfied",
                    "selection",
                ])?;
                for p in &curve {
                    w.write_record([
                        p.k.to_string(),
                        p.mse.to_string(),
                        p.report.energy.to_string(),
                        p.report.hamming_weight.to_string(),
                        p.report.constraint_satisfied.to_string(),
                        join(&p.selection),
                    ])?;
                }
                Ok(())
            })?;
            out.write("mse.csv", &rows)?;
        }
    }

    let proxy = proxy_index(&returns);
    let mut columns = vec![
        ("proxy".to_string(), proxy.values.clone()),
        ("proxy_cum".to_string(), cumulative_returns(&proxy)?.values),
    ];
    for p in &curve {
        let subset = subset_index(&returns, &Selection::new(returns.n(), p.selection.clone())?)?;
        columns.push((format!("subset_k{}", p.k), subset.values.clone()));
        columns.push((
            format!("subset_k{}_cum", p.k),
            cumulative_returns(&subset)?.values,
        ));
    }
    let dates = returns.dates.clone().unwrap_or_default();
    let series = csv_bytes(|w| {
        let mut header = vec!["date".to_string()];
        header.extend(columns.iter().map(|(name, _)| name.clone()));
        w.write_record(&header)?;
        for (t, date) in dates.iter().enumerate() {
            let mut rec = vec![date.to_string()];
            rec.extend(columns.iter().map(|(_, v)| v[t].to_string()));
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    out.write("series.csv", &series)?;

    Ok(if curve.iter().all(|p| p.report.constraint_satisfied) {
        0
    } else {
        EXIT_CONSTRAINT
    })
}

fn enumerate(cli: &Cli, a: &EnumerateArgs, out: &mut Run) -> Result<i32, CliError> {
    let (_, problem) = load_problem(&a.problem)?;
    let n = problem.n();
    let target = match &a.target {
        Some(indices) => Selection::new(n, indices.clone())?,
        None => {
            let config = SolverConfig::new(Backend::Exhaustive, cli.seed);
            solve(&compile_qubo(&problem), &config)?.selection(n)
        }
    };
    let stats: CombinationStats = enumerate_combinations(&problem, a.k_filter, &target)?;
    match cli.format {
        Format::Json => out.write_json("enumerate.json", &stats)?,
        Format::Csv => {
            let summary = csv_bytes(|w| {
                w.write_record(["key", "value"])?;
                let mut row = |k: &str, v: String| w.write_record([k.to_string(), v]);
                row(
                    "k_filter",
                    stats.k_filter.map(|k| k.to_string()).unwrap_or_default(),
                )?;
                row("evaluated", stats.evaluated.to_string())?;
                row("mean", stats.costs.mean.to_string())?;
                row("std", stats.costs.std.to_string())?;
                row("min", stats.costs.min.to_string())?;
                row("max", stats.costs.max.to_string())?;
                for q in &stats.costs.quantiles {
                    row(&format!("q{}", q.q), q.value.to_string())?;
                }
                row("target", join(&stats.target))?;
                row("target_cost", stats.target_cost.to_string())?;
                row("target_percentile", stats.target_percentile.to_string())
            })?;
            out.write("summary.csv", &summary)?;
            let hist = csv_bytes(|w| {
                w.write_record(["lo", "hi", "count"])?;
                for b in &stats.costs.histogram {
                    w.write_record([b.lo.to_string(), b.hi.to_string(), b.count.to_string()])?;
                }
                Ok(())
            })?;
            out.write("histogram.csv", &hist)?;
        }
    }
    Ok(0)
}
