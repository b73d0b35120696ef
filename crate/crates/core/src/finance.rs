//! Returns, equal-weight index reconstruction, selection accuracy and
//! exhaustive cost-distribution analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, Selection, SolveReport};
use crate::distance::{build_distance_matrix, MetricKind};
use crate::error::{Error, Result};
use crate::objective::{compile_qubo, SelectorProblem, Sense};
use crate::solvers::{binomial, for_each_combination, solve, SolverConfig};

/// Close prices on a shared calendar, one row per ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<Vec<f64>>,
}

impl PriceTable {
    /// Reads `date,ticker,close` rows. Tickers come out sorted; every ticker
    /// must have a price on every date that appears in the file.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Parse(format!("price CSV lacks a `{name}` column")))
        };
        let (dc, tc, pc) = (col("date")?, col("ticker")?, col("close")?);
        let mut series: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
        let mut all_dates = BTreeSet::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |c: usize| {
                rec.get(c)
                    .ok_or_else(|| Error::Parse(format!("record {} is short", line + 1)))
            };
            let date = NaiveDate::parse_from_str(field(dc)?, "%Y-%m-%d")
                .map_err(|e| Error::Parse(format!("record {}: {e}", line + 1)))?;
            let ticker = field(tc)?.to_string();
            let close: f64 = field(pc)?
                .parse()
                .map_err(|_| Error::Parse(format!("record {}: bad close", line + 1)))?;
            if !(close > 0.0 && close.is_finite()) {
                return Err(Error::NonPositivePrice {
                    ticker,
                    date: date.to_string(),
                    price: close,
                });
            }
            all_dates.insert(date);
            if series
                .entry(ticker.clone())
                .or_default()
                .insert(date, close)
                .is_some()
            {
                return Err(Error::DuplicatePrice {
                    ticker,
                    date: date.to_string(),
                });
            }
        }
        let dates: Vec<NaiveDate> = all_dates.into_iter().collect();
        let mut tickers = Vec::with_capacity(series.len());
        let mut prices = Vec::with_capacity(series.len());
        for (ticker, s) in series {
            if let Some(d) = dates.iter().find(|d| !s.contains_key(d)) {
                return Err(Error::MissingPrice {
                    ticker,
                    date: d.to_string(),
                });
            }
            prices.push(s.into_values().collect());
            tickers.push(ticker);
        }
        Ok(Self {
            tickers,
            dates,
            prices,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "ticker", "close"])?;
        for (d, date) in self.dates.iter().enumerate() {
            for (t, ticker) in self.tickers.iter().enumerate() {
                w.write_record([
                    date.to_string(),
                    ticker.clone(),
                    self.prices[t][d].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Dates in `from..=to`, either bound optional.
    pub fn between(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Result<Self> {
        let keep: Vec<usize> = (0..self.dates.len())
            .filter(|&i| {
                from.is_none_or(|f| self.dates[i] >= f) && to.is_none_or(|t| self.dates[i] <= t)
            })
            .collect();
        if keep.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "window holds {} trading days, need at least 2",
                keep.len()
            )));
        }
        Ok(Self {
            tickers: self.tickers.clone(),
            dates: keep.iter().map(|&i| self.dates[i]).collect(),
            prices: self
                .prices
                .iter()
                .map(|p| keep.iter().map(|&i| p[i]).collect())
                .collect(),
        })
    }

    /// Simple returns labelled by ticker, dated by the later day of each pair.
    pub fn returns(&self) -> Result<ReturnsMatrix> {
        let mut r = returns_from_prices(&self.prices)?;
        r.labels = self.tickers.clone();
        r.dates = Some(self.dates[1..].to_vec());
        Ok(r)
    }
}

/// Per-asset daily simple returns over a shared window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub dates: Option<Vec<NaiveDate>>,
}

impl ReturnsMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let first = rows.first().ok_or(Error::TooFewRows { min: 1, found: 0 })?;
        let m = first.len();
        if m == 0 {
            return Err(Error::InvalidParameter("returns window is empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::Dimension {
                    row: i,
                    expected: m,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateInput(format!(
                    "row {i} has a non-finite return"
                )));
            }
        }
        let labels = (0..rows.len()).map(|i| format!("asset{i}")).collect();
        Ok(Self {
            rows,
            labels,
            dates: None,
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        DataMatrix::new(self.rows.clone(), Some(self.labels.clone()))
    }

    fn mean_of(&self, indices: &[usize], kind: IndexKind) -> IndexSeries {
        let count = indices.len() as f64;
        let values = (0..self.len())
            .map(|t| indices.iter().map(|&i| self.rows[i][t]).sum::<f64>() / count)
            .collect();
        IndexSeries { values, kind }
    }
}

/// `r_t = p_t / p_{t-1} - 1` for each series.
pub fn returns_from_prices(prices: &[Vec<f64>]) -> Result<ReturnsMatrix> {
    let len = prices.first().map_or(0, Vec::len);
    if len < 2 {
        return Err(Error::InvalidParameter(
            "need at least two prices per asset".into(),
        ));
    }
    let mut rows = Vec::with_capacity(prices.len());
    for (a, p) in prices.iter().enumerate() {
        if p.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: p.len(),
            });
        }
        if let Some((d, &v)) = p
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::NonPositivePrice {
                ticker: format!("asset{a}"),
                date: format!("day {d}"),
                price: v,
            });
        }
        rows.push(p.windows(2).map(|w| w[1] / w[0] - 1.0).collect());
    }
    ReturnsMatrix::new(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    ProxyIndex,
    SelectedSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSeries {
    pub values: Vec<f64>,
    pub kind: IndexKind,
}

/// Equal-weight average of every asset.
pub fn proxy_index(returns: &ReturnsMatrix) -> IndexSeries {
    let all: Vec<usize> = (0..returns.n()).collect();
    returns.mean_of(&all, IndexKind::ProxyIndex)
}

/// Equal-weight average of the selected assets.
pub fn subset_index(returns: &ReturnsMatrix, selection: &Selection) -> Result<IndexSeries> {
    if selection.n() != returns.n() {
        return Err(Error::LengthMismatch {
            left: returns.n(),
            right: selection.n(),
        });
    }
    if selection.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(returns.mean_of(selection.indices(), IndexKind::SelectedSubset))
}

pub fn mse(a: &IndexSeries, b: &IndexSeries) -> Result<f64> {
    if a.values.len() != b.values.len() {
        return Err(Error::LengthMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    if a.values.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    Ok(sum / a.values.len() as f64)
}

/// `c_t = prod_{u <= t} (1 + r_u) - 1`.
pub fn cumulative_returns(s: &IndexSeries) -> Result<IndexSeries> {
    let mut growth = 1.0;
    let mut values = Vec::with_capacity(s.values.len());
    for (index, &r) in s.values.iter().enumerate() {
        if r <= -1.0 {
            return Err(Error::DegenerateReturn { index, value: r });
        }
        growth *= 1.0 + r;
        values.push(growth - 1.0);
    }
    Ok(IndexSeries {
        values,
        kind: s.kind,
    })
}

/// Problem settings shared by every `k` of an MSE curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub metric: MetricKind,
    pub penalty: f64,
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub k: usize,
    pub selection: Vec<usize>,
    pub mse: f64,
    pub report: SolveReport,
}

/// For each `k`, selects `k` assets and measures how well their equal-weight
/// average tracks the proxy index.
pub fn mse_curve(
    returns: &ReturnsMatrix,
    k_values: &[usize],
    params: &CurveParams,
    config: &SolverConfig,
) -> Result<Vec<MsePoint>> {
    if k_values.is_empty() {
        return Ok(Vec::new());
    }
    let n = returns.n();
    if let Some(&k) = k_values.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={n}")));
    }
    let d = build_distance_matrix(&returns.to_data_matrix()?, params.metric)?;
    let proxy = proxy_index(returns);
    k_values
        .iter()
        .map(|&k| {
            let problem =
                SelectorProblem::new(d.clone(), k, params.penalty)?.with_sense(params.sense);
            let report = solve(&compile_qubo(&problem), config)?;
            let selection = report.selection(n);
            let mse = mse(&subset_index(returns, &selection)?, &proxy)?;
            Ok(MsePoint {
                k,
                selection: selection.indices().to_vec(),
                mse,
                report,
            })
        })
        .collect()
}

/// Dataset and problem settings for a noise sweep over sine/cosine data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub curves_per_class: usize,
    pub num_samples: usize,
    pub metric: MetricKind,
    pub penalty: f64,
    pub sense: Sense,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            curves_per_class: 50,
            num_samples: 100,
            metric: MetricKind::Correlation,
            penalty: crate::objective::DEFAULT_PENALTY,
            sense: Sense::Cohesive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub trials: usize,
    pub accuracy: f64,
    /// Trials whose selection did not hold exactly two curves; each counts
    /// as a miss.
    pub wrong_size: usize,
}

/// Accuracy of pair selection at noise level `sigma`. Trial `t` regenerates
/// the data and solves with seed `derive_seed(seed, t)`.
pub fn sigma_accuracy(
    sigma: f64,
    trials: usize,
    seed: u64,
    params: &SweepParams,
    config: &SolverConfig,
) -> Result<SweepPoint> {
    use crate::solvers::derive_seed;
    use crate::synth::{gen_trig, TrigSpec};
    use rayon::prelude::*;

    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let picks = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(seed, t);
            let data = gen_trig(&TrigSpec {
                curves_per_class: params.curves_per_class,
                num_samples: params.num_samples,
                sigma,
                seed: trial_seed,
            })?;
            let d = build_distance_matrix(&data.data, params.metric)?;
            let problem = SelectorProblem::new(d, 2, params.penalty)?.with_sense(params.sense);
            let cfg = SolverConfig {
                seed: trial_seed,
                ..config.clone()
            };
            let report = solve(&compile_qubo(&problem), &cfg)?;
            Ok((report.selection(data.data.n()), data.classes))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut hits = 0;
    let mut wrong_size = 0;
    for (selection, classes) in &picks {
        if selection.len() == 2 {
            hits += (class_accuracy(std::slice::from_ref(selection), classes)? == 1.0) as usize;
        } else {
            wrong_size += 1;
        }
    }
    Ok(SweepPoint {
        sigma,
        trials,
        accuracy: hits as f64 / trials as f64,
        wrong_size,
    })
}

/// Fraction of size-2 selections holding one index of each binary class.
pub fn class_accuracy(selections: &[Selection], classes: &[usize]) -> Result<f64> {
    if selections.is_empty() {
        return Err(Error::InvalidParameter("no selections to score".into()));
    }
    if let Some(c) = classes.iter().find(|&&c| c > 1) {
        return Err(Error::InvalidParameter(format!("class {c} is not binary")));
    }
    let mut hits = 0;
    for s in selections {
        if s.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "selection has {} indices, expected 2",
                s.len()
            )));
        }
        if s.n() != classes.len() {
            return Err(Error::LengthMismatch {
                left: classes.len(),
                right: s.n(),
            });
        }
        let idx = s.indices();
        if classes[idx[0]] != classes[idx[1]] {
            hits += 1;
        }
    }
    Ok(hits as f64 / selections.len() as f64)
}

/// Largest `n` for unfiltered enumeration.
pub const ENUMERATION_MAX_VARS: usize = 24;
/// Largest `C(n, k)` for filtered enumeration.
pub const ENUMERATION_MAX_COMBINATIONS: u128 = 10_000_000;
const HISTOGRAM_BINS: usize = 50;
const QUANTILES: [f64; 9] = [0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub quantiles: Vec<Quantile>,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationStats {
    pub k_filter: Option<usize>,
    pub evaluated: u64,
    pub costs: CostSummary,
    pub target: Vec<usize>,
    pub target_cost: f64,
    /// Fraction of enumerated costs strictly below `target_cost`.
    pub target_percentile: f64,
}

/// Evaluates the compiled objective on every assignment (or every weight-`k`
/// assignment) and places `target` within that distribution. Targets and
/// enumerated states go through the same evaluator, so a target at the
/// minimum has percentile exactly 0.
pub fn enumerate_combinations(
    problem: &SelectorProblem,
    k_filter: Option<usize>,
    target: &Selection,
) -> Result<CombinationStats> {
    let n = problem.n();
    if target.n() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: target.n(),
        });
    }
    let model = compile_qubo(problem);
    let mut costs = Vec::new();
    match k_filter {
        Some(k) => {
            let count = binomial(n, k);
            if count > ENUMERATION_MAX_COMBINATIONS {
                return Err(Error::EnumerationTooLarge {
                    count,
                    limit: ENUMERATION_MAX_COMBINATIONS,
                });
            }
            costs.reserve(count as usize);
            for_each_combination(n, k, |s| costs.push(model.energy_of_support(s)));
        }
        None => {
            if n > ENUMERATION_MAX_VARS {
                return Err(Error::EnumerationTooLarge {
                    count: 1u128 << n,
                    limit: 1u128 << ENUMERATION_MAX_VARS,
                });
            }
            costs.reserve(1 << n);
            let mut support = Vec::with_capacity(n);
            for mask in 0u64..1 << n {
                support.clear();
                support.extend((0..n).filter(|&i| mask >> (n - 1 - i) & 1 == 1));
                costs.push(model.energy_of_support(&support));
            }
        }
    }
    let target_cost = model.energy_of_support(target.indices());
    let below = costs.iter().filter(|&&c| c < target_cost).count();
    let evaluated = costs.len() as u64;
    Ok(CombinationStats {
        k_filter,
        evaluated,
        target: target.indices().to_vec(),
        target_cost,
        target_percentile: below as f64 / evaluated as f64,
        costs: summarize(costs),
    })
}

fn summarize(mut costs: Vec<f64>) -> CostSummary {
    let n = costs.len() as f64;
    let mean = costs.iter().sum::<f64>() / n;
    let std = (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n).sqrt();
    costs.sort_by(f64::total_cmp);
    let (min, max) = (costs[0], costs[costs.len() - 1]);
    let quantiles = QUANTILES
        .iter()
        .map(|&q| {
            let pos = q * (costs.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            let frac = pos - lo as f64;
            Quantile {
                q,
                value: costs[lo] + (costs[hi] - costs[lo]) * frac,
            }
        })
        .collect();
    let width = (max - min) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &c in &costs {
        let b = if width > 0.0 {
            (((c - min) / width) as usize).min(HISTOGRAM_BINS - 1)
        } else {
            0
        };
        counts[b] += 1;
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(b, count)| HistogramBin {
            lo: min + width * b as f64,
            hi: if b + 1 == HISTOGRAM_BINS {
                max
            } else {
                min + width * (b + 1) as f64
            },
            count,
        })
        .collect();
    CostSummary {
        mean,
        std,
        min,
        max,
        quantiles,
        histogram,
    }
}
