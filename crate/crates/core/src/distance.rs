//! Pairwise distances between data rows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, DistanceMatrix};
use crate::error::{Error, Result};

/// Distance used to fill a [`DistanceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MetricKind {
    Euclidean,
    /// `1 - Pearson correlation`.
    Correlation,
    /// `1 - cosine similarity`.
    Cosine,
    Minkowski(f64),
    /// Euclidean after dividing each coordinate by its column's sample
    /// standard deviation over the whole dataset.
    StandardizedEuclidean,
}

impl MetricKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricKind::Minkowski(p) if !(p > 0.0 && p.is_finite()) => Err(
                Error::InvalidParameter(format!("Minkowski order must be > 0, got {p}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Euclidean => f.write_str("euclidean"),
            MetricKind::Correlation => f.write_str("correlation"),
            MetricKind::Cosine => f.write_str("cosine"),
            MetricKind::Minkowski(p) => write!(f, "minkowski:{p}"),
            MetricKind::StandardizedEuclidean => f.write_str("seuclidean"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let metric = match s.as_str() {
            "euclidean" => MetricKind::Euclidean,
            "correlation" => MetricKind::Correlation,
            "cosine" => MetricKind::Cosine,
            "seuclidean" => MetricKind::StandardizedEuclidean,
            other => match other.strip_prefix("minkowski:") {
                Some(p) => MetricKind::Minkowski(
                    p.parse()
                        .map_err(|_| Error::Parse(format!("bad Minkowski order `{p}`")))?,
                ),
                None => return Err(Error::Parse(format!("unknown metric `{other}`"))),
            },
        };
        metric.validate()?;
        Ok(metric)
    }
}

impl TryFrom<String> for MetricKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MetricKind> for String {
    fn from(m: MetricKind) -> String {
        m.to_string()
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

pub fn minkowski(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    same_len(a, b)?;
    MetricKind::Minkowski(p).validate()?;
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// `1 - r` where `r` is the Pearson correlation of `a` and `b`; lies in
/// `[0, 2]`. Constant inputs have no correlation and are rejected.
pub fn correlation_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    if a.len() < 2 {
        return Err(Error::DegenerateInput(
            "correlation needs at least two samples".into(),
        ));
    }
    let len = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / len;
    let mean_b = b.iter().sum::<f64>() / len;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (da, db) = (x - mean_a, y - mean_b);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateInput(
            "constant vector has zero variance".into(),
        ));
    }
    let r = sab / (saa * sbb).sqrt();
    Ok((1.0 - r).clamp(0.0, 2.0))
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::DegenerateInput(
            "zero vector has no direction".into(),
        ));
    }
    Ok((1.0 - ab / (aa * bb).sqrt()).clamp(0.0, 2.0))
}

/// Euclidean distance with coordinate `j` divided by `scale[j]`.
pub fn standardized_euclidean(a: &[f64], b: &[f64], scale: &[f64]) -> Result<f64> {
    same_len(a, b)?;
    same_len(a, scale)?;
    Ok(a.iter()
        .zip(b)
        .zip(scale)
        .map(|((x, y), s)| {
            let z = (x - y) / s;
            z * z
        })
        .sum::<f64>()
        .sqrt())
}

/// Per-column sample standard deviations (ddof = 1).
pub fn column_std(data: &DataMatrix) -> Vec<f64> {
    let n = data.n() as f64;
    (0..data.m())
        .map(|j| {
            let mean = data.rows().map(|r| r[j]).sum::<f64>() / n;
            let ss: f64 = data.rows().map(|r| (r[j] - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect()
}

/// Evaluates `metric` on every row pair. The upper triangle is computed in
/// parallel and mirrored; the diagonal is exactly zero.
pub fn build_distance_matrix(data: &DataMatrix, metric: MetricKind) -> Result<DistanceMatrix> {
    metric.validate()?;
    let scale = match metric {
        MetricKind::StandardizedEuclidean => {
            let s = column_std(data);
            if let Some(j) = s.iter().position(|&v| v == 0.0) {
                return Err(Error::DegenerateInput(format!(
                    "column {j} has zero variance"
                )));
            }
            s
        }
        _ => Vec::new(),
    };
    let pair = |a: &[f64], b: &[f64]| -> Result<f64> {
        match metric {
            MetricKind::Euclidean => euclidean(a, b),
            MetricKind::Correlation => correlation_distance(a, b),
            MetricKind::Cosine => cosine_distance(a, b),
            MetricKind::Minkowski(p) => minkowski(a, b, p),
            MetricKind::StandardizedEuclidean => standardized_euclidean(a, b, &scale),
        }
    };
    let n = data.n();
    let rows: Vec<Vec<Result<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| pair(data.row(i), data.row(j))).collect())
        .collect();
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            upper.push(v.map_err(|e| Error::Metric {
                i,
                j,
                source: Box::new(e),
            })?);
        }
    }
    DistanceMatrix::from_upper_values(n, upper)
}
