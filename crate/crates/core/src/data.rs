//! Shared value types: datasets, distance matrices, selections and solver
//! reports.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` data points stored row-major, each a feature vector of length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    m: usize,
    labels: Option<Vec<String>>,
}

impl DataMatrix {
    /// Validates and packs the rows. Requires `n >= 2`, equal row lengths
    /// `m >= 1`, and (when given) exactly `n` distinct labels.
    pub fn new(rows: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooFewRows {
                min: 2,
                found: rows.len(),
            });
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::Dimension {
                row: 0,
                expected: 1,
                found: 0,
            });
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::Dimension {
                    row,
                    expected: m,
                    found: r.len(),
                });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != rows.len() {
                return Err(Error::LabelCount {
                    expected: rows.len(),
                    found: labels.len(),
                });
            }
            let mut seen = HashSet::with_capacity(labels.len());
            for l in labels {
                if !seen.insert(l.as_str()) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
            }
        }
        let n = rows.len();
        let values = rows.into_iter().flatten().collect();
        Ok(Self {
            values,
            n,
            m,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.m)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of row `i`, or its index when the matrix is unlabeled.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Reads the CSV layout written by [`DataMatrix::write_csv`]. A header row
    /// is optional; a leading non-numeric column is taken as row labels.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.iter().all(|c| c.is_empty()) {
                continue;
            }
            records.push(rec);
        }
        let numeric = |s: &str| s.parse::<f64>().is_ok();
        let mut start = 0;
        if let Some(first) = records.first() {
            let header = if first.len() == 1 {
                !numeric(&first[0])
            } else {
                first.iter().skip(1).any(|c| !numeric(c))
            };
            if header {
                start = 1;
            }
        }
        let body = &records[start..];
        let has_labels = body.first().is_some_and(|r| !numeric(&r[0]));
        let mut rows = Vec::with_capacity(body.len());
        let mut labels = Vec::new();
        for (line, rec) in body.iter().enumerate() {
            let mut cells = rec.iter();
            if has_labels {
                labels.push(cells.next().unwrap_or_default().to_string());
            }
            let row = cells
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("row {line}: `{c}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(rows, has_labels.then_some(labels))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = Vec::with_capacity(self.m + 1);
        if self.labels.is_some() {
            header.push("label".into());
        }
        header.extend((0..self.m).map(|j| format!("c{j}")));
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut rec: Vec<String> = Vec::with_capacity(self.m + 1);
            if let Some(labels) = &self.labels {
                rec.push(labels[i].clone());
            }
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Symmetric `n x n` matrix of non-negative distances with a zero diagonal.
///
/// Only the upper triangle is ever computed; the lower triangle is a mirror,
/// so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds the matrix from `f(i, j)` evaluated once for every `i < j`.
    pub fn from_upper<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j)?);
            }
        }
        Self::from_upper_values(n, upper)
    }

    /// Builds the matrix from the row-major strict upper triangle.
    pub fn from_upper_values(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::LengthMismatch {
                left: expected,
                right: upper.len(),
            });
        }
        let mut entries = vec![0.0; n * n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = it.next().expect("length checked");
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "distance ({i}, {j}) = {v} is not finite and non-negative"
                    )));
                }
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(Self { n, entries })
    }

    /// Accepts a full square matrix, checking symmetry and the zero diagonal
    /// exactly.
    pub fn from_full(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Dimension {
                    row: i,
                    expected: n,
                    found: r.len(),
                });
            }
            if r[i] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry ({i}, {i}) = {} is not zero",
                    r[i]
                )));
            }
        }
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                upper.push(rows[i][j]);
            }
        }
        Self::from_upper_values(n, upper)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Returns a copy with every entry multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let n = self.n;
        Self::from_upper(n, |i, j| Ok(self.get(i, j) * factor))
    }
}

/// A set of chosen row indices, kept sorted, together with the dataset size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection {
    n: usize,
    chosen: Vec<usize>,
}

impl Selection {
    pub fn new(n: usize, mut chosen: Vec<usize>) -> Result<Self> {
        chosen.sort_unstable();
        if let Some(w) = chosen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "index {} selected twice",
                w[0]
            )));
        }
        if let Some(&last) = chosen.last() {
            if last >= n {
                return Err(Error::InvalidParameter(format!(
                    "index {last} out of range for n = {n}"
                )));
            }
        }
        Ok(Self { n, chosen })
    }

    /// Bit `i` set means row `i` is chosen.
    pub fn from_bits(bits: &[bool]) -> Self {
        let chosen = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        Self {
            n: bits.len(),
            chosen,
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut bits = vec![false; self.n];
        for &i in &self.chosen {
            bits[i] = true;
        }
        bits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.chosen
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

/// Renders bits as a `0`/`1` string, index 0 leftmost.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("`{other}` in bit string"))),
        })
        .collect()
}

pub(crate) mod bitstring {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::bits_to_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_bits(&s).map_err(serde::de::Error::custom)
    }
}

/// Outcome of one solver invocation.
///
/// `wall_time` is measured but not serialized, so that reports written for
/// the same seed are byte-identical; it is also ignored by `PartialEq`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(with = "bitstring")]
    pub best_bits: Vec<bool>,
    pub energy: f64,
    pub hamming_weight: usize,
    pub k: Option<usize>,
    pub constraint_satisfied: bool,
    pub solver_name: String,
    pub seed: u64,
    /// Independent restarts that contributed to this report.
    pub reads: usize,
    /// Objective evaluations or flip proposals performed.
    pub evaluations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    /// Re-targets the cardinality check to `k`.
    pub fn with_cardinality(mut self, k: Option<usize>) -> Self {
        self.k = k;
        self.constraint_satisfied = k.is_none_or(|k| k == self.hamming_weight);
        self
    }

    pub fn selection(&self, num_selection_vars: usize) -> Selection {
        Selection::from_bits(&self.best_bits[..num_selection_vars])
    }
}

impl PartialEq for SolveReport {
    fn eq(&self, other: &Self) -> bool {
        self.best_bits == other.best_bits
            && self.energy.to_bits() == other.energy.to_bits()
            && self.hamming_weight == other.hamming_weight
            && self.k == other.k
            && self.constraint_satisfied == other.constraint_satisfied
            && self.solver_name == other.solver_name
            && self.seed == other.seed
            && self.reads == other.reads
            && self.evaluations == other.evaluations
    }
}
