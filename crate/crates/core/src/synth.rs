//! Synthetic datasets: Gaussian blobs, noisy sine/cosine series and coupled
//! geometric SDE paths.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::solvers::read_rng;

/// Rows plus the generating class of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub data: DataMatrix,
    pub classes: Vec<usize>,
}

impl LabeledData {
    /// Sidecar CSV with columns `row,class`.
    pub fn write_classes_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["row", "class"])?;
        for (i, c) in self.classes.iter().enumerate() {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_classes_csv<R: std::io::Read>(reader: R) -> Result<Vec<usize>> {
        let mut r = csv::Reader::from_reader(reader);
        let mut classes = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let cell = rec
                .get(rec.len().saturating_sub(1))
                .ok_or_else(|| Error::Parse(format!("empty class record {line}")))?;
            classes.push(
                cell.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad class `{cell}` on record {line}")))?,
            );
        }
        Ok(classes)
    }
}

fn labeled(rows: Vec<Vec<f64>>, classes: Vec<usize>) -> Result<LabeledData> {
    Ok(LabeledData {
        data: DataMatrix::new(rows, None)?,
        classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub centers: Vec<[f64; 2]>,
    pub points_per_blob: usize,
    pub std_dev: f64,
    pub seed: u64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            centers: vec![[-15.0, 0.0], [15.0, 0.0]],
            points_per_blob: 90,
            std_dev: 2.0,
            seed: 0,
        }
    }
}

/// `points_per_blob` isotropic Gaussian points around each center, blob by
/// blob; class `b` is the blob index.
pub fn gen_blobs(spec: &BlobSpec) -> Result<LabeledData> {
    if spec.centers.is_empty() || spec.points_per_blob == 0 {
        return Err(Error::InvalidParameter(
            "need at least one center and one point per blob".into(),
        ));
    }
    let noise = Normal::new(0.0, spec.std_dev)
        .ok()
        .filter(|_| spec.std_dev > 0.0)
        .ok_or_else(|| Error::InvalidParameter(format!("std_dev {} must be > 0", spec.std_dev)))?;
    let mut rng = read_rng(spec.seed, 0);
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for (b, c) in spec.centers.iter().enumerate() {
        for _ in 0..spec.points_per_blob {
            rows.push(vec![
                c[0] + noise.sample(&mut rng),
                c[1] + noise.sample(&mut rng),
            ]);
            classes.push(b);
        }
    }
    labeled(rows, classes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSpec {
    pub curves_per_class: usize,
    pub num_samples: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for TrigSpec {
    fn default() -> Self {
        Self {
            curves_per_class: 50,
            num_samples: 100,
            sigma: 0.1,
            seed: 0,
        }
    }
}

/// `num_samples` evenly spaced points from 0 to 2π inclusive.
pub fn trig_grid(num_samples: usize) -> Vec<f64> {
    let last = (num_samples - 1) as f64;
    (0..num_samples).map(|i| TAU * i as f64 / last).collect()
}

/// `curves_per_class` noisy sine rows (class 0) followed by as many noisy
/// cosine rows (class 1).
pub fn gen_trig(spec: &TrigSpec) -> Result<LabeledData> {
    if spec.num_samples < 2 || spec.curves_per_class == 0 {
        return Err(Error::InvalidParameter(
            "need num_samples >= 2 and curves_per_class >= 1".into(),
        ));
    }
    if !(spec.sigma.is_finite() && spec.sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma {} must be finite and >= 0",
            spec.sigma
        )));
    }
    let grid = trig_grid(spec.num_samples);
    let mut rng = read_rng(spec.seed, 0);
    let mut rows = Vec::with_capacity(2 * spec.curves_per_class);
    let mut classes = Vec::with_capacity(2 * spec.curves_per_class);
    for (class, f) in [(0, f64::sin as fn(f64) -> f64), (1, f64::cos)] {
        for _ in 0..spec.curves_per_class {
            rows.push(
                grid.iter()
                    .map(|&t| {
                        let z: f64 = rng.sample(StandardNormal);
                        f(t) + spec.sigma * z
                    })
                    .collect(),
            );
            classes.push(class);
        }
    }
    labeled(rows, classes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeSpec {
    pub dims: usize,
    pub mu: Vec<f64>,
    /// `dims x dims`, row `i` loads the Brownian increments onto dimension `i`.
    pub sigma: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
}

impl Default for SdeSpec {
    fn default() -> Self {
        Self::with_dims(2)
    }
}

impl SdeSpec {
    /// Zero drift, zero volatility and unit start in `dims` dimensions over
    /// one 253-step year.
    pub fn with_dims(dims: usize) -> Self {
        Self {
            dims,
            mu: vec![0.0; dims],
            sigma: vec![vec![0.0; dims]; dims],
            x0: vec![1.0; dims],
            dt: 1.0 / 253.0,
            steps: 253,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dims == 0 {
            return bad("dims must be >= 1".into());
        }
        if self.mu.len() != self.dims || self.x0.len() != self.dims {
            return bad(format!("mu and x0 need {} entries", self.dims));
        }
        if self.sigma.len() != self.dims || self.sigma.iter().any(|r| r.len() != self.dims) {
            return bad(format!("sigma must be {0}x{0}", self.dims));
        }
        if self.x0.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return bad("x0 entries must be positive".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt {} must be > 0", self.dt));
        }
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        Ok(())
    }
}

/// One Euler-Maruyama path per dimension, `steps + 1` values each, using
/// `x_i <- x_i (1 + mu_i dt + sum_j sigma_ij dW_j)` with `dW_j ~ N(0, dt)`.
fn sde_paths<R: Rng>(spec: &SdeSpec, rng: &mut R) -> Vec<Vec<f64>> {
    let d = spec.dims;
    let sqrt_dt = spec.dt.sqrt();
    let mut paths: Vec<Vec<f64>> = spec
        .x0
        .iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(spec.steps + 1);
            p.push(x);
            p
        })
        .collect();
    let mut x = spec.x0.clone();
    let mut dw = vec![0.0; d];
    for _ in 0..spec.steps {
        for w in dw.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *w = sqrt_dt * z;
        }
        for i in 0..d {
            let shock: f64 = spec.sigma[i].iter().zip(&dw).map(|(s, w)| s * w).sum();
            x[i] *= 1.0 + spec.mu[i] * spec.dt + shock;
            paths[i].push(x[i]);
        }
    }
    paths
}

/// One realization: row `i` is dimension `i`, class `i`.
pub fn gen_sde(spec: &SdeSpec) -> Result<LabeledData> {
    spec.validate()?;
    let rows = sde_paths(spec, &mut read_rng(spec.seed, 0));
    labeled(rows, (0..spec.dims).collect())
}

/// Source of the drift and volatility entries of a population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamSampler {
    Uniform {
        low: f64,
        high: f64,
    },
    Gaussian {
        mean: f64,
        std: f64,
    },
    /// Keeps the base spec's `mu` and `sigma`.
    Fixed,
}

impl ParamSampler {
    fn validate(&self) -> Result<()> {
        match *self {
            ParamSampler::Uniform { low, high }
                if !(low < high && low.is_finite() && high.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "need finite low < high, got [{low}, {high}]"
                )))
            }
            ParamSampler::Gaussian { mean, std }
                if !(mean.is_finite() && std.is_finite() && std >= 0.0) =>
            {
                Err(Error::InvalidParameter(format!(
                    "bad gaussian({mean}, {std})"
                )))
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamSampler::Uniform { low, high } => rng.random_range(low..high),
            ParamSampler::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            ParamSampler::Fixed => unreachable!("fixed sampler draws nothing"),
        }
    }
}

/// Draws one drift vector and volatility matrix, then simulates
/// `num_realizations` independent paths of the shared system. Each dimension
/// forms a cluster: rows are grouped by dimension, realizations in order
/// within each group, and class `i` marks dimension `i`.
pub fn gen_sde_population(
    base: &SdeSpec,
    num_realizations: usize,
    sampler: ParamSampler,
) -> Result<LabeledData> {
    base.validate()?;
    sampler.validate()?;
    if num_realizations == 0 {
        return Err(Error::InvalidParameter(
            "num_realizations must be >= 1".into(),
        ));
    }
    let mut spec = base.clone();
    if sampler != ParamSampler::Fixed {
        let mut rng = read_rng(base.seed, 0);
        for m in spec.mu.iter_mut() {
            *m = sampler.draw(&mut rng);
        }
        for row in spec.sigma.iter_mut() {
            for s in row.iter_mut() {
                *s = sampler.draw(&mut rng);
            }
        }
    }
    let realizations: Vec<Vec<Vec<f64>>> = (0..num_realizations as u64)
        .map(|r| sde_paths(&spec, &mut read_rng(base.seed, r + 1)))
        .collect();
    let mut rows = Vec::with_capacity(num_realizations * spec.dims);
    let mut classes = Vec::with_capacity(num_realizations * spec.dims);
    for dim in 0..spec.dims {
        for paths in &realizations {
            rows.push(paths[dim].clone());
            classes.push(dim);
        }
    }
    labeled(rows, classes)
}
