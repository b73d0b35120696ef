//! The selection objective: direct evaluation and compilation to QUBO form.
//!
//! For a selection vector `x` over `n` rows, distance matrix `d`, target size
//! `k` and penalty `A`, the cohesive form is
//!
//! ```text
//! C(x) = (1/2k) x d x^T - (1/n) x d 1^T + A (sum_i x_i - k)^2
//! ```
//!
//! and the dispersed form negates the two distance terms. The weighted
//! variant replaces `x` by `chi_i = w_i x_i` in the distance terms, with each
//! `w_i` spelled out in binary digits, and adds `B (sum_i chi_i - W)^2`.

use serde::{Deserialize, Serialize};

use crate::data::DistanceMatrix;
use crate::error::{Error, Result};
use crate::qubo::{QuboModel, VarRole};

/// Orientation of the two distance terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// `+(1/2k) x d x^T - (1/n) x d 1^T`: rewards selected rows that sit
    /// close together and far from the rest of the data.
    #[default]
    Cohesive,
    /// `-(1/2k) x d x^T + (1/n) x d 1^T`: rewards selected rows that are far
    /// apart from each other and central within the data, i.e. one
    /// representative per cluster.
    Dispersed,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Cohesive => 1.0,
            Sense::Dispersed => -1.0,
        }
    }
}

impl std::str::FromStr for Sense {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cohesive" => Ok(Sense::Cohesive),
            "dispersed" => Ok(Sense::Dispersed),
            other => Err(Error::Parse(format!("unknown sense `{other}`"))),
        }
    }
}

/// Default cardinality penalty `A`.
pub const DEFAULT_PENALTY: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct SelectorProblem {
    d: DistanceMatrix,
    k: usize,
    penalty: f64,
    sense: Sense,
    row_sums: Vec<f64>,
}

impl SelectorProblem {
    pub fn new(d: DistanceMatrix, k: usize, penalty: f64) -> Result<Self> {
        let n = d.n();
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "k must lie in 1..={n}, got {k}"
            )));
        }
        if !(penalty.is_finite() && penalty >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty must be finite and >= 0, got {penalty}"
            )));
        }
        let row_sums = d.row_sums();
        Ok(Self {
            d,
            k,
            penalty,
            sense: Sense::default(),
            row_sums,
        })
    }

    pub fn with_sense(mut self, sense: Sense) -> Self {
        self.sense = sense;
        self
    }

    pub fn with_penalty(&self, penalty: f64) -> Result<Self> {
        Ok(Self::new(self.d.clone(), self.k, penalty)?.with_sense(self.sense))
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.d.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// `(1/2k) v d v^T` and `(1/n) v d 1^T` for a real vector `v`.
    fn distance_terms(&self, v: &[f64]) -> (f64, f64) {
        let n = self.n();
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            let row = self.d.row(i);
            let inner: f64 = (0..n).map(|j| row[j] * v[j]).sum();
            quad += v[i] * inner;
            lin += v[i] * self.row_sums[i];
        }
        (quad / (2.0 * self.k as f64), lin / n as f64)
    }
}

/// Binary expansion of the per-row weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedConfig {
    /// Digits per weight.
    pub n_d: usize,
    pub w_min: f64,
    pub w_max: f64,
    /// Budget penalty `B`.
    pub budget_penalty: f64,
    /// Weight budget `W`.
    pub budget: f64,
}

impl WeightedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_d == 0 || self.n_d > 52 {
            return Err(Error::InvalidParameter(format!(
                "n_d must lie in 1..=52, got {}",
                self.n_d
            )));
        }
        if !(self.w_min.is_finite() && self.w_max.is_finite()) || self.w_min >= self.w_max {
            return Err(Error::InvalidParameter(format!(
                "need finite w_min < w_max, got {} and {}",
                self.w_min, self.w_max
            )));
        }
        if !(self.budget_penalty.is_finite() && self.budget_penalty >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "budget penalty must be finite and >= 0, got {}",
                self.budget_penalty
            )));
        }
        if !self.budget.is_finite() {
            return Err(Error::InvalidParameter("budget must be finite".into()));
        }
        Ok(())
    }

    /// Place value of digit `j` (0-based): `(w_max - w_min) 2^j / (2^n_d - 1)`.
    pub fn digit_value(&self, j: usize) -> f64 {
        let denom = ((1u64 << self.n_d) - 1) as f64;
        (self.w_max - self.w_min) * (1u64 << j) as f64 / denom
    }
}

/// Weight encoded by one row of digits; digit 0 is the least significant.
pub fn expand_weight(config: &WeightedConfig, digits: &[bool]) -> f64 {
    assert_eq!(digits.len(), config.n_d, "digit count");
    config.w_min
        + digits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(j, _)| config.digit_value(j))
            .sum::<f64>()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            left: expected,
            right: found,
        });
    }
    Ok(())
}

/// Direct evaluation of the objective at `x`, independent of any compiled
/// model.
pub fn evaluate_cost(problem: &SelectorProblem, x: &[bool]) -> Result<f64> {
    check_len(problem.n(), x.len())?;
    let v: Vec<f64> = x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let (quad, lin) = problem.distance_terms(&v);
    let s = problem.sense.sign();
    let excess = v.iter().sum::<f64>() - problem.k as f64;
    Ok(s * quad - s * lin + problem.penalty * excess * excess)
}

/// Direct evaluation of the weighted objective with `chi_i = w_i x_i`.
pub fn evaluate_weighted_cost(
    problem: &SelectorProblem,
    config: &WeightedConfig,
    x: &[bool],
    weight_bits: &[Vec<bool>],
) -> Result<f64> {
    config.validate()?;
    check_len(problem.n(), x.len())?;
    check_len(problem.n(), weight_bits.len())?;
    for row in weight_bits {
        check_len(config.n_d, row.len())?;
    }
    let chi: Vec<f64> = x
        .iter()
        .zip(weight_bits)
        .map(|(&xi, digits)| {
            if xi {
                expand_weight(config, digits)
            } else {
                0.0
            }
        })
        .collect();
    let (quad, lin) = problem.distance_terms(&chi);
    let s = problem.sense.sign();
    let count = x.iter().filter(|&&b| b).count() as f64 - problem.k as f64;
    let budget = chi.iter().sum::<f64>() - config.budget;
    Ok(s * quad - s * lin
        + problem.penalty * count * count
        + config.budget_penalty * budget * budget)
}

/// Compiles the unweighted objective; one variable per row, no auxiliaries.
///
/// Expanding the square with `x_i^2 = x_i` gives
/// `Q_ii = -s r_i / n + A (1 - 2k)`, `Q_ij = s d_ij / k + 2A` for `i < j`,
/// and offset `A k^2`, where `r_i` is the row sum of `d` and `s = +-1`.
pub fn compile_qubo(problem: &SelectorProblem) -> QuboModel {
    let n = problem.n();
    let k = problem.k as f64;
    let a = problem.penalty;
    let s = problem.sense.sign();
    let mut model = QuboModel::with_roles((0..n).map(VarRole::Select).collect());
    for i in 0..n {
        model.add_linear(i, -s * problem.row_sums[i] / n as f64 + a * (1.0 - 2.0 * k));
        for j in i + 1..n {
            model.add_pair(i, j, s * problem.d.get(i, j) / k + 2.0 * a);
        }
    }
    model.add_offset(a * k * k);
    model.set_cardinality(Some(problem.k));
    model
}

/// Variable layout of a compiled weighted model: `x` first, then the weight
/// digits `X`, then the products `y = x X`, each block row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightedLayout {
    pub n: usize,
    pub n_d: usize,
}

impl WeightedLayout {
    pub fn num_vars(&self) -> usize {
        self.n + 2 * self.n * self.n_d
    }

    pub fn select(&self, i: usize) -> usize {
        i
    }

    pub fn digit(&self, i: usize, j: usize) -> usize {
        self.n + i * self.n_d + j
    }

    pub fn product(&self, i: usize, j: usize) -> usize {
        self.n + self.n * self.n_d + i * self.n_d + j
    }

    fn roles(&self) -> Vec<VarRole> {
        let mut roles: Vec<VarRole> = (0..self.n).map(VarRole::Select).collect();
        for i in 0..self.n {
            roles.extend((0..self.n_d).map(|j| VarRole::WeightBit(i, j)));
        }
        for i in 0..self.n {
            roles.extend((0..self.n_d).map(|j| VarRole::Product(i, j)));
        }
        roles
    }

    /// Full assignment with every product bit consistent with `x` and `X`.
    pub fn assemble(&self, x: &[bool], weight_bits: &[Vec<bool>]) -> Vec<bool> {
        let mut bits = vec![false; self.num_vars()];
        for i in 0..self.n {
            bits[self.select(i)] = x[i];
            for j in 0..self.n_d {
                bits[self.digit(i, j)] = weight_bits[i][j];
                bits[self.product(i, j)] = x[i] && weight_bits[i][j];
            }
        }
        bits
    }

    /// Splits an assignment back into `(x, X)`.
    pub fn split(&self, bits: &[bool]) -> (Vec<bool>, Vec<Vec<bool>>) {
        let x = bits[..self.n].to_vec();
        let w = (0..self.n)
            .map(|i| (0..self.n_d).map(|j| bits[self.digit(i, j)]).collect())
            .collect();
        (x, w)
    }
}

/// Compiles the weighted objective to QUBO.
///
/// `chi_i = w_min x_i + sum_j c_j y_ij` with `y_ij` standing in for
/// `x_i X_ij`, which makes every term at most quadratic. Each product is then
/// enforced by `M (3y + xX - 2xy - 2Xy)`, zero iff `y = xX` and at least `M`
/// otherwise, with `M` one more than the total absolute coefficient mass of
/// the objective before the products are enforced.
pub fn compile_weighted_qubo(
    problem: &SelectorProblem,
    config: &WeightedConfig,
) -> Result<QuboModel> {
    config.validate()?;
    let n = problem.n();
    let layout = WeightedLayout { n, n_d: config.n_d };
    let s = problem.sense.sign();
    let k = problem.k as f64;
    let mut model = QuboModel::with_roles(layout.roles());

    let chi: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut terms = Vec::with_capacity(config.n_d + 1);
            if config.w_min != 0.0 {
                terms.push((layout.select(i), config.w_min));
            }
            terms.extend((0..config.n_d).map(|j| (layout.product(i, j), config.digit_value(j))));
            terms
        })
        .collect();

    for i in 0..n {
        for &(v, a) in &chi[i] {
            model.add_linear(v, -s * a * problem.row_sums[i] / n as f64);
        }
        for l in i + 1..n {
            // the ordered pairs (i, l) and (l, i) share 1/2k
            model.add_product(&chi[i], &chi[l], s * problem.d.get(i, l) / k);
        }
    }
    let select_terms: Vec<(usize, f64)> = (0..n).map(|i| (layout.select(i), 1.0)).collect();
    model.add_squared(&select_terms, -k, problem.penalty);
    let all_chi: Vec<(usize, f64)> = chi.iter().flatten().copied().collect();
    model.add_squared(&all_chi, -config.budget, config.budget_penalty);

    let m = 1.0 + model.sum_abs_coeffs();
    for i in 0..n {
        let x = layout.select(i);
        for j in 0..config.n_d {
            let (w, y) = (layout.digit(i, j), layout.product(i, j));
            model.add_linear(y, 3.0 * m);
            model.add_pair(x, w, m);
            model.add_pair(x, y, -2.0 * m);
            model.add_pair(w, y, -2.0 * m);
        }
    }
    model.set_cardinality(Some(problem.k));
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_point(k: usize, a: f64) -> SelectorProblem {
        let d = DistanceMatrix::from_full(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        SelectorProblem::new(d, k, a).unwrap()
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> SelectorProblem {
        let d = DistanceMatrix::from_upper(n, |_, _| Ok(rng.random_range(0.0..3.0))).unwrap();
        let k = rng.random_range(1..=n);
        let a = rng.random_range(0.0..4.0);
        let sense = if rng.random_bool(0.5) {
            Sense::Cohesive
        } else {
            Sense::Dispersed
        };
        SelectorProblem::new(d, k, a).unwrap().with_sense(sense)
    }

    fn bits_of(mask: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn cost_examples() {
        let p = two_point(1, 2.0);
        assert_eq!(evaluate_cost(&p, &[false, false]).unwrap(), 2.0);
        // quadratic 0, linear -(1/2)(0 + 1), penalty 0
        assert_eq!(evaluate_cost(&p, &[true, false]).unwrap(), -0.5);
        // quadratic (1/2)(1 + 1), linear -(1/2)(1 + 1), penalty 2 * 1
        assert_eq!(evaluate_cost(&p, &[true, true]).unwrap(), 2.0);
        assert!(evaluate_cost(&p, &[true]).is_err());
    }

    #[test]
    fn all_zero_cost_is_penalty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..9);
            let p = random_problem(&mut rng, n);
            let expected = p.penalty() * (p.k() * p.k()) as f64;
            assert!((evaluate_cost(&p, &vec![false; n]).unwrap() - expected).abs() < 1e-12);
            assert!((compile_qubo(&p).energy(&vec![false; n]) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn compiled_two_point() {
        let m = compile_qubo(&two_point(1, 2.0));
        assert_eq!(m.num_vars(), 2);
        for (bits, e) in [
            ([false, false], 2.0),
            ([true, false], -0.5),
            ([false, true], -0.5),
            ([true, true], 2.0),
        ] {
            assert!((m.energy(&bits) - e).abs() < 1e-12, "{bits:?}");
        }
    }

    #[test]
    fn unpenalized_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_problem(&mut rng, 6).with_penalty(0.0).unwrap();
        let m = compile_qubo(&p);
        assert_eq!(m.offset(), 0.0);
        let sums = p.distances().row_sums();
        let s = if p.sense() == Sense::Cohesive {
            1.0
        } else {
            -1.0
        };
        for i in 0..6 {
            assert!((m.linear(i) + s * sums[i] / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_expansion_examples() {
        let c = WeightedConfig {
            n_d: 2,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.0,
            budget: 1.0,
        };
        assert_eq!(expand_weight(&c, &[false, false]), 0.0);
        assert_eq!(expand_weight(&c, &[true, true]), 1.0);
        assert!((expand_weight(&c, &[true, false]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((expand_weight(&c, &[false, true]) - 2.0 / 3.0).abs() < 1e-15);

        let c = WeightedConfig {
            n_d: 5,
            w_min: -2.0,
            w_max: 3.0,
            ..c
        };
        assert_eq!(expand_weight(&c, &[false; 5]), -2.0);
        assert!((expand_weight(&c, &[true; 5]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_config_validation() {
        let good = WeightedConfig {
            n_d: 1,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.0,
            budget: 2.0,
        };
        assert!(good.validate().is_ok());
        assert!(WeightedConfig { n_d: 0, ..good }.validate().is_err());
        assert!(WeightedConfig { w_max: 0.0, ..good }.validate().is_err());
        assert!(WeightedConfig {
            budget_penalty: -1.0,
            ..good
        }
        .validate()
        .is_err());
    }

    #[test]
    fn weighted_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_problem(&mut rng, 5);
        let n = 5;
        let c = WeightedConfig {
            n_d: 1,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.7,
            budget: p.k() as f64,
        };
        let zeros = vec![vec![false]; n];
        let w0 = evaluate_weighted_cost(&p, &c, &vec![false; n], &zeros).unwrap();
        let expected =
            p.penalty() * (p.k() * p.k()) as f64 + c.budget_penalty * c.budget * c.budget;
        assert!((w0 - expected).abs() < 1e-12);

        // with every digit set the weighted cost is the plain cost plus B times
        // the same cardinality excess
        let ones = vec![vec![true]; n];
        for mask in 0..(1u64 << n) {
            let x = bits_of(mask, n);
            let excess = x.iter().filter(|&&b| b).count() as f64 - p.k() as f64;
            let direct = evaluate_cost(&p, &x).unwrap() + c.budget_penalty * excess * excess;
            let weighted = evaluate_weighted_cost(&p, &c, &x, &ones).unwrap();
            assert!((direct - weighted).abs() < 1e-12);
        }
    }

    #[test]
    fn single_point_linear_term() {
        let d = DistanceMatrix::from_full(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 4.0],
            vec![2.0, 4.0, 0.0],
        ])
        .unwrap();
        let p = SelectorProblem::new(d, 1, 0.0).unwrap();
        let c = WeightedConfig {
            n_d: 2,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 0.0,
            budget: 0.0,
        };
        let x = [false, true, false];
        let digits = vec![vec![false, false], vec![false, true], vec![false, false]];
        let w = 2.0 / 3.0;
        // quadratic term vanishes (zero diagonal); linear is -(w/n)(1 + 4)
        let got = evaluate_weighted_cost(&p, &c, &x, &digits).unwrap();
        assert!((got - (-(w / 3.0) * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn weighted_shape_errors() {
        let p = two_point(1, 1.0);
        let c = WeightedConfig {
            n_d: 2,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.0,
            budget: 1.0,
        };
        assert!(evaluate_weighted_cost(&p, &c, &[true, false], &[vec![true, true]]).is_err());
        assert!(
            evaluate_weighted_cost(&p, &c, &[true, false], &[vec![true], vec![false]]).is_err()
        );
    }

    #[test]
    fn weighted_model_layout() {
        let p = two_point(1, 2.0);
        let c = WeightedConfig {
            n_d: 3,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.0,
            budget: 1.0,
        };
        let m = compile_weighted_qubo(&p, &c).unwrap();
        assert_eq!(m.num_vars(), 2 + 2 * 2 * 3);
        assert_eq!(m.num_selection_vars(), 2);
        assert_eq!(m.roles()[2], VarRole::WeightBit(0, 0));
        assert_eq!(m.roles()[2 + 6], VarRole::Product(0, 0));
        let zeros = vec![false; m.num_vars()];
        assert!((m.energy(&zeros) - (2.0 + 1.0)).abs() < 1e-12);
    }

    /// Brute force over every assignment of a compiled two-row, one-digit
    /// model: consistent points match the direct weighted cost and every
    /// inconsistent point costs strictly more than its consistent sibling.
    #[test]
    fn weighted_two_point_brute_force() {
        let p = two_point(1, 2.0);
        let c = WeightedConfig {
            n_d: 1,
            w_min: 0.0,
            w_max: 1.0,
            budget_penalty: 1.5,
            budget: 1.0,
        };
        let layout = WeightedLayout { n: 2, n_d: 1 };
        let m = compile_weighted_qubo(&p, &c).unwrap();
        for mask in 0..(1u64 << m.num_vars()) {
            let bits = bits_of(mask, m.num_vars());
            let (x, w) = layout.split(&bits);
            let consistent = layout.assemble(&x, &w);
            let direct = evaluate_weighted_cost(&p, &c, &x, &w).unwrap();
            if bits == consistent {
                assert!((m.energy(&bits) - direct).abs() < 1e-9);
            } else {
                assert!(m.energy(&bits) > direct + 0.5);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn compiled_equals_direct(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, n.max(2));
            let m = compile_qubo(&p);
            for mask in 0..(1u64 << p.n()) {
                let x = bits_of(mask, p.n());
                prop_assert!((m.energy(&x) - evaluate_cost(&p, &x).unwrap()).abs() <= 1e-9);
            }
        }

        #[test]
        fn penalty_is_additive(seed in any::<u64>(), mask in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, 7);
            let x = bits_of(mask, 7);
            let free = p.with_penalty(0.0).unwrap();
            let delta = x.iter().filter(|&&b| b).count() as f64 - p.k() as f64;
            let diff = evaluate_cost(&p, &x).unwrap() - evaluate_cost(&free, &x).unwrap();
            prop_assert!((diff - p.penalty() * delta * delta).abs() < 1e-9);
        }

        #[test]
        fn distance_terms_scale(seed in any::<u64>(), mask in any::<u64>(), lambda in 0.01f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, 7);
            let x = bits_of(mask, 7);
            let scaled = SelectorProblem::new(p.distances().scaled(lambda).unwrap(), p.k(), p.penalty())
                .unwrap()
                .with_sense(p.sense());
            let free = |q: &SelectorProblem| {
                evaluate_cost(&q.with_penalty(0.0).unwrap(), &x).unwrap()
            };
            let pen = evaluate_cost(&p, &x).unwrap() - free(&p);
            let pen_scaled = evaluate_cost(&scaled, &x).unwrap() - free(&scaled);
            prop_assert!((free(&scaled) - lambda * free(&p)).abs() < 1e-9 * (1.0 + lambda));
            prop_assert!((pen - pen_scaled).abs() < 1e-9);
        }

        #[test]
        fn quadratization_sound(seed in any::<u64>(), n in 2usize..4, n_d in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, n);
            let c = WeightedConfig {
                n_d,
                w_min: rng.random_range(-0.5..0.5),
                w_max: rng.random_range(0.6..2.0),
                budget_penalty: rng.random_range(0.0..3.0),
                budget: rng.random_range(0.0..(n as f64)),
            };
            let layout = WeightedLayout { n, n_d };
            let m = compile_weighted_qubo(&p, &c).unwrap();
            let aux = n * n_d;
            for xm in 0..(1u64 << (n + aux)) {
                let x = bits_of(xm, n);
                let w: Vec<Vec<bool>> = (0..n)
                    .map(|i| (0..n_d).map(|j| xm >> (n + i * n_d + j) & 1 == 1).collect())
                    .collect();
                let mut bits = layout.assemble(&x, &w);
                let mut best = (f64::INFINITY, 0u64);
                for ym in 0..(1u64 << aux) {
                    for i in 0..n {
                        for j in 0..n_d {
                            bits[layout.product(i, j)] = ym >> (i * n_d + j) & 1 == 1;
                        }
                    }
                    let e = m.energy(&bits);
                    if e < best.0 {
                        best = (e, ym);
                    }
                }
                let direct = evaluate_weighted_cost(&p, &c, &x, &w).unwrap();
                prop_assert!((best.0 - direct).abs() < 1e-9);
                for i in 0..n {
                    for j in 0..n_d {
                        prop_assert_eq!(best.1 >> (i * n_d + j) & 1 == 1, x[i] && w[i][j]);
                    }
                }
            }
        }
    }
}
