//! Canonical QUBO models: `energy(x) = sum_{i <= j} Q[i][j] x_i x_j + offset`.
//!
//! Linear coefficients live on the diagonal (`x_i^2 = x_i`); every pair
//! coefficient is stored once, in the upper triangle.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Semantic role of a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// Selection bit `x[i]` for data row `i`.
    Select(usize),
    /// Weight digit `X[i][j]` of row `i`.
    WeightBit(usize, usize),
    /// Auxiliary `y[i][j]` standing in for the product `x[i] * X[i][j]`.
    Product(usize, usize),
    /// Variable with no attached meaning.
    Free(usize),
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Select(i) => write!(f, "x[{i}]"),
            VarRole::WeightBit(i, j) => write!(f, "X[{i}][{j}]"),
            VarRole::Product(i, j) => write!(f, "y[{i}][{j}]"),
            VarRole::Free(i) => write!(f, "q[{i}]"),
        }
    }
}

impl FromStr for VarRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad variable name `{s}`"));
        let (head, rest) = s.split_once('[').ok_or_else(bad)?;
        let rest = rest.strip_suffix(']').ok_or_else(bad)?;
        let idx: Vec<usize> = rest
            .split("][")
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (head, idx.as_slice()) {
            ("x", [i]) => Ok(VarRole::Select(*i)),
            ("q", [i]) => Ok(VarRole::Free(*i)),
            ("X", [i, j]) => Ok(VarRole::WeightBit(*i, *j)),
            ("y", [i, j]) => Ok(VarRole::Product(*i, *j)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel {
    num_vars: usize,
    /// Row-major `num_vars x num_vars`; entries below the diagonal stay zero.
    coeffs: Vec<f64>,
    offset: f64,
    roles: Vec<VarRole>,
    cardinality: Option<usize>,
}

impl QuboModel {
    /// Empty model over `num_vars` free variables.
    pub fn new(num_vars: usize) -> Self {
        Self::with_roles((0..num_vars).map(VarRole::Free).collect())
    }

    pub fn with_roles(roles: Vec<VarRole>) -> Self {
        let num_vars = roles.len();
        Self {
            num_vars,
            coeffs: vec![0.0; num_vars * num_vars],
            offset: 0.0,
            roles,
            cardinality: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    /// Target number of selection bits, when the model encodes one.
    pub fn cardinality(&self) -> Option<usize> {
        self.cardinality
    }

    pub fn set_cardinality(&mut self, k: Option<usize>) {
        self.cardinality = k;
    }

    /// Number of [`VarRole::Select`] variables. They always come first.
    pub fn num_selection_vars(&self) -> usize {
        self.roles
            .iter()
            .take_while(|r| matches!(r, VarRole::Select(_)))
            .count()
    }

    /// Bits counted by the cardinality check: the selection variables, or
    /// every variable when the model has none.
    pub fn hamming_weight(&self, bits: &[bool]) -> usize {
        let s = self.num_selection_vars();
        let span = if s == 0 { bits.len() } else { s };
        bits[..span].iter().filter(|&&b| b).count()
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.coeffs[a * self.num_vars + b]
    }

    #[inline]
    pub fn linear(&self, i: usize) -> f64 {
        self.coeffs[i * self.num_vars + i]
    }

    pub fn add_offset(&mut self, c: f64) {
        self.offset += c;
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        self.coeffs[i * self.num_vars + i] += c;
    }

    /// Adds `c * x_i * x_j`; `i == j` folds into the linear term.
    pub fn add_pair(&mut self, i: usize, j: usize, c: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.coeffs[a * self.num_vars + b] += c;
    }

    /// Adds `scale * (sum_v a_v z_v) * (sum_u b_u z_u)`.
    pub fn add_product(&mut self, lhs: &[(usize, f64)], rhs: &[(usize, f64)], scale: f64) {
        for &(u, a) in lhs {
            for &(v, b) in rhs {
                self.add_pair(u, v, scale * a * b);
            }
        }
    }

    /// Adds `scale * (sum_v a_v z_v + constant)^2`.
    pub fn add_squared(&mut self, terms: &[(usize, f64)], constant: f64, scale: f64) {
        for (p, &(u, a)) in terms.iter().enumerate() {
            // z^2 = z
            self.add_linear(u, scale * (a * a + 2.0 * a * constant));
            for &(v, b) in &terms[p + 1..] {
                self.add_pair(u, v, scale * 2.0 * a * b);
            }
        }
        self.offset += scale * constant * constant;
    }

    /// Nonzero coefficients as `(i, j, c)` with `i <= j`, row-major.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.num_vars;
        (0..n).flat_map(move |i| {
            (i..n).filter_map(move |j| {
                let c = self.coeffs[i * n + j];
                (c != 0.0).then_some((i, j, c))
            })
        })
    }

    /// Sum of absolute values of all non-constant coefficients.
    pub fn sum_abs_coeffs(&self) -> f64 {
        self.terms().map(|(_, _, c)| c.abs()).sum()
    }

    /// Energy at `bits`. The summation order depends only on the set bits, so
    /// equal assignments always produce bit-identical energies.
    pub fn energy(&self, bits: &[bool]) -> f64 {
        assert_eq!(bits.len(), self.num_vars, "assignment length");
        let support: Vec<usize> = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        self.energy_of_support(&support)
    }

    /// Energy of the assignment whose set bits are `support` (ascending).
    pub fn energy_of_support(&self, support: &[usize]) -> f64 {
        let n = self.num_vars;
        let mut e = 0.0;
        for (p, &i) in support.iter().enumerate() {
            let row = &self.coeffs[i * n..(i + 1) * n];
            e += row[i];
            for &j in &support[p + 1..] {
                e += row[j];
            }
        }
        e + self.offset
    }

    /// Symmetric coupling matrix (zero diagonal) and linear vector, the form
    /// the local-search solvers work with.
    pub(crate) fn split(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.num_vars;
        let mut coupling = vec![0.0; n * n];
        let mut linear = vec![0.0; n];
        for i in 0..n {
            linear[i] = self.coeffs[i * n + i];
            for j in i + 1..n {
                let c = self.coeffs[i * n + j];
                coupling[i * n + j] = c;
                coupling[j * n + i] = c;
            }
        }
        (coupling, linear)
    }

    fn to_document(&self) -> QuboDocument {
        QuboDocument {
            num_vars: self.num_vars,
            offset: self.offset,
            cardinality: self.cardinality,
            terms: self.terms().collect(),
            var_names: self.roles.iter().map(|r| r.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: QuboDocument = serde_json::from_str(text)?;
        if doc.var_names.len() != doc.num_vars {
            return Err(Error::LengthMismatch {
                left: doc.num_vars,
                right: doc.var_names.len(),
            });
        }
        let roles = doc
            .var_names
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<VarRole>>>()?;
        let mut model = Self::with_roles(roles);
        for (i, j, c) in doc.terms {
            model.check_index(i)?;
            model.check_index(j)?;
            model.add_pair(i, j, c);
        }
        model.offset = doc.offset;
        model.cardinality = doc.cardinality;
        Ok(model)
    }

    /// Coordinate text: `# offset <c>` and `# num_vars <n>` comment lines,
    /// then one `i j coeff` line per nonzero coefficient.
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# offset {}", self.offset)?;
        writeln!(w, "# num_vars {}", self.num_vars)?;
        for (i, j, c) in self.terms() {
            writeln!(w, "{i} {j} {c}")?;
        }
        Ok(())
    }

    pub fn read_coordinate<R: BufRead>(r: R) -> Result<Self> {
        let mut offset = 0.0;
        let mut declared = None;
        let mut entries = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: `{line}`", lineno + 1));
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some("offset"), Some(v)) => offset = v.parse().map_err(|_| bad())?,
                    (Some("num_vars"), Some(v)) => declared = Some(v.parse().map_err(|_| bad())?),
                    _ => {}
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(i), Some(j), Some(c), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad());
            };
            let i: usize = i.parse().map_err(|_| bad())?;
            let j: usize = j.parse().map_err(|_| bad())?;
            let c: f64 = c.parse().map_err(|_| bad())?;
            entries.push((i, j, c));
        }
        let inferred = entries
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0);
        let num_vars = declared.unwrap_or(inferred);
        if inferred > num_vars {
            return Err(Error::Parse(format!(
                "index {} out of range for {num_vars} variables",
                inferred - 1
            )));
        }
        let mut model = Self::new(num_vars);
        for (i, j, c) in entries {
            model.add_pair(i, j, c);
        }
        model.offset = offset;
        Ok(model)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_vars {
            return Err(Error::Parse(format!(
                "variable {i} out of range for {} variables",
                self.num_vars
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct QuboDocument {
    num_vars: usize,
    offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cardinality: Option<usize>,
    terms: Vec<(usize, usize, f64)>,
    var_names: Vec<String>,
}
