//! Dense single-flip bookkeeping shared by the local-search backends.

use rand::Rng;

use crate::qubo::QuboModel;

/// Symmetric coupling (zero diagonal) plus linear terms of a model.
pub(crate) struct Dense {
    pub n: usize,
    pub coupling: Vec<f64>,
    pub linear: Vec<f64>,
    pub offset: f64,
    /// Energy differences below this are treated as ties.
    pub tol: f64,
}

impl Dense {
    pub fn new(model: &QuboModel) -> Self {
        let (coupling, linear) = model.split();
        Self {
            n: model.num_vars(),
            coupling,
            linear,
            offset: model.offset(),
            tol: 1e-10 * (1.0 + model.sum_abs_coeffs()),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coupling[i * self.n..(i + 1) * self.n]
    }

    pub fn state(&self, x: Vec<bool>) -> State {
        let mut s = State {
            x,
            field: vec![0.0; self.n],
            energy: 0.0,
        };
        s.resync(self);
        s
    }

    pub fn random_state<R: Rng>(&self, rng: &mut R) -> State {
        let x = (0..self.n).map(|_| rng.random_bool(0.5)).collect();
        self.state(x)
    }
}

/// Assignment with its local fields `h_i + sum_j J_ij x_j` and running energy.
pub(crate) struct State {
    pub x: Vec<bool>,
    pub field: Vec<f64>,
    pub energy: f64,
}

impl State {
    pub fn resync(&mut self, m: &Dense) {
        let mut e = m.offset;
        for i in 0..m.n {
            let row = m.row(i);
            let mut f = m.linear[i];
            for j in 0..m.n {
                if self.x[j] {
                    f += row[j];
                }
            }
            self.field[i] = f;
            if self.x[i] {
                // each pair counted from both ends, hence the half
                e += m.linear[i] + 0.5 * (f - m.linear[i]);
            }
        }
        self.energy = e;
    }

    /// Energy change of flipping `i`.
    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        if self.x[i] {
            -self.field[i]
        } else {
            self.field[i]
        }
    }

    pub fn flip(&mut self, m: &Dense, i: usize) {
        self.energy += self.delta(i);
        self.x[i] = !self.x[i];
        let row = m.row(i);
        if self.x[i] {
            for (f, c) in self.field.iter_mut().zip(row) {
                *f += c;
            }
        } else {
            for (f, c) in self.field.iter_mut().zip(row) {
                *f -= c;
            }
        }
    }

    /// Steepest descent to a local minimum, then clears set bits whose flip
    /// leaves the energy unchanged so that ties resolve towards the lowest
    /// bitstring.
    pub fn polish(&mut self, m: &Dense) {
        loop {
            loop {
                let mut best = (-m.tol, usize::MAX);
                for i in 0..m.n {
                    let d = self.delta(i);
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                if best.1 == usize::MAX {
                    break;
                }
                self.flip(m, best.1);
            }
            let mut cleared = false;
            for i in 0..m.n {
                if self.x[i] && self.delta(i).abs() <= m.tol {
                    self.flip(m, i);
                    cleared = true;
                }
            }
            if !cleared {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(rng: &mut ChaCha8Rng, n: usize) -> QuboModel {
        let mut m = QuboModel::new(n);
        m.add_offset(rng.random_range(-1.0..1.0));
        for i in 0..n {
            for j in i..n {
                m.add_pair(i, j, rng.random_range(-2.0..2.0));
            }
        }
        m
    }

    #[test]
    fn incremental_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = random_model(&mut rng, 9);
        let dense = Dense::new(&model);
        let mut s = dense.random_state(&mut rng);
        assert!((s.energy - model.energy(&s.x)).abs() < 1e-12);
        for _ in 0..500 {
            let i = rng.random_range(0..9);
            let before = s.energy;
            let d = s.delta(i);
            s.flip(&dense, i);
            assert!((s.energy - before - d).abs() < 1e-12);
            assert!((s.energy - model.energy(&s.x)).abs() < 1e-9);
        }
    }

    #[test]
    fn polish_reaches_local_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let model = random_model(&mut rng, 8);
            let dense = Dense::new(&model);
            let mut s = dense.random_state(&mut rng);
            let start = s.energy;
            s.polish(&dense);
            assert!(s.energy <= start + 1e-12);
            assert!((0..8).all(|i| s.delta(i) > -dense.tol));
        }
    }

    #[test]
    fn polish_clears_free_bits() {
        let model = QuboModel::new(4);
        let dense = Dense::new(&model);
        let mut s = dense.state(vec![true, false, true, true]);
        s.polish(&dense);
        assert_eq!(s.x, vec![false; 4]);
    }
}
