//! Aaronson-Gottesman stabilizer tableau, used to compute the noiseless
//! reference outcome of every measurement.

/// Tableau over `n` qubits: rows `0..n` are destabilizers, `n..2n`
/// stabilizers, and row `2n` is scratch space.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

/// Outcome of a Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measurement {
    Deterministic(bool),
    /// The outcome was uniformly random; the state collapsed to the given value.
    Random(bool),
}

impl Measurement {
    pub fn value(self) -> bool {
        match self {
            Measurement::Deterministic(v) | Measurement::Random(v) => v,
        }
    }
}

fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    /// The all-zero state `|0...0>`.
    pub fn new(n: usize) -> Self {
        let mut x = vec![vec![false; n]; 2 * n + 1];
        let mut z = vec![vec![false; n]; 2 * n + 1];
        for i in 0..n {
            x[i][i] = true;
            z[n + i][i] = true;
        }
        Self {
            n,
            x,
            z,
            r: vec![false; 2 * n + 1],
        }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn h(&mut self, q: usize) {
        for i in 0..2 * self.n {
            let (x, z) = (self.x[i][q], self.z[i][q]);
            self.r[i] ^= x && z;
            self.x[i][q] = z;
            self.z[i][q] = x;
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for i in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.x[i][c], self.z[i][c], self.x[i][t], self.z[i][t]);
            self.r[i] ^= xc && zt && (xt ^ zc ^ true);
            self.x[i][t] = xt ^ xc;
            self.z[i][c] = zc ^ zt;
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn x(&mut self, q: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.z[i][q];
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut total = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            total += g(self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
        }
        self.r[h] = total.rem_euclid(4) == 2;
        for j in 0..self.n {
            self.x[h][j] ^= self.x[i][j];
            self.z[h][j] ^= self.z[i][j];
        }
    }

    /// Measures qubit `q` in the Z basis. A random outcome collapses to
    /// `forced`.
    pub fn measure(&mut self, q: usize, forced: bool) -> Measurement {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| self.x[i][q]) {
            for i in 0..2 * n {
                if i != p && self.x[i][q] {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p].fill(false);
            self.z[p].fill(false);
            self.z[p][q] = true;
            self.r[p] = forced;
            Measurement::Random(forced)
        } else {
            let s = 2 * n;
            self.x[s].fill(false);
            self.z[s].fill(false);
            self.r[s] = false;
            for i in 0..n {
                if self.x[i][q] {
                    self.rowsum(s, i + n);
                }
            }
            Measurement::Deterministic(self.r[s])
        }
    }

    pub fn reset(&mut self, q: usize) {
        if self.measure(q, false).value() {
            self.x(q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_states() {
        let mut t = Tableau::new(2);
        assert_eq!(t.measure(0, false), Measurement::Deterministic(false));
        t.x(1);
        assert_eq!(t.measure(1, false), Measurement::Deterministic(true));
        t.reset(1);
        assert_eq!(t.measure(1, false), Measurement::Deterministic(false));
    }

    #[test]
    fn plus_state_is_random_then_collapses() {
        let mut t = Tableau::new(1);
        t.h(0);
        assert_eq!(t.measure(0, true), Measurement::Random(true));
        assert_eq!(t.measure(0, false), Measurement::Deterministic(true));
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        assert_eq!(t.measure(0, true), Measurement::Random(true));
        assert_eq!(t.measure(1, false), Measurement::Deterministic(true));
    }

    #[test]
    fn parity_via_phase_kickback() {
        // ancilla in |+>, CZ to two data qubits in |1>|0>, H, measure -> parity 1
        let mut t = Tableau::new(3);
        t.x(0);
        t.h(2);
        t.cz(2, 0);
        t.cz(2, 1);
        t.h(2);
        assert_eq!(t.measure(2, false), Measurement::Deterministic(true));
    }

    #[test]
    fn minus_state_in_x_basis() {
        let mut t = Tableau::new(1);
        t.x(0);
        t.h(0);
        t.h(0);
        assert_eq!(t.measure(0, false), Measurement::Deterministic(true));
    }
}
