//! Two-level Toeplitz matrices: the Hermitian two-index generating sequence,
//! the block-Toeplitz-with-Toeplitz-blocks constructor, and its adjoint.

use faer::Mat;
use num_complex::Complex64;

/// Hermitian two-level generating sequence u[k1][k2] with
/// k1 ∈ −(m1−1)..m1−1, k2 ∈ −(m2−1)..m2−1 and u[−k1][−k2] = conj(u[k1][k2]).
#[derive(Debug, Clone)]
pub struct Toeplitz2Param {
    m1: usize,
    m2: usize,
    /// Row-major (2m1−1) × (2m2−1) lag grid.
    data: Vec<Complex64>,
}

impl Toeplitz2Param {
    pub fn zeros(m1: usize, m2: usize) -> Self {
        assert!(m1 >= 1 && m2 >= 1);
        Self {
            m1,
            m2,
            data: vec![Complex64::new(0.0, 0.0); (2 * m1 - 1) * (2 * m2 - 1)],
        }
    }

    pub fn level_sizes(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    /// Matrix side length m1·m2 of the materialized T₂.
    pub fn dim(&self) -> usize {
        self.m1 * self.m2
    }

    #[inline]
    fn idx(&self, k1: isize, k2: isize) -> usize {
        debug_assert!(k1.unsigned_abs() < self.m1 && k2.unsigned_abs() < self.m2);
        let r = (k1 + self.m1 as isize - 1) as usize;
        let c = (k2 + self.m2 as isize - 1) as usize;
        r * (2 * self.m2 - 1) + c
    }

    #[inline]
    pub fn get(&self, k1: isize, k2: isize) -> Complex64 {
        self.data[self.idx(k1, k2)]
    }

    #[inline]
    pub fn set(&mut self, k1: isize, k2: isize, v: Complex64) {
        let i = self.idx(k1, k2);
        self.data[i] = v;
    }

    /// Iterate all lags (k1, k2).
    pub fn lags(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (m1, m2) = (self.m1 as isize, self.m2 as isize);
        (1 - m1..m1).flat_map(move |k1| (1 - m2..m2).map(move |k2| (k1, k2)))
    }

    /// How many matrix positions carry lag (k1, k2).
    pub fn multiplicity(&self, k1: isize, k2: isize) -> usize {
        (self.m1 - k1.unsigned_abs()) * (self.m2 - k2.unsigned_abs())
    }

    /// Trace of the materialized matrix: m1·m2·u[0][0].
    pub fn trace(&self) -> f64 {
        (self.dim() as f64) * self.get(0, 0).re
    }

    /// Force exact Hermitian symmetry: u ← (u + conj(flip(u)))/2.
    pub fn hermitianize(&mut self) {
        let out = self.clone();
        for (k1, k2) in out.lags() {
            let v = (out.get(k1, k2) + out.get(-k1, -k2).conj()) * 0.5;
            self.set(k1, k2, v);
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.lags()
            .all(|(k1, k2)| (self.get(k1, k2) - self.get(-k1, -k2).conj()).norm() <= tol)
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Generating sequence of Σ_k power_k · v(f1,f2) v(f1,f2)ᴴ over unit-norm
    /// two-level Vandermonde vectors.
    pub fn from_atoms(m1: usize, m2: usize, atoms: &[(f64, f64, f64)]) -> Self {
        let mut p = Self::zeros(m1, m2);
        let norm = 1.0 / (m1 * m2) as f64;
        for (k1, k2) in p.clone().lags() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(f1, f2, power) in atoms {
                let phase = -std::f64::consts::TAU * (k1 as f64 * f1 + k2 as f64 * f2);
                acc += Complex64::from_polar(power * norm, phase);
            }
            p.set(k1, k2, acc);
        }
        p
    }
}

/// Unit-norm two-level Vandermonde vector a_{m1}(f1) ⊗ a_{m2}(f2).
pub fn vandermonde_vec(m1: usize, m2: usize, f1: f64, f2: f64) -> Vec<Complex64> {
    let scale = 1.0 / ((m1 * m2) as f64).sqrt();
    let mut out = Vec::with_capacity(m1 * m2);
    for i1 in 0..m1 {
        for i2 in 0..m2 {
            let phase = -std::f64::consts::TAU * (i1 as f64 * f1 + i2 as f64 * f2);
            out.push(Complex64::from_polar(scale, phase));
        }
    }
    out
}

/// Materialize the 2-level Toeplitz matrix: entry ((i1,i2),(j1,j2)) is
/// u[i1−j1][i2−j2] with level-1-major row index i1·m2+i2.
pub fn toeplitz2(p: &Toeplitz2Param) -> Mat<Complex64> {
    let (m1, m2) = p.level_sizes();
    let d = p.dim();
    let mut out = Mat::zeros(d, d);
    for i1 in 0..m1 {
        for j1 in 0..m1 {
            let k1 = i1 as isize - j1 as isize;
            for i2 in 0..m2 {
                for j2 in 0..m2 {
                    let k2 = i2 as isize - j2 as isize;
                    out[(i1 * m2 + i2, j1 * m2 + j2)] = p.get(k1, k2);
                }
            }
        }
    }
    out
}

/// Adjoint of `toeplitz2`: sum every matrix entry into its lag bin, so that
/// ⟨T₂(p), X⟩ = ⟨p, adjoint(X)⟩ exactly (entrywise complex inner products).
pub fn toeplitz2_adjoint(x: &Mat<Complex64>, m1: usize, m2: usize) -> Toeplitz2Param {
    assert_eq!(x.nrows(), m1 * m2);
    assert_eq!(x.ncols(), m1 * m2);
    let mut p = Toeplitz2Param::zeros(m1, m2);
    for i1 in 0..m1 {
        for j1 in 0..m1 {
            let k1 = i1 as isize - j1 as isize;
            for i2 in 0..m2 {
                for j2 in 0..m2 {
                    let k2 = i2 as isize - j2 as isize;
                    let idx = p.idx(k1, k2);
                    p.data[idx] += x[(i1 * m2 + i2, j1 * m2 + j2)];
                }
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_hermitian_param(m1: usize, m2: usize, rng: &mut ChaCha12Rng) -> Toeplitz2Param {
        let mut p = Toeplitz2Param::zeros(m1, m2);
        for (k1, k2) in p.clone().lags() {
            if (k1, k2) == (0, 0) {
                p.set(0, 0, Complex64::new(rng.gen_range(0.5..2.0), 0.0));
            } else if k1 > 0 || (k1 == 0 && k2 > 0) {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                p.set(k1, k2, v);
                p.set(-k1, -k2, v.conj());
            }
        }
        p
    }

    #[test]
    fn zero_lag_gives_identity() {
        let mut p = Toeplitz2Param::zeros(3, 4);
        p.set(0, 0, Complex64::new(1.0, 0.0));
        let t = toeplitz2(&p);
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((t[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(p.trace(), 12.0);
    }

    #[test]
    fn atom_sum_matches_direct_evaluation() {
        let (m1, m2) = (4, 5);
        let atoms = [(0.13, -0.21, 1.7), (0.42, 0.05, 0.6)];
        let p = Toeplitz2Param::from_atoms(m1, m2, &atoms);
        let t = toeplitz2(&p);
        let mut direct = Mat::<Complex64>::zeros(m1 * m2, m1 * m2);
        for &(f1, f2, pow) in &atoms {
            let v = vandermonde_vec(m1, m2, f1, f2);
            for i in 0..v.len() {
                for j in 0..v.len() {
                    direct[(i, j)] += v[i] * v[j].conj() * pow;
                }
            }
        }
        assert!((&t - &direct).norm_l2() < 1e-12 * direct.norm_l2());
    }

    #[test]
    fn hermitian_for_hermitian_params() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let p = random_hermitian_param(3, 4, &mut rng);
        let t = toeplitz2(&p);
        for i in 0..p.dim() {
            for j in 0..p.dim() {
                assert!((t[(i, j)] - t[(j, i)].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_of_identity() {
        let id = Mat::<Complex64>::identity(12, 12);
        let p = toeplitz2_adjoint(&id, 3, 4);
        assert!((p.get(0, 0) - Complex64::new(12.0, 0.0)).norm() < 1e-15);
        for (k1, k2) in p.lags() {
            if (k1, k2) != (0, 0) {
                assert!(p.get(k1, k2).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_inner_product_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let (m1, m2) = (4, 3);
        let p = random_hermitian_param(m1, m2, &mut rng);
        let x = Mat::from_fn(m1 * m2, m1 * m2, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let t = toeplitz2(&p);
        let mut lhs = Complex64::new(0.0, 0.0);
        for i in 0..m1 * m2 {
            for j in 0..m1 * m2 {
                lhs += t[(i, j)].conj() * x[(i, j)];
            }
        }
        let adj = toeplitz2_adjoint(&x, m1, m2);
        let mut rhs = Complex64::new(0.0, 0.0);
        for (k1, k2) in p.lags() {
            rhs += p.get(k1, k2).conj() * adj.get(k1, k2);
        }
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn adjoint_of_toeplitz2_weights_by_multiplicity() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let (m1, m2) = (3, 5);
        let p = random_hermitian_param(m1, m2, &mut rng);
        let back = toeplitz2_adjoint(&toeplitz2(&p), m1, m2);
        for (k1, k2) in p.lags() {
            let expect = p.get(k1, k2) * p.multiplicity(k1, k2) as f64;
            assert!((back.get(k1, k2) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitianize_enforces_symmetry() {
        let mut p = Toeplitz2Param::zeros(2, 2);
        p.set(1, 0, Complex64::new(1.0, 2.0));
        p.set(-1, 0, Complex64::new(5.0, 1.0));
        p.hermitianize();
        assert!(p.is_hermitian(1e-15));
        assert!((p.get(1, 0) - Complex64::new(3.0, 0.5)).norm() < 1e-15);
    }
}
