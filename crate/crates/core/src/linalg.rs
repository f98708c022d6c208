//! Small shared numeric helpers: angle wrapping, Hermitian eigendecompositions,
//! and projection onto the positive semidefinite cone.

use faer::Mat;
use num_complex::Complex64;

/// Wrap an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut a = x % tau;
    if a <= -std::f64::consts::PI {
        a += tau;
    } else if a > std::f64::consts::PI {
        a -= tau;
    }
    a
}

/// Reflect an angle onto the principal arcsin branch [−π/2, π/2], preserving
/// its sine. This is the projection a uniform linear array actually observes.
pub fn fold_angle(x: f64) -> f64 {
    let w = wrap_angle(x);
    if w > std::f64::consts::FRAC_PI_2 {
        std::f64::consts::PI - w
    } else if w < -std::f64::consts::FRAC_PI_2 {
        -std::f64::consts::PI - w
    } else {
        w
    }
}

/// Wrap a cycle frequency into [0, 1).
pub fn wrap_unit(f: f64) -> f64 {
    let w = f.rem_euclid(1.0);
    if w == 1.0 {
        0.0
    } else {
        w
    }
}

/// Wrap a cycle frequency into (0, 1]; the convention for delay frequencies.
pub fn wrap_unit_pos(f: f64) -> f64 {
    let w = wrap_unit(f);
    if w == 0.0 {
        1.0
    } else {
        w
    }
}

/// Wrap a cycle frequency into (−1/2, 1/2]; the convention for angle frequencies.
pub fn wrap_unit_half(f: f64) -> f64 {
    let w = wrap_unit(f);
    if w > 0.5 {
        w - 1.0
    } else {
        w
    }
}

/// Wrapped distance between two points on the unit circle.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// (A + Aᴴ)/2.
pub fn hermitian_part(a: &Mat<Complex64>) -> Mat<Complex64> {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(a: &Mat<Complex64>) -> (Vec<f64>, Mat<Complex64>) {
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let s = evd.S().column_vector().to_owned();
    let u = evd.U();
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| s[i].re.partial_cmp(&s[j].re).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| s[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, idx[j])]);
    (vals, vecs)
}

/// Eigendecomposition of a real symmetric matrix; eigenvalues ascending.
pub fn symmetric_eigen(a: &Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition failed");
    let s = evd.S().column_vector().to_owned();
    let u = evd.U();
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, idx[j])]);
    (vals, vecs)
}

/// Euclidean projection of a Hermitian matrix onto the PSD cone.
///
/// Reconstructs from whichever eigenvalue sign class is smaller, so the cost
/// drops to O(n²k) once the iterate is close to a low-rank solution.
pub fn psd_project(a: &Mat<Complex64>) -> Mat<Complex64> {
    let n = a.nrows();
    let (vals, vecs) = hermitian_eigen(a);
    let neg: Vec<usize> = (0..n).filter(|&i| vals[i] < 0.0).collect();
    let pos: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.0).collect();
    if neg.is_empty() {
        return a.clone();
    }
    if pos.is_empty() {
        return Mat::zeros(n, n);
    }
    if pos.len() <= neg.len() {
        low_rank_hermitian(&vals, &vecs, &pos)
    } else {
        a - low_rank_hermitian(&vals, &vecs, &neg)
    }
}

/// Σ_{i ∈ idx} λ_i u_i u_iᴴ assembled via two thin matmuls.
fn low_rank_hermitian(vals: &[f64], vecs: &Mat<Complex64>, idx: &[usize]) -> Mat<Complex64> {
    let n = vecs.nrows();
    let k = idx.len();
    let sub = Mat::from_fn(n, k, |i, j| vecs[(i, idx[j])]);
    let scaled = Mat::from_fn(n, k, |i, j| vecs[(i, idx[j])] * vals[idx[j]]);
    &scaled * &sub.adjoint()
}

/// Extremal eigenvalues (λ_min, λ_max) of a Hermitian matrix.
pub fn hermitian_extremal_eigs(a: &Mat<Complex64>) -> (f64, f64) {
    let evd = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let s = evd.S().column_vector().to_owned();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..s.nrows() {
        lo = lo.min(s[i].re);
        hi = hi.max(s[i].re);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let x = 0.37 * k as f64;
            let w = wrap_angle(x);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            assert!((w.sin() - x.sin()).abs() < 1e-12);
            assert!((w.cos() - x.cos()).abs() < 1e-12);
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn fold_preserves_sine() {
        for k in -30..30 {
            let x = 0.41 * k as f64;
            let f = fold_angle(x);
            assert!((-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&f));
            assert!((f.sin() - x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_wraps() {
        assert_eq!(wrap_unit_pos(0.0), 1.0);
        assert!((wrap_unit_pos(-0.25) - 0.75).abs() < 1e-15);
        assert_eq!(wrap_unit_half(0.5), 0.5);
        assert!((wrap_unit_half(0.75) + 0.25).abs() < 1e-15);
        assert!((circ_dist(0.95, 0.05) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn psd_projection_clips_negative_modes() {
        let n = 8;
        let a = Mat::from_fn(n, n, |i, j| {
            C::new(((i * 3 + j) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.3)
        });
        let h = hermitian_part(&a);
        let p = psd_project(&h);
        let (lo, _) = hermitian_extremal_eigs(&p);
        assert!(lo >= -1e-12);
        // Projection is the nearest PSD matrix: re-projecting is a no-op.
        let pp = psd_project(&p);
        assert!((&pp - &p).norm_l2() < 1e-10);
        // Residual h − p must be negative semidefinite.
        let (_, hi) = hermitian_extremal_eigs(&(&h - &p));
        assert!(hi <= 1e-12);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let n = 12;
        let a = Mat::from_fn(n, n, |i, j| {
            C::new((i + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05)
        });
        let h = hermitian_part(&a);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let idx: Vec<usize> = (0..n).collect();
        let rec = low_rank_hermitian(&vals, &vecs, &idx);
        assert!((&rec - &h).norm_l2() < 1e-10 * h.norm_l2().max(1.0));
    }
}
