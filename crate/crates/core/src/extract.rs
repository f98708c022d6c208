//! Recovery of per-path frequencies from the denoised Toeplitz corners via
//! two-level Vandermonde decomposition (matrix pencil with joint pairing),
//! matching of the receive/transmit sides, conversion back to channel
//! parameters, and linear re-estimation of the complex gains.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::PathParams;
use crate::linalg::{circ_dist, hermitian_eigen, wrap_unit_half, wrap_unit_pos};
use crate::signal::{steering_rx, steering_tx, PilotMatrix, ReceivedSignal, SystemConfig};
use crate::toeplitz::{toeplitz2, vandermonde_vec, Toeplitz2Param};

/// Relative eigenvalue threshold below which a component counts as absent.
const RANK_REL_TOL: f64 = 1e-12;

/// Two delay-level frequencies closer than this collide for the pencil.
const COLLISION_TOL: f64 = 1e-6;

/// Average per-pair matching cost (cycles) above which pairing is suspect.
const PAIRING_COST_WARN: f64 = 0.05;

/// One extracted component: delay-level and angle-level cycle frequencies
/// plus its nonnegative power.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyPair {
    /// Delay-level frequency, wrapped to (0, 1].
    pub f1: f64,
    /// Angle-level frequency, wrapped to (−1/2, 1/2].
    pub f2: f64,
    pub power: f64,
}

/// Decompose a PSD two-level Toeplitz generating sequence into `r` frequency
/// pairs such that Σ power·v(f1,f2)v(f1,f2)ᴴ ≈ T₂(p).
///
/// Truncated eigendecomposition gives a rank-r factor; shift invariance along
/// the first level yields the delay frequencies as eigenvalue phases of the
/// pencil, and each eigenvector maps to one angle frequency, so the two
/// levels stay paired.
pub fn decompose_2level(p: &Toeplitz2Param, r: usize) -> Result<Vec<FrequencyPair>> {
    if r == 0 {
        return Ok(vec![]);
    }
    let (m1, m2) = p.level_sizes();
    let dim = p.dim();
    let pencil_rows = (m1 - 1) * m2;
    if r > pencil_rows {
        return Err(Error::RankDeficient {
            requested: r,
            achievable: pencil_rows,
        });
    }

    let t = toeplitz2(p);
    let (vals, vecs) = hermitian_eigen(&t);
    let lam_max = vals[dim - 1];
    let achievable = if lam_max > 0.0 {
        (0..dim).filter(|&i| vals[i] > RANK_REL_TOL * lam_max).count()
    } else {
        0
    };
    if achievable < r {
        return Err(Error::RankDeficient {
            requested: r,
            achievable,
        });
    }
    if r < dim && vals[dim - 1 - r] > 1e-3 * vals[dim - r] {
        log::warn!(
            "weak identifiability: eigenvalue {} is {:.2e} vs retained {:.2e}",
            r + 1,
            vals[dim - 1 - r],
            vals[dim - r]
        );
    }

    // Rank-r factor with descending eigenvalues.
    let e = Mat::from_fn(dim, r, |i, j| {
        vecs[(i, dim - 1 - j)] * vals[dim - 1 - j].sqrt()
    });

    // Level-1 shift invariance: rows are level-1-major, so the two selections
    // are contiguous row bands offset by m2.
    let e1 = e.subrows(0, pencil_rows).to_owned();
    let e2 = e.subrows(m2, pencil_rows).to_owned();
    let pencil = e1.qr().solve_lstsq(&e2);
    let evd = pencil
        .eigen()
        .map_err(|_| Error::NonFinite("pencil eigendecomposition"))?;
    let lams = evd.S().column_vector().to_owned();
    let xs = evd.U();

    let f1s: Vec<f64> = (0..r)
        .map(|k| wrap_unit_pos(-lams[k].arg() / std::f64::consts::TAU))
        .collect();
    for i in 0..r {
        for j in (i + 1)..r {
            let sep = circ_dist(f1s[i], f1s[j]);
            if sep < COLLISION_TOL {
                return Err(Error::FrequencyCollision {
                    i,
                    j,
                    separation: sep,
                });
            }
        }
    }

    // Angle frequency of each component from its scaled Vandermonde vector.
    let mut out = Vec::with_capacity(r);
    for k in 0..r {
        let w: Vec<Complex64> = (0..dim)
            .map(|i| (0..r).map(|c| e[(i, c)] * xs[(c, k)]).sum())
            .collect();
        let mut z = Complex64::new(0.0, 0.0);
        for i1 in 0..m1 {
            for i2 in 0..m2 - 1 {
                z += w[i1 * m2 + i2].conj() * w[i1 * m2 + i2 + 1];
            }
        }
        let f2 = if z.norm() > 0.0 {
            wrap_unit_half(-z.arg() / std::f64::consts::TAU)
        } else {
            0.0
        };
        out.push(FrequencyPair {
            f1: f1s[k],
            f2,
            power: 0.0,
        });
    }

    // Powers by least squares on the matrix itself.
    let vands: Vec<Vec<Complex64>> = out
        .iter()
        .map(|fp| vandermonde_vec(m1, m2, fp.f1, fp.f2))
        .collect();
    let mut gram = Mat::<f64>::zeros(r, r);
    let mut rhs = Mat::<f64>::zeros(r, 1);
    for a in 0..r {
        for b in 0..r {
            let ip: Complex64 = vands[a]
                .iter()
                .zip(&vands[b])
                .map(|(x, y)| x.conj() * y)
                .sum();
            gram[(a, b)] = ip.norm_sqr();
        }
        let tv: Vec<Complex64> = (0..dim)
            .map(|i| (0..dim).map(|j| t[(i, j)] * vands[a][j]).sum())
            .collect();
        let quad: Complex64 = vands[a].iter().zip(&tv).map(|(x, y)| x.conj() * y).sum();
        rhs[(a, 0)] = quad.re;
    }
    let powers = gram.partial_piv_lu().solve(&rhs);
    for (k, fp) in out.iter_mut().enumerate() {
        fp.power = powers[(k, 0)].max(0.0);
    }

    out.sort_by(|a, b| a.f1.partial_cmp(&b.f1).unwrap());
    Ok(out)
}

/// One matched path in frequency space.
#[derive(Debug, Clone, Copy)]
pub struct PairedTriplet {
    /// Delay frequency from the receive side, (0, 1].
    pub delay_freq: f64,
    pub rx_angle_freq: f64,
    pub tx_angle_freq: f64,
}

/// Result of matching the two decomposition sides.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub triplets: Vec<PairedTriplet>,
    /// Total wrapped-circle matching cost, cycles.
    pub cost: f64,
    /// Set when the average per-pair cost exceeds the plausibility threshold.
    pub cost_warning: bool,
}

/// Match receive-side components against transmit-side components. The
/// transmit side carries the negated delay frequency, so the assignment
/// minimizes wrapped distance between f1ʳˣ and −f1ᵗˣ.
pub fn pair_sides(rx: &[FrequencyPair], tx: &[FrequencyPair]) -> Result<Pairing> {
    if rx.len() != tx.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} receive components vs {} transmit components",
            rx.len(),
            tx.len()
        )));
    }
    let n = rx.len();
    if n == 0 {
        return Ok(Pairing {
            triplets: vec![],
            cost: 0.0,
            cost_warning: false,
        });
    }
    let cost = |i: usize, j: usize| circ_dist(rx[i].f1, -tx[j].f1);

    let assignment: Vec<usize> = if n <= 6 {
        (0..n)
            .permutations(n)
            .min_by(|a, b| {
                let ca: f64 = a.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
                let cb: f64 = b.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
                ca.partial_cmp(&cb).unwrap()
            })
            .unwrap()
    } else {
        let weights = pathfinding::matrix::Matrix::from_rows(
            (0..n).map(|i| {
                (0..n)
                    .map(|j| (cost(i, j) * 1e12).round() as i64)
                    .collect::<Vec<_>>()
            }),
        )
        .expect("square cost matrix");
        pathfinding::kuhn_munkres::kuhn_munkres_min(&weights).1
    };

    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost(i, j))
        .sum();
    let warning = total > PAIRING_COST_WARN * n as f64;
    if warning {
        log::warn!(
            "side pairing cost {:.4} cycles over {} pairs exceeds threshold",
            total,
            n
        );
    }
    Ok(Pairing {
        triplets: assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| PairedTriplet {
                delay_freq: rx[i].f1,
                rx_angle_freq: rx[i].f2,
                tx_angle_freq: tx[j].f2,
            })
            .collect(),
        cost: total,
        cost_warning: warning,
    })
}

/// Convert matched frequency triplets to channel parameters, sorted by delay
/// so index 0 is the LOS path. Angles take the principal arcsin branch.
pub fn params_from_freqs(
    triplets: &[PairedTriplet],
    sys: &SystemConfig,
) -> Result<Vec<PathParams>> {
    let ratio_scale = sys.wavelength() / sys.antenna_spacing;
    let to_angle = |f2: f64| -> Result<f64> {
        let ratio = f2 * ratio_scale;
        if ratio.abs() > 1.0 + 1e-9 {
            return Err(Error::AngleOutOfRange { ratio });
        }
        Ok(ratio.clamp(-1.0, 1.0).asin())
    };
    let mut out = Vec::with_capacity(triplets.len());
    for t in triplets {
        out.push(PathParams {
            toa: wrap_unit_pos(t.delay_freq) * sys.delay_span(),
            aoa: to_angle(t.rx_angle_freq)?,
            aod: to_angle(t.tx_angle_freq)?,
        });
    }
    out.sort_by(|a, b| a.toa.partial_cmp(&b.toa).unwrap());
    Ok(out)
}

/// Re-estimate complex path gains by least squares in the linear observation
/// model at fixed delays/angles.
pub fn estimate_gains(
    paths: &[PathParams],
    y: &ReceivedSignal,
    pilots: &PilotMatrix,
    sys: &SystemConfig,
) -> Result<Vec<Complex64>> {
    let n_paths = paths.len();
    let rows = sys.n_sub * sys.n_pilots * sys.n_rx;
    if n_paths == 0 || n_paths > sys.n_pilots * sys.n_sub {
        return Err(Error::InvalidConfig(format!(
            "{n_paths} paths cannot be resolved from {} pilot blocks",
            sys.n_pilots * sys.n_sub
        )));
    }

    let mut design = Mat::<Complex64>::zeros(rows, n_paths);
    for (k, path) in paths.iter().enumerate() {
        let alpha = steering_rx(path.aoa, sys);
        let beta = steering_tx(path.aod, sys);
        let f1 = path.toa / sys.delay_span();
        for n in 0..sys.n_sub {
            let rot = Complex64::from_polar(1.0, -std::f64::consts::TAU * n as f64 * f1);
            let s = &pilots.blocks[n];
            for g in 0..sys.n_pilots {
                let mut bs = Complex64::new(0.0, 0.0);
                for t in 0..sys.n_tx {
                    bs += beta[t].conj() * s[(t, g)];
                }
                let coef = rot * bs;
                let base = (n * sys.n_pilots + g) * sys.n_rx;
                for i in 0..sys.n_rx {
                    design[(base + i, k)] = coef * alpha[i];
                }
            }
        }
    }
    let y_vec = Mat::from_fn(rows, 1, |i, _| {
        let n = i / (sys.n_pilots * sys.n_rx);
        let rem = i % (sys.n_pilots * sys.n_rx);
        y.blocks[n][(rem % sys.n_rx, rem / sys.n_rx)]
    });

    let svd = design
        .thin_svd()
        .map_err(|_| Error::NonFinite("gain design SVD"))?;
    let s = svd.S().column_vector().to_owned();
    let smax = s[0].re;
    let smin = s[n_paths - 1].re;
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > 1e12 {
        return Err(Error::IllConditioned { cond });
    }
    let uy = &svd.U().adjoint() * &y_vec;
    let scaled = Mat::from_fn(n_paths, 1, |i, _| uy[(i, 0)] / s[i].re);
    let gains = &svd.V() * &scaled;
    Ok((0..n_paths).map(|k| gains[(k, 0)]).collect())
}
