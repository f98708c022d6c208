//! The virtual channel matrix: a block-Hankel rearrangement of the N
//! per-sub-carrier channel matrices that exposes delay, AOA, and AOD jointly
//! as a low-rank two-level Vandermonde structure.
//!
//! The N generating blocks are the canonical representation; the dense
//! M·N_r × M·N_t matrix (block (i,j) = block i+j−2, 1-based) is materialized
//! on demand, so the block-Hankel constraint holds by construction.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ChannelParams;
use crate::signal::{delay_vec, steering_rx, steering_tx, subcarrier_channel, SystemConfig};

/// Virtual channel matrix stored by its N generating sub-carrier blocks.
#[derive(Debug, Clone)]
pub struct VirtualChannelMatrix {
    /// blocks[n] is the n-th sub-carrier channel matrix, N_r × N_t.
    pub blocks: Vec<Mat<Complex64>>,
}

impl VirtualChannelMatrix {
    pub fn zeros(n_sub: usize, n_rx: usize, n_tx: usize) -> Self {
        Self {
            blocks: (0..n_sub).map(|_| Mat::zeros(n_rx, n_tx)).collect(),
        }
    }

    pub fn n_sub(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_rx(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.blocks[0].ncols()
    }

    /// Block-Hankel side length M = (N+1)/2.
    pub fn m(&self) -> usize {
        (self.n_sub() + 1) / 2
    }

    /// Materialize the dense M·N_r × M·N_t block-Hankel matrix.
    pub fn materialize(&self) -> Mat<Complex64> {
        let (m, nr, nt) = (self.m(), self.n_rx(), self.n_tx());
        let mut out = Mat::zeros(m * nr, m * nt);
        for bi in 0..m {
            for bj in 0..m {
                let src = &self.blocks[bi + bj];
                for i in 0..nr {
                    for j in 0..nt {
                        out[(bi * nr + i, bj * nt + j)] = src[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// The automorphism g: assemble the block-diagonal stacked channel
    /// diag{H^(0), …, H^(N−1)} of the received-signal model.
    pub fn automorphism_g(&self) -> Mat<Complex64> {
        let (n, nr, nt) = (self.n_sub(), self.n_rx(), self.n_tx());
        let mut out = Mat::zeros(n * nr, n * nt);
        for (b, blk) in self.blocks.iter().enumerate() {
            for i in 0..nr {
                for j in 0..nt {
                    out[(b * nr + i, b * nt + j)] = blk[(i, j)];
                }
            }
        }
        out
    }

    /// Frobenius norm, equal to that of the block-diagonal image of g.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Number of (i,j) block positions on anti-diagonal n of the materialized
/// matrix: min(n+1, N−n).
pub fn hankel_multiplicity(n: usize, n_sub: usize) -> usize {
    (n + 1).min(n_sub - n)
}

/// Build the virtual channel matrix of a parameter set. Fails if any delay
/// falls outside the unambiguous range.
pub fn build_virtual(params: &ChannelParams, sys: &SystemConfig) -> Result<VirtualChannelMatrix> {
    let span = sys.delay_span();
    for p in &params.paths {
        let f = p.toa / span;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::DelayOutOfRange {
                tau_s: p.toa,
                max_s: span,
            });
        }
    }
    Ok(VirtualChannelMatrix {
        blocks: (0..sys.n_sub)
            .map(|n| subcarrier_channel(n, params, sys))
            .collect(),
    })
}

/// Left atom χ(τ, θ_Rx) = ξ(τ) ⊗ α(θ_Rx), length M·N_r.
pub fn atom_rx(tau: f64, theta: f64, sys: &SystemConfig) -> Result<Vec<Complex64>> {
    Ok(kron(&delay_vec(tau, sys)?, &steering_rx(theta, sys)))
}

/// Right atom ζ(τ, θ_Tx) = ξ(−τ) ⊗ β(θ_Tx), length M·N_t.
pub fn atom_tx(tau: f64, theta: f64, sys: &SystemConfig) -> Result<Vec<Complex64>> {
    // ξ(−τ) evaluated directly: the negated delay frequency, no range check.
    let f = -tau / sys.delay_span();
    let scale = (2.0 / (sys.n_sub as f64 + 1.0)).sqrt();
    let xi: Vec<Complex64> = crate::signal::fourier_vec(sys.m(), f)
        .into_iter()
        .map(|z| z * scale)
        .collect();
    Ok(kron(&xi, &steering_tx(theta, sys)))
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Euclidean projection of an arbitrary M·N_r × M·N_t matrix onto the
/// block-Hankel set: average all blocks on each anti-diagonal.
pub fn hankel_average(raw: &Mat<Complex64>, n_rx: usize, n_tx: usize) -> VirtualChannelMatrix {
    let m = raw.nrows() / n_rx;
    assert_eq!(raw.nrows(), m * n_rx);
    assert_eq!(raw.ncols(), m * n_tx);
    let n_sub = 2 * m - 1;
    let mut blocks: Vec<Mat<Complex64>> = (0..n_sub).map(|_| Mat::zeros(n_rx, n_tx)).collect();
    for bi in 0..m {
        for bj in 0..m {
            let dst = &mut blocks[bi + bj];
            for i in 0..n_rx {
                for j in 0..n_tx {
                    dst[(i, j)] += raw[(bi * n_rx + i, bj * n_tx + j)];
                }
            }
        }
    }
    for (n, blk) in blocks.iter_mut().enumerate() {
        let scale = Complex64::new(1.0 / hankel_multiplicity(n, n_sub) as f64, 0.0);
        for j in 0..n_tx {
            for i in 0..n_rx {
                blk[(i, j)] *= scale;
            }
        }
    }
    VirtualChannelMatrix { blocks }
}
