//! Signal model: system constants, steering and delay vectors, per-sub-carrier
//! channel matrices, pilot generation, and noisy received-signal synthesis.

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{forward_map, ChannelParams, SceneConfig};

/// System constants of one link.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Carrier frequency, Hz.
    pub fc_hz: f64,
    /// Bandwidth, Hz (≪ fc).
    pub bw_hz: f64,
    /// Number of sub-carriers N (odd).
    pub n_sub: usize,
    /// Receive (target) antennas.
    pub n_rx: usize,
    /// Transmit (BS) antennas.
    pub n_tx: usize,
    /// Pilot symbols G.
    pub n_pilots: usize,
    /// NLOS path count K.
    pub n_nlos: usize,
    /// Propagation speed, m/s.
    pub c: f64,
    /// Antenna spacing d, meters.
    pub antenna_spacing: f64,
    /// Noise variance per complex sample.
    pub noise_var: f64,
    /// Extra attenuation applied to each NLOS gain, dB.
    pub nlos_loss_db: f64,
}

impl SystemConfig {
    /// The experiment configuration used throughout the benchmark: 60 GHz
    /// carrier, 100 MHz bandwidth, N = 15, N_r = N_t = G = 16, K = 2,
    /// half-wavelength spacing.
    pub fn paper_defaults() -> Self {
        let fc_hz = 60e9;
        let c = 3e8;
        Self {
            fc_hz,
            bw_hz: 100e6,
            n_sub: 15,
            n_rx: 16,
            n_tx: 16,
            n_pilots: 16,
            n_nlos: 2,
            c,
            antenna_spacing: c / fc_hz / 2.0,
            noise_var: 0.0,
            nlos_loss_db: 6.0,
        }
    }

    /// Sampling period T_s = 1/B, seconds.
    pub fn sample_period(&self) -> f64 {
        1.0 / self.bw_hz
    }

    /// Carrier wavelength λ_c = c/f_c, meters.
    pub fn wavelength(&self) -> f64 {
        self.c / self.fc_hz
    }

    /// Block-Hankel side length M = (N+1)/2.
    pub fn m(&self) -> usize {
        (self.n_sub + 1) / 2
    }

    /// Unambiguous delay span N·T_s, seconds.
    pub fn delay_span(&self) -> f64 {
        self.n_sub as f64 * self.sample_period()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sub % 2 == 0 || self.n_sub < 3 {
            return Err(Error::InvalidConfig(format!(
                "n_sub must be odd and ≥ 3, got {}",
                self.n_sub
            )));
        }
        if !(self.bw_hz > 0.0 && self.fc_hz > self.bw_hz) {
            return Err(Error::InvalidConfig(
                "require 0 < bandwidth < carrier frequency".into(),
            ));
        }
        if self.n_rx < 2 || self.n_tx < 2 || self.n_pilots < 1 {
            return Err(Error::InvalidConfig(
                "need at least 2 antennas per side and 1 pilot".into(),
            ));
        }
        if !(self.c > 0.0 && self.antenna_spacing > 0.0) {
            return Err(Error::InvalidConfig(
                "propagation speed and antenna spacing must be positive".into(),
            ));
        }
        if self.noise_var < 0.0 {
            return Err(Error::InvalidConfig("noise variance must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Unit-norm Fourier vector: entry k is e^(−j2πkf)/√len.
pub fn fourier_vec(len: usize, f: f64) -> Vec<Complex64> {
    assert!(len >= 1);
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|k| Complex64::from_polar(scale, -std::f64::consts::TAU * k as f64 * f))
        .collect()
}

/// Receive steering vector for an arrival angle.
pub fn steering_rx(theta: f64, sys: &SystemConfig) -> Vec<Complex64> {
    fourier_vec(sys.n_rx, sys.antenna_spacing * theta.sin() / sys.wavelength())
}

/// Transmit steering vector for a departure angle.
pub fn steering_tx(theta: f64, sys: &SystemConfig) -> Vec<Complex64> {
    fourier_vec(sys.n_tx, sys.antenna_spacing * theta.sin() / sys.wavelength())
}

/// Delay signature vector of length M with norm √(2/(N+1)).
pub fn delay_vec(tau: f64, sys: &SystemConfig) -> Result<Vec<Complex64>> {
    let f = tau / sys.delay_span();
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::DelayOutOfRange {
            tau_s: tau,
            max_s: sys.delay_span(),
        });
    }
    let scale = (2.0 / (sys.n_sub as f64 + 1.0)).sqrt();
    Ok(fourier_vec(sys.m(), f)
        .into_iter()
        .map(|z| z * scale)
        .collect())
}

/// The n-th sub-carrier channel matrix (N_r × N_t).
pub fn subcarrier_channel(n: usize, params: &ChannelParams, sys: &SystemConfig) -> Mat<Complex64> {
    assert!(n < sys.n_sub, "sub-carrier index out of range");
    let mut h = Mat::<Complex64>::zeros(sys.n_rx, sys.n_tx);
    let span = sys.delay_span();
    for (path, &gain) in params.paths.iter().zip(&params.gains) {
        let rot = Complex64::from_polar(1.0, -std::f64::consts::TAU * n as f64 * path.toa / span);
        let coef = gain * rot;
        let a = steering_rx(path.aoa, sys);
        let b = steering_tx(path.aod, sys);
        for i in 0..sys.n_rx {
            let left = coef * a[i];
            for j in 0..sys.n_tx {
                h[(i, j)] += left * b[j].conj();
            }
        }
    }
    h
}

/// Draw path gains from the free-space path loss model: unit-magnitude
/// uniformly-phased complex gain over √ρ attenuation, with the configured
/// extra loss on NLOS paths.
pub fn make_gains<R: Rng + ?Sized>(
    scene: &SceneConfig,
    sys: &SystemConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let paths = forward_map(scene, sys.c)?;
    let lam = sys.wavelength();
    let nlos_scale = 10f64.powf(-sys.nlos_loss_db / 20.0);
    Ok(paths
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let length = sys.c * p.toa;
            let rho = (4.0 * std::f64::consts::PI * length / lam).powi(2);
            let mag = ((sys.n_tx * sys.n_rx) as f64).sqrt() / rho.sqrt();
            let mag = if k == 0 { mag } else { mag * nlos_scale };
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(mag, phase)
        })
        .collect())
}

/// Pilot symbols: per sub-carrier n, the N_t × G matrix of transmitted
/// symbols.
#[derive(Debug, Clone)]
pub struct PilotMatrix {
    pub blocks: Vec<Mat<Complex64>>,
}

/// Received pilot observations: per sub-carrier n, the N_r × G matrix of
/// received samples.
#[derive(Debug, Clone)]
pub struct ReceivedSignal {
    pub blocks: Vec<Mat<Complex64>>,
}

impl ReceivedSignal {
    pub fn energy(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_l2().powi(2)).sum()
    }
}

/// Draw unit-modulus pilots, i.i.d. uniform on the circle.
///
/// Entries are generated sub-carrier-major, then pilot, then antenna, so a
/// fixed seed reproduces the same matrix.
pub fn make_pilots<R: Rng + ?Sized>(sys: &SystemConfig, rng: &mut R) -> PilotMatrix {
    let blocks = (0..sys.n_sub)
        .map(|_| {
            let mut s = Mat::<Complex64>::zeros(sys.n_tx, sys.n_pilots);
            for g in 0..sys.n_pilots {
                for t in 0..sys.n_tx {
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    s[(t, g)] = Complex64::from_polar(1.0, phase);
                }
            }
            s
        })
        .collect();
    PilotMatrix { blocks }
}

/// Noiseless received blocks H^(n)·S^(n).
pub fn noiseless_observation(
    params: &ChannelParams,
    pilots: &PilotMatrix,
    sys: &SystemConfig,
) -> Vec<Mat<Complex64>> {
    (0..sys.n_sub)
        .map(|n| &subcarrier_channel(n, params, sys) * &pilots.blocks[n])
        .collect()
}

/// Total noiseless received energy ‖HS‖²_F; the numerator of the SNR
/// definition used by the benchmark.
pub fn signal_energy(params: &ChannelParams, pilots: &PilotMatrix, sys: &SystemConfig) -> f64 {
    noiseless_observation(params, pilots, sys)
        .iter()
        .map(|b| b.norm_l2().powi(2))
        .sum()
}

/// Synthesize noisy received pilots: Y^(n) = H^(n)S^(n) + W^(n) with circular
/// complex Gaussian noise of variance `sys.noise_var` per entry.
pub fn synthesize<R: Rng + ?Sized>(
    params: &ChannelParams,
    pilots: &PilotMatrix,
    sys: &SystemConfig,
    rng: &mut R,
) -> ReceivedSignal {
    let std = (sys.noise_var / 2.0).sqrt();
    let blocks = noiseless_observation(params, pilots, sys)
        .into_iter()
        .map(|mut b| {
            if std > 0.0 {
                for j in 0..b.ncols() {
                    for i in 0..b.nrows() {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        b[(i, j)] += Complex64::new(re * std, im * std);
                    }
                }
            }
            b
        })
        .collect();
    ReceivedSignal { blocks }
}
