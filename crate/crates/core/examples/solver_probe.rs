//! Convergence probe: noisy benchmark-scene solve at several SNRs.

use anmloc_core::denoiser::{default_epsilon, solve_denoiser, SolverSettings};
use anmloc_core::geometry::{forward_map, ChannelParams, Point2D, SceneConfig};
use anmloc_core::signal::{make_gains, make_pilots, signal_energy, synthesize, SystemConfig};
use anmloc_core::vcm::build_virtual;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn main() {
    let mut sys = SystemConfig::paper_defaults();
    let scene = SceneConfig {
        bs: Point2D::new(0.0, 0.0),
        target: Point2D::new(20.0, 5.0),
        orientation: 0.2,
        scatterers: vec![Point2D::new(7.45, 8.54), Point2D::new(19.89, -6.05)],
    };
    let eps_scale: f64 = std::env::var("PROBE_EPS").ok().and_then(|s| s.parse().ok()).unwrap_or(1.0);

    for snr_db in [0.0f64, 10.0, 20.0] {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let paths = forward_map(&scene, sys.c).unwrap();
        let gains = make_gains(&scene, &sys, &mut rng).unwrap();
        let params = ChannelParams::new(paths, gains).unwrap();
        let pilots = make_pilots(&sys, &mut rng);
        let es = signal_energy(&params, &pilots, &sys);
        let count = (sys.n_sub * sys.n_rx * sys.n_pilots) as f64;
        sys.noise_var = es / (10f64.powf(snr_db / 10.0) * count);
        let y = synthesize(&params, &pilots, &sys, &mut rng);
        let eps = default_epsilon(sys.noise_var.sqrt(), &sys, eps_scale);
        let settings = SolverSettings::for_system(eps, &sys);
        let truth = build_virtual(&params, &sys).unwrap().materialize();

        let t0 = Instant::now();
        let sol = solve_denoiser(&y, &pilots, &sys, &settings).unwrap();
        let err = (&sol.h_v_hat.materialize() - &truth).norm_l2() / truth.norm_l2();
        println!(
            "snr {snr_db:5.1}  iters {:5}  time {:8.2?}  primal {:10.3e}  dual {:10.3e}  relerr {:9.3e}  conv {}",
            sol.diagnostics.iterations,
            t0.elapsed(),
            sol.diagnostics.primal_residual,
            sol.diagnostics.dual_residual,
            err,
            sol.diagnostics.converged
        );
    }
}
