use nms_core::covariance::steady_state_covariance;
use nms_core::dynamics::{build_drift, DriftModel};
use nms_core::fitting::fit_lorentzian;
use nms_core::linalg::{diag, zeros};
use nms_core::params::{driven_coupling, hz, SystemParams};
use nms_core::spectrum::{NoiseModel, VACUUM_LEVEL};
use nms_sim::commands::comparison_window;
use nms_sim::oracle::{
    compare_peaks, covariance_deviation, output_periodogram, simulate_ensemble, simulate_trajectory, OutputPort,
    TrajectoryConfig, MIN_STEPS,
};

fn heavy_mechanics() -> SystemParams {
    let mut p = SystemParams::reference();
    p.gamma_m0 = hz(50e3);
    p
}

#[test]
fn noiseless_uncoupled_mechanics_rings_down() {
    let p = heavy_mechanics();
    let d = build_drift(&p, 0.0);
    let n = NoiseModel::from_params(&p);
    let cfg = TrajectoryConfig {
        dt: 1e-10,
        n_steps: MIN_STEPS,
        n_segments: 1,
        burn_in: 0,
        decimation: 1,
        noise_scale: 0.0,
        initial_state: [0.0, 0.0, 1.0, 0.0],
        ..TrajectoryConfig::default()
    };
    let traj = simulate_trajectory(&d, &n, &cfg).unwrap();
    let t = cfg.dt * cfg.n_steps as f64;
    let envelope = (-p.gamma_m0 * t).exp();
    let x = envelope * (p.omega_m * t).cos();
    let y = -envelope * (p.omega_m * t).sin();
    let r = traj.final_state;
    assert_eq!(&r[..2], &[0.0, 0.0]);
    assert!((r[2] - x).abs() < 0.01 * envelope, "{} vs {x}", r[2]);
    assert!((r[3] - y).abs() < 0.01 * envelope, "{} vs {y}", r[3]);
}

#[test]
fn ensemble_mean_vanishes() {
    let mut p = heavy_mechanics();
    p.temperature = 1e-3;
    let g = hz(200e3);
    let d = build_drift(&p, g);
    let n = NoiseModel::from_params(&p);
    let reference = steady_state_covariance(&d, &n).unwrap();
    let cfg = TrajectoryConfig {
        dt: 5e-10,
        n_steps: MIN_STEPS,
        n_segments: 1,
        burn_in: 0,
        decimation: 1,
        initial_state: [0.0, 0.0, 50.0, 0.0],
        ..TrajectoryConfig::default()
    };
    let runs = 64;
    let mut mean = [0.0; 4];
    for k in 0..runs {
        let traj = simulate_trajectory(&d, &n, &TrajectoryConfig { stream: k, ..cfg }).unwrap();
        for (m, x) in mean.iter_mut().zip(traj.final_state) {
            *m += x / runs as f64;
        }
    }
    for i in 0..4 {
        let standard_error = (reference[i][i] / runs as f64).sqrt();
        assert!(mean[i].abs() < 4.0 * standard_error, "component {i}: {} vs σ {}", mean[i], standard_error);
    }
}

#[test]
fn memoryless_channel_is_flat_at_vacuum() {
    let rate = 1e7;
    let d = DriftModel::from_parts(zeros(), diag(&[rate; 4]), zeros());
    let n = NoiseModel::thermal(0.0);
    let cfg = TrajectoryConfig {
        dt: 1e-9,
        n_steps: 1 << 18,
        n_segments: 511,
        burn_in: 0,
        decimation: 1,
        ..TrajectoryConfig::default()
    };
    let traj = simulate_trajectory(&d, &n, &cfg).unwrap();
    let s = output_periodogram(&traj, &d, &cfg, OutputPort::Cavity).unwrap();
    assert_eq!(s.omega_axis.len(), 513);
    // EM colours the output by O(rate·dt) towards Nyquist; check each quarter band
    for (k, chunk) in s.s_values[1..].chunks(128).zip(s.s_neg_values[1..].chunks(128)).enumerate() {
        for band in [chunk.0, chunk.1] {
            let mean = band.iter().sum::<f64>() / band.len() as f64;
            assert!((mean / VACUUM_LEVEL - 1.0).abs() < 0.03, "quarter {k}: {mean}");
        }
    }
}

#[test]
fn uncoupled_mechanics_peak_width() {
    let p = heavy_mechanics();
    let d = build_drift(&p, 0.0);
    let n = NoiseModel::from_params(&p);
    let cfg = TrajectoryConfig {
        dt: 5e-10,
        n_steps: 41 * 4096 * 40 + 4000,
        n_segments: 40,
        burn_in: 4000,
        decimation: 40,
        ..TrajectoryConfig::default()
    };
    assert_eq!(cfg.segment_len(), 8192);
    let traj = simulate_trajectory(&d, &n, &cfg).unwrap();
    let s = output_periodogram(&traj, &d, &cfg, OutputPort::MechanicsEmitted).unwrap();
    let (x, y) = s.nps_window(p.omega_m - 6.0 * p.gamma_m0, p.omega_m + 6.0 * p.gamma_m0);
    let fit = fit_lorentzian(&x, &y, 1, None).unwrap();
    let fwhm = fit.fwhm()[0];
    assert!((fit.centers[0] / p.omega_m - 1.0).abs() < 0.01, "centre {}", fit.centers[0]);
    assert!((fwhm / (2.0 * p.gamma_m0) - 1.0).abs() < 0.3, "FWHM {fwhm}");

    // the full port reflects the bath: all-pass, flat at n̄ + ½ on both sidebands
    let full = output_periodogram(&traj, &d, &cfg, OutputPort::Mechanics).unwrap();
    let (_, y) = full.nps_window(p.omega_m - 6.0 * p.gamma_m0, p.omega_m + 6.0 * p.gamma_m0);
    let level = std::f64::consts::SQRT_2 * n.n_matrix[2];
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    assert!((mean / level - 1.0).abs() < 0.05, "{mean} vs {level}");
}

#[test]
fn covariance_matches_lyapunov() {
    let p = SystemParams::reference();
    let d = build_drift(&p, driven_coupling(&p));
    let n = NoiseModel::from_params(&p);
    let cfg = TrajectoryConfig {
        n_steps: 10_040_000,
        n_segments: 97,
        ..TrajectoryConfig::default()
    };
    let e = simulate_ensemble(&d, &n, &cfg, 4, OutputPort::Cavity).unwrap();
    assert_eq!(e.trajectories, 4);
    let reference = steady_state_covariance(&d, &n).unwrap();
    let dev = covariance_deviation(&e.covariance, &reference);
    assert!(dev < 0.1, "deviation {dev}");
}

#[test]
fn halving_the_step_moves_peaks_little() {
    let p = SystemParams::reference();
    let g = driven_coupling(&p);
    let d = build_drift(&p, g);
    let n = NoiseModel::from_params(&p);
    let coarse = TrajectoryConfig {
        dt: 5e-10,
        n_steps: 40_040_000,
        n_segments: 195,
        burn_in: 40_000,
        decimation: 100,
        noise_substeps: 2,
        seed: 11,
        ..TrajectoryConfig::default()
    };
    let fine = TrajectoryConfig {
        dt: 2.5e-10,
        n_steps: 2 * coarse.n_steps,
        burn_in: 2 * coarse.burn_in,
        decimation: 2 * coarse.decimation,
        noise_substeps: 1,
        ..coarse
    };
    assert_eq!(coarse.sample_interval(), fine.sample_interval());
    let (lo, hi) = comparison_window(&p, g);
    let peaks = |cfg: &TrajectoryConfig| {
        let e = simulate_ensemble(&d, &n, cfg, 1, OutputPort::Cavity).unwrap();
        compare_peaks(&e.spectrum, &d, &n, lo, hi, 2).unwrap().oracle_peaks
    };
    let (a, b) = (peaks(&coarse), peaks(&fine));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < hz(500.0), "{} Hz", (x - y) / hz(1.0));
    }
}
