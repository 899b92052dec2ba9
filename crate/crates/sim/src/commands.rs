//! The work behind each subcommand, returning tables, reports and JSON so the
//! binary only parses flags and writes files.

use std::fmt::Write as _;
use std::path::Path;

use nms_core::covariance::steady_state_covariance;
use nms_core::dressed::{dressed_ladder, nonlinear_levels, Branch};
use nms_core::dynamics::{build_drift, damped_eigenvalues};
use nms_core::normal_modes::{threshold_coupling, threshold_power, undamped_frequencies, NormalModes};
use nms_core::params::{hz, to_hz, DerivedRates, SystemParams, ZeroPointConvention, HBAR, TWO_PI};
use nms_core::spectrum::{noise_power_spectrum, spectrum_on_axis, GridSpec, NoiseModel};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{load_config, parse_config, PAPER_CONFIG};
use crate::csv_io::{Cell, Table};
use crate::error::Result;
use crate::oracle::{compare_peaks, covariance_deviation, simulate_ensemble, OutputPort, PeakComparison, TrajectoryConfig};
use crate::sweep::{sweep_modes, sweep_spectrum_peaks, SweepSpec, MODE_HEADER, PEAK_HEADER};

/// Loads `path` (or the bundled reference configuration) and applies the
/// command-line overrides.
pub fn resolve_params(path: Option<&Path>, power_w: Option<f64>, detuning_hz: Option<f64>) -> Result<SystemParams> {
    let mut p = match path {
        Some(path) => load_config(path)?,
        None => parse_config(PAPER_CONFIG)?,
    };
    if let Some(power) = power_w {
        p.power = power;
    }
    if let Some(detuning) = detuning_hz {
        p.detuning = hz(detuning);
    }
    p.validate()?;
    Ok(p)
}

/// Grid in rad/s from optional Hz flags, defaulting to `[0.5, 1.5]·ω_m`.
pub fn resolve_grid(p: &SystemParams, start_hz: Option<f64>, stop_hz: Option<f64>, points: Option<usize>) -> Result<GridSpec> {
    let default = GridSpec::around_mechanics(p);
    let grid = GridSpec {
        start: start_hz.map(hz).unwrap_or(default.start),
        stop: stop_hz.map(hz).unwrap_or(default.stop),
        points: points.unwrap_or(default.points),
    };
    grid.validate()?;
    Ok(grid)
}

pub const MODES_HEADER: [&str; 17] = [
    "power_w",
    "detuning_hz",
    "g0_hz",
    "g_hz",
    "alpha",
    "n_bar",
    "gamma_m_eff_hz",
    "omega_plus_undamped_hz",
    "omega_minus_undamped_hz",
    "splitting_hz",
    "omega_plus_hz",
    "omega_minus_hz",
    "gamma_plus_hz",
    "gamma_minus_hz",
    "damped_splitting_hz",
    "threshold_g_hz",
    "threshold_power_w",
];

#[derive(Debug, Clone)]
pub struct ModesReport {
    pub rates: DerivedRates,
    pub undamped: (f64, f64),
    pub damped: NormalModes,
    pub threshold_g: Option<f64>,
    pub threshold_power: Option<f64>,
    pub table: Table,
}

impl ModesReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (name, value) in self.table.header.iter().zip(&self.table.rows[0]) {
            let shown = value.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{name:<26}{shown}");
        }
        s
    }
}

pub fn cmd_modes(p: &SystemParams) -> Result<ModesReport> {
    let rates = DerivedRates::from_params(p);
    let undamped = undamped_frequencies(p, rates.g)?;
    let ev = damped_eigenvalues(&build_drift(p, rates.g))?;
    ev.require_stable()?;
    let [plus, minus] = ev.upper_pair();
    let damped = NormalModes::from_pair(plus, minus);
    let threshold_g = threshold_coupling(p).ok().flatten();
    let threshold_power = threshold_power(p).ok().flatten();

    let row: Vec<Cell> = vec![
        Some(p.power),
        Some(to_hz(p.detuning)),
        Some(to_hz(rates.g0)),
        Some(to_hz(rates.g)),
        Some(rates.alpha),
        Some(rates.n_bar),
        Some(to_hz(rates.gamma_m_eff)),
        Some(to_hz(undamped.0)),
        Some(to_hz(undamped.1)),
        Some(to_hz(undamped.0 - undamped.1)),
        Some(to_hz(damped.omega_plus)),
        Some(to_hz(damped.omega_minus)),
        Some(to_hz(damped.gamma_plus)),
        Some(to_hz(damped.gamma_minus)),
        Some(to_hz(damped.splitting)),
        threshold_g.map(to_hz),
        threshold_power,
    ];
    let mut table = Table::new(&MODES_HEADER);
    table.rows.push(row);
    Ok(ModesReport {
        rates,
        undamped,
        damped,
        threshold_g,
        threshold_power,
        table,
    })
}

pub const SPECTRUM_HEADER: [&str; 4] = ["freq_hz", "s_pos", "s_neg", "s_nps"];

pub fn cmd_spectrum(p: &SystemParams, grid: &GridSpec) -> Result<Table> {
    let g = DerivedRates::from_params(p).g;
    let s = noise_power_spectrum(p, g, grid)?;
    let mut table = Table::new(&SPECTRUM_HEADER);
    for i in 0..s.len() {
        table.rows.push(vec![
            Some(to_hz(s.omega_axis[i])),
            Some(s.s_values[i]),
            Some(s.s_neg_values[i]),
            Some(s.s_nps_values[i]),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepQuantity {
    Modes,
    SpectrumPeaks,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub table: Table,
    pub failures: usize,
}

pub fn cmd_sweep(p: &SystemParams, spec: &SweepSpec, what: SweepQuantity, grid: &GridSpec) -> Result<SweepReport> {
    match what {
        SweepQuantity::Modes => {
            let out = sweep_modes(p, spec)?;
            let mut table = Table::new(&MODE_HEADER);
            table.rows = out.rows.iter().map(|r| r.cells()).collect();
            Ok(SweepReport {
                table,
                failures: out.failures,
            })
        }
        SweepQuantity::SpectrumPeaks => {
            let out = sweep_spectrum_peaks(p, spec, grid)?;
            let mut table = Table::new(&PEAK_HEADER);
            table.rows = out.rows.iter().map(|r| r.cells()).collect();
            Ok(SweepReport {
                table,
                failures: out.failures,
            })
        }
    }
}

pub const ORACLE_HEADER: [&str; 5] = ["freq_hz", "s_pos", "s_neg", "s_nps", "s_nps_analytic"];

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub table: Table,
    pub comparison: PeakComparison,
    pub covariance_deviation: f64,
    pub text: String,
}

/// Comparison window: the undamped doublet widened by the total cavity decay
/// on either side.
pub fn comparison_window(p: &SystemParams, g: f64) -> (f64, f64) {
    let (wp, wm) = undamped_frequencies(p, g).unwrap_or((p.omega_m.max(p.detuning), p.omega_m.min(p.detuning)));
    let (hi_mode, lo_mode) = (wp.max(wm), wp.min(wm));
    let lo = (lo_mode - p.kappa_total()).max(0.05 * lo_mode);
    (lo, hi_mode + p.kappa_total())
}

pub fn cmd_oracle(p: &SystemParams, cfg: &TrajectoryConfig, trajectories: usize) -> Result<OracleReport> {
    let g = DerivedRates::from_params(p).g;
    let d = build_drift(p, g);
    let n = NoiseModel::from_params(p);
    let ensemble = simulate_ensemble(&d, &n, cfg, trajectories, OutputPort::Cavity)?;
    let (lo, hi) = comparison_window(p, g);
    let comparison = compare_peaks(&ensemble.spectrum, &d, &n, lo, hi, 2)?;
    let reference = steady_state_covariance(&d, &n)?;
    let cov_dev = covariance_deviation(&ensemble.covariance, &reference);

    let analytic = spectrum_on_axis(&d, &n, &ensemble.spectrum.omega_axis)?;
    let s = &ensemble.spectrum;
    let mut table = Table::new(&ORACLE_HEADER);
    for i in 0..s.len() {
        table.rows.push(vec![
            Some(to_hz(s.omega_axis[i])),
            Some(s.s_values[i]),
            Some(s.s_neg_values[i]),
            Some(s.s_nps_values[i]),
            Some(analytic.s_nps_values[i]),
        ]);
    }

    let mut text = String::new();
    let _ = writeln!(text, "generator        xoshiro256++ / ziggurat normals");
    let _ = writeln!(text, "seed             {}", cfg.seed);
    let _ = writeln!(text, "trajectories     {trajectories}");
    let _ = writeln!(text, "dt_s             {:e}", cfg.dt);
    let _ = writeln!(text, "steps            {} (burn-in {})", cfg.n_steps, cfg.burn_in);
    let _ = writeln!(
        text,
        "segments         {} x {} samples, resolution {:.1} Hz",
        cfg.n_segments,
        cfg.segment_len(),
        1.0 / (cfg.segment_len() as f64 * cfg.sample_interval())
    );
    let _ = writeln!(text, "window_hz        {:.1} .. {:.1}", to_hz(lo), to_hz(hi));
    for (k, ((a, o), delta)) in comparison
        .analytic_peaks
        .iter()
        .zip(&comparison.oracle_peaks)
        .zip(&comparison.center_deltas)
        .enumerate()
    {
        let _ = writeln!(
            text,
            "peak {k}           analytic {:.1} Hz  oracle {:.1} Hz  delta {:+.1} Hz",
            to_hz(*a),
            to_hz(*o),
            to_hz(*delta)
        );
    }
    if let Some(ratios) = comparison.width_ratios() {
        let shown: Vec<String> = ratios.iter().map(|r| format!("{:+.1}%", 100.0 * r)).collect();
        let _ = writeln!(text, "width_deviation  {}", shown.join("  "));
    }
    let _ = writeln!(text, "max_delta_hz     {:.1}", to_hz(comparison.max_center_delta()));
    let _ = writeln!(text, "covariance_dev   {:.2}%", 100.0 * cov_dev);
    Ok(OracleReport {
        table,
        comparison,
        covariance_deviation: cov_dev,
        text,
    })
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Plus => "plus",
        Branch::Minus => "minus",
    }
}

/// Ladder of the linearised system plus the exact nonlinear levels.
pub fn cmd_dressed(p: &SystemParams, n_max: usize, m_max: usize) -> Result<Value> {
    let g = DerivedRates::from_params(p).g;
    let (wp, wm) = undamped_frequencies(p, g)?;
    let modes = NormalModes::from_pair(Complex64::new(0.0, wp), Complex64::new(0.0, wm));
    let ladder = dressed_ladder(&modes, n_max, m_max)?;
    let nonlinear = nonlinear_levels(p, m_max, n_max)?;
    let omega_laser = p.omega_c - p.detuning;

    let levels: Vec<Value> = ladder
        .levels
        .iter()
        .map(|l| json!({ "n": l.n, "m": l.m, "energy_j": l.energy, "energy_hz": l.energy / HBAR / TWO_PI }))
        .collect();
    let transitions: Vec<Value> = ladder
        .transitions
        .iter()
        .map(|t| {
            json!({
                "from": [t.from.0, t.from.1],
                "to": [t.to.0, t.to.1],
                "branch": branch_name(t.branch),
                "sideband_hz": to_hz(t.sideband),
            })
        })
        .collect();
    let nonlinear_json: Vec<Value> = nonlinear
        .levels
        .iter()
        .map(|l| json!({ "k": l.k, "n": l.n, "energy_j": l.energy, "displacement": l.displacement }))
        .collect();
    let convention = match p.g0_convention {
        ZeroPointConvention::Printed => "printed",
        ZeroPointConvention::Half => "half",
    };
    Ok(json!({
        "power_w": p.power,
        "detuning_hz": to_hz(p.detuning),
        "g_hz": to_hz(g),
        "omega_plus_hz": to_hz(wp),
        "omega_minus_hz": to_hz(wm),
        "ladder": {
            "n_max": n_max,
            "m_max": m_max,
            "levels": levels,
            "transitions": transitions,
        },
        "emission_lines_hz": ladder.emission_lines(omega_laser).map(to_hz),
        "nonlinear": {
            "g0_convention": convention,
            "g0_hz": to_hz(nonlinear.g0),
            "rabi_splitting_hz": to_hz(nonlinear.rabi_splitting),
            "levels": nonlinear_json,
        },
    }))
}
