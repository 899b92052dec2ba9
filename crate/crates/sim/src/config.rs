//! Flat `key = value` device configuration.
//!
//! Frequencies are given in Hz except `omega_c_rad_s`; everything is stored
//! in rad/s once parsed. `#` starts a comment anywhere on a line.

use std::fmt::Write as _;
use std::path::Path;

use nms_core::params::{hz, to_hz, SystemParams, ZeroPointConvention};

use crate::error::{Result, SimError};

/// The reference device configuration shipped with the crate.
pub const PAPER_CONFIG: &str = include_str!("../paper.cfg");

pub const KEYS: [&str; 11] = [
    "omega_m_hz",
    "gamma_m0_hz",
    "kappa_hz",
    "kappa_bar_hz",
    "length_m",
    "omega_c_rad_s",
    "mass_kg",
    "temperature_k",
    "power_w",
    "detuning_hz",
    "g0_convention",
];

fn config_error(line: usize, message: impl Into<String>) -> SimError {
    SimError::Config {
        line,
        message: message.into(),
    }
}

pub fn parse_config(text: &str) -> Result<SystemParams> {
    let mut numbers = [f64::NAN; 10];
    let mut lines = [0usize; 11];
    let mut convention = ZeroPointConvention::Printed;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line_no, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| config_error(line_no, format!("unknown key `{key}`")))?;
        if lines[slot] != 0 {
            return Err(config_error(
                line_no,
                format!("duplicate key `{key}` (first set on line {})", lines[slot]),
            ));
        }
        lines[slot] = line_no;
        if key == "g0_convention" {
            convention = match value {
                "printed" => ZeroPointConvention::Printed,
                "half" => ZeroPointConvention::Half,
                other => {
                    return Err(config_error(
                        line_no,
                        format!("g0_convention must be `printed` or `half`, got `{other}`"),
                    ))
                }
            };
        } else {
            numbers[slot] = value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| config_error(line_no, format!("`{key}`: not a finite number: `{value}`")))?;
        }
    }

    if let Some(missing) = KEYS[..10].iter().zip(&lines).find(|(_, l)| **l == 0) {
        return Err(config_error(0, format!("missing key `{}`", missing.0)));
    }

    let [omega_m, gamma_m0, kappa, kappa_bar, length, omega_c, mass, temperature, power, detuning] = numbers;
    let p = SystemParams {
        omega_m: hz(omega_m),
        gamma_m0: hz(gamma_m0),
        kappa: hz(kappa),
        kappa_bar: hz(kappa_bar),
        length,
        omega_c,
        mass,
        temperature,
        power,
        detuning: hz(detuning),
        g0_convention: convention,
    };
    p.validate().map_err(|e| {
        let line = match e {
            nms_core::Error::InvalidParameter { name, .. } => KEYS
                .iter()
                .position(|k| k.starts_with(name) && k[name.len()..].starts_with('_'))
                .map(|i| lines[i])
                .unwrap_or(0),
            _ => 0,
        };
        config_error(line, e.to_string())
    })?;
    Ok(p)
}

pub fn load_config(path: &Path) -> Result<SystemParams> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Serialises parameters back into the configuration format.
pub fn render_config(p: &SystemParams) -> String {
    let convention = match p.g0_convention {
        ZeroPointConvention::Printed => "printed",
        ZeroPointConvention::Half => "half",
    };
    let values = [
        to_hz(p.omega_m),
        to_hz(p.gamma_m0),
        to_hz(p.kappa),
        to_hz(p.kappa_bar),
        p.length,
        p.omega_c,
        p.mass,
        p.temperature,
        p.power,
        to_hz(p.detuning),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value:e}");
    }
    let _ = writeln!(out, "g0_convention = {convention}");
    out
}
