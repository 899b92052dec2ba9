//! Device parameters and the scalar rates derived from them.
//!
//! All rates are stored as angular frequencies (rad/s). Conversion from the
//! ordinary-frequency values used in configuration files happens at the IO
//! boundary, see [`hz`].

use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380649e-23;
pub const TWO_PI: f64 = 2.0 * PI;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}

/// Mechanical zero-point length convention used for the single-photon
/// coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPointConvention {
    /// `x_zpf = sqrt(ħ / (m ω_m))`
    #[default]
    Printed,
    /// `x_zpf = sqrt(ħ / (2 m ω_m))`
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Natural mechanical amplitude damping (rad/s).
    pub gamma_m0: f64,
    /// Input-coupler cavity amplitude decay (rad/s).
    pub kappa: f64,
    /// Second-mirror cavity amplitude decay (rad/s).
    pub kappa_bar: f64,
    /// Cavity length (m).
    pub length: f64,
    /// Cavity optical angular frequency (rad/s).
    pub omega_c: f64,
    /// Effective mechanical mass (kg).
    pub mass: f64,
    /// Bath temperature (K).
    pub temperature: f64,
    /// Drive laser input power (W).
    pub power: f64,
    /// Effective laser detuning (rad/s), already corrected for the static
    /// radiation-pressure shift.
    pub detuning: f64,
    pub g0_convention: ZeroPointConvention,
}

impl SystemParams {
    /// The reference device: 947 kHz mechanics, 145 ng effective mass, 2.5 cm
    /// cavity with a 172 kHz input coupler and 43 kHz loss through the
    /// mechanical mirror, driven on the red sideband (Δ = ω_m) at 10.7 mW and
    /// room temperature.
    pub fn reference() -> Self {
        let omega_m = hz(947e3);
        SystemParams {
            omega_m,
            gamma_m0: hz(140.0),
            kappa: hz(172e3),
            kappa_bar: hz(43e3),
            length: 0.025,
            omega_c: 1.77e15,
            mass: 145e-12,
            temperature: 300.0,
            power: 10.7e-3,
            detuning: omega_m,
            g0_convention: ZeroPointConvention::Printed,
        }
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    /// Total cavity amplitude decay κ + κ̄.
    pub fn kappa_total(&self) -> f64 {
        self.kappa + self.kappa_bar
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("length", self.length),
            ("omega_c", self.omega_c),
            ("mass", self.mass),
        ];
        let non_negative = [
            ("gamma_m0", self.gamma_m0),
            ("kappa_bar", self.kappa_bar),
            ("temperature", self.temperature),
            ("power", self.power),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParameter {
                name: "detuning",
                value: self.detuning,
            });
        }
        Ok(())
    }
}

/// Single-photon optomechanical coupling `g₀ = (ω_c/L)·x_zpf` (rad/s).
pub fn single_photon_coupling(p: &SystemParams) -> f64 {
    let zpf_sq = match p.g0_convention {
        ZeroPointConvention::Printed => HBAR / (p.mass * p.omega_m),
        ZeroPointConvention::Half => HBAR / (2.0 * p.mass * p.omega_m),
    };
    p.omega_c / p.length * libm::sqrt(zpf_sq)
}

/// Drive-enhanced coupling for a two-sided cavity (rad/s). With κ̄ = 0 this is
/// the one-sided expression.
pub fn driven_coupling(p: &SystemParams) -> f64 {
    let kt = p.kappa_total();
    let num = p.power * p.kappa * p.omega_c;
    let den = p.mass * p.omega_m * (kt * kt + p.detuning * p.detuning);
    2.0 / p.length * libm::sqrt(num / den)
}

/// Mean thermal phonon number in the high-temperature limit, `k_B T / ħω_m`.
pub fn thermal_occupation(p: &SystemParams) -> f64 {
    K_B * p.temperature / (HBAR * p.omega_m)
}

/// Cavity-assisted mechanical damping (rad/s) from the weak-coupling cooling
/// rate. Evaluated for any `g`; no validity range is enforced.
pub fn effective_mechanical_damping(p: &SystemParams, g: f64) -> f64 {
    let kt = p.kappa_total();
    let d = p.detuning;
    let w = p.omega_m;
    let lower = kt * kt + (d - w) * (d - w);
    let upper = kt * kt + (d + w) * (d + w);
    p.gamma_m0 + 2.0 * g * g * kt * d * w / (lower * upper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub g0: f64,
    pub g: f64,
    /// Mean intracavity amplitude, `g / g₀`.
    pub alpha: f64,
    pub n_bar: f64,
    pub gamma_m_eff: f64,
}

impl DerivedRates {
    pub fn from_params(p: &SystemParams) -> Self {
        let g0 = single_photon_coupling(p);
        let g = driven_coupling(p);
        DerivedRates {
            g0,
            g,
            alpha: g / g0,
            n_bar: thermal_occupation(p),
            gamma_m_eff: effective_mechanical_damping(p, g),
        }
    }

    /// Mean intracavity photon number `α²`.
    pub fn photon_number(&self) -> f64 {
        self.alpha * self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn g0_reference_device_within_half() {
        let mut p = SystemParams::reference();
        for conv in [ZeroPointConvention::Printed, ZeroPointConvention::Half] {
            p.g0_convention = conv;
            let g0 = to_hz(single_photon_coupling(&p));
            assert!(rel(g0, 2.7) < 0.5, "{conv:?}: {g0}");
        }
        p.g0_convention = ZeroPointConvention::Half;
        let half = single_photon_coupling(&p);
        p.g0_convention = ZeroPointConvention::Printed;
        assert!(rel(single_photon_coupling(&p), half * 2f64.sqrt()) < 1e-15);
    }

    #[test]
    fn g0_scalings() {
        let p = SystemParams::reference();
        let g0 = single_photon_coupling(&p);
        let heavy = SystemParams { mass: 4.0 * p.mass, ..p };
        let long = SystemParams { length: 2.0 * p.length, ..p };
        assert!(rel(single_photon_coupling(&heavy), g0 / 2.0) < 1e-15);
        assert!(rel(single_photon_coupling(&long), g0 / 2.0) < 1e-15);
    }

    #[test]
    fn driven_coupling_fig2_values() {
        let base = SystemParams::reference().with_detuning(1.02 * hz(947e3));
        for (power, khz) in [(0.6e-3, 78.0), (3.8e-3, 192.0), (6.9e-3, 260.0), (10.7e-3, 325.0)] {
            let g = to_hz(driven_coupling(&base.with_power(power))) / 1e3;
            assert!(rel(g, khz) < 0.05, "{power} W -> {g} kHz vs {khz}");
        }
        assert_eq!(driven_coupling(&base.with_power(0.0)), 0.0);
    }

    #[test]
    fn one_sided_limit() {
        let p = SystemParams { kappa_bar: 0.0, ..SystemParams::reference() };
        let one_sided = 2.0 / p.length
            * (p.power * p.kappa * p.omega_c
                / (p.mass * p.omega_m * (p.kappa * p.kappa + p.detuning * p.detuning)))
                .sqrt();
        assert_eq!(driven_coupling(&p), one_sided);
    }

    #[test]
    fn thermal_occupation_values() {
        let p = SystemParams::reference();
        let n = thermal_occupation(&p);
        let direct = 1.380649e-23 * 300.0 / (1.054571817e-34 * 2.0 * PI * 947e3);
        assert!(rel(n, direct) < 1e-15);
        assert!(rel(n, 6.6e6) < 0.01);
        assert_eq!(thermal_occupation(&SystemParams { temperature: 0.0, ..p }), 0.0);
        let hot = SystemParams { temperature: 600.0, ..p };
        assert!(rel(thermal_occupation(&hot), 2.0 * n) < 1e-15);
    }

    #[test]
    fn effective_damping_cases() {
        let p = SystemParams {
            kappa: hz(172e3),
            kappa_bar: hz(43e3),
            ..SystemParams::reference()
        };
        assert_eq!(effective_mechanical_damping(&p, 0.0), p.gamma_m0);
        let added = effective_mechanical_damping(&p, hz(78e3)) - p.gamma_m0;
        // hand evaluation at Δ = ω_m: 2 g² ω² / (κ (κ² + 4ω²)) in kHz units
        let (g, w, k) = (78.0, 947.0, 215.0);
        let expected = 2.0 * g * g * w * w / (k * (k * k + 4.0 * w * w));
        assert!(rel(to_hz(added) / 1e3, expected) < 1e-12);
        assert!(rel(to_hz(added), 14e3) < 0.01);
        let heating = p.with_detuning(-p.omega_m);
        assert!(effective_mechanical_damping(&heating, hz(78e3)) < heating.gamma_m0);
    }

    #[test]
    fn alpha_round_trip() {
        let r = DerivedRates::from_params(&SystemParams::reference());
        assert!(rel(r.g0 * r.alpha, r.g) < 1e-12);
        assert!(r.gamma_m_eff >= SystemParams::reference().gamma_m0);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let p = SystemParams::reference();
        assert!(p.validate().is_ok());
        assert!(SystemParams { mass: 0.0, ..p }.validate().is_err());
        assert!(SystemParams { kappa_bar: -1.0, ..p }.validate().is_err());
        assert!(SystemParams { detuning: -p.omega_m, ..p }.validate().is_ok());
        assert!(SystemParams { power: f64::NAN, ..p }.validate().is_err());
    }
}
