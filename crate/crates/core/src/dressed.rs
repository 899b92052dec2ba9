//! Dressed-state ladders.
//!
//! The linearised system is two independent oscillators at ω₊ and ω₋, so
//! its levels form a two-index harmonic ladder. The full radiation-pressure
//! Hamiltonian is diagonalised by displaced Fock states and has a quadratic
//! photon-number dependence.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::normal_modes::NormalModes;
use crate::params::{single_photon_coupling, SystemParams, HBAR};

/// Largest `n_max`/`m_max`/`k_max` accepted.
pub const LEVEL_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderLevel {
    pub n: usize,
    pub m: usize,
    /// Energy in J.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub branch: Branch,
    /// Sideband angular frequency (rad/s), equal to ω₊ or ω₋.
    pub sideband: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedLadder {
    pub levels: Vec<LadderLevel>,
    pub transitions: Vec<Transition>,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl DressedLadder {
    pub fn energy(&self, n: usize, m: usize) -> f64 {
        ladder_energy(self.omega_plus, self.omega_minus, n, m)
    }

    /// Emitted photon angular frequencies `ω_L ± ω₊` and `ω_L ± ω₋`.
    pub fn emission_lines(&self, omega_laser: f64) -> [f64; 4] {
        [
            omega_laser + self.omega_plus,
            omega_laser - self.omega_plus,
            omega_laser + self.omega_minus,
            omega_laser - self.omega_minus,
        ]
    }
}

pub fn ladder_energy(omega_plus: f64, omega_minus: f64, n: usize, m: usize) -> f64 {
    HBAR * omega_plus * (n as f64 + 0.5) + HBAR * omega_minus * (m as f64 + 0.5)
}

fn check_cap(requested: usize) -> Result<()> {
    if requested > LEVEL_CAP {
        Err(Error::CapExceeded {
            requested,
            cap: LEVEL_CAP,
        })
    } else {
        Ok(())
    }
}

pub fn dressed_ladder(modes: &NormalModes, n_max: usize, m_max: usize) -> Result<DressedLadder> {
    check_cap(n_max)?;
    check_cap(m_max)?;
    let (wp, wm) = (modes.omega_plus, modes.omega_minus);
    let mut levels = Vec::with_capacity((n_max + 1) * (m_max + 1));
    let mut transitions = Vec::new();
    for n in 0..=n_max {
        for m in 0..=m_max {
            levels.push(LadderLevel {
                n,
                m,
                energy: ladder_energy(wp, wm, n, m),
            });
            if n > 0 {
                transitions.push(Transition {
                    from: (n, m),
                    to: (n - 1, m),
                    branch: Branch::Plus,
                    sideband: wp,
                });
            }
            if m > 0 {
                transitions.push(Transition {
                    from: (n, m),
                    to: (n, m - 1),
                    branch: Branch::Minus,
                    sideband: wm,
                });
            }
        }
    }
    Ok(DressedLadder {
        levels,
        transitions,
        omega_plus: wp,
        omega_minus: wm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearLevel {
    /// Phonon index.
    pub k: usize,
    /// Photon number.
    pub n: usize,
    /// Energy in J.
    pub energy: f64,
    /// Mechanical displacement `g₀ n / ω_m` of the shifted Fock state.
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearSpectrum {
    pub levels: Vec<NonlinearLevel>,
    /// `g₀² / ω_m` (rad/s).
    pub rabi_splitting: f64,
    pub g0: f64,
}

/// `E_{k,n} = ħ(ω_m k + Δ n + (g₀²/ω_m) n²)`
pub fn nonlinear_energy(omega_m: f64, detuning: f64, g0: f64, k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    HBAR * (omega_m * k + detuning * n + g0 * g0 / omega_m * n * n)
}

/// Anharmonic splitting `g₀²/ω_m` (rad/s).
pub fn rabi_splitting(g0: f64, omega_m: f64) -> f64 {
    g0 * g0 / omega_m
}

pub fn nonlinear_levels(p: &SystemParams, k_max: usize, n_max: usize) -> Result<NonlinearSpectrum> {
    check_cap(k_max)?;
    check_cap(n_max)?;
    let g0 = single_photon_coupling(p);
    Ok(nonlinear_levels_with_g0(p.omega_m, p.detuning, g0, k_max, n_max))
}

pub fn nonlinear_levels_with_g0(
    omega_m: f64,
    detuning: f64,
    g0: f64,
    k_max: usize,
    n_max: usize,
) -> NonlinearSpectrum {
    let mut levels = Vec::with_capacity((k_max + 1) * (n_max + 1));
    for k in 0..=k_max {
        for n in 0..=n_max {
            levels.push(NonlinearLevel {
                k,
                n,
                energy: nonlinear_energy(omega_m, detuning, g0, k, n),
                displacement: g0 * n as f64 / omega_m,
            });
        }
    }
    NonlinearSpectrum {
        levels,
        rabi_splitting: rabi_splitting(g0, omega_m),
        g0,
    }
}
