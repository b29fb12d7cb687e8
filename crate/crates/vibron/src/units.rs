//! Unit conventions and conversion constants.
//!
//! Internally all energies are carried in eV and all times in fs, so
//! ħ = 0.6582119569 eV·fs appears explicitly wherever an energy is turned
//! into a rate or a phase. Config files declare the unit of every energy
//! block and conversion happens once, at ingestion.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant in eV·fs (CODATA).
pub const HBAR_EV_FS: f64 = 0.6582119569;

/// One wavenumber (cm⁻¹) in eV (CODATA conversion).
pub const CM1_TO_EV: f64 = 1.239841984e-4;

/// Boltzmann constant in eV/K (CODATA).
pub const KB_EV_PER_K: f64 = 8.617333262e-5;

/// Energy units accepted in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EnergyUnit {
    #[serde(rename = "ev")]
    #[default]
    Ev,
    #[serde(rename = "mev")]
    MilliEv,
    #[serde(rename = "cm-1")]
    WaveNumber,
}

impl EnergyUnit {
    /// Conversion factor to eV.
    pub fn to_ev(self) -> f64 {
        match self {
            EnergyUnit::Ev => 1.0,
            EnergyUnit::MilliEv => 1e-3,
            EnergyUnit::WaveNumber => CM1_TO_EV,
        }
    }
}

/// Inverse temperature β = 1/(k_B T) in 1/eV; `T = 0` maps to β = ∞.
pub fn beta_from_kelvin(kelvin: f64) -> f64 {
    if kelvin <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (KB_EV_PER_K * kelvin)
    }
}
