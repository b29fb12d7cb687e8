//! Assembly of the excitonic-vibrational system: Hamiltonian terms, thermal
//! jump channels and the finite-temperature representations.
//!
//! The Hamiltonian is H = H_exc + Σ ω_m b†_m b_m + Σ g_m n̂^I (b_m + b†_m)/√2
//! with n̂^I = |I⟩⟨I| the exciton projector of the site the mode belongs to.
//! Each damped mode is thermalized by a Davies dissipator with lowering rate
//! γ(1+f) and raising rate γf, f the Bose-Einstein occupation. Jump rates
//! are carried in 1/fs (energy widths divided by ħ); Hamiltonian
//! coefficients stay in eV.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand_core::RngCore;
use thiserror::Error;

use crate::rng::uniform01;
use crate::spectral::BathDecomposition;
use crate::units::HBAR_EV_FS;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// Exciton register Hamiltonian t_IJ |I⟩⟨J| in eV; must be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitonHamiltonian {
    t: Array2<C64>,
}

impl ExcitonHamiltonian {
    pub fn new(t: Array2<C64>) -> Result<Self, ModelError> {
        if t.nrows() != t.ncols() || t.nrows() == 0 {
            return Err(ModelError::Validation(format!(
                "exciton matrix must be square and non-empty, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                let d = (t[(i, j)] - t[(j, i)].conj()).norm();
                if d > 1e-12 {
                    return Err(ModelError::Validation(format!(
                        "exciton matrix not Hermitian at ({i},{j}): asymmetry {d:.3e}"
                    )));
                }
            }
        }
        Ok(Self { t })
    }

    pub fn n_states(&self) -> usize {
        self.t.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.t
    }
}

/// One damped (or dissipationless) bosonic mode attached to an exciton site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRecord {
    /// Exciton site index I the mode couples to.
    pub site: usize,
    /// Mode index m within the site (unique per (site, mode)).
    pub mode: usize,
    /// Oscillator frequency in eV. Negative values appear only as
    /// thermofield partner modes.
    pub omega: f64,
    /// Lorentzian width / damping energy γ in eV, ≥ 0.
    pub gamma: f64,
    /// Exciton-mode coupling g in eV.
    pub coupling: f64,
    /// Local Fock-space dimension d ≥ 2.
    pub local_dim: usize,
    /// Initial Fock occupation, < local_dim.
    pub initial_occupation: usize,
}

/// Ordered list of mode records; the mode axis of the simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeLayout {
    records: Vec<ModeRecord>,
}

impl ModeLayout {
    pub fn new(records: Vec<ModeRecord>) -> Result<Self, ModelError> {
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if r.local_dim < 2 {
                return Err(ModelError::Validation(format!(
                    "mode ({},{}) needs local_dim >= 2, got {}",
                    r.site, r.mode, r.local_dim
                )));
            }
            if r.initial_occupation >= r.local_dim {
                return Err(ModelError::Validation(format!(
                    "mode ({},{}) initial occupation {} >= local_dim {}",
                    r.site, r.mode, r.initial_occupation, r.local_dim
                )));
            }
            if r.gamma < 0.0 {
                return Err(ModelError::Validation(format!(
                    "mode ({},{}) has negative width {}",
                    r.site, r.mode, r.gamma
                )));
            }
            if !seen.insert((r.site, r.mode)) {
                return Err(ModelError::Validation(format!(
                    "duplicate mode id ({},{})",
                    r.site, r.mode
                )));
            }
        }
        Ok(Self { records })
    }

    /// Layout for one site from a bath decomposition, modes indexed in order.
    pub fn from_decompositions(
        baths: &[BathDecomposition],
        local_dim: usize,
    ) -> Result<Self, ModelError> {
        let mut records = Vec::new();
        for (site, bath) in baths.iter().enumerate() {
            for (m, lm) in bath.modes().iter().enumerate() {
                records.push(ModeRecord {
                    site,
                    mode: m,
                    omega: lm.omega,
                    gamma: lm.width,
                    coupling: lm.coupling,
                    local_dim,
                    initial_occupation: 0,
                });
            }
        }
        Self::new(records)
    }

    pub fn records(&self) -> &[ModeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Lower,
    Raise,
}

/// One jump channel: √rate·b (lower) or √rate·b† (raise) on a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpChannel {
    /// Index into the mode layout.
    pub layout_index: usize,
    pub kind: ChannelKind,
    /// Rate in 1/fs, > 0.
    pub rate: f64,
}

/// How finite temperature enters the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureMode {
    /// T = 0: vacuum start, lowering channels only.
    ZeroT,
    /// Thermal Davies channels with a deterministic initial state.
    Davies { beta: f64 },
    /// Thermofield-doubled layout; vacuum start, lowering channels only.
    Thermofield { beta: f64 },
    /// Thermal Davies channels with per-trajectory sampled Fock occupations.
    Sampled { beta: f64 },
}

/// Immutable simulation target: exciton register, mode layout, channels and
/// the temperature representation. Shared read-only by trajectory workers.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub exciton: ExcitonHamiltonian,
    pub layout: ModeLayout,
    pub channels: Vec<JumpChannel>,
    pub temperature: TemperatureMode,
    /// Index of the exciton basis state occupied at t = 0.
    pub initial_exciton: usize,
}

impl SystemModel {
    /// Build the model for a given temperature representation: doubles the
    /// layout in thermofield mode and attaches the matching jump channels.
    pub fn assemble(
        exciton: ExcitonHamiltonian,
        layout: ModeLayout,
        temperature: TemperatureMode,
        initial_exciton: usize,
    ) -> Result<Self, ModelError> {
        if initial_exciton >= exciton.n_states() {
            return Err(ModelError::Validation(format!(
                "initial exciton state {} out of range (L = {})",
                initial_exciton,
                exciton.n_states()
            )));
        }
        for r in layout.records() {
            if r.site >= exciton.n_states() {
                return Err(ModelError::Validation(format!(
                    "mode ({},{}) references exciton site beyond L = {}",
                    r.site,
                    r.mode,
                    exciton.n_states()
                )));
            }
        }
        let (layout, channels) = match temperature {
            TemperatureMode::ZeroT => {
                let ch = davies_channels(&layout, f64::INFINITY)?;
                (layout, ch)
            }
            TemperatureMode::Davies { beta } | TemperatureMode::Sampled { beta } => {
                let ch = davies_channels(&layout, beta)?;
                (layout, ch)
            }
            TemperatureMode::Thermofield { beta } => {
                let doubled = thermofield_double(&layout, beta)?;
                let ch = doubled
                    .records()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.gamma > 0.0)
                    .map(|(i, r)| JumpChannel {
                        layout_index: i,
                        kind: ChannelKind::Lower,
                        rate: r.gamma / HBAR_EV_FS,
                    })
                    .collect();
                (doubled, ch)
            }
        };
        let model = Self {
            exciton,
            layout,
            channels,
            temperature,
            initial_exciton,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), ModelError> {
        for c in &self.channels {
            if c.layout_index >= self.layout.len() {
                return Err(ModelError::Validation(format!(
                    "channel references mode index {} beyond layout length {}",
                    c.layout_index,
                    self.layout.len()
                )));
            }
            if !(c.rate > 0.0) {
                return Err(ModelError::Validation(format!(
                    "channel on mode index {} has non-positive rate {}",
                    c.layout_index, c.rate
                )));
            }
            let rec = self.layout.records()[c.layout_index];
            if rec.gamma == 0.0 {
                return Err(ModelError::Validation(format!(
                    "dissipationless mode ({},{}) must not carry channels",
                    rec.site, rec.mode
                )));
            }
            if matches!(self.temperature, TemperatureMode::Thermofield { .. })
                && c.kind != ChannelKind::Lower
            {
                return Err(ModelError::Validation(
                    "thermofield mode admits lowering channels only".into(),
                ));
            }
        }
        Ok(())
    }

    /// Copy with all channels removed (the closed, unitary system).
    pub fn without_channels(&self) -> Self {
        let mut m = self.clone();
        m.channels.clear();
        m
    }

    pub fn n_exciton_states(&self) -> usize {
        self.exciton.n_states()
    }
}

/// Bose-Einstein occupation f(β, ω) = 1/(e^{βω} − 1); β = ∞ gives 0.
pub fn bose_einstein(beta: f64, omega: f64) -> Result<f64, ModelError> {
    if !(omega > 0.0) {
        return Err(ModelError::Domain(format!(
            "bose_einstein requires omega > 0, got {omega}"
        )));
    }
    if !(beta > 0.0) {
        return Err(ModelError::Domain(format!(
            "bose_einstein requires beta > 0, got {beta}"
        )));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    Ok(1.0 / ((beta * omega).exp_m1()))
}

/// Occupations below this are treated as exactly thermal-vacuum: no raising
/// channel and no thermofield partner mode is emitted.
const OCCUPATION_FLOOR: f64 = 1e-12;

/// Davies thermalization channels: per damped mode a lowering channel at
/// rate γ(1+f)/ħ and, for f above the floor, a raising channel at γf/ħ.
/// Dissipationless modes emit nothing.
pub fn davies_channels(layout: &ModeLayout, beta: f64) -> Result<Vec<JumpChannel>, ModelError> {
    let mut channels = Vec::new();
    for (idx, r) in layout.records().iter().enumerate() {
        if r.gamma == 0.0 {
            continue;
        }
        let f = bose_einstein(beta, r.omega)?;
        let gamma_rate = r.gamma / HBAR_EV_FS;
        channels.push(JumpChannel {
            layout_index: idx,
            kind: ChannelKind::Lower,
            rate: gamma_rate * (1.0 + f),
        });
        if f > OCCUPATION_FLOOR {
            channels.push(JumpChannel {
                layout_index: idx,
                kind: ChannelKind::Raise,
                rate: gamma_rate * f,
            });
        }
    }
    Ok(channels)
}

/// Thermofield doubling: each mode (ω, γ, g) becomes two vacuum-initialized
/// modes (ω, γ, g√(1+f)) and (−ω, γ, g√f), both damped by pure decay at γ.
/// The transformed thermal state is the joint vacuum, which pure decay
/// leaves stationary. Partner modes with f below the floor are dropped
/// (β = ∞ reduces to the identity). Partner modes keep the site and get
/// mode id 2m+1 (originals 2m); their negative frequency marks them in bath
/// occupation reports.
pub fn thermofield_double(layout: &ModeLayout, beta: f64) -> Result<ModeLayout, ModelError> {
    let mut records = Vec::new();
    for r in layout.records() {
        if !(r.omega > 0.0) {
            return Err(ModelError::Domain(format!(
                "thermofield doubling requires omega > 0, got {} on mode ({},{})",
                r.omega, r.site, r.mode
            )));
        }
        let f = bose_einstein(beta, r.omega)?;
        records.push(ModeRecord {
            mode: 2 * r.mode,
            coupling: r.coupling * (1.0 + f).sqrt(),
            initial_occupation: 0,
            ..*r
        });
        if f > OCCUPATION_FLOOR {
            records.push(ModeRecord {
                mode: 2 * r.mode + 1,
                omega: -r.omega,
                coupling: r.coupling * f.sqrt(),
                initial_occupation: 0,
                ..*r
            });
        }
    }
    ModeLayout::new(records)
}

/// Draw initial Fock occupations from the truncated thermal distribution
/// p(n) ∝ e^{−βωn}, n < d, renormalized on the truncated ladder (inverse-CDF
/// on one uniform per mode, so the stream layout is backend-independent).
/// Logs a truncation-bias warning when the discarded tail weight of any mode
/// exceeds 1e-3.
pub fn sample_thermal_occupations(
    layout: &ModeLayout,
    beta: f64,
    rng: &mut dyn RngCore,
) -> Result<Vec<usize>, ModelError> {
    let mut out = Vec::with_capacity(layout.len());
    if beta.is_infinite() {
        out.resize(layout.len(), 0);
        return Ok(out);
    }
    for r in layout.records() {
        if !(r.omega > 0.0) {
            return Err(ModelError::Domain(format!(
                "thermal sampling requires omega > 0, got {} on mode ({},{})",
                r.omega, r.site, r.mode
            )));
        }
        let q = (-beta * r.omega).exp();
        let tail = q.powi(r.local_dim as i32);
        if tail > 1e-3 {
            log::warn!(
                "thermal sampling truncation bias: mode ({},{}) discards tail weight {:.2e} at d = {}",
                r.site,
                r.mode,
                tail,
                r.local_dim
            );
        }
        let u = uniform01(rng);
        // inverse CDF of the renormalized truncated geometric distribution
        let norm = 1.0 - tail;
        let mut cum = 0.0;
        let mut drawn = r.local_dim - 1;
        for n in 0..r.local_dim {
            cum += q.powi(n as i32) * (1.0 - q) / norm;
            if u < cum {
                drawn = n;
                break;
            }
        }
        out.push(drawn);
    }
    Ok(out)
}

/// One mode's contribution to the effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTerm {
    pub layout_index: usize,
    /// Exciton site the coupling projector acts on.
    pub site: usize,
    /// ω in eV: coefficient of b†b.
    pub omega: f64,
    /// g in eV: coefficient of n̂^I (b + b†)/√2.
    pub coupling: f64,
    /// Σ channel rates entering −(i/2)·ħ·decay_number·n̂ (1/fs).
    pub decay_number: f64,
}

/// Symbolic term list for H_eff = H − (i/2)Σ_l L†_l L_l. Lowering channels
/// contribute −(i/2)·rate·n̂, raising channels −(i/2)·rate·(n̂ + 1); the
/// identity pieces are collected into one constant. All anti-Hermitian
/// coefficients on the Fock diagonal are non-positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    /// Exciton block t_IJ in eV.
    pub exciton: Array2<C64>,
    pub mode_terms: Vec<ModeTerm>,
    /// Σ raising-channel rates (1/fs): global term −(i/2)·ħ·decay_const·1.
    pub decay_const: f64,
}

/// Collect the effective-Hamiltonian term list of a model.
pub fn effective_hamiltonian(model: &SystemModel) -> EffectiveHamiltonian {
    let mut mode_terms: Vec<ModeTerm> = model
        .layout
        .records()
        .iter()
        .enumerate()
        .map(|(idx, r)| ModeTerm {
            layout_index: idx,
            site: r.site,
            omega: r.omega,
            coupling: r.coupling,
            decay_number: 0.0,
        })
        .collect();
    let mut decay_const = 0.0;
    for c in &model.channels {
        mode_terms[c.layout_index].decay_number += c.rate;
        if c.kind == ChannelKind::Raise {
            decay_const += c.rate;
        }
    }
    EffectiveHamiltonian {
        exciton: model.exciton.matrix().clone(),
        mode_terms,
        decay_const,
    }
}
