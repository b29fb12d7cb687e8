//! Spectral densities and their decomposition into damped modes.
//!
//! A bath is specified by a continuous Debye background plus optional
//! discrete peaks,
//!
//!   J(ω) = 2λωω_c/(ω² + ω_c²) + Σ_p γ_p (g_p/2)² / ((ω−ω_p)² + (γ_p/2)²),
//!
//! and is approximated by a finite set of Lorentzian modes (ω_m, γ_m, g_m),
//! each realized downstream as a harmonic oscillator damped at rate γ_m.
//! A peak with γ = 0 is an exact, undamped δ-contribution: it is carried
//! through as a dissipationless mode and never enters pointwise evaluation.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("mode table parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A discrete peak in the spectral density. `broadening = 0` encodes an
/// exact δ-peak of weight (π/2)·coupling².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Peak center ω_0 in eV, > 0.
    pub center: f64,
    /// Coupling g_0 in eV, ≥ 0.
    pub coupling: f64,
    /// Width γ_0 in eV, ≥ 0 (0 = δ-peak).
    pub broadening: f64,
}

/// Continuous Debye background plus discrete peaks; the physics input.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    /// Debye weight λ in eV, ≥ 0.
    pub debye_weight: f64,
    /// Debye cutoff ω_c in eV, > 0.
    pub debye_cutoff: f64,
    pub peaks: Vec<Peak>,
}

/// One damped bosonic mode of a bath decomposition.
///
/// For uniform decompositions the coupling satisfies g = √(2·J(ω)·γ/π);
/// `width = 0` marks a dissipationless mode that generates no jump channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianMode {
    /// Mode frequency ω_m in eV, > 0.
    pub omega: f64,
    /// Lorentzian width γ_m in eV, ≥ 0.
    pub width: f64,
    /// Exciton-mode coupling g_m in eV, ≥ 0.
    pub coupling: f64,
}

/// Ordered damped-mode list for one exciton site's bath.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BathDecomposition {
    modes: Vec<LorentzianMode>,
}

/// The Lorentzian of one damped mode: γ (g/2)² / ((ω−ω_m)² + (γ/2)²).
fn lorentzian(omega: f64, center: f64, width: f64, coupling: f64) -> f64 {
    let half = 0.5 * width;
    width * (0.5 * coupling).powi(2) / ((omega - center).powi(2) + half * half)
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.debye_weight < 0.0 {
            return Err(SpectralError::Validation(format!(
                "debye weight must be >= 0, got {}",
                self.debye_weight
            )));
        }
        if !(self.debye_cutoff > 0.0) {
            return Err(SpectralError::Validation(format!(
                "debye cutoff must be > 0, got {}",
                self.debye_cutoff
            )));
        }
        for (i, p) in self.peaks.iter().enumerate() {
            if !(p.center > 0.0) || p.coupling < 0.0 || p.broadening < 0.0 {
                return Err(SpectralError::Validation(format!(
                    "peak {i}: requires center > 0, coupling >= 0, broadening >= 0 \
                     (got {:?})",
                    p
                )));
            }
        }
        Ok(())
    }

    /// Pointwise J(ω): Debye background plus broadened peaks. Exact δ-peaks
    /// (broadening 0) contribute nothing here; they stay discrete and are
    /// handled by [`decompose_uniform`].
    pub fn evaluate(&self, omega: f64) -> Result<f64, SpectralError> {
        if omega < 0.0 {
            return Err(SpectralError::Domain(format!(
                "spectral density evaluated at negative frequency {omega}"
            )));
        }
        let wc = self.debye_cutoff;
        let mut j = 2.0 * self.debye_weight * omega * wc / (omega * omega + wc * wc);
        for p in &self.peaks {
            if p.broadening > 0.0 {
                j += lorentzian(omega, p.center, p.broadening, p.coupling);
            }
        }
        Ok(j)
    }

    fn delta_peaks(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.broadening == 0.0)
    }
}

impl BathDecomposition {
    /// Checked constructor; mode frequencies must be strictly increasing.
    pub fn new(mut modes: Vec<LorentzianMode>) -> Result<Self, SpectralError> {
        modes.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        for pair in modes.windows(2) {
            if pair[0].omega == pair[1].omega {
                return Err(SpectralError::Validation(format!(
                    "duplicate mode frequency {} within one site",
                    pair[0].omega
                )));
            }
        }
        for m in &modes {
            if !(m.omega > 0.0) || m.width < 0.0 || m.coupling < 0.0 {
                return Err(SpectralError::Validation(format!(
                    "mode requires omega > 0, width >= 0, coupling >= 0 (got {:?})",
                    m
                )));
            }
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[LorentzianMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Σ_m of the mode Lorentzians at ω, skipping dissipationless modes.
    pub fn reconstruct(&self, omega: f64) -> Result<f64, SpectralError> {
        if omega < 0.0 {
            return Err(SpectralError::Domain(format!(
                "reconstruction evaluated at negative frequency {omega}"
            )));
        }
        Ok(self
            .modes
            .iter()
            .filter(|m| m.width > 0.0)
            .map(|m| lorentzian(omega, m.omega, m.width, m.coupling))
            .sum())
    }

    /// Serialize as CSV with the `omega_ev,g_ev,gamma_ev` header. Values use
    /// Rust's shortest round-trip float formatting, so parse ∘ serialize is
    /// the identity on mode lists.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_ev,g_ev,gamma_ev\n");
        for m in &self.modes {
            let _ = writeln!(out, "{},{},{}", m.omega, m.coupling, m.width);
        }
        out
    }

    /// Parse the CSV format written by [`Self::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, SpectralError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(SpectralError::Parse {
            line: 1,
            msg: "empty mode table".into(),
        })?;
        if header.trim() != "omega_ev,g_ev,gamma_ev" {
            return Err(SpectralError::Parse {
                line: 1,
                msg: format!("expected header 'omega_ev,g_ev,gamma_ev', got '{header}'"),
            });
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(SpectralError::Parse {
                    line: idx + 1,
                    msg: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            let mut vals = [0.0f64; 3];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.trim().parse().map_err(|e| SpectralError::Parse {
                    line: idx + 1,
                    msg: format!("bad float '{f}': {e}"),
                })?;
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        decompose_table(&rows)
    }
}

/// Uniform decomposition of a J(ω) given as a plain function: N Lorentzians
/// with centers at half-integer grid points ω_m = (m − ½)·Δω, widths
/// γ_m = Δω and couplings g_m = √(2·J(ω_m)·Δω/π). The half-integer grid
/// keeps the zero-frequency point, where the Bose function diverges, out of
/// the mode set. The same mode table drives the unitary benchmark scheme,
/// which simply ignores the widths.
pub fn decompose_uniform_fn(
    j: impl Fn(f64) -> f64,
    n_modes: usize,
    omega_max: f64,
) -> Result<BathDecomposition, SpectralError> {
    if n_modes == 0 {
        return Err(SpectralError::Domain("n_modes must be >= 1".into()));
    }
    if !(omega_max > 0.0) {
        return Err(SpectralError::Domain(format!(
            "omega_max must be > 0, got {omega_max}"
        )));
    }
    let dw = omega_max / n_modes as f64;
    let modes = (1..=n_modes)
        .map(|m| {
            let omega = (m as f64 - 0.5) * dw;
            LorentzianMode {
                omega,
                width: dw,
                coupling: (2.0 * j(omega) * dw / std::f64::consts::PI).sqrt(),
            }
        })
        .collect();
    BathDecomposition::new(modes)
}

/// Uniform decomposition of a spectral density model. Exact δ-peaks are
/// appended verbatim as dissipationless modes (ω_0, γ = 0, g_0).
pub fn decompose_uniform(
    model: &SpectralDensity,
    n_modes: usize,
    omega_max: f64,
) -> Result<BathDecomposition, SpectralError> {
    model.validate()?;
    let decomp = decompose_uniform_fn(
        |w| model.evaluate(w).expect("omega grid is nonnegative"),
        n_modes,
        omega_max,
    )?;
    let mut modes = decomp.modes;
    for p in model.delta_peaks() {
        modes.push(LorentzianMode {
            omega: p.center,
            width: 0.0,
            coupling: p.coupling,
        });
    }
    BathDecomposition::new(modes)
}

/// Verbatim mode table (ω, g, γ), sorted by ω; used to load externally
/// optimized decompositions such as the shipped 19-mode FMO table.
pub fn decompose_table(rows: &[(f64, f64, f64)]) -> Result<BathDecomposition, SpectralError> {
    if rows.is_empty() {
        return Err(SpectralError::Validation("empty mode table".into()));
    }
    let modes = rows
        .iter()
        .map(|&(omega, g, gamma)| LorentzianMode {
            omega,
            width: gamma,
            coupling: g,
        })
        .collect();
    BathDecomposition::new(modes)
}

/// Relative L2 error between `model.evaluate` and `decomp.reconstruct` over
/// a frequency grid; δ-peaks are excluded from both sides by construction.
pub fn fit_residual(
    model: &SpectralDensity,
    decomp: &BathDecomposition,
    grid: &[f64],
) -> Result<f64, SpectralError> {
    if grid.is_empty() {
        return Err(SpectralError::Domain("empty residual grid".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &w in grid {
        let je = model.evaluate(w)?;
        let jr = decomp.reconstruct(w)?;
        num += (je - jr) * (je - jr);
        den += je * je;
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

/// Spectral weight ∫ of one mode's Lorentzian over the whole frequency axis,
/// by Gauss–Legendre quadrature in the exact substitution
/// ω = ω_m + (γ/2)·tan θ (the integrand becomes (g²/2)·dθ, so the quadrature
/// is exact up to roundoff). Analytically the weight is (π/2)·g².
pub fn lorentzian_weight_quadrature(mode: &LorentzianMode) -> f64 {
    if mode.width == 0.0 {
        // δ-peak: carries its weight by definition.
        return 0.5 * std::f64::consts::PI * mode.coupling * mode.coupling;
    }
    // 64-point Gauss-Legendre on θ ∈ (−π/2, π/2).
    let (nodes, weights) = gauss_legendre_64();
    let half_pi = 0.5 * std::f64::consts::PI;
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        let theta = half_pi * x;
        let omega = mode.omega + 0.5 * mode.width * theta.tan();
        let sec2 = 1.0 / theta.cos().powi(2);
        let jac = 0.5 * mode.width * sec2;
        acc += w * half_pi * jac * lorentzian(omega, mode.omega, mode.width, mode.coupling);
    }
    acc
}

/// Nodes and weights of 64-point Gauss-Legendre on [−1, 1], generated by
/// Newton iteration on the Legendre recurrence.
fn gauss_legendre_64() -> (Vec<f64>, Vec<f64>) {
    let n = 64usize;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_dp(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p_dp(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::CM1_TO_EV;
    use approx::assert_relative_eq;

    fn sf_debye() -> SpectralDensity {
        SpectralDensity {
            debye_weight: 807.0 * CM1_TO_EV,
            debye_cutoff: 1452.0 * CM1_TO_EV,
            peaks: vec![],
        }
    }

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn debye_at_cutoff_equals_weight() {
        let j = sf_debye();
        assert_relative_eq!(
            j.evaluate(j.debye_cutoff).unwrap(),
            j.debye_weight,
            max_relative = 1e-14
        );
    }

    #[test]
    fn debye_vanishes_at_zero() {
        assert_eq!(sf_debye().evaluate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn debye_at_twice_cutoff() {
        // J(2ω_c) = 4λ/5, direct substitution.
        let j = sf_debye();
        assert_relative_eq!(
            j.evaluate(2.0 * j.debye_cutoff).unwrap(),
            0.8 * j.debye_weight,
            max_relative = 1e-14
        );
    }

    #[test]
    fn negative_frequency_is_domain_error() {
        assert!(sf_debye().evaluate(-1.0).is_err());
        let d = decompose_uniform(&sf_debye(), 4, 1.0).unwrap();
        assert!(d.reconstruct(-0.5).is_err());
    }

    #[test]
    fn uniform_constant_j_unit_coupling() {
        // J ≡ π/2, N = 1, ω_max = 1 → g = √(2·(π/2)·1/π) = 1.
        let d = decompose_uniform_fn(|_| std::f64::consts::FRAC_PI_2, 1, 1.0).unwrap();
        assert_eq!(d.len(), 1);
        let m = d.modes()[0];
        assert_relative_eq!(m.omega, 0.5);
        assert_relative_eq!(m.width, 1.0);
        assert_relative_eq!(m.coupling, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn uniform_zero_j_zero_couplings() {
        let d = decompose_uniform_fn(|_| 0.0, 7, 2.0).unwrap();
        assert!(d.modes().iter().all(|m| m.coupling == 0.0));
    }

    #[test]
    fn uniform_appends_delta_peaks() {
        let mut model = sf_debye();
        let w0 = 29.0 * CM1_TO_EV;
        model.peaks.push(Peak {
            center: w0,
            coupling: 2.0 * CM1_TO_EV,
            broadening: 0.0,
        });
        let d = decompose_uniform(&model, 5, 4.0 * model.debye_cutoff).unwrap();
        assert_eq!(d.len(), 6);
        // δ-peak sits first (lowest frequency), dissipationless.
        let m = d.modes()[0];
        assert_eq!(m.omega, w0);
        assert_eq!(m.width, 0.0);
        // ...and contributes nothing pointwise.
        assert_relative_eq!(
            d.reconstruct(w0).unwrap(),
            decompose_uniform(&sf_debye(), 5, 4.0 * model.debye_cutoff)
                .unwrap()
                .reconstruct(w0)
                .unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn reconstruct_peak_value() {
        // Single mode at its own center: g²/γ.
        let d = decompose_table(&[(0.2, 0.05, 0.01)]).unwrap();
        assert_relative_eq!(
            d.reconstruct(0.2).unwrap(),
            0.05 * 0.05 / 0.01,
            max_relative = 1e-14
        );
    }

    #[test]
    fn reconstruct_decays_far_away() {
        let d = decompose_table(&[(0.2, 0.05, 0.01)]).unwrap();
        assert!(d.reconstruct(1e6).unwrap() < 1e-12);
    }

    #[test]
    fn table_rejects_empty_and_duplicates() {
        assert!(decompose_table(&[]).is_err());
        assert!(decompose_table(&[(0.1, 0.01, 0.0), (0.1, 0.02, 0.01)]).is_err());
    }

    #[test]
    fn table_accepts_dissipationless_row() {
        let d = decompose_table(&[(0.1, 0.01, 0.0)]).unwrap();
        assert_eq!(d.modes()[0].width, 0.0);
        assert_eq!(d.reconstruct(0.1).unwrap(), 0.0);
    }

    #[test]
    fn table_sorts_by_frequency() {
        let d = decompose_table(&[(0.3, 0.1, 0.1), (0.1, 0.2, 0.1), (0.2, 0.3, 0.1)]).unwrap();
        let omegas: Vec<f64> = d.modes().iter().map(|m| m.omega).collect();
        assert_eq!(omegas, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn residual_of_self_decomposition_is_zero() {
        // A model made purely of broadened peaks, decomposed verbatim,
        // reconstructs itself exactly.
        let model = SpectralDensity {
            debye_weight: 0.0,
            debye_cutoff: 1.0,
            peaks: vec![
                Peak {
                    center: 0.1,
                    coupling: 0.02,
                    broadening: 0.01,
                },
                Peak {
                    center: 0.3,
                    coupling: 0.05,
                    broadening: 0.02,
                },
            ],
        };
        let rows: Vec<(f64, f64, f64)> = model
            .peaks
            .iter()
            .map(|p| (p.center, p.coupling, p.broadening))
            .collect();
        let d = decompose_table(&rows).unwrap();
        let r = fit_residual(&model, &d, &grid(0.01, 1.0, 57)).unwrap();
        assert!(r < 1e-13, "self-residual {r}");
    }

    #[test]
    fn residual_grid_errors() {
        let model = sf_debye();
        let d = decompose_uniform(&model, 4, 4.0 * model.debye_cutoff).unwrap();
        assert!(fit_residual(&model, &d, &[]).is_err());
        assert!(fit_residual(&model, &d, &[0.1, -0.1]).is_err());
    }

    #[test]
    fn residual_decreases_with_mode_count() {
        // Pointwise convergence of the uniform comb: residual decreases
        // monotonically over N ∈ {5, 10, 20, 40}, and N=1 is strictly worse
        // than N=10.
        let model = sf_debye();
        let wc = model.debye_cutoff;
        let g = grid(0.1 * wc, 3.0 * wc, 200);
        let resid = |n: usize| {
            let d = decompose_uniform(&model, n, 4.0 * wc).unwrap();
            fit_residual(&model, &d, &g).unwrap()
        };
        let r: Vec<f64> = [5usize, 10, 20, 40].iter().map(|&n| resid(n)).collect();
        assert!(r[0] > r[1] && r[1] > r[2] && r[2] > r[3], "{r:?}");
        assert!(resid(1) > resid(10));
    }

    #[test]
    fn sf_debye_n10_residual_regression() {
        // Frozen from an independent quadrature oracle: the N=10 uniform
        // comb with ω_max = 4ω_c misses the Debye curve by ≈ 13.8% in
        // relative L2 over [0.1ω_c, 3ω_c].
        let model = sf_debye();
        let wc = model.debye_cutoff;
        let d = decompose_uniform(&model, 10, 4.0 * wc).unwrap();
        let r = fit_residual(&model, &d, &grid(0.1 * wc, 3.0 * wc, 200)).unwrap();
        assert_relative_eq!(r, 0.138290, max_relative = 1e-4);
    }

    #[test]
    fn lorentzian_weight_matches_analytic() {
        for &(w0, g, gamma) in &[(0.1, 0.02, 0.01), (0.5, 0.3, 0.2), (2.0, 1.0, 0.05)] {
            let m = LorentzianMode {
                omega: w0,
                width: gamma,
                coupling: g,
            };
            let w = lorentzian_weight_quadrature(&m);
            assert_relative_eq!(
                w,
                0.5 * std::f64::consts::PI * g * g,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let d = decompose_uniform(&sf_debye(), 7, 0.7).unwrap();
        let csv = d.to_csv();
        let d2 = BathDecomposition::from_csv(&csv).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn csv_rejects_bad_header_and_fields() {
        assert!(BathDecomposition::from_csv("a,b,c\n1,2,3\n").is_err());
        assert!(BathDecomposition::from_csv("omega_ev,g_ev,gamma_ev\n1,2\n").is_err());
        assert!(BathDecomposition::from_csv("omega_ev,g_ev,gamma_ev\n1,x,3\n").is_err());
    }

    #[test]
    fn shipped_fmo_table_loads() {
        let text = include_str!("../data/fmo19.csv");
        let d = BathDecomposition::from_csv(text).unwrap();
        assert_eq!(d.len(), 19);
        // First row of the shipped table (lowest frequency after sorting).
        let m = d.modes()[0];
        assert_eq!(m.omega, 2.30099e-3);
        assert_eq!(m.coupling, 6.88515e-4);
        assert_eq!(m.width, 9.50196e-4);
        // Frozen from the quadrature oracle: reconstruction at 0.01 eV.
        assert_relative_eq!(
            d.reconstruct(0.01).unwrap(),
            4.2022693575e-3,
            max_relative = 1e-9
        );
    }
}
