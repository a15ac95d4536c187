//! Bound-state bookkeeping.
//!
//! Bound states are taken from an ordinary spatial theory with Hamiltonian
//! `H̄ = √(m² + p²) − m + eΦ(x)`; this module only turns their binding
//! energies into stationary quantum energies, offshell laboratory energies
//! and a width-in-time estimate. It never solves for eigenfunctions.

use crate::error::{ensure_finite, ensure_positive, invalid, Result};
use crate::foundation::{FourVector, C64, CONSTANTS};
use crate::grid::{GridAxis, GridWaveFunction};
use crate::schrodinger::FieldConfig;
use crate::wavepackets::Representation;

/// A bound state of the spatial theory.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSpec {
    /// Opaque quantum-number tag.
    pub label: String,
    /// Binding energy, negative for bound states.
    pub binding_energy: f64,
    /// `⟨√(m² + p²)⟩ − m`.
    pub kinetic: f64,
    /// `⟨r²⟩` of the spatial wave function.
    pub mean_square_radius: f64,
}

impl BoundStateSpec {
    pub fn new(label: impl Into<String>, binding_energy: f64, kinetic: f64, mean_square_radius: f64) -> Result<Self> {
        ensure_finite("binding energy", binding_energy)?;
        ensure_finite("kinetic energy", kinetic)?;
        if kinetic < 0.0 {
            return Err(invalid(format!("kinetic energy must be non-negative, got {kinetic}")));
        }
        ensure_finite("mean square radius", mean_square_radius)?;
        if mean_square_radius < 0.0 {
            return Err(invalid("mean square radius must be non-negative"));
        }
        Ok(Self { label: label.into(), binding_energy, kinetic, mean_square_radius })
    }

    /// `⟨γ⟩ = (m + 𝒦)/m`.
    pub fn gamma(&self, m: f64) -> f64 {
        (m + self.kinetic) / m
    }

    /// Checks `m > 0` and `m + 𝓔̄ > 0`.
    pub fn validate(&self, m: f64) -> Result<()> {
        ensure_positive("mass", m)?;
        if self.binding_energy + m <= 0.0 {
            return Err(invalid(format!("binding energy {} exceeds the mass {m}", self.binding_energy)));
        }
        Ok(())
    }
}

/// Roots `(E⁺, E⁻)` of the stationarity condition
/// `−E² + 2E𝓔̄ − 2E𝒦 − 𝓔̄² + 2𝒦𝓔̄ + 2m𝒦 + m² = 0`.
pub fn stationary_energies(s: &BoundStateSpec, m: f64) -> Result<(f64, f64)> {
    s.validate(m)?;
    let b = s.binding_energy;
    Ok((m + b, -m + b - 2.0 * s.kinetic))
}

/// Left side of the stationarity condition at energy `e`.
pub fn stationarity_polynomial(s: &BoundStateSpec, m: f64, e: f64) -> f64 {
    let (b, k) = (s.binding_energy, s.kinetic);
    -e * e + 2.0 * e * b - 2.0 * e * k - b * b + 2.0 * k * b + 2.0 * m * k + m * m
}

/// Laboratory energy of a component offshell by `Ê` from the positive
/// stationary energy: `(𝓔̂, 𝓔_rel)` with `𝓔̂ = −⟨γ⟩Ê − Ê²/2m` in block time
/// and `𝓔_rel = Ē − (⟨γ⟩ − 1)Ê − Ê²/2m` in relative time.
pub fn lab_energy_offshell(e_hat: f64, s: &BoundStateSpec, m: f64) -> Result<(f64, f64)> {
    ensure_finite("offshell energy", e_hat)?;
    let (e_bar, _) = stationary_energies(s, m)?;
    let g = s.gamma(m);
    let quad = e_hat * e_hat / (2.0 * m);
    Ok((-g * e_hat - quad, e_bar - (g - 1.0) * e_hat - quad))
}

/// Dispersion in time `σ` with `σ²/2 = ⟨r²⟩` (natural units).
pub fn width_in_time(mean_square_radius: f64) -> Result<f64> {
    ensure_positive("mean square radius", mean_square_radius)?;
    Ok((2.0 * mean_square_radius).sqrt())
}

/// Order of magnitude width in time, in seconds, of an atom with the given
/// radius in meters: the light travel time across the radius.
pub fn width_in_time_seconds(radius_m: f64) -> Result<f64> {
    ensure_positive("radius", radius_m)?;
    Ok(CONSTANTS.light_time(radius_m))
}

/// Standing wave `cos(kx)` in a region of constant potential `Φ₀`.
///
/// Here `p²` acts on the spatial factor as the number `k²`, so the spatial
/// Hamiltonian has the exact eigenvalue `√(m² + k²) − m + eΦ₀` and the
/// product with the stationary time plane wave solves the four dimensional
/// equation exactly. It stands in for real bound states in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformWell {
    pub m: f64,
    pub charge: f64,
    pub phi0: f64,
    pub k: f64,
}

impl UniformWell {
    pub fn kinetic(&self) -> f64 {
        (self.m * self.m + self.k * self.k).sqrt() - self.m
    }

    pub fn spec(&self) -> Result<BoundStateSpec> {
        let b = self.kinetic() + self.charge * self.phi0;
        // ⟨x²⟩ of cos² over one period around the origin.
        let r2 =
            if self.k == 0.0 { 0.0 } else { (std::f64::consts::PI / self.k).powi(2) * (1.0 / 3.0 + 0.5 / std::f64::consts::PI.powi(2)) };
        BoundStateSpec::new(format!("k={}", self.k), b, self.kinetic(), r2)
    }

    pub fn fields(&self) -> FieldConfig {
        let phi0 = self.phi0;
        FieldConfig::free(self.m).with_scalar(self.charge, move |_| phi0)
    }

    /// `χ_Ē(t)·ξ(x)` with `Ē` the positive stationary energy.
    pub fn product_state(&self, axes: Vec<GridAxis>) -> Result<GridWaveFunction> {
        let (e_bar, _) = stationary_energies(&self.spec()?, self.m)?;
        let k = self.k;
        GridWaveFunction::from_fn(axes, Representation::Block, move |p: FourVector| {
            C64::from_polar((k * p.x).cos() / (2.0 * std::f64::consts::PI).sqrt(), -e_bar * p.t)
        })
    }
}
