//! Free-particle states: plane waves and Gaussian test functions, with
//! closed-form evolution in laboratory time and the four representations
//! (block time/space, relative time, energy/momentum, time/momentum hybrid).

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::foundation::{complex_sqrt, FourMomentum, FourVector, C64, I};
use crate::grid::{GridAxis, GridWaveFunction};

/// Which variables a wave function is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Quantum time and space `(t, x⃗)`.
    Block,
    /// Relative time `t_τ = t − τ` and space.
    RelativeTime,
    /// Energy and momentum `(E, p⃗)`.
    EnergyMomentum,
    /// Quantum time and momentum `(t, p⃗)`.
    Hybrid,
}

impl Representation {
    /// True when axis `coord` holds a conjugate (energy or momentum) variable.
    pub fn is_spectral(self, coord: usize) -> bool {
        match self {
            Representation::Block | Representation::RelativeTime => false,
            Representation::EnergyMomentum => true,
            Representation::Hybrid => coord > 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Representation::Block => "block",
            Representation::RelativeTime => "relative",
            Representation::EnergyMomentum => "energy-momentum",
            Representation::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(Representation::Block),
            "relative" => Ok(Representation::RelativeTime),
            "energy-momentum" | "momentum" => Ok(Representation::EnergyMomentum),
            "hybrid" => Ok(Representation::Hybrid),
            _ => Err(invalid(format!("unknown representation '{s}'"))),
        }
    }
}

/// Four dimensional squeezed state with diagonal dispersion.
///
/// Along each axis the amplitude is
/// `(Re(1/Σ)/π)^{1/4} (|Σ|/Σ)^{1/2} exp(−(x − x̄)²/2Σ)` times the plane wave
/// `e^{−iE₀t}` or `e^{ip x}` and an accumulated phase. `Σ` starts as the real
/// `σ²` and picks up `∓iτ/m` under free evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTestFunction {
    pub centroid: FourVector,
    pub momentum: FourMomentum,
    /// Complex dispersion `Σ_μ = σ_μ² f_τ^{(μ)}` per axis.
    pub sigma: [C64; 4],
    /// Accumulated phase per axis.
    pub phase: [f64; 4],
    /// Laboratory time elapsed since construction.
    pub tau: f64,
}

impl GaussianTestFunction {
    pub fn new(centroid: FourVector, momentum: FourMomentum, sigma2: [f64; 4]) -> Result<Self> {
        if !centroid.is_finite() {
            return Err(invalid("centroid must be finite"));
        }
        for v in momentum.to_array() {
            ensure_finite("momentum component", v)?;
        }
        for (mu, s) in sigma2.iter().enumerate() {
            ensure_positive(&format!("dispersion σ_{mu}²"), *s)?;
        }
        Ok(Self { centroid, momentum, sigma: sigma2.map(|s| C64::new(s, 0.0)), phase: [0.0; 4], tau: 0.0 })
    }

    /// Builds from a full 4×4 dispersion matrix, rejecting off-diagonal terms.
    pub fn from_matrix(centroid: FourVector, momentum: FourMomentum, matrix: [[f64; 4]; 4]) -> Result<Self> {
        for (i, row) in matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j && *v != 0.0 {
                    return Err(invalid("dispersion matrix must be diagonal"));
                }
            }
        }
        Self::new(centroid, momentum, [0, 1, 2, 3].map(|i| matrix[i][i]))
    }

    /// Unit-width packet at rest at the origin with the given momentum.
    pub fn standard(momentum: FourMomentum) -> Self {
        Self::new(FourVector::ZERO, momentum, [1.0; 4]).expect("unit dispersions are valid")
    }

    fn normalization(&self, mu: usize) -> C64 {
        let s = self.sigma[mu];
        let a = (1.0 / s).re;
        let r = (a / PI).powf(0.25);
        r * s.norm().sqrt() / complex_sqrt(s)
    }

    fn plane(&self, mu: usize, c: f64) -> f64 {
        if mu == 0 {
            -self.momentum.e * c
        } else {
            self.momentum.get(mu) * c
        }
    }

    /// One-dimensional factor along axis `mu` evaluated at coordinate `c`.
    pub fn axis_factor(&self, mu: usize, c: f64) -> C64 {
        let d = c - self.centroid.get(mu);
        let g = (-(d * d) / (2.0 * self.sigma[mu])).exp();
        self.normalization(mu) * g * C64::from_polar(1.0, self.plane(mu, c) + self.phase[mu])
    }

    /// Full amplitude in block time/space.
    pub fn eval(&self, x: FourVector) -> C64 {
        (0..4).map(|mu| self.axis_factor(mu, x.get(mu))).product()
    }

    /// Conjugate-variable factor along axis `mu`. The time axis uses the
    /// kernel `e^{+iEt}`, space axes `e^{−ipx}`, each with `1/√(2π)`.
    pub fn spectral_factor(&self, mu: usize, k: f64) -> C64 {
        let s = self.sigma[mu];
        let k0 = self.momentum.get(mu);
        let dk = k - k0;
        let shift = if mu == 0 { dk * self.centroid.t } else { -dk * self.centroid.get(mu) };
        self.normalization(mu) * complex_sqrt(s) * (-(s * dk * dk) / 2.0).exp() * C64::from_polar(1.0, shift + self.phase[mu])
    }

    /// `Σ_μ`.
    pub fn dispersion(&self, mu: usize) -> C64 {
        self.sigma[mu]
    }

    /// Dispersion of the conjugate variable, `1/Σ_μ`.
    pub fn spectral_dispersion(&self, mu: usize) -> C64 {
        1.0 / self.sigma[mu]
    }

    /// `⟨(x^μ − x̄^μ)²⟩ = 1/(2 Re(1/Σ_μ))`.
    pub fn variance(&self, mu: usize) -> f64 {
        0.5 / (1.0 / self.sigma[mu]).re
    }

    pub fn mean(&self, mu: usize) -> f64 {
        self.centroid.get(mu)
    }

    /// Total accumulated phase.
    pub fn total_phase(&self) -> f64 {
        self.phase.iter().sum()
    }

    /// Closed-form free evolution by laboratory time `tau`.
    pub fn evolve(&self, tau: f64, m: f64) -> Result<Self> {
        evolve_gaussian(self, tau, m)
    }

    /// Centroid of quantum time measured from the laboratory clock.
    pub fn relative_time_centroid(&self) -> f64 {
        self.centroid.t - self.tau
    }

    /// Velocity of quantum time with respect to laboratory time, `E₀/m`.
    pub fn time_velocity(&self, m: f64) -> f64 {
        self.momentum.e / m
    }

    /// Samples the product of the axis factors present in `axes` (block time).
    pub fn sample(&self, axes: Vec<GridAxis>) -> Result<GridWaveFunction> {
        AnalyticState::new(*self, Representation::Block).sample(axes)
    }
}

/// Advances a Gaussian by laboratory time `tau` under the free Hamiltonian.
///
/// Centroid drifts by `(p₀/m)τ`, the dispersions pick up `f_τ`, and the
/// phase gains `(p₀² − m²)τ/2m` split as `(E₀² − m²)τ/2m` on the time axis
/// and `−p_i²τ/2m` on each space axis.
pub fn evolve_gaussian(psi: &GaussianTestFunction, tau: f64, m: f64) -> Result<GaussianTestFunction> {
    ensure_positive("mass", m)?;
    ensure_finite("tau", tau)?;
    if tau < 0.0 {
        return Err(invalid("laboratory time step must be non-negative"));
    }
    let mut out = *psi;
    let p = psi.momentum;
    out.centroid = psi.centroid + p.as_vector() * (tau / m);
    out.sigma[0] -= I * (tau / m);
    for mu in 1..4 {
        out.sigma[mu] += I * (tau / m);
    }
    out.phase[0] += (p.e * p.e - m * m) * tau / (2.0 * m);
    for mu in 1..4 {
        out.phase[mu] -= p.get(mu).powi(2) * tau / (2.0 * m);
    }
    out.tau += tau;
    Ok(out)
}

/// An analytic Gaussian tagged with the representation its amplitude is read in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticState {
    pub gaussian: GaussianTestFunction,
    pub rep: Representation,
}

impl AnalyticState {
    pub fn new(gaussian: GaussianTestFunction, rep: Representation) -> Self {
        Self { gaussian, rep }
    }

    /// Amplitude at a point whose components are read per the representation:
    /// `(t_τ, x⃗)` for relative time, `(E, p⃗)` for energy/momentum, `(t, p⃗)` for hybrid.
    pub fn eval(&self, c: FourVector) -> C64 {
        let g = &self.gaussian;
        (0..4)
            .map(|mu| {
                let v = c.get(mu);
                match self.rep {
                    Representation::Block => g.axis_factor(mu, v),
                    Representation::RelativeTime if mu == 0 => g.axis_factor(0, v + g.tau),
                    Representation::RelativeTime => g.axis_factor(mu, v),
                    _ if self.rep.is_spectral(mu) => g.spectral_factor(mu, v),
                    _ => g.axis_factor(mu, v),
                }
            })
            .product()
    }

    /// Same state read in another representation.
    pub fn to_representation(&self, target: Representation) -> AnalyticState {
        AnalyticState { gaussian: self.gaussian, rep: target }
    }

    /// Product of the one-dimensional factors for the axes present.
    pub fn sample(&self, axes: Vec<GridAxis>) -> Result<GridWaveFunction> {
        let coords: Vec<usize> = axes.iter().map(|a| a.coord).collect();
        let me = *self;
        let mut g = GridWaveFunction::from_fn(axes, self.rep, move |p| {
            coords
                .iter()
                .map(|&mu| {
                    let v = p.get(mu);
                    let gs = &me.gaussian;
                    match me.rep {
                        Representation::RelativeTime if mu == 0 => gs.axis_factor(0, v + gs.tau),
                        r if r.is_spectral(mu) => gs.spectral_factor(mu, v),
                        _ => gs.axis_factor(mu, v),
                    }
                })
                .product()
        })?;
        g.tau = self.gaussian.tau;
        Ok(g)
    }
}

impl GridWaveFunction {
    /// Converts a sampled wave function between representations with exact
    /// discrete Fourier transforms (block ↔ energy/momentum ↔ hybrid) and an
    /// exact band-limited shift by the laboratory time (block ↔ relative time).
    pub fn to_representation(&self, target: Representation) -> Result<GridWaveFunction> {
        if target == self.rep {
            return Ok(self.clone());
        }
        let needs_time = target == Representation::RelativeTime || self.rep == Representation::RelativeTime;
        if needs_time && self.axis_position(0).is_none() {
            return Err(Error::Unsupported(format!("conversion {} -> {} needs a time axis", self.rep.name(), target.name())));
        }
        let mut g = self.clone();
        for pos in 0..g.axes.len() {
            let coord = g.axes[pos].coord;
            if g.rep.is_spectral(coord) {
                let sign = if coord == 0 { -1.0 } else { 1.0 };
                let back = g.axes[pos].reciprocal();
                g.fourier_axis(pos, sign, back);
            }
        }
        if g.rep == Representation::RelativeTime {
            g.shift_time(-g.tau)?;
        }
        g.rep = Representation::Block;
        match target {
            Representation::Block => {}
            Representation::RelativeTime => g.shift_time(g.tau)?,
            _ => {
                for pos in 0..g.axes.len() {
                    let coord = g.axes[pos].coord;
                    if target.is_spectral(coord) {
                        let sign = if coord == 0 { 1.0 } else { -1.0 };
                        let fwd = g.axes[pos].reciprocal();
                        g.fourier_axis(pos, sign, fwd);
                    }
                }
            }
        }
        g.rep = target;
        Ok(g)
    }
}

/// Plane wave `e^{−iEt + ip⃗·x⃗}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub p: FourMomentum,
    pub rep: Representation,
}

impl PlaneWave {
    pub fn new(p: FourMomentum) -> Self {
        Self { p, rep: Representation::Block }
    }

    /// Amplitude in block time, or relative time using lab time `tau`.
    pub fn eval(&self, x: FourVector, tau: f64) -> C64 {
        let t = match self.rep {
            Representation::RelativeTime => x.t + tau,
            _ => x.t,
        };
        let s = self.p;
        C64::from_polar(1.0, -s.e * t + s.px * x.x + s.py * x.y + s.pz * x.z)
    }

    /// Onshell energy `Ē = √(p⃗² + m²)`.
    pub fn onshell_energy(&self, m: f64) -> f64 {
        (self.p.p_squared() + m * m).sqrt()
    }

    /// `γ = Ē/m`.
    pub fn gamma(&self, m: f64) -> f64 {
        self.onshell_energy(m) / m
    }
}

/// Laboratory energy `𝓔 = −(E² − p⃗² − m²)/2m`.
pub fn lab_energy(p: &PlaneWave, m: f64) -> Result<f64> {
    ensure_positive("mass", m)?;
    Ok(-(p.p.square() - m * m) / (2.0 * m))
}

/// Relative-time split: onshell energy `Ē` and time part `−(γ − 1)Ê − Ê²/2m`
/// with `Ê = E − Ē`.
pub fn lab_energy_relative(p: &PlaneWave, m: f64) -> Result<(f64, f64)> {
    ensure_positive("mass", m)?;
    let ebar = p.onshell_energy(m);
    let gamma = ebar / m;
    let ehat = p.p.e - ebar;
    Ok((ebar, -(gamma - 1.0) * ehat - ehat * ehat / (2.0 * m)))
}
