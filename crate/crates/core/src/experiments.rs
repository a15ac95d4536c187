//! Closed-form predictions for slits in time, the attosecond double slit,
//! slowly varying fields and the Aharonov-Bohm effect in time.
//!
//! Particles travel along `x` from a source at `x = 0` and are registered by
//! laboratory arrival time. Every density here is a function of the arrival
//! offset `δτ_D = τ − τ̄_D` and uses the width convention
//! `ρ(x) = exp(−x²/σ²)/√(πσ²)`, so `σ²` is twice the variance. Formulas are
//! nonrelativistic with `γ = 1` except for the Aharonov-Bohm phase.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, invalid, Result};

/// Parameters shared by the slit calculators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub m: f64,
    /// Mean momentum `p̄`.
    pub p_bar: f64,
    /// Momentum width `σ̂₁` of the beam.
    pub sigma1_hat: f64,
    /// Initial width in quantum time `σ₀`.
    pub sigma0: f64,
    /// Source to gate distance `L_G`.
    pub l_gate: f64,
    /// Source to detector distance `L_D`.
    pub l_detector: f64,
    /// Gate center `T` (double slit: midpoint of `T ∓ ΔT`).
    pub gate_center: f64,
    /// Half separation `ΔT` of the two sources or gates.
    pub delta_t: f64,
    /// Gate width `Σ_G`.
    pub gate_width: f64,
    /// Relative phase `Δφ` between the two sources.
    pub delta_phi: f64,
    /// Laboratory start time `τ_S`.
    pub tau_s: f64,
}

impl Default for ExperimentConfig {
    /// A beam where fringes and the quantum time effects are both visible.
    fn default() -> Self {
        Self {
            m: 1.0,
            p_bar: 0.1,
            sigma1_hat: 0.01,
            sigma0: 30.0,
            l_gate: 1.0,
            l_detector: 2000.0,
            gate_center: 10.5,
            delta_t: 1500.0,
            gate_width: 1.0,
            delta_phi: 0.0,
            tau_s: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.m),
            ("mean momentum", self.p_bar),
            ("momentum width", self.sigma1_hat),
            ("time width", self.sigma0),
            ("gate distance", self.l_gate),
            ("gate width", self.gate_width),
        ] {
            ensure_positive(name, v)?;
        }
        for (name, v) in [
            ("gate center", self.gate_center),
            ("source separation", self.delta_t),
            ("relative phase", self.delta_phi),
            ("start time", self.tau_s),
        ] {
            ensure_finite(name, v)?;
        }
        if !(self.l_detector > self.l_gate) {
            return Err(invalid(format!("detector distance {} must exceed gate distance {}", self.l_detector, self.l_gate)));
        }
        Ok(())
    }

    /// Flight time from source to gate, `mL_G/p̄`.
    pub fn tau_gate(&self) -> f64 {
        self.m * self.l_gate / self.p_bar
    }

    /// Flight time from source to detector, `mL_D/p̄`.
    pub fn tau_detector(&self) -> f64 {
        self.m * self.l_detector / self.p_bar
    }

    /// Mean laboratory arrival time at the detector.
    pub fn arrival_detector(&self) -> f64 {
        self.tau_s + self.tau_detector()
    }

    /// Gate center relative to the mean arrival at the gate, `T_Ḡ = T − τ̄_G`.
    pub fn gate_offset(&self) -> f64 {
        self.gate_center - (self.tau_s + self.tau_gate())
    }

    pub fn gate(&self) -> GateSpec {
        GateSpec { center: self.gate_center, width: self.gate_width }
    }

    /// Free arrival dispersion of the beam at the gate, `σ̄_G² = (σ̂₁/p̄)²τ̄_G²`.
    pub fn sigma_bar_gate2(&self) -> f64 {
        (self.sigma1_hat / self.p_bar * self.tau_gate()).powi(2)
    }

    /// Free arrival dispersion at the detector without time spread,
    /// `σ̄_D² = (σ̂₁/p̄)²τ̄_D²`.
    pub fn sigma_bar_detector2(&self) -> f64 {
        (self.sigma1_hat / self.p_bar * self.tau_detector()).powi(2)
    }

    /// Dispersion of the quantum time part at the detector,
    /// `σ₀²(1 + τ̄_D²/m²σ₀⁴)`.
    pub fn sigma_hat_detector2(&self) -> f64 {
        time_part_dispersion(self.sigma0 * self.sigma0, self.tau_detector(), self.m)
    }

    /// Approximations of the slit formulas that this configuration strains.
    pub fn assumption_flags(&self) -> Vec<Assumption> {
        let mut out = Vec::new();
        if self.p_bar / self.m > 0.2 {
            out.push(Assumption::Nonrelativistic);
        }
        if self.tau_gate() > 0.1 * self.m * self.sigma0 * self.sigma0 {
            out.push(Assumption::NearGate);
        }
        if self.tau_gate() > 0.1 * self.tau_detector() {
            out.push(Assumption::FarDetector);
        }
        if self.delta_t.abs() > 0.1 * self.tau_detector() {
            out.push(Assumption::SmallSeparation);
        }
        out
    }
}

/// An approximation behind the closed forms that a configuration violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// `p̄/m` above 0.2.
    Nonrelativistic,
    /// Source to gate flight time not small against `mσ₀²`.
    NearGate,
    /// Gate not close to the source compared with the detector.
    FarDetector,
    /// `ΔT` not small against the flight time to the detector.
    SmallSeparation,
    /// The two-source densities drop a term cubic in the arrival offset.
    CubicTermDropped,
}

impl Assumption {
    pub fn describe(self) -> &'static str {
        match self {
            Assumption::Nonrelativistic => "mean velocity p/m exceeds 0.2; gamma = 1 is assumed",
            Assumption::NearGate => "flight time to the gate is not small against m*sigma0^2",
            Assumption::FarDetector => "flight time to the gate is not small against flight time to the detector",
            Assumption::SmallSeparation => "source separation is not small against flight time to the detector",
            Assumption::CubicTermDropped => "a phase term cubic in the arrival offset is dropped",
        }
    }
}

/// A Gaussian gate `exp(−(τ − T)²/2Σ_G²)` in laboratory or quantum time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub center: f64,
    pub width: f64,
}

impl GateSpec {
    pub fn eval(&self, t: f64) -> f64 {
        (-(t - self.center).powi(2) / (2.0 * self.width * self.width)).exp()
    }

    /// Effective momentum `P = −(T_Ḡ/τ̄_G)p̄` for a beam arriving at `tau_g`
    /// after a flight time `flight`.
    pub fn effective_momentum(&self, arrival: f64, flight: f64, p_bar: f64) -> f64 {
        -(self.center - arrival) / flight * p_bar
    }

    /// Momentum-space width `Σ̂_G² = (Σ_G²/τ̄_G²)p̄²`.
    pub fn momentum_width2(&self, flight: f64, p_bar: f64) -> f64 {
        (self.width / flight * p_bar).powi(2)
    }
}

/// First order map from an arrival offset to a momentum offset,
/// `δp = −p̄δτ/τ̄`.
pub fn delta_p_from_delta_tau(p_bar: f64, tau_bar: f64, delta_tau: f64) -> f64 {
    -p_bar * delta_tau / tau_bar
}

/// Inverse of [`delta_p_from_delta_tau`].
pub fn delta_tau_from_delta_p(p_bar: f64, tau_bar: f64, delta_p: f64) -> f64 {
    -tau_bar * delta_p / p_bar
}

/// `σ²|f|² = σ²(1 + τ²/m²σ⁴)` for a quantum time width `σ²`.
pub fn time_part_dispersion(sigma2: f64, tau: f64, m: f64) -> f64 {
    sigma2 * (1.0 + tau * tau / (m * m * sigma2 * sigma2))
}

fn gaussian(x: f64, sigma2: f64) -> f64 {
    (-x * x / sigma2).exp() / (PI * sigma2).sqrt()
}

/// Arrival-time density at the detector.
#[derive(Debug, Clone, PartialEq)]
pub enum DetectorDensity {
    /// `norm2·exp(−(x − center)²/σ²)/√(πσ²)`.
    Gaussian { center: f64, sigma2: f64, norm2: f64 },
    /// Two outer humps at `∓ΔT` and an oscillating cross term:
    /// `[g(x+ΔT) + 2A cos(φ + f x) g(x) + g(x−ΔT)]/D` with `g` of width
    /// `σ²`.
    DoubleHump { delta_t: f64, sigma2: f64, amplitude: f64, frequency: f64, phase: f64, denominator: f64 },
}

impl DetectorDensity {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            DetectorDensity::Gaussian { center, sigma2, norm2 } => norm2 * gaussian(x - center, sigma2),
            DetectorDensity::DoubleHump { delta_t, sigma2, amplitude, frequency, phase, denominator } => {
                // nonnegative in exact arithmetic; clamp rounding at full cancellation
                let v = (gaussian(x + delta_t, sigma2)
                    + 2.0 * amplitude * (phase + frequency * x).cos() * gaussian(x, sigma2)
                    + gaussian(x - delta_t, sigma2))
                    / denominator;
                v.max(0.0)
            }
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Closed-form integral over the real line.
    pub fn total(&self) -> f64 {
        match *self {
            DetectorDensity::Gaussian { norm2, .. } => norm2,
            DetectorDensity::DoubleHump { sigma2, amplitude, frequency, phase, denominator, .. } => {
                (2.0 + 2.0 * amplitude * phase.cos() * (-frequency * frequency * sigma2 / 4.0).exp()) / denominator
            }
        }
    }

    /// Width parameter `σ²` of the humps.
    pub fn sigma2(&self) -> f64 {
        match *self {
            DetectorDensity::Gaussian { sigma2, .. } | DetectorDensity::DoubleHump { sigma2, .. } => sigma2,
        }
    }

    /// Interval holding all but a negligible part of the density.
    pub fn support(&self) -> (f64, f64) {
        let w = 8.0 * self.sigma2().sqrt();
        match *self {
            DetectorDensity::Gaussian { center, .. } => (center - w, center + w),
            DetectorDensity::DoubleHump { delta_t, .. } => (-delta_t.abs() - w, delta_t.abs() + w),
        }
    }

    /// Named parameters for a side-channel record.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            DetectorDensity::Gaussian { center, sigma2, norm2 } => vec![("center", center), ("sigma2", sigma2), ("norm2", norm2)],
            DetectorDensity::DoubleHump { delta_t, sigma2, amplitude, frequency, phase, denominator } => vec![
                ("delta_t", delta_t),
                ("sigma2", sigma2),
                ("amplitude", amplitude),
                ("frequency", frequency),
                ("phase", phase),
                ("denominator", denominator),
            ],
        }
    }
}

/// Free arrival density with both the quantum time and momentum spreads,
/// `σ_D² = σ̂_D² + σ̄_D²`.
pub fn free_density(cfg: &ExperimentConfig) -> Result<DetectorDensity> {
    cfg.validate()?;
    Ok(DetectorDensity::Gaussian { center: 0.0, sigma2: cfg.sigma_hat_detector2() + cfg.sigma_bar_detector2(), norm2: 1.0 })
}

/// Free arrival density of the ordinary theory, `σ̄_D²` only.
pub fn free_density_sqt(cfg: &ExperimentConfig) -> Result<DetectorDensity> {
    cfg.validate()?;
    Ok(DetectorDensity::Gaussian { center: 0.0, sigma2: cfg.sigma_bar_detector2(), norm2: 1.0 })
}

fn single_slit_space(cfg: &ExperimentConfig, gate2: f64) -> DetectorDensity {
    let sg2 = cfg.sigma_bar_gate2();
    let (tg, td) = (cfg.tau_gate(), cfg.tau_detector());
    let t_off = cfg.gate_offset();
    let sigma2 = gate2 * sg2 / (gate2 + sg2) * (td / tg).powi(2);
    let center = -sg2 / (gate2 + sg2) * t_off / tg * td;
    let norm2 = (gate2 / (gate2 + sg2)).sqrt() * (-t_off * t_off / (gate2 + sg2)).exp();
    DetectorDensity::Gaussian { center, sigma2, norm2 }
}

/// Single Gaussian gate in the ordinary theory.
pub fn single_slit_sqt(cfg: &ExperimentConfig) -> Result<DetectorDensity> {
    cfg.validate()?;
    Ok(single_slit_space(cfg, cfg.gate_width * cfg.gate_width))
}

/// Single gate with quantum time, split into its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleSlitTq {
    /// Width `σ_X² = Σ_G²σ₀²/(Σ_G² + σ₀²)` of the gated time wave function.
    pub sigma_x2: f64,
    /// Time-part dispersion at the detector, `σ_X²(1 + τ̄_D²/m²σ_X⁴)`.
    pub sigma_hat2: f64,
    /// `√(Σ_G²/(Σ_G² + σ₀²))`, the probability kept by gating in time.
    pub time_norm2: f64,
    /// The ordinary single-slit density with `Σ_G² → Σ_G² + σ₀²`.
    pub space: DetectorDensity,
    /// Convolution of the time and space parts.
    pub density: DetectorDensity,
    pub flags: Vec<Assumption>,
}

/// Single Gaussian gate with quantum time.
///
/// The total probability is `time_norm2` times the space-part norm, which
/// equals `√(Σ_G²/(Σ_G² + σ₀² + σ̄_G²))·exp(−T_Ḡ²/(Σ_G² + σ₀² + σ̄_G²))`.
pub fn single_slit_tq(cfg: &ExperimentConfig) -> Result<SingleSlitTq> {
    cfg.validate()?;
    let (g2, s02) = (cfg.gate_width * cfg.gate_width, cfg.sigma0 * cfg.sigma0);
    let sigma_x2 = g2 * s02 / (g2 + s02);
    let sigma_hat2 = time_part_dispersion(sigma_x2, cfg.tau_detector(), cfg.m);
    let time_norm2 = (g2 / (g2 + s02)).sqrt();
    let space = single_slit_space(cfg, g2 + s02);
    let DetectorDensity::Gaussian { center, sigma2, norm2 } = space else { unreachable!() };
    let density = DetectorDensity::Gaussian { center, sigma2: sigma_hat2 + sigma2, norm2: time_norm2 * norm2 };
    Ok(SingleSlitTq { sigma_x2, sigma_hat2, time_norm2, space, density, flags: cfg.assumption_flags() })
}

/// Center `t̄_X = T_Gσ₀²/(Σ_G² + σ₀²)` of the gated time wave function.
pub fn gated_time_center(t_gate: f64, gate_width: f64, sigma0: f64) -> f64 {
    let (g2, s02) = (gate_width * gate_width, sigma0 * sigma0);
    t_gate * s02 / (g2 + s02)
}

/// Fringe frequency `f̄ = 4(p̄²/2m)(ΔT/τ̄_D)` of the two-source pattern.
pub fn fringe_frequency(cfg: &ExperimentConfig) -> f64 {
    4.0 * cfg.p_bar * cfg.p_bar / (2.0 * cfg.m) * cfg.delta_t / cfg.tau_detector()
}

/// Fringe offset `φ̄ = 2(p̄²/2m)ΔT + 2Δφ`.
pub fn fringe_phase(cfg: &ExperimentConfig) -> f64 {
    2.0 * cfg.p_bar * cfg.p_bar / (2.0 * cfg.m) * cfg.delta_t + 2.0 * cfg.delta_phi
}

/// Two-source density with momentum width `σ̄²`, added time-part width
/// `σ̂²`, fringe frequency `f̄` and offset `φ̄`.
///
/// With `σ̂² = 0` this is the ordinary result; otherwise the humps widen to
/// `σ² = σ̂² + σ̄²`, the frequency drops by `σ̄²/σ²` and the cross term is
/// suppressed by `exp(−σ̂²σ̄²f̄²/4σ²)`.
pub fn double_slit_density(sigma_bar2: f64, sigma_hat2: f64, delta_t: f64, f_bar: f64, phi_bar: f64) -> DetectorDensity {
    let s2 = sigma_hat2 + sigma_bar2;
    let amplitude = (-delta_t * delta_t / sigma_bar2 - sigma_hat2 * sigma_bar2 / (4.0 * s2) * f_bar * f_bar).exp();
    let denominator = 2.0 + 2.0 * (-delta_t * delta_t / sigma_bar2 - f_bar * f_bar * sigma_bar2 / 4.0).exp() * phi_bar.cos();
    DetectorDensity::DoubleHump { delta_t, sigma2: s2, amplitude, frequency: sigma_bar2 / s2 * f_bar, phase: phi_bar, denominator }
}

/// `σ̄²/(σ̂² + σ̄²)`, the factor by which quantum time lowers the fringe
/// frequency.
pub fn frequency_reduction(sigma_bar2: f64, sigma_hat2: f64) -> f64 {
    sigma_bar2 / (sigma_hat2 + sigma_bar2)
}

/// Two correlated sources at `∓ΔT` in the ordinary theory.
pub fn double_slit_sqt(cfg: &ExperimentConfig) -> Result<DetectorDensity> {
    cfg.validate()?;
    Ok(double_slit_density(cfg.sigma_bar_detector2(), 0.0, cfg.delta_t, fringe_frequency(cfg), fringe_phase(cfg)))
}

/// Two correlated sources at `∓ΔT` with quantum time.
pub fn double_slit_tq(cfg: &ExperimentConfig) -> Result<DetectorDensity> {
    cfg.validate()?;
    Ok(double_slit_density(cfg.sigma_bar_detector2(), cfg.sigma_hat_detector2(), cfg.delta_t, fringe_frequency(cfg), fringe_phase(cfg)))
}

/// Approximations behind the two-source densities for `cfg`.
pub fn double_slit_flags(cfg: &ExperimentConfig) -> Vec<Assumption> {
    let mut out = cfg.assumption_flags();
    out.push(Assumption::CubicTermDropped);
    out
}

/// Kinetic phases `(source → gate, gate → detector)` of a ray of momentum
/// `p` passing a gate at `gate_time`.
pub fn kinetic_phases(p: f64, m: f64, tau_s: f64, gate_time: f64, tau_d: f64) -> (f64, f64) {
    let k = p * p / (2.0 * m);
    (k * (gate_time - tau_s), k * (tau_d - gate_time))
}

/// Attosecond double slit: ratios predicted by quantum time of the bound
/// state, independent of how the ordinary width and frequency arise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindnerPrediction {
    /// `σ_ā² + σ̄_D²`.
    pub widened_sigma2: f64,
    /// `(σ_ā² + σ̄_D²)/σ̄_D²`, the factor on the width parameter `σ²`.
    pub variance_factor: f64,
    /// Square root of `variance_factor`, the factor on `σ` itself.
    pub width_factor: f64,
    /// `σ̄_D²/(σ_ā² + σ̄_D²)`.
    pub frequency_factor: f64,
    /// `exp(−σ_ā²σ̄_D²f̄²/4(σ_ā² + σ̄_D²))`.
    pub central_suppression: f64,
}

/// Predictions for a bound state of time width `sigma_a` observed with
/// ordinary arrival width `sigma_bar_d` and fringe frequency `f_bar`.
pub fn lindner_predictions(sigma_a: f64, sigma_bar_d: f64, f_bar: f64) -> Result<LindnerPrediction> {
    ensure_finite("bound-state time width", sigma_a)?;
    if sigma_a < 0.0 {
        return Err(invalid("bound-state time width must be non-negative"));
    }
    ensure_positive("arrival width", sigma_bar_d)?;
    ensure_finite("fringe frequency", f_bar)?;
    let (a2, d2) = (sigma_a * sigma_a, sigma_bar_d * sigma_bar_d);
    let s2 = a2 + d2;
    Ok(LindnerPrediction {
        widened_sigma2: s2,
        variance_factor: s2 / d2,
        width_factor: (s2 / d2).sqrt(),
        frequency_factor: d2 / s2,
        central_suppression: (-0.25 * a2 * d2 / s2 * f_bar * f_bar).exp(),
    })
}

/// [`lindner_predictions`] with the arrival width and fringe frequency of
/// the ordinary two-source pattern for `cfg`.
pub fn lindner_from_config(sigma_a: f64, cfg: &ExperimentConfig) -> Result<LindnerPrediction> {
    cfg.validate()?;
    lindner_predictions(sigma_a, cfg.sigma_bar_detector2().sqrt(), fringe_frequency(cfg))
}

/// Evaluates `f` on every configuration, in parallel when enabled.
pub fn sweep<T, F>(cfgs: &[ExperimentConfig], f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(&ExperimentConfig) -> Result<T> + Sync + Send,
{
    crate::par::map_indexed(cfgs.len(), |i| f(&cfgs[i]))
}

/// Larmor frequency `(ω̄_τ, ω̂_τ)` in a field `B₀ + B₁t + B₂t²/2` for a
/// particle with relative-time mean `⟨t_τ⟩` and width `σ₀²`.
///
/// Kept in the published form: `ω̄ = (e/m)(B₀ + B₁τ + B₂τ²)` and
/// `ω̂ = (e/m)(B₁ + B₂τ/2)⟨t_τ⟩ + (e/4m)B₂σ₀²`.
pub fn larmor_shift(b: [f64; 3], tau: f64, mean_t: f64, sigma0_2: f64, m: f64, charge: f64) -> Result<(f64, f64)> {
    ensure_positive("mass", m)?;
    let k = charge / m;
    let bar = k * (b[0] + b[1] * tau + b[2] * tau * tau);
    let hat = k * (b[1] + 0.5 * b[2] * tau) * mean_t + 0.25 * k * b[2] * sigma0_2;
    Ok((bar, hat))
}

/// Coefficients `(E_τ⁽⁰⁾, E_τ⁽¹⁾, E_τ⁽²⁾)` of a field `E₀ + E₁t + E₂t²/2`
/// expanded in relative time about `τ`.
pub fn field_in_relative_time(e: [f64; 3], tau: f64) -> [f64; 3] {
    [e[0] + e[1] * tau + 0.5 * e[2] * tau * tau, e[1] + e[2] * tau, e[2]]
}

/// Rate `d⟨δx⟩/dτ` at which the mean position departs from the ordinary
/// theory in a uniform field `E₀ + E₁t + E₂t²/2` along `x`.
pub fn x_discrepancy_rate(e: [f64; 3], tau: f64, mean_t: f64, mean_t2: f64, mean_r2: f64, m: f64, charge: f64) -> Result<f64> {
    ensure_positive("mass", m)?;
    let [e0, e1, e2] = field_in_relative_time(e, tau);
    let k = charge / m;
    Ok(k * e2 / 4.0 * mean_r2 * mean_t + k * e0 * mean_t + k * e1 / 2.0 * mean_t2)
}

/// Phase shifts `(Δφ_tq, Δφ_sqt) = (−γeVΔτ, −eVΔτ)` picked up by the arm
/// held at potential `v` for a laboratory interval `dtau`.
pub fn ab_time_phase(v: f64, dtau: f64, gamma: f64, charge: f64) -> Result<(f64, f64)> {
    ensure_finite("potential", v)?;
    ensure_finite("interval", dtau)?;
    if dtau < 0.0 {
        return Err(invalid("interval must be non-negative"));
    }
    if !(gamma >= 1.0) {
        return Err(invalid(format!("gamma must be at least 1, got {gamma}")));
    }
    let sqt = -charge * v * dtau;
    Ok((gamma * sqt, sqt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_density_example() {
        let cfg = ExperimentConfig {
            m: 1.0,
            p_bar: 1.0,
            sigma1_hat: 0.1,
            sigma0: 1.0,
            l_gate: 0.5,
            l_detector: 2.0,
            gate_center: 0.5,
            delta_t: 0.1,
            ..Default::default()
        };
        let d = free_density(&cfg).unwrap();
        assert!((d.sigma2() - 5.04).abs() < 1e-12);
        assert_eq!(d.total(), 1.0);
    }

    #[test]
    fn centered_gate() {
        let mut cfg = ExperimentConfig::default();
        cfg.gate_center = cfg.tau_s + cfg.tau_gate();
        let DetectorDensity::Gaussian { center, norm2, .. } = single_slit_sqt(&cfg).unwrap() else { panic!() };
        assert_eq!(center, 0.0);
        let g2 = cfg.gate_width.powi(2);
        assert!((norm2 - (g2 / (g2 + cfg.sigma_bar_gate2())).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matching_ledger_values() {
        assert_eq!(gated_time_center(3.0, 1.0, 1.0), 1.5);
        let cfg = ExperimentConfig { gate_width: 1.0, sigma0: 1.0, ..Default::default() };
        assert_eq!(single_slit_tq(&cfg).unwrap().sigma_x2, 0.5);
    }

    #[test]
    fn ab_phase_limits() {
        assert_eq!(ab_time_phase(0.0, 2.0, 1.3, 1.0).unwrap(), (-0.0, -0.0));
        let (a, b) = ab_time_phase(0.7, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(ab_time_phase(1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn larmor_static_and_centered() {
        assert_eq!(larmor_shift([1.0, 0.0, 0.0], 3.0, 0.4, 1.0, 1.0, 1.0).unwrap().1, 0.0);
        let (_, h) = larmor_shift([0.0, 0.5, 0.2], 3.0, 0.0, 2.0, 2.0, 1.0).unwrap();
        assert!((h - 0.2 * 2.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_leading_term() {
        let r = x_discrepancy_rate([0.3, 0.5, 0.2], 1.0, 0.0, 0.8, 2.0, 1.0, 1.0).unwrap();
        assert!((r - (0.5 + 0.2) / 2.0 * 0.8).abs() < 1e-15);
        assert_eq!(x_discrepancy_rate([0.3, 0.0, 0.0], 1.0, 0.0, 0.8, 2.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.l_detector = cfg.l_gate;
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig { sigma0: 0.0, ..Default::default() };
        assert!(free_density(&cfg).is_err());
    }
}
