//! One-dimensional Morlet continuous wavelet transform.
//!
//! `φ_sd(t) = |s|^{-1/2} (e^{−i(t−d)/s} − e^{−1/2}) e^{−(t−d)²/2s²}`.
//! Scales run over a symmetric log-spaced set covering both signs of `s`.
//! Every scale row carries its own displacement grid with step proportional
//! to `|s|`, and sums are cut off where the Gaussian envelope is negligible.

use std::f64::consts::LN_10;

use crate::error::{ensure_positive, invalid, Error, Result};
use crate::foundation::C64;
use crate::par;

/// Scale and displacement of one wavelet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletPoint {
    pub s: f64,
    pub d: f64,
}

impl WaveletPoint {
    pub fn new(s: f64, d: f64) -> Result<Self> {
        if s == 0.0 || !s.is_finite() || !d.is_finite() {
            return Err(invalid(format!("wavelet scale must be nonzero and finite, got s={s}, d={d}")));
        }
        Ok(Self { s, d })
    }
}

#[inline]
fn morlet_raw(s: f64, d: f64, t: f64) -> C64 {
    let u = (t - d) / s;
    let env = (-0.5 * u * u).exp() / s.abs().sqrt();
    (C64::from_polar(1.0, -u) - (-0.5f64).exp()) * env
}

/// Evaluates `φ_sd(t)`.
pub fn morlet_eval(w: WaveletPoint, t: f64) -> Result<C64> {
    if w.s == 0.0 {
        return Err(invalid("wavelet scale must be nonzero"));
    }
    Ok(morlet_raw(w.s, w.d, t))
}

/// Complex samples on a uniform grid `origin + k·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub origin: f64,
    pub step: f64,
    pub values: Vec<C64>,
}

impl SampledSignal {
    pub fn new(origin: f64, step: f64, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Grid("signal has no samples".into()));
        }
        ensure_positive("sample step", step)?;
        Ok(Self { origin, step, values })
    }

    /// Builds from explicit sample times, which must be uniformly spaced.
    pub fn from_points(times: &[f64], values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Grid("times and values differ in length".into()));
        }
        if times.len() < 2 {
            return Err(Error::Grid("signal needs at least two samples".into()));
        }
        let step = times[1] - times[0];
        let tol = 1e-9 * step.abs().max(1e-300);
        if times.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > tol) {
            return Err(Error::Grid("sample times are not uniform".into()));
        }
        Self::new(times[0], step, values)
    }

    pub fn from_fn(origin: f64, step: f64, n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(origin, step, (0..n).map(|k| f(origin + step * k as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.origin + self.step * k as f64
    }

    pub fn end(&self) -> f64 {
        self.time(self.len() - 1)
    }

    /// `‖f‖₂` by the rectangle rule.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step).sqrt()
    }

    /// `‖a − b‖₂` on a shared grid.
    pub fn l2_distance(&self, other: &SampledSignal) -> f64 {
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        (s * self.step).sqrt()
    }

    /// `∫ a* b`.
    pub fn inner(&self, other: &SampledSignal) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * self.step
    }

    fn window(&self, center: f64, half: f64) -> (usize, usize) {
        let n = self.len() as f64;
        let lo = ((center - half - self.origin) / self.step).ceil().max(0.0);
        let hi = ((center + half - self.origin) / self.step).floor().min(n - 1.0);
        if hi < lo {
            (1, 0)
        } else {
            (lo as usize, hi as usize)
        }
    }
}

/// Sampling of the `(s, d)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletGridSpec {
    /// Smallest `|s|`.
    pub s_min: f64,
    /// Largest `|s|`.
    pub s_max: f64,
    /// Log-spaced scales per decade, per sign.
    pub per_decade: usize,
    /// Displacement step in units of `|s|`.
    pub d_step: f64,
    /// Envelope cutoff in units of `|s|`.
    pub cutoff: f64,
}

impl Default for WaveletGridSpec {
    fn default() -> Self {
        Self { s_min: 0.03, s_max: 1.0e5, per_decade: 16, d_step: 0.25, cutoff: 9.0 }
    }
}

impl WaveletGridSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("s_min", self.s_min)?;
        ensure_positive("d_step", self.d_step)?;
        ensure_positive("cutoff", self.cutoff)?;
        if !(self.s_max.is_finite() && self.s_max > self.s_min) {
            return Err(invalid("s_max must exceed s_min"));
        }
        if self.per_decade == 0 {
            return Err(invalid("per_decade must be at least one"));
        }
        Ok(())
    }

    /// Twice as many scales and displacements.
    pub fn refined(&self) -> Self {
        Self { per_decade: 2 * self.per_decade, d_step: 0.5 * self.d_step, ..*self }
    }

    /// Signed scales with their trapezoid weights in `ln|s|`.
    pub fn scales(&self) -> Vec<(f64, f64)> {
        let decades = (self.s_max / self.s_min).log10();
        let n = ((decades * self.per_decade as f64).ceil() as usize).max(1);
        let h = decades * LN_10 / n as f64;
        let mut out = Vec::with_capacity(2 * (n + 1));
        for sign in [-1.0, 1.0] {
            for k in 0..=n {
                let s = self.s_min * (h * k as f64).exp();
                let w = if k == 0 || k == n { 0.5 * h } else { h };
                out.push((sign * s, w));
            }
        }
        out
    }
}

/// Coefficients along one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow {
    pub s: f64,
    /// Quadrature weight in `ln|s|`.
    pub weight: f64,
    pub d_origin: f64,
    pub d_step: f64,
    pub coeffs: Vec<C64>,
}

impl ScaleRow {
    pub fn d(&self, k: usize) -> f64 {
        self.d_origin + self.d_step * k as f64
    }
}

/// Wavelet coefficients `f̃_sd` over a sampled `(s, d)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub spec: WaveletGridSpec,
    pub rows: Vec<ScaleRow>,
}

impl WaveletCoefficients {
    /// `a·self + b·other` on an identical grid.
    pub fn combine(&self, a: C64, other: &WaveletCoefficients, b: C64) -> Result<Self> {
        if self.rows.len() != other.rows.len()
            || self.rows.iter().zip(&other.rows).any(|(r, q)| r.coeffs.len() != q.coeffs.len() || r.s != q.s)
        {
            return Err(Error::Grid("coefficient grids differ".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r, q)| ScaleRow { coeffs: r.coeffs.iter().zip(&q.coeffs).map(|(x, y)| a * x + b * y).collect(), ..r.clone() })
            .collect();
        Ok(Self { spec: self.spec, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat `(s, d, coefficient)` listing.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, C64)> + '_ {
        self.rows.iter().flat_map(|r| r.coeffs.iter().enumerate().map(move |(k, c)| (r.s, r.d(k), *c)))
    }
}

/// `f̃_sd = ∫ φ*_sd(t) f(t) dt` by the rectangle rule on the sample grid.
pub fn analyze(f: &SampledSignal, spec: &WaveletGridSpec) -> Result<WaveletCoefficients> {
    spec.validate()?;
    if f.len() < 2 {
        return Err(Error::Grid("signal needs at least two samples".into()));
    }
    if spec.s_min < 1.5 * f.step {
        return Err(Error::Grid(format!("s_min {} is below 1.5 sample steps ({}); small scales would alias", spec.s_min, f.step)));
    }
    let scales = spec.scales();
    let rows = par::map_indexed(scales.len(), |i| {
        let (s, weight) = scales[i];
        let a = s.abs();
        let step = spec.d_step * a;
        let reach = spec.cutoff * a;
        let lo = f.origin - reach;
        let n = (((f.end() + reach) - lo) / step).ceil() as usize + 1;
        let coeffs = (0..n)
            .map(|k| {
                let d = lo + step * k as f64;
                let (i0, i1) = f.window(d, reach);
                let mut acc = C64::new(0.0, 0.0);
                for j in i0..=i1 {
                    acc += morlet_raw(s, d, f.time(j)).conj() * f.values[j];
                }
                acc * f.step
            })
            .collect();
        ScaleRow { s, weight, d_origin: lo, d_step: step, coeffs }
    });
    Ok(WaveletCoefficients { spec: *spec, rows })
}

/// `f(t) = (1/C) ∫ ds dd/s² φ_sd(t) f̃_sd`, evaluated at `origin + k·step`.
pub fn synthesize(c: &WaveletCoefficients, admissibility: f64, origin: f64, step: f64, n: usize) -> Result<SampledSignal> {
    if !(admissibility > 0.0 && admissibility.is_finite()) {
        return Err(invalid(format!("admissibility constant must be positive, got {admissibility}")));
    }
    ensure_positive("sample step", step)?;
    if n == 0 {
        return Err(Error::Grid("output grid is empty".into()));
    }
    let cutoff = c.spec.cutoff;
    let values = par::map_indexed(n, |k| {
        let t = origin + step * k as f64;
        let mut acc = C64::new(0.0, 0.0);
        for row in &c.rows {
            let a = row.s.abs();
            // ds/s² = d(ln|s|)/|s|
            let w = row.weight * row.d_step / a;
            let reach = cutoff * a;
            let lo = ((t - reach - row.d_origin) / row.d_step).ceil().max(0.0) as usize;
            let hi = ((t + reach - row.d_origin) / row.d_step).floor();
            if hi < 0.0 {
                continue;
            }
            let hi = (hi as usize).min(row.coeffs.len() - 1);
            let mut part = C64::new(0.0, 0.0);
            for j in lo..=hi {
                part += morlet_raw(row.s, row.d(j), t) * row.coeffs[j];
            }
            acc += part * w;
        }
        acc / admissibility
    });
    SampledSignal::new(origin, step, values)
}

/// Round trip with `C = 1` on `f`.
pub fn round_trip_raw(f: &SampledSignal, spec: &WaveletGridSpec) -> Result<SampledSignal> {
    let c = analyze(f, spec)?;
    synthesize(&c, 1.0, f.origin, f.step, f.len())
}

fn ratio(reference: &SampledSignal, spec: &WaveletGridSpec) -> Result<f64> {
    let back = round_trip_raw(reference, spec)?;
    let r = reference.inner(&back).re / reference.inner(reference).re;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Numerical(format!("round-trip ratio {r} is not positive")));
    }
    Ok(r)
}

/// Gaussian reference signal `e^{−(t−t₀)²/2w²}` on the given sample grid.
pub fn reference_gaussian(origin: f64, step: f64, n: usize, width: f64) -> Result<SampledSignal> {
    ensure_positive("reference width", width)?;
    let center = origin + 0.5 * step * (n.max(1) - 1) as f64;
    SampledSignal::from_fn(origin, step, n, |t| C64::new((-(t - center).powi(2) / (2.0 * width * width)).exp(), 0.0))
}

/// Admissibility constant derived as the round-trip amplitude ratio on a
/// unit-width Gaussian sampled on `(origin, step, n)`.
///
/// The ratio is recomputed on [`WaveletGridSpec::refined`]; a relative change
/// above `1e-3` is reported as a non-convergent grid.
pub fn admissibility_constant(spec: &WaveletGridSpec, origin: f64, step: f64, n: usize) -> Result<f64> {
    let g = reference_gaussian(origin, step, n, 1.0)?;
    let c = ratio(&g, spec)?;
    let fine = ratio(&g, &spec.refined())?;
    let rel = (fine - c).abs() / c;
    if rel > 1e-3 {
        return Err(Error::Numerical(format!("admissibility constant not converged: {c} vs {fine} after refinement")));
    }
    Ok(c)
}

/// Ratio obtained from a Gaussian of the given width, for consistency checks.
pub fn admissibility_ratio(spec: &WaveletGridSpec, reference: &SampledSignal) -> Result<f64> {
    ratio(reference, spec)
}
