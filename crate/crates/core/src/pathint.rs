//! Time-sliced path integral over paths that move in both time and space.
//!
//! Each slice of length `ε = τ/N` contributes `exp(iεL_j)` with the discrete
//! Lagrangian
//!
//! ```text
//! L_j = −(m/2)(Δt/ε)² − e(Δt/ε)(Φ_j + Φ_{j−1})/2
//!     + (m/2)(Δx/ε)² + e(Δx/ε)·(A_j + A_{j−1})/2
//!     − m/2
//! ```
//!
//! Potentials use the midpoint rule. The slices are integrated by direct
//! trapezoid quadrature on truncated uniform grids; there is no `iε`
//! prescription and no Wick rotation, convergence comes from the wave
//! function itself.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::foundation::{complex_sqrt, FourVector, C64, I};
use crate::grid::{GridAxis, GridWaveFunction};
use crate::par;
use crate::wavepackets::{GaussianTestFunction, Representation};

pub type ScalarField = Arc<dyn Fn(FourVector) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(FourVector) -> [f64; 3] + Send + Sync>;

/// Mass, charge and potentials entering the discrete Lagrangian.
#[derive(Clone)]
pub struct DiscreteLagrangian {
    pub m: f64,
    pub charge: f64,
    pub phi: Option<ScalarField>,
    pub a: Option<VectorField>,
    /// Include the constant `−m/2` term. Disabling it removes a global
    /// phase `exp(−imτ/2)`.
    pub mass_term: bool,
}

impl fmt::Debug for DiscreteLagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteLagrangian")
            .field("m", &self.m)
            .field("charge", &self.charge)
            .field("phi", &self.phi.is_some())
            .field("a", &self.a.is_some())
            .field("mass_term", &self.mass_term)
            .finish()
    }
}

impl DiscreteLagrangian {
    pub fn free(m: f64) -> Self {
        Self { m, charge: 0.0, phi: None, a: None, mass_term: true }
    }

    pub fn with_scalar(mut self, charge: f64, phi: impl Fn(FourVector) -> f64 + Send + Sync + 'static) -> Self {
        self.charge = charge;
        self.phi = Some(Arc::new(phi));
        self
    }

    pub fn with_vector(mut self, charge: f64, a: impl Fn(FourVector) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.charge = charge;
        self.a = Some(Arc::new(a));
        self
    }

    pub fn without_mass_term(mut self) -> Self {
        self.mass_term = false;
        self
    }

    pub fn is_free(&self) -> bool {
        self.phi.is_none() && self.a.is_none()
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("mass", self.m)?;
        ensure_finite("charge", self.charge)
    }
}

/// `ε·L_j` for one slice from `x_prev` to `x_next`.
pub fn slice_action(x_prev: FourVector, x_next: FourVector, lag: &DiscreteLagrangian, eps: f64) -> Result<f64> {
    ensure_positive("slice step", eps)?;
    Ok(slice_action_unchecked(x_prev, x_next, lag, eps))
}

fn slice_action_unchecked(x_prev: FourVector, x_next: FourVector, lag: &DiscreteLagrangian, eps: f64) -> f64 {
    let m = lag.m;
    let d = x_next - x_prev;
    let ds2 = d.x * d.x + d.y * d.y + d.z * d.z;
    let mut s = 0.5 * m * (ds2 - d.t * d.t) / eps;
    if let Some(phi) = &lag.phi {
        s -= lag.charge * d.t * 0.5 * (phi(x_next) + phi(x_prev));
    }
    if let Some(a) = &lag.a {
        let (a1, a0) = (a(x_next), a(x_prev));
        let ds = d.space();
        s += lag.charge * (0..3).map(|i| ds[i] * 0.5 * (a1[i] + a0[i])).sum::<f64>();
    }
    if lag.mass_term {
        s -= 0.5 * m * eps;
    }
    s
}

/// Normalization constants for `n` intermediate integrations, that is
/// `n + 1` kernel factors of step `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    /// `√(im/2πε)^{n+1}`.
    pub time: C64,
    /// `√(m/2πiε)^{3(n+1)}`.
    pub space: C64,
    /// `(−im²/4π²ε²)^{n+1}`.
    pub four: C64,
}

pub fn normalization(n: usize, eps: f64, m: f64) -> Result<Normalization> {
    ensure_positive("slice step", eps)?;
    ensure_positive("mass", m)?;
    let k = (n + 1) as i32;
    let t = time_factor(eps, m);
    let x = space_factor(eps, m);
    let four = C64::new(0.0, -m * m / (4.0 * PI * PI * eps * eps));
    Ok(Normalization { time: t.powi(k), space: x.powi(3 * k), four: four.powi(k) })
}

fn time_factor(eps: f64, m: f64) -> C64 {
    complex_sqrt(I * m / (2.0 * PI * eps))
}

fn space_factor(eps: f64, m: f64) -> C64 {
    complex_sqrt(C64::new(m, 0.0) / (I * 2.0 * PI * eps))
}

/// Slice count and the integration grid shared by every slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceConfig {
    pub n: usize,
    pub tau: f64,
    pub axes: Vec<GridAxis>,
}

/// Minimum extent, in std deviations of the widest slice, for validation.
const MIN_EXTENT_STDS: f64 = 8.0;
/// Clearance of the quadrature aliases beyond the grid, in std deviations.
const ALIAS_CLEARANCE_STDS: f64 = 8.0;

impl SliceConfig {
    pub fn new(n: usize, tau: f64, axes: Vec<GridAxis>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("slice count must be at least 1"));
        }
        ensure_positive("tau", tau)?;
        if axes.is_empty() {
            return Err(Error::Grid("at least one integration axis is required".into()));
        }
        Ok(Self { n, tau, axes })
    }

    /// `ε = τ/N`.
    pub fn eps(&self) -> f64 {
        self.tau / self.n as f64
    }

    /// Builds grids over `coords` that pass [`SliceConfig::validate`] for
    /// `psi`. The extent is chosen so that the amplitude at the grid edge is
    /// at most `edge_tol` of the peak, and never narrower than validation
    /// requires.
    pub fn auto(n: usize, tau: f64, psi: &GaussianTestFunction, m: f64, coords: &[usize], edge_tol: f64) -> Result<Self> {
        ensure_positive("mass", m)?;
        if !(edge_tol > 0.0 && edge_tol < 1.0) {
            return Err(invalid("edge tolerance must lie in (0, 1)"));
        }
        if coords.is_empty() {
            return Err(Error::Grid("at least one integration axis is required".into()));
        }
        if n == 0 {
            return Err(invalid("slice count must be at least 1"));
        }
        let eps = tau / n as f64;
        // |ψ| falls as exp(−d²/4s²) for a |ψ|² spread s.
        let half_stds = (2.0 * (1.0 / edge_tol).ln().sqrt()).max(0.5 * MIN_EXTENT_STDS);
        let mut axes = Vec::with_capacity(coords.len());
        for &mu in coords {
            let env = envelope(psi, mu, n, eps, m)?;
            let lo = env.lo - half_stds * env.std;
            let hi = env.hi + half_stds * env.std;
            let k0 = psi.momentum.get(mu);
            let mut h = max_spacing(hi - lo, env, eps, m, k0);
            let mut points = ((hi - lo) / h).ceil() as usize + 1;
            // Rounding the point count up widens the grid, which tightens
            // the spacing bound; settle the two together.
            loop {
                let next = max_spacing((points - 1) as f64 * h, env, eps, m, k0);
                if next >= h {
                    break;
                }
                h = next;
                points = ((hi - lo) / h).ceil() as usize + 1;
            }
            axes.push(GridAxis::centered(mu, 0.5 * (lo + hi), h, points)?);
        }
        Self::new(n, tau, axes)
    }

    /// [`SliceConfig::auto`] with the edge tolerance tied to `ε³`, so that
    /// grid truncation tightens together with the slicing.
    pub fn ladder(n: usize, tau: f64, psi: &GaussianTestFunction, m: f64, coords: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("slice count must be at least 1"));
        }
        ensure_positive("tau", tau)?;
        let eps = tau / n as f64;
        Self::auto(n, tau, psi, m, coords, eps.powi(3).min(1e-3))
    }

    /// Checks extent and resolution of every axis against the free
    /// evolution of `psi`.
    pub fn validate(&self, psi: &GaussianTestFunction, m: f64) -> Result<()> {
        let eps = self.eps();
        for a in &self.axes {
            let env = envelope(psi, a.coord, self.n, eps, m)?;
            let (lo, hi) = (a.origin, a.max());
            let need = 0.5 * MIN_EXTENT_STDS * env.std;
            if lo > env.lo - need || hi < env.hi + need {
                return Err(Error::Grid(format!(
                    "axis {} spans [{lo}, {hi}] but the slices need [{}, {}]",
                    a.coord,
                    env.lo - need,
                    env.hi + need
                )));
            }
            let hmax = max_spacing(hi - lo, env, eps, m, psi.momentum.get(a.coord));
            if a.spacing > hmax {
                return Err(Error::Grid(format!("axis {} spacing {} exceeds the resolvable {hmax} at ε = {eps}", a.coord, a.spacing)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Envelope {
    lo: f64,
    hi: f64,
    std: f64,
    spectral_std: f64,
}

/// Range of slice centroids and the widest spread along axis `mu`.
fn envelope(psi: &GaussianTestFunction, mu: usize, n: usize, eps: f64, m: f64) -> Result<Envelope> {
    let mut env = Envelope { lo: f64::INFINITY, hi: f64::NEG_INFINITY, std: 0.0, spectral_std: 0.0 };
    for j in 0..=n {
        let g = psi.evolve(j as f64 * eps, m)?;
        let c = g.mean(mu);
        env.lo = env.lo.min(c);
        env.hi = env.hi.max(c);
        env.std = env.std.max(g.variance(mu).sqrt());
    }
    // |ψ̂|² has variance 1/(2 Re Σ), which free evolution conserves.
    env.spectral_std = (0.5 / psi.dispersion(mu).re).sqrt();
    Ok(env)
}

/// Largest spacing that keeps the quadrature aliases of the kernel clear of
/// the grid and samples the packet's own oscillation.
///
/// Summing the kernel on a lattice of step `h` adds copies of the packet
/// boosted by `2π/h`, which the slice kernel displaces by `2πε/(mh)`.
fn max_spacing(extent: f64, env: Envelope, eps: f64, m: f64, k0: f64) -> f64 {
    let alias = 2.0 * PI * eps / (m * (extent + ALIAS_CLEARANCE_STDS * env.std));
    let band = PI / (k0.abs() + ALIAS_CLEARANCE_STDS * env.spectral_std);
    alias.min(band)
}

/// Propagates `psi` through `cfg.n` slices of the discrete path integral.
///
/// The result lives on `cfg.axes`; coordinates without an axis are held at
/// zero and their factors of `psi` are dropped.
pub fn propagate_sliced(psi: &GaussianTestFunction, cfg: &SliceConfig, lag: &DiscreteLagrangian) -> Result<GridWaveFunction> {
    lag.validate()?;
    for mu in 0..4 {
        if !(psi.dispersion(mu).re > 0.0) {
            return Err(invalid("wave function is not square integrable"));
        }
    }
    cfg.validate(psi, lag.m)?;
    let mut g = psi.sample(cfg.axes.clone())?;
    let eps = cfg.eps();
    for _ in 0..cfg.n {
        g = if lag.is_free() { free_slice(&g, lag, eps) } else { general_slice(&g, lag, eps) };
    }
    g.tau = psi.tau + cfg.tau;
    g.rep = Representation::Block;
    Ok(g)
}

fn axis_weight(a: &GridAxis, k: usize) -> f64 {
    if k == 0 || k + 1 == a.n {
        0.5 * a.spacing
    } else {
        a.spacing
    }
}

/// One free slice. The free action separates by axis, so each axis is a
/// one-dimensional sum along grid lines.
fn free_slice(g: &GridWaveFunction, lag: &DiscreteLagrangian, eps: f64) -> GridWaveFunction {
    let m = lag.m;
    let mut out = g.clone();
    for pos in 0..out.axes.len() {
        let a = out.axes[pos];
        let (sign, norm) = if a.coord == 0 { (-1.0, time_factor(eps, m)) } else { (1.0, space_factor(eps, m)) };
        let n = a.n;
        let table: Vec<C64> = (0..n)
            .map(|d| {
                let dx = d as f64 * a.spacing;
                C64::from_polar(1.0, sign * 0.5 * m * dx * dx / eps)
            })
            .collect();
        let weights: Vec<f64> = (0..n).map(|k| axis_weight(&a, k)).collect();
        out.for_each_line(pos, |_, line| {
            let src: Vec<C64> = line.iter().zip(&weights).map(|(v, w)| v * *w).collect();
            for (j, v) in line.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (k, s) in src.iter().enumerate() {
                    acc += table[j.abs_diff(k)] * s;
                }
                *v = norm * acc;
            }
        });
    }
    if lag.mass_term {
        let phase = C64::from_polar(1.0, -0.5 * m * eps);
        for v in &mut out.data {
            *v *= phase;
        }
    }
    out
}

/// One slice with fields: full sum over all pairs of lattice points.
fn general_slice(g: &GridWaveFunction, lag: &DiscreteLagrangian, eps: f64) -> GridWaveFunction {
    let m = lag.m;
    let norm: C64 = g.axes.iter().map(|a| if a.coord == 0 { time_factor(eps, m) } else { space_factor(eps, m) }).product();
    let shape = g.shape();
    let weights: Vec<f64> = (0..g.len())
        .map(|i| {
            let mut rem = i;
            let mut w = 1.0;
            for pos in (0..shape.len()).rev() {
                let k = rem % shape[pos];
                rem /= shape[pos];
                w *= axis_weight(&g.axes[pos], k);
            }
            w
        })
        .collect();
    let points: Vec<FourVector> = (0..g.len()).map(|i| g.point(i)).collect();
    let src: Vec<C64> = g.data.iter().zip(&weights).map(|(v, w)| v * *w).collect();
    let data = par::map_indexed(g.len(), |j| {
        let xj = points[j];
        let mut acc = C64::new(0.0, 0.0);
        for (k, s) in src.iter().enumerate() {
            if s.re == 0.0 && s.im == 0.0 {
                continue;
            }
            acc += C64::from_polar(1.0, slice_action_unchecked(points[k], xj, lag, eps)) * s;
        }
        norm * acc
    });
    let mut out = g.clone();
    out.data = data;
    out
}
