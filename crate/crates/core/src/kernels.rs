//! Closed-form propagators and the semiclassical construction.
//!
//! Conventions: time parts carry `√(im/2πτ) e^{−imΔt²/2τ}`, space parts
//! `√(m/2πiτ) e^{imΔx²/2τ}`, and the mass term contributes `e^{−imτ/2}`.
//!
//! The electric kernel is written for a constant field along `x` in the gauge
//! `eΦ = −(mα/2)x`, `eA_x = −(mα/2)t`, and solves the Schrödinger equation
//! without the mass term. The magnetic kernel uses `A⃗ = (B/2)(−y, x, 0)`.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::foundation::{complex_sqrt, FourMomentum, FourVector, C64, I};

/// Which closed form an [`AnalyticKernel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    FreeTime,
    FreeSpace,
    Free4d,
    ConstantPotential,
    Electric,
    Magnetic,
    MomentumFree,
    RelativeTimeFree,
    Hybrid,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "free-time" => KernelKind::FreeTime,
            "free-space" => KernelKind::FreeSpace,
            "free" | "free-4d" => KernelKind::Free4d,
            "constant-potential" => KernelKind::ConstantPotential,
            "electric" => KernelKind::Electric,
            "magnetic" => KernelKind::Magnetic,
            "momentum" | "momentum-free" => KernelKind::MomentumFree,
            "relative" | "relative-time-free" => KernelKind::RelativeTimeFree,
            "hybrid" => KernelKind::Hybrid,
            _ => return Err(invalid(format!("unknown kernel kind '{s}'"))),
        })
    }
}

fn check(tau: f64, m: f64) -> Result<()> {
    ensure_positive("mass", m)?;
    ensure_finite("tau", tau)?;
    if tau <= 0.0 {
        return Err(invalid(format!("kernel needs τ > 0, got {tau}; use the delta limit for τ = 0")));
    }
    Ok(())
}

/// `√(im/2πτ) exp(−im(t″−t′)²/2τ − imτ/2)`.
pub fn free_time_kernel(tau: f64, m: f64, t1: f64, t0: f64) -> Result<C64> {
    check(tau, m)?;
    let dt = t1 - t0;
    Ok(complex_sqrt(I * m / (2.0 * PI * tau)) * C64::from_polar(1.0, -m * dt * dt / (2.0 * tau) - m * tau / 2.0))
}

/// One space axis: `√(m/2πiτ) exp(im(x″−x′)²/2τ)`.
pub fn free_space_kernel_1d(tau: f64, m: f64, x1: f64, x0: f64) -> Result<C64> {
    check(tau, m)?;
    let dx = x1 - x0;
    Ok(complex_sqrt(m / (2.0 * PI * I * tau)) * C64::from_polar(1.0, m * dx * dx / (2.0 * tau)))
}

/// Three space axes.
pub fn free_space_kernel(tau: f64, m: f64, x1: [f64; 3], x0: [f64; 3]) -> Result<C64> {
    let mut k = C64::new(1.0, 0.0);
    for i in 0..3 {
        k *= free_space_kernel_1d(tau, m, x1[i], x0[i])?;
    }
    Ok(k)
}

/// `−im²/(4π²τ²) exp(i(m/2τ)(−Δt² + Δx⃗²) − imτ/2)`.
pub fn free_kernel_4d(tau: f64, m: f64, x1: FourVector, x0: FourVector) -> Result<C64> {
    check(tau, m)?;
    let d = x1 - x0;
    let s2 = -d.t * d.t + d.x * d.x + d.y * d.y + d.z * d.z;
    let pref = -I * m * m / (4.0 * PI * PI * tau * tau);
    Ok(pref * C64::from_polar(1.0, m * s2 / (2.0 * tau) - m * tau / 2.0))
}

/// Phase multiplying `δ⁴(p″ − p′)` in the energy/momentum representation,
/// `exp(i(p² − m²)τ/2m)` with `p² = E² − p⃗²`.
pub fn momentum_kernel_phase(p: FourMomentum, m: f64, tau: f64) -> Result<C64> {
    ensure_positive("mass", m)?;
    ensure_finite("tau", tau)?;
    Ok(C64::from_polar(1.0, (p.square() - m * m) * tau / (2.0 * m)))
}

/// Time part in relative time: `√(im/2πτ) exp(−im(t″_τ − t′ + τ)²/2τ − imτ/2)`.
pub fn relative_time_kernel(tau: f64, m: f64, t_rel1: f64, t0: f64) -> Result<C64> {
    free_time_kernel(tau, m, t_rel1 + tau, t0)
}

/// Hybrid `(t, p⃗)`: time kernel times `exp(−ip⃗²τ/2m)`, multiplying `δ³(p⃗″ − p⃗′)`.
pub fn hybrid_kernel(tau: f64, m: f64, t1: f64, t0: f64, p: [f64; 3]) -> Result<C64> {
    let p2 = p.iter().map(|v| v * v).sum::<f64>();
    Ok(free_time_kernel(tau, m, t1, t0)? * C64::from_polar(1.0, -p2 * tau / (2.0 * m)))
}

/// Free kernel `exp(−ieΔtΦ + ieΔx⃗·A⃗)` for constant potentials.
pub fn constant_potential_kernel(charge: f64, phi: f64, a: [f64; 3], tau: f64, m: f64, x1: FourVector, x0: FourVector) -> Result<C64> {
    let d = x1 - x0;
    let phase = -charge * d.t * phi + charge * (d.x * a[0] + d.y * a[1] + d.z * a[2]);
    Ok(free_kernel_4d(tau, m, x1, x0)? * C64::from_polar(1.0, phase))
}

/// Electric kernel for complex arguments, used for analytic continuation.
pub fn electric_kernel_complex(alpha: C64, tau: f64, m: f64, t0: C64, x0: C64, t1: C64, x1: C64) -> C64 {
    let (dt, dx) = (t1 - t0, x1 - x0);
    if alpha == C64::new(0.0, 0.0) {
        let s = m / (2.0 * tau) * (-dt * dt + dx * dx);
        return m / (2.0 * PI * tau) * (I * s).exp();
    }
    let h = alpha * tau / 2.0;
    let coth = h.cosh() / h.sinh();
    let s = (m / 2.0) * ((alpha / 2.0) * coth * (-dt * dt + dx * dx) + alpha * (x0 * t1 - x1 * t0));
    m * alpha / (4.0 * PI * h.sinh()) * (I * s).exp()
}

/// `S = (m/2)[(α/2)coth(ατ/2)(−Δt² + Δx²) + α(x′t″ − x″t′)]`.
pub fn electric_action(alpha: f64, tau: f64, m: f64, t0: f64, x0: f64, t1: f64, x1: f64) -> f64 {
    let (dt, dx) = (t1 - t0, x1 - x0);
    let c = if alpha == 0.0 { 1.0 / tau } else { (alpha / 2.0) / (alpha * tau / 2.0).tanh() };
    (m / 2.0) * (c * (-dt * dt + dx * dx) + alpha * (x0 * t1 - x1 * t0))
}

/// `mα/(4π sinh(ατ/2)) e^{iS}` with the action above; `α = eE/m`.
pub fn electric_kernel(alpha: f64, tau: f64, m: f64, t0: f64, x0: f64, t1: f64, x1: f64) -> Result<C64> {
    check(tau, m)?;
    ensure_finite("alpha", alpha)?;
    let r = |v: f64| C64::new(v, 0.0);
    Ok(electric_kernel_complex(r(alpha), tau, m, r(t0), r(x0), r(t1), r(x1)))
}

/// Phase `exp(iΔS)`, `ΔS = (mα/2)(d_x(t″−t′) − d_t(x″−x′))`, picked up when both
/// endpoints of the electric kernel are shifted by `(d_t, d_x)`.
pub fn electric_shift_phase(alpha: f64, m: f64, shift: (f64, f64), t0: f64, x0: f64, t1: f64, x1: f64) -> C64 {
    let (d_t, d_x) = shift;
    C64::from_polar(1.0, m * alpha / 2.0 * (d_x * (t1 - t0) - d_t * (x1 - x0)))
}

const CAUSTIC_TOL: f64 = 1e-9;

/// `|sin(ωτ/2)| < 1e-9` away from `ωτ = 0`.
fn near_caustic(omega: f64, tau: f64) -> bool {
    let half = omega * tau / 2.0;
    (half / PI).round() != 0.0 && half.sin().abs() < CAUSTIC_TOL
}

/// `S = (m/2)[(ω/2)cot(ωτ/2)(Δx² + Δy²) + ω(x′y″ − x″y′)]`.
pub fn magnetic_action(omega: f64, tau: f64, m: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<f64> {
    let (dx, dy) = (x1 - x0, y1 - y0);
    let c = if omega == 0.0 {
        1.0 / tau
    } else {
        if near_caustic(omega, tau) {
            return Err(Error::Singular(format!("magnetic caustic at ωτ/2 = {}", omega * tau / 2.0)));
        }
        (omega / 2.0) * (omega * tau / 2.0).cos() / (omega * tau / 2.0).sin()
    };
    Ok((m / 2.0) * (c * (dx * dx + dy * dy) + omega * (x0 * y1 - x1 * y0)))
}

/// `−(1/4π) mω/sin(ωτ/2) e^{iS}` with `ω = eB/m`.
///
/// At `ω = 0` this is `−(m/2πτ) e^{iS}`. The semiclassical construction
/// gives the same kernel times `i`.
pub fn magnetic_kernel(omega: f64, tau: f64, m: f64, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<C64> {
    check(tau, m)?;
    ensure_finite("omega", omega)?;
    let s = magnetic_action(omega, tau, m, x0, y0, x1, y1)?;
    let pref = if omega == 0.0 { -m / (2.0 * PI * tau) } else { -(m * omega) / (4.0 * PI * (omega * tau / 2.0).sin()) };
    Ok(pref * C64::from_polar(1.0, s))
}

/// Descriptor of a closed-form propagator over a lab-time interval `tau`.
///
/// `eval` reads endpoint components according to `kind`: `FreeTime` and
/// `RelativeTimeFree` use `t`; `FreeSpace` uses `x⃗`; `Electric` uses `(t, x)`;
/// `Magnetic` uses `(x, y)`; `MomentumFree` reads the final point as `(E, p⃗)`
/// and returns the phase multiplying the delta function; `Hybrid` reads
/// `(t, p⃗)` from both endpoints and uses the final momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticKernel {
    pub kind: KernelKind,
    pub m: f64,
    pub tau: f64,
    pub charge: f64,
    pub phi: f64,
    pub a: [f64; 3],
    pub alpha: f64,
    pub omega: f64,
}

impl AnalyticKernel {
    pub fn new(kind: KernelKind, tau: f64, m: f64) -> Self {
        Self { kind, m, tau, charge: 1.0, phi: 0.0, a: [0.0; 3], alpha: 0.0, omega: 0.0 }
    }

    pub fn electric(alpha: f64, tau: f64, m: f64) -> Self {
        Self { alpha, ..Self::new(KernelKind::Electric, tau, m) }
    }

    pub fn magnetic(omega: f64, tau: f64, m: f64) -> Self {
        Self { omega, ..Self::new(KernelKind::Magnetic, tau, m) }
    }

    pub fn constant_potential(charge: f64, phi: f64, a: [f64; 3], tau: f64, m: f64) -> Self {
        Self { charge, phi, a, ..Self::new(KernelKind::ConstantPotential, tau, m) }
    }

    pub fn eval(&self, x1: FourVector, x0: FourVector) -> Result<C64> {
        let (tau, m) = (self.tau, self.m);
        match self.kind {
            KernelKind::FreeTime => free_time_kernel(tau, m, x1.t, x0.t),
            KernelKind::FreeSpace => free_space_kernel(tau, m, x1.space(), x0.space()),
            KernelKind::Free4d => free_kernel_4d(tau, m, x1, x0),
            KernelKind::ConstantPotential => constant_potential_kernel(self.charge, self.phi, self.a, tau, m, x1, x0),
            KernelKind::Electric => electric_kernel(self.alpha, tau, m, x0.t, x0.x, x1.t, x1.x),
            KernelKind::Magnetic => magnetic_kernel(self.omega, tau, m, x0.x, x0.y, x1.x, x1.y),
            KernelKind::MomentumFree => momentum_kernel_phase(FourMomentum::new(x1.t, x1.x, x1.y, x1.z), m, tau),
            KernelKind::RelativeTimeFree => relative_time_kernel(tau, m, x1.t, x0.t),
            KernelKind::Hybrid => hybrid_kernel(tau, m, x1.t, x0.t, x1.space()),
        }
    }

    /// Applies a one-coordinate kernel to samples `input` on
    /// `in_origin + k·in_step`, returning values on the output grid.
    ///
    /// `kernel(x″, x′)` is integrated by the rectangle rule. `tau = 0` is the
    /// delta limit and interpolates nothing: the input must then share the
    /// output grid and is returned unchanged.
    pub fn apply_line<F>(
        kernel: F,
        tau: f64,
        input: &[C64],
        in_origin: f64,
        in_step: f64,
        out_origin: f64,
        out_step: f64,
        n_out: usize,
    ) -> Result<Vec<C64>>
    where
        F: Fn(f64, f64) -> Result<C64> + Sync + Send,
    {
        if tau == 0.0 {
            if n_out != input.len() || out_origin != in_origin || out_step != in_step {
                return Err(Error::Grid("delta limit needs identical input and output grids".into()));
            }
            return Ok(input.to_vec());
        }
        let rows = crate::par::map_indexed(n_out, |j| {
            let x1 = out_origin + out_step * j as f64;
            let mut acc = C64::new(0.0, 0.0);
            for (k, v) in input.iter().enumerate() {
                acc += kernel(x1, in_origin + in_step * k as f64)? * v;
            }
            Ok(acc * in_step)
        });
        rows.into_iter().collect()
    }
}

/// Field for which a classical path is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    /// Straight line in every coordinate.
    Free,
    /// Coordinates `(t, x)` with `ẗ = αẋ`, `ẍ = αṫ`.
    Electric { alpha: f64 },
    /// Coordinates `(x, y)` with `ẍ = ωẏ`, `ÿ = −ωẋ`.
    Magnetic { omega: f64 },
}

/// Classical path between two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrajectory {
    pub field: FieldKind,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub tau: f64,
    /// Constants of motion: `(t₀, x₀)` for electric, `(x₀, y₀)` for magnetic,
    /// the midpoint for free paths.
    pub constants: [f64; 2],
    /// Samples `(τ − τ′, [c₀, c₁])`.
    pub samples: Vec<(f64, [f64; 2])>,
}

impl ClassicalTrajectory {
    fn sampled(field: FieldKind, start: [f64; 2], end: [f64; 2], tau: f64, n: usize, constants: [f64; 2]) -> Self {
        let samples = (0..n)
            .map(|k| {
                let s = tau * k as f64 / (n - 1) as f64;
                (s, position(field, start, end, tau, s))
            })
            .collect();
        Self { field, start, end, tau, constants, samples }
    }

    /// Position at `s = τ − τ′`.
    pub fn at(&self, s: f64) -> [f64; 2] {
        position(self.field, self.start, self.end, self.tau, s)
    }
}

fn ratio_expm1(a: f64, s: f64, tau: f64) -> f64 {
    if a == 0.0 {
        s / tau
    } else {
        (a * s).exp_m1() / (a * tau).exp_m1()
    }
}

fn position(field: FieldKind, p0: [f64; 2], p1: [f64; 2], tau: f64, s: f64) -> [f64; 2] {
    match field {
        FieldKind::Free => {
            let r = s / tau;
            [p0[0] + (p1[0] - p0[0]) * r, p0[1] + (p1[1] - p0[1]) * r]
        }
        FieldKind::Electric { alpha } => {
            let (u0, u1) = (p0[0] + p0[1], p1[0] + p1[1]);
            let (v0, v1) = (p0[0] - p0[1], p1[0] - p1[1]);
            let u = u0 + (u1 - u0) * ratio_expm1(alpha, s, tau);
            let v = v0 + (v1 - v0) * ratio_expm1(-alpha, s, tau);
            [(u + v) / 2.0, (u - v) / 2.0]
        }
        FieldKind::Magnetic { omega } => {
            let z0 = C64::new(p0[0], p0[1]);
            let z1 = C64::new(p1[0], p1[1]);
            let r = if omega == 0.0 { C64::new(s / tau, 0.0) } else { ((-I * omega * s).exp() - 1.0) / ((-I * omega * tau).exp() - 1.0) };
            let z = z0 + (z1 - z0) * r;
            [z.re, z.im]
        }
    }
}

/// Classical trajectory from `start` at `τ′` to `end` at `τ′ + tau`, sampled
/// at `n ≥ 2` equally spaced lab times.
pub fn classical_trajectory(field: FieldKind, start: [f64; 2], end: [f64; 2], tau: f64, n: usize) -> Result<ClassicalTrajectory> {
    ensure_positive("tau", tau)?;
    if !start.iter().chain(&end).all(|v| v.is_finite()) {
        return Err(invalid("endpoints must be finite"));
    }
    if n < 2 {
        return Err(invalid("a trajectory needs at least two samples"));
    }
    let constants = match field {
        FieldKind::Free => [(start[0] + end[0]) / 2.0, (start[1] + end[1]) / 2.0],
        FieldKind::Electric { alpha } => {
            if alpha == 0.0 {
                // constants of motion diverge as α → 0
                return Ok(ClassicalTrajectory::sampled(field, start, end, tau, n, [f64::NAN, f64::NAN]));
            }
            let coth = 1.0 / (alpha * tau / 2.0).tanh();
            [0.5 * ((end[0] + start[0]) - (end[1] - start[1]) * coth), 0.5 * ((end[1] + start[1]) - (end[0] - start[0]) * coth)]
        }
        FieldKind::Magnetic { omega } => {
            let s = (omega * tau / 2.0).sin();
            if near_caustic(omega, tau) {
                return Err(Error::Singular(format!("magnetic caustic at ωτ/2 = {}", omega * tau / 2.0)));
            }
            if omega == 0.0 {
                [f64::NAN, f64::NAN]
            } else {
                let cot = (omega * tau / 2.0).cos() / s;
                [0.5 * ((end[0] + start[0]) + (end[1] - start[1]) * cot), 0.5 * ((end[1] + start[1]) - (end[0] - start[0]) * cot)]
            }
        }
    };
    Ok(ClassicalTrajectory::sampled(field, start, end, tau, n, constants))
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// `det(−∂²S/∂x″_i ∂x′_j)` by central mixed differences.
pub fn action_determinant<S>(action: &S, x1: &[f64], x0: &[f64]) -> Result<f64>
where
    S: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let d = x1.len();
    if d == 0 || x0.len() != d {
        return Err(invalid("endpoints must have equal nonzero dimension"));
    }
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let hi = 1e-3 * x1[i].abs().max(1.0);
            let hj = 1e-3 * x0[j].abs().max(1.0);
            let eval = |si: f64, sj: f64| -> Result<f64> {
                let mut a = x1.to_vec();
                let mut b = x0.to_vec();
                a[i] += si * hi;
                b[j] += sj * hj;
                action(&a, &b)
            };
            let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?) / (4.0 * hi * hj);
            m[i][j] = -v;
        }
    }
    Ok(determinant(m))
}

/// `(2πi)^{−D/2} √det(−∂²S/∂x″∂x′) e^{iS}`.
///
/// `det` may be supplied in closed form; otherwise it is computed by finite
/// differences of `action`.
pub fn semiclassical_kernel<S>(action: &S, x1: &[f64], x0: &[f64], det: Option<f64>) -> Result<C64>
where
    S: Fn(&[f64], &[f64]) -> Result<f64>,
{
    let d = x1.len() as f64;
    let det = match det {
        Some(v) => v,
        None => action_determinant(action, x1, x0)?,
    };
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::Singular(format!("fluctuation determinant {det}")));
    }
    let base = complex_sqrt(2.0 * PI * I);
    let pref = complex_sqrt(C64::new(det, 0.0)) / base.powf(d);
    Ok(pref * C64::from_polar(1.0, action(x1, x0)?))
}

/// Free action `(m/2τ)(−Δt² + Δx⃗²) − mτ/2` over the first `x.len()` coordinates
/// of `(t, x, y, z)`.
pub fn free_action(tau: f64, m: f64, x1: &[f64], x0: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, (a, b)) in x1.iter().zip(x0).enumerate() {
        let d = a - b;
        s += if i == 0 { -d * d } else { d * d };
    }
    m * s / (2.0 * tau) - m * tau / 2.0
}
