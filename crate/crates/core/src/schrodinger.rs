//! Grid evolution of the four dimensional Schrödinger equation in
//! laboratory time,
//!
//! ```text
//! i dψ/dτ = −(1/2m)((p − eA)² − m²)ψ + e𝓐_τ ψ,   p_μ = i∂_μ,
//! ```
//!
//! with gauge transformations, the time gauge, the cross potentials that
//! couple relative time to space, and operator expectation dynamics.
//!
//! Derivatives use fourth order central stencils. Cross terms are written
//! symmetrically, `e(pA + Ap)/2m` and `e(EΦ + ΦE)/2m`, which keeps every
//! one-axis operator Hermitian. Evolution splits `H` into one operator per
//! axis plus a diagonal part and advances each factor with the implicit
//! midpoint rule (a Cayley transform), so a step is unitary up to solver
//! round-off.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::foundation::{FourVector, C64, I};
use crate::grid::GridWaveFunction;
use crate::par;
use crate::wavepackets::Representation;

/// Scalar function of laboratory time and a spacetime point.
pub type ScalarField = Arc<dyn Fn(f64, FourVector) -> f64 + Send + Sync>;
/// Three-vector function of laboratory time and a spacetime point.
pub type VectorField = Arc<dyn Fn(f64, FourVector) -> [f64; 3] + Send + Sync>;

/// Potentials, charge and mass.
///
/// `phi` and `a` are `Φ(t, x⃗)` and `A⃗(t, x⃗)`; they may also depend on
/// laboratory time after a τ-dependent gauge transformation. `lab` is the
/// scalar gauge field `𝓐_τ`, zero unless a gauge transformation put it there.
#[derive(Clone)]
pub struct FieldConfig {
    pub m: f64,
    pub charge: f64,
    pub phi: Option<ScalarField>,
    pub a: Option<VectorField>,
    pub lab: Option<ScalarField>,
}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldConfig")
            .field("m", &self.m)
            .field("charge", &self.charge)
            .field("phi", &self.phi.is_some())
            .field("a", &self.a.is_some())
            .field("lab", &self.lab.is_some())
            .finish()
    }
}

const FD_STEP: f64 = 1e-3;

/// Fourth order central derivative of a scalar function.
fn deriv(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FD_STEP * x.abs().max(1.0);
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

impl FieldConfig {
    pub fn free(m: f64) -> Self {
        Self { m, charge: 0.0, phi: None, a: None, lab: None }
    }

    /// Static scalar potential `Φ(t, x⃗)`.
    pub fn with_scalar(self, charge: f64, phi: impl Fn(FourVector) -> f64 + Send + Sync + 'static) -> Self {
        self.with_scalar_lab(charge, move |_, x| phi(x))
    }

    pub fn with_scalar_lab(mut self, charge: f64, phi: impl Fn(f64, FourVector) -> f64 + Send + Sync + 'static) -> Self {
        self.charge = charge;
        self.phi = Some(Arc::new(phi));
        self
    }

    /// Vector potential `A⃗(t, x⃗)`.
    pub fn with_vector(self, charge: f64, a: impl Fn(FourVector) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.with_vector_lab(charge, move |_, x| a(x))
    }

    pub fn with_vector_lab(mut self, charge: f64, a: impl Fn(f64, FourVector) -> [f64; 3] + Send + Sync + 'static) -> Self {
        self.charge = charge;
        self.a = Some(Arc::new(a));
        self
    }

    pub fn is_free(&self) -> bool {
        self.phi.is_none() && self.a.is_none() && self.lab.is_none()
    }

    pub fn phi_at(&self, tau: f64, x: FourVector) -> f64 {
        self.phi.as_ref().map_or(0.0, |f| f(tau, x))
    }

    pub fn a_at(&self, tau: f64, x: FourVector) -> [f64; 3] {
        self.a.as_ref().map_or([0.0; 3], |f| f(tau, x))
    }

    pub fn lab_at(&self, tau: f64, x: FourVector) -> f64 {
        self.lab.as_ref().map_or(0.0, |f| f(tau, x))
    }

    /// Covariant potential `A_μ = (Φ, −A⃗)`.
    fn a_lower(&self, tau: f64, x: FourVector) -> [f64; 4] {
        let a = self.a_at(tau, x);
        [self.phi_at(tau, x), -a[0], -a[1], -a[2]]
    }

    /// `F_μν = ∂_μA_ν − ∂_νA_μ`.
    pub fn field_strength(&self, tau: f64, x: FourVector) -> [[f64; 4]; 4] {
        let mut d = [[0.0; 4]; 4];
        for (mu, row) in d.iter_mut().enumerate() {
            for (nu, v) in row.iter_mut().enumerate() {
                *v = deriv(|s| self.a_lower(tau, x.with(mu, s))[nu], x.get(mu));
            }
        }
        let mut f = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                f[mu][nu] = d[mu][nu] - d[nu][mu];
            }
        }
        f
    }

    /// `∂_μA^μ = ∂_tΦ + ∇·A⃗` at one point.
    pub fn lorentz_divergence(&self, tau: f64, x: FourVector) -> f64 {
        let mut s = deriv(|t| self.phi_at(tau, x.with(0, t)), x.t);
        for k in 0..3 {
            s += deriv(|c| self.a_at(tau, x.with(k + 1, c))[k], x.get(k + 1));
        }
        s
    }

    /// Largest `|∂_μA^μ|` over the lattice of `g`.
    pub fn lorentz_violation(&self, g: &GridWaveFunction, tau: f64) -> f64 {
        if self.phi.is_none() && self.a.is_none() {
            return 0.0;
        }
        let shape = g.clone_shape();
        par::map_indexed(g.len(), |i| self.lorentz_divergence(tau, shape.point(i)).abs()).into_iter().fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("mass", self.m)?;
        ensure_finite("charge", self.charge)
    }
}

/// How the stencils treat the first and last two points of a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// One-sided fourth order stencils; accurate for fields that do not
    /// vanish at the edge.
    OneSided,
    /// Values beyond the grid are zero; keeps the discrete operator
    /// Hermitian, which evolution needs for exact unitarity.
    Dirichlet,
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D1_EDGE: [[f64; 6]; 2] = [[-25.0, 48.0, -36.0, 16.0, -3.0, 0.0], [-3.0, -10.0, 18.0, -6.0, 1.0, 0.0]];
const D2_EDGE: [[f64; 6]; 2] = [[45.0, -154.0, 214.0, -156.0, 61.0, -10.0], [10.0, -15.0, -4.0, 14.0, -6.0, 1.0]];

/// First and second derivative weights of row `j`: `(first column, d1, d2)`,
/// already divided by `12h` and `12h²`.
fn stencil_row(j: usize, n: usize, h: f64, boundary: Boundary) -> (usize, [f64; 6], [f64; 6]) {
    let (s1, s2) = (1.0 / (12.0 * h), 1.0 / (12.0 * h * h));
    let mut d1 = [0.0; 6];
    let mut d2 = [0.0; 6];
    let interior = j >= 2 && j + 2 < n;
    if interior || boundary == Boundary::Dirichlet || n < 6 {
        let start = j.saturating_sub(2);
        for (off, (a, b)) in D1.iter().zip(&D2).enumerate() {
            let k = j as isize + off as isize - 2;
            if k >= 0 && (k as usize) < n {
                d1[k as usize - start] = a * s1;
                d2[k as usize - start] = b * s2;
            }
        }
        return (start, d1, d2);
    }
    if j < 2 {
        for c in 0..6 {
            d1[c] = D1_EDGE[j][c] * s1;
            d2[c] = D2_EDGE[j][c] * s2;
        }
        return (0, d1, d2);
    }
    // Mirror image of the left edge.
    let r = n - 1 - j;
    for c in 0..6 {
        d1[5 - c] = -D1_EDGE[r][c] * s1;
        d2[5 - c] = D2_EDGE[r][c] * s2;
    }
    (n - 6, d1, d2)
}

/// One row of an axis operator: `(first column, six weights)`.
type Row = (usize, [C64; 6]);

/// Rows of the one-axis operator along a line with potential values `v`:
///
/// ```text
/// H = (1/2m)[σD² + ie(DV + VD) − σe²V²] + i·rel·D
/// ```
///
/// with `σ = +1` for time and `−1` for space. `rel` adds the `i∂_t` drift
/// of the relative-time equation.
fn axis_rows(v: &[f64], h: f64, time: bool, rel: bool, e: f64, m: f64, boundary: Boundary) -> Vec<Row> {
    let n = v.len();
    let sigma = if time { 1.0 } else { -1.0 };
    let inv = 1.0 / (2.0 * m);
    (0..n)
        .map(|j| {
            let (start, d1, d2) = stencil_row(j, n, h, boundary);
            let mut w = [C64::new(0.0, 0.0); 6];
            for c in 0..6 {
                let k = start + c;
                if k >= n {
                    break;
                }
                let mut z = C64::new(sigma * d2[c] * inv, e * d1[c] * (v[k] + v[j]) * inv);
                if rel {
                    z += I * d1[c];
                }
                if k == j {
                    z -= sigma * e * e * v[j] * v[j] * inv;
                }
                w[c] = z;
            }
            (start, w)
        })
        .collect()
}

fn apply_rows(rows: &[Row], x: &[C64], out: &mut [C64]) {
    for (j, (start, w)) in rows.iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, wc) in w.iter().enumerate() {
            if let Some(v) = x.get(start + c) {
                acc += wc * v;
            }
        }
        out[j] = acc;
    }
}

/// Solves `(I + i·s·H)y = (I − i·s·H)x` in place for a pentadiagonal `H`
/// (Dirichlet rows). Leading minors of `I + iK` with `K` Hermitian never
/// vanish, so no pivoting is needed.
fn cayley_solve(rows: &[Row], s: f64, x: &mut [C64]) {
    let n = x.len();
    // Band storage: b[j][d] is entry (j, j + d − 2).
    let mut b = vec![[C64::new(0.0, 0.0); 5]; n];
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for (j, (start, w)) in rows.iter().enumerate() {
        let mut hx = C64::new(0.0, 0.0);
        for (c, wc) in w.iter().enumerate() {
            let k = start + c;
            if k >= n || k.abs_diff(j) > 2 {
                continue;
            }
            hx += wc * x[k];
            let d = k as isize - j as isize + 2;
            if (0..5).contains(&d) {
                b[j][d as usize] = I * s * wc;
            }
        }
        b[j][2] += 1.0;
        rhs[j] = x[j] - I * s * hx;
    }
    for j in 0..n {
        let piv = b[j][2];
        for r in 1..=2 {
            let i = j + r;
            if i >= n {
                break;
            }
            let f = b[i][2 - r] / piv;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            let row = b[j];
            for c in 0..=2 {
                b[i][2 - r + c] -= f * row[2 + c];
            }
            let t = rhs[j];
            rhs[i] -= f * t;
        }
    }
    for j in (0..n).rev() {
        let mut acc = rhs[j];
        for c in 1..=2 {
            if j + c < n {
                acc -= b[j][2 + c] * x[j + c];
            }
        }
        x[j] = acc / b[j][2];
    }
}

/// Spacetime points along line `line` of axis `pos`.
fn line_points(g: &GridWaveFunction, pos: usize, line: usize) -> Vec<FourVector> {
    let o = g.line_origin(pos, line);
    let a = g.axes[pos];
    (0..a.n).map(|k| o.with(a.coord, a.value(k))).collect()
}

/// Quantum time at which fields are sampled for a grid time value.
fn field_time(rep: Representation, tau: f64, t: f64) -> f64 {
    if rep == Representation::RelativeTime {
        tau + t
    } else {
        t
    }
}

fn check_rep(g: &GridWaveFunction) -> Result<bool> {
    match g.rep {
        Representation::Block => Ok(false),
        Representation::RelativeTime => Ok(true),
        r => Err(Error::Unsupported(format!("grid operators need block or relative time, got {}", r.name()))),
    }
}

fn potential_along(f: &FieldConfig, coord: usize, tau: f64, rep: Representation, pts: &[FourVector]) -> Vec<f64> {
    pts.iter()
        .map(|p| {
            let q = p.with(0, field_time(rep, tau, p.t));
            if coord == 0 {
                f.phi_at(tau, q)
            } else {
                f.a_at(tau, q)[coord - 1]
            }
        })
        .collect()
}

fn has_potential(f: &FieldConfig, coord: usize) -> bool {
    if coord == 0 {
        f.phi.is_some()
    } else {
        f.a.is_some()
    }
}

/// Rejects grids whose spacing cannot resolve the central momentum
/// `|⟨−i∂⟩|` of the state along some axis (requires `|k|h ≤ π/2`).
fn central_momentum_check(g: &GridWaveFunction) -> Result<()> {
    for pos in 0..g.axes.len() {
        let a = g.axes[pos];
        let s = g.stride(pos);
        let n = a.n;
        // Mean phase advance per grid step; unlike a difference quotient it
        // does not alias until the advance reaches π.
        let mut acc = C64::new(0.0, 0.0);
        for (i, z) in g.data.iter().enumerate() {
            if (i / s) % n + 1 < n {
                acc += z.conj() * g.data[i + s];
            }
        }
        if acc.norm_sqr() == 0.0 {
            continue;
        }
        let kh = acc.arg().abs();
        if kh > 0.5 * PI {
            return Err(Error::Grid(format!(
                "central momentum {} along coordinate {} is not resolved by spacing {}",
                kh / a.spacing,
                a.coord,
                a.spacing
            )));
        }
    }
    Ok(())
}

/// Rows of the operator for every line of axis `pos`, or one shared set
/// when the axis carries no potential.
enum AxisRows {
    Shared(Vec<Row>),
    PerLine(Vec<Vec<Row>>),
}

impl AxisRows {
    fn get(&self, line: usize) -> &[Row] {
        match self {
            AxisRows::Shared(r) => r,
            AxisRows::PerLine(r) => &r[line],
        }
    }
}

fn build_rows(g: &GridWaveFunction, f: &FieldConfig, tau: f64, pos: usize, boundary: Boundary) -> AxisRows {
    let a = g.axes[pos];
    let time = a.coord == 0;
    let rel = time && g.rep == Representation::RelativeTime;
    if !has_potential(f, a.coord) {
        return AxisRows::Shared(axis_rows(&vec![0.0; a.n], a.spacing, time, rel, f.charge, f.m, boundary));
    }
    let lines = g.len() / a.n;
    let geo = g.geometry();
    AxisRows::PerLine(par::map_indexed(lines, |line| {
        let v = potential_along(f, a.coord, tau, g.rep, &line_points(&geo, pos, line));
        axis_rows(&v, a.spacing, time, rel, f.charge, f.m, boundary)
    }))
}

/// Diagonal part `m/2 + e𝓐_τ` at every lattice point.
fn diagonal(g: &GridWaveFunction, f: &FieldConfig, tau: f64) -> Vec<f64> {
    let shape = g.clone_shape();
    let rep = g.rep;
    par::map_indexed(g.len(), |i| {
        let p = shape.point(i);
        0.5 * f.m + f.charge * f.lab_at(tau, p.with(0, field_time(rep, tau, p.t)))
    })
}

fn apply_h(g: &GridWaveFunction, f: &FieldConfig, tau: f64, boundary: Boundary) -> Result<GridWaveFunction> {
    check_rep(g)?;
    let diag = diagonal(g, f, tau);
    let mut total = g.clone();
    for (v, d) in total.data.iter_mut().zip(&diag) {
        *v *= d;
    }
    for pos in 0..g.axes.len() {
        let rows = build_rows(g, f, tau, pos, boundary);
        let mut part = g.clone();
        part.for_each_line(pos, |line, vals| {
            let src = vals.to_vec();
            apply_rows(rows.get(line), &src, vals);
        });
        for (t, p) in total.data.iter_mut().zip(&part.data) {
            *t += p;
        }
    }
    Ok(total)
}

impl GridWaveFunction {
    /// Copy of the lattice geometry without amplitudes.
    fn geometry(&self) -> GridWaveFunction {
        GridWaveFunction { axes: self.axes.clone(), data: Vec::new(), rep: self.rep, tau: self.tau }
    }
}

/// `Hψ` at the laboratory time stored in `psi`, with one-sided stencils at
/// the edges.
pub fn hamiltonian_apply(psi: &GridWaveFunction, f: &FieldConfig) -> Result<GridWaveFunction> {
    f.validate()?;
    central_momentum_check(psi)?;
    apply_h(psi, f, psi.tau, Boundary::OneSided)
}

/// `Hψ` with an explicit boundary treatment.
pub fn hamiltonian_apply_with(psi: &GridWaveFunction, f: &FieldConfig, boundary: Boundary) -> Result<GridWaveFunction> {
    f.validate()?;
    central_momentum_check(psi)?;
    apply_h(psi, f, psi.tau, boundary)
}

/// Gershgorin bound on the spectral radius of the discrete `H` over
/// `[tau, tau + span]`.
pub fn spectral_radius(g: &GridWaveFunction, f: &FieldConfig, tau: f64, span: f64) -> f64 {
    let shape = g.clone_shape();
    let rep = g.rep;
    let samples = [tau, tau + 0.5 * span, tau + span];
    let (mut vmax, mut lab) = ([0.0f64; 4], 0.0f64);
    for &s in &samples {
        let per: Vec<([f64; 4], f64)> = par::map_indexed(g.len(), |i| {
            let p = shape.point(i);
            let q = p.with(0, field_time(rep, s, p.t));
            let a = f.a_at(s, q);
            ([f.phi_at(s, q).abs(), a[0].abs(), a[1].abs(), a[2].abs()], f.lab_at(s, q).abs())
        });
        for (v, l) in per {
            for k in 0..4 {
                vmax[k] = vmax[k].max(v[k]);
            }
            lab = lab.max(l);
        }
    }
    let e = f.charge.abs();
    let mut rho = 0.5 * f.m + e * lab;
    for a in &g.axes {
        let h = a.spacing;
        let v = vmax[a.coord];
        // Row sums of |D²| and |D| for the interior stencils.
        let (s2, s1) = (64.0 / (12.0 * h * h), 18.0 / (12.0 * h));
        rho += (s2 + 2.0 * e * v * s1 + e * e * v * v) / (2.0 * f.m);
        if a.coord == 0 && rep == Representation::RelativeTime {
            rho += s1;
        }
    }
    rho
}

/// Absorbing layer width in grid points.
pub const MASK_WIDTH: usize = 8;
/// Probability allowed inside the absorbing layer at the end of a run.
pub const MASK_TOLERANCE: f64 = 1e-6;
/// Largest `Δτ·ρ(H)` for one implicit step.
pub const STEP_SAFETY: f64 = 4.0;

/// Controls for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Requested number of steps; raised if the spectral bound needs more.
    pub steps: usize,
    /// Damp amplitude inside the outer `MASK_WIDTH` points every step.
    pub absorbing: bool,
    /// Fail if more than `MASK_TOLERANCE` probability ends up in the layer.
    pub check_leakage: bool,
    /// Abort when `|‖ψ‖² − ‖ψ₀‖²|` exceeds this.
    pub max_drift: f64,
    /// Require `|∂_μA^μ| ≤ 1e-8` on the grid before starting.
    pub lorentz: bool,
}

impl EvolveOptions {
    pub fn new(steps: usize) -> Self {
        Self { steps, absorbing: true, check_leakage: true, max_drift: 1e-3, lorentz: false }
    }
}

/// Summary of an evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveReport {
    pub steps: usize,
    pub dtau: f64,
    pub spectral_radius: f64,
    pub norm_drift: f64,
    pub edge_probability: f64,
}

/// Advances `psi0` by laboratory time `tau` in at least `steps` steps.
///
/// `steps = 0` returns the input unchanged.
pub fn evolve(psi0: &GridWaveFunction, f: &FieldConfig, tau: f64, steps: usize) -> Result<GridWaveFunction> {
    evolve_with(psi0, f, tau, EvolveOptions::new(steps)).map(|(g, _)| g)
}

fn mask_profile(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let d = k.min(n - 1 - k);
            if d >= MASK_WIDTH {
                1.0
            } else {
                let r = (MASK_WIDTH - d) as f64 / MASK_WIDTH as f64;
                1.0 - 0.1 * r * r
            }
        })
        .collect()
}

pub fn evolve_with(psi0: &GridWaveFunction, f: &FieldConfig, tau: f64, opts: EvolveOptions) -> Result<(GridWaveFunction, EvolveReport)> {
    f.validate()?;
    ensure_finite("tau", tau)?;
    check_rep(psi0)?;
    let norm0 = psi0.norm_sqr();
    if opts.steps == 0 || tau == 0.0 {
        let report = EvolveReport {
            steps: 0,
            dtau: 0.0,
            spectral_radius: 0.0,
            norm_drift: 0.0,
            edge_probability: psi0.edge_probability(MASK_WIDTH),
        };
        return Ok((psi0.clone(), report));
    }
    central_momentum_check(psi0)?;
    if opts.lorentz {
        let v = f.lorentz_violation(psi0, psi0.tau);
        if v > 1e-8 {
            return Err(invalid(format!("potentials violate the Lorentz condition by {v}")));
        }
    }
    let tau0 = psi0.tau;
    let rho = spectral_radius(psi0, f, tau0, tau);
    let steps = opts.steps.max((tau.abs() * rho / STEP_SAFETY).ceil() as usize);
    let dt = tau / steps as f64;
    let time_dependent = f.phi.is_some() || f.a.is_some() || f.lab.is_some();
    let mut g = psi0.clone();
    let mask: Option<Vec<f64>> = opts.absorbing.then(|| {
        let shape = g.shape();
        let profiles: Vec<Vec<f64>> = shape.iter().map(|&n| mask_profile(n)).collect();
        (0..g.len())
            .map(|i| {
                let mut rem = i;
                let mut w = 1.0;
                for pos in (0..shape.len()).rev() {
                    w *= profiles[pos][rem % shape[pos]];
                    rem /= shape[pos];
                }
                w
            })
            .collect()
    });
    let mut cached: Option<(Vec<AxisRows>, Vec<f64>)> = None;
    for step in 0..steps {
        let mid = tau0 + (step as f64 + 0.5) * dt;
        if cached.is_none() || time_dependent {
            let rows = (0..g.axes.len()).map(|pos| build_rows(&g, f, mid, pos, Boundary::Dirichlet)).collect();
            cached = Some((rows, diagonal(&g, f, mid)));
        }
        let (rows, diag) = cached.as_ref().expect("rows built above");
        let half = 0.25 * dt;
        for (pos, r) in rows.iter().enumerate() {
            g.for_each_line(pos, |line, vals| cayley_solve(r.get(line), half, vals));
        }
        for (v, d) in g.data.iter_mut().zip(diag) {
            *v *= C64::from_polar(1.0, -d * dt);
        }
        for (pos, r) in rows.iter().enumerate().rev() {
            g.for_each_line(pos, |line, vals| cayley_solve(r.get(line), half, vals));
        }
        if let Some(m) = &mask {
            for (v, w) in g.data.iter_mut().zip(m) {
                *v *= w;
            }
        }
        let drift = (g.norm_sqr() - norm0).abs();
        if !(drift <= opts.max_drift) {
            return Err(Error::Numerical(format!("norm drift {drift} after step {} of {steps} (Δτ = {dt}, ρ = {rho})", step + 1)));
        }
    }
    g.tau = tau0 + tau;
    let edge = g.edge_probability(MASK_WIDTH);
    if opts.check_leakage && edge > MASK_TOLERANCE {
        return Err(Error::Numerical(format!("probability {edge} reached the absorbing layer; enlarge the grid")));
    }
    let report = EvolveReport { steps, dtau: dt, spectral_radius: rho, norm_drift: g.norm_sqr() - norm0, edge_probability: edge };
    Ok((g, report))
}

/// Gauge function `Λ_τ(t, x⃗)`.
pub type GaugeFunction = Arc<dyn Fn(f64, FourVector) -> f64 + Send + Sync>;

/// `ψ′ = e^{ieΛ}ψ` with `Φ′ = Φ − ∂_tΛ`, `A⃗′ = A⃗ + ∇Λ`, `𝓐′ = 𝓐 − ∂_τΛ`.
///
/// Derivatives of `Λ` are taken by fourth order differences of the closure.
/// `Λ` is evaluated at the grid's own laboratory time.
pub fn gauge_transform(psi: &GridWaveFunction, lambda: GaugeFunction, f: &FieldConfig) -> Result<(GridWaveFunction, FieldConfig)> {
    f.validate()?;
    check_rep(psi)?;
    let e = f.charge;
    let tau = psi.tau;
    let shape = psi.clone_shape();
    let rep = psi.rep;
    let lam = lambda.clone();
    let phases = par::map_indexed(psi.len(), |i| {
        let p = shape.point(i);
        lam(tau, p.with(0, field_time(rep, tau, p.t)))
    });
    if let Some(bad) = phases.iter().find(|v| !v.is_finite()) {
        return Err(invalid(format!("gauge function is not finite on the grid ({bad})")));
    }
    let mut out = psi.clone();
    for (v, l) in out.data.iter_mut().zip(&phases) {
        *v *= C64::from_polar(1.0, e * l);
    }
    let mut g = f.clone();
    let (old_phi, l1) = (f.phi.clone(), lambda.clone());
    g.phi = Some(Arc::new(move |s, x: FourVector| {
        let base = old_phi.as_ref().map_or(0.0, |p| p(s, x));
        base - deriv(|t| l1(s, x.with(0, t)), x.t)
    }));
    let (old_a, l2) = (f.a.clone(), lambda.clone());
    g.a = Some(Arc::new(move |s, x: FourVector| {
        let mut a = old_a.as_ref().map_or([0.0; 3], |v| v(s, x));
        for (k, ak) in a.iter_mut().enumerate() {
            *ak += deriv(|c| l2(s, x.with(k + 1, c)), x.get(k + 1));
        }
        a
    }));
    let (old_lab, l3) = (f.lab.clone(), lambda);
    g.lab = Some(Arc::new(move |s, x: FourVector| {
        let base = old_lab.as_ref().map_or(0.0, |v| v(s, x));
        base - deriv(|t| l3(t, x), s)
    }));
    Ok((out, g))
}

const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
const GL_PANELS: usize = 16;

/// `∫_a^b f` by composite eight-point Gauss-Legendre; fails on non-finite
/// samples.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    let w = (b - a) / GL_PANELS as f64;
    let mut sum = 0.0;
    for p in 0..GL_PANELS {
        let mid = a + (p as f64 + 0.5) * w;
        for (x, wt) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            for s in [-1.0, 1.0] {
                let v = f(mid + s * 0.5 * w * x);
                if !v.is_finite() {
                    return Err(Error::Singular(format!("integrand is not finite near {}", mid + s * 0.5 * w * x)));
                }
                sum += 0.5 * w * wt * v;
            }
        }
    }
    Ok(sum)
}

/// Time gauge `Λ_τ(t_τ, x⃗) = ∫₀^{t_τ} Φ_τ(t′, x⃗) dt′` for a potential given
/// in relative time.
#[derive(Clone)]
pub struct TimeGauge {
    phi: Arc<dyn Fn(f64, FourVector) -> f64 + Send + Sync>,
}

impl fmt::Debug for TimeGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TimeGauge")
    }
}

/// `phi(t_τ, x⃗)` is `Φ_τ` at relative time `t_τ`; the time component of `x⃗`
/// is ignored.
pub fn time_gauge(phi: impl Fn(f64, FourVector) -> f64 + Send + Sync + 'static) -> TimeGauge {
    TimeGauge { phi: Arc::new(phi) }
}

impl TimeGauge {
    pub fn eval(&self, t_rel: f64, x: FourVector) -> Result<f64> {
        ensure_finite("relative time", t_rel)?;
        if t_rel == 0.0 {
            return Ok(0.0);
        }
        integrate(|t| (self.phi)(t, x), 0.0, t_rel)
    }

    /// Checks every lattice point of `g` (time axis read as relative time).
    pub fn validate_on(&self, g: &GridWaveFunction) -> Result<()> {
        let shape = g.clone_shape();
        for i in 0..g.len() {
            let p = shape.point(i);
            if !(self.phi)(p.t, p).is_finite() {
                return Err(Error::Singular(format!("potential is singular at {p:?}; the time gauge does not exist there")));
            }
            self.eval(p.t, p)?;
        }
        Ok(())
    }
}

/// Which field a cross potential was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossKind {
    Electric,
    Magnetic,
}

/// Cross potential `V = V⁽¹⁾t_τ + V⁽²⁾t_τ²`.
///
/// `smoothed` is the time-smoothed field `⟨E⃗⟩` (electric) or `⟨∂A⃗/∂t_τ⟩`
/// (magnetic). For the magnetic case `static_a` is `A⃗_τ(0, x⃗)`, which
/// enters the kinetic momentum `p⃗ − eA⃗`.
#[derive(Clone)]
pub struct CrossPotential {
    pub kind: CrossKind,
    pub charge: f64,
    pub m: f64,
    smoothed: Arc<dyn Fn(f64, FourVector) -> [f64; 3] + Send + Sync>,
    static_a: Option<Arc<dyn Fn(FourVector) -> [f64; 3] + Send + Sync>>,
}

impl fmt::Debug for CrossPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CrossPotential").field("kind", &self.kind).field("charge", &self.charge).field("m", &self.m).finish()
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl CrossPotential {
    /// The smoothed field at relative time `t_rel`.
    pub fn smoothed(&self, t_rel: f64, x: FourVector) -> [f64; 3] {
        (self.smoothed)(t_rel, x)
    }

    /// `V⁽²⁾ = e²F²/2m`.
    pub fn v2(&self, t_rel: f64, x: FourVector) -> f64 {
        let s = self.smoothed(t_rel, x);
        self.charge * self.charge * dot(s, s) / (2.0 * self.m)
    }

    /// `V⁽¹⁾` on a plane wave of momentum `p⃗` where the smoothed field is
    /// locally constant: `eF·p/m` (electric) or `−eF·(p − eA)/m` (magnetic).
    pub fn v1_symbol(&self, t_rel: f64, x: FourVector, p: [f64; 3]) -> f64 {
        let s = self.smoothed(t_rel, x);
        let e = self.charge;
        match self.kind {
            CrossKind::Electric => e * dot(s, p) / self.m,
            CrossKind::Magnetic => {
                let a = self.static_a.as_ref().map_or([0.0; 3], |f| f(x));
                let k = [p[0] - e * a[0], p[1] - e * a[1], p[2] - e * a[2]];
                -e * dot(s, k) / self.m
            }
        }
    }

    /// Applies the symmetrized operator `V⁽¹⁾` to a grid function whose time
    /// axis is relative time, using central differences along space axes.
    pub fn v1_apply(&self, psi: &GridWaveFunction) -> Result<GridWaveFunction> {
        let e = self.charge;
        let sign = match self.kind {
            CrossKind::Electric => 1.0,
            CrossKind::Magnetic => -1.0,
        };
        let mut total = GridWaveFunction { data: vec![C64::new(0.0, 0.0); psi.len()], ..psi.clone() };
        let geo = psi.geometry();
        for pos in 0..psi.axes.len() {
            let a = psi.axes[pos];
            if a.coord == 0 {
                continue;
            }
            let k = a.coord - 1;
            let mut part = psi.clone();
            part.for_each_line(pos, |line, vals| {
                let pts = line_points(&geo, pos, line);
                let fk: Vec<f64> = pts.iter().map(|p| self.smoothed(p.t, *p)[k]).collect();
                let ak: Vec<f64> = pts.iter().map(|p| self.static_a.as_ref().map_or(0.0, |f| f(*p)[k])).collect();
                let n = vals.len();
                let src = vals.to_vec();
                for j in 0..n {
                    let (start, d1, _) = stencil_row(j, n, a.spacing, Boundary::OneSided);
                    // (pF + Fp)/2 with p = −i∂: −i(∂(Fψ) + F∂ψ)/2.
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..6 {
                        let q = start + c;
                        if q < n {
                            acc += d1[c] * (fk[q] + fk[j]) * src[q];
                        }
                    }
                    let kinetic = -I * 0.5 * acc - e * ak[j] * fk[j] * src[j];
                    vals[j] = sign * e * kinetic / self.m;
                }
            });
            for (t, p) in total.data.iter_mut().zip(&part.data) {
                *t += p;
            }
        }
        Ok(total)
    }

    pub fn is_zero_at(&self, t_rel: f64, x: FourVector) -> bool {
        let s = self.smoothed(t_rel, x);
        dot(s, s) == 0.0
    }
}

/// Cross potential of the longitudinal electric field of `phi(t_τ, x⃗)`.
///
/// `⟨E⃗⟩(t_τ, x⃗) = −(1/t_τ)∫₀^{t_τ} ∇Φ_τ(t′, x⃗) dt′`, equal to `−∇Φ` at
/// `t_τ = 0`.
pub fn cross_potential_electric(
    charge: f64,
    m: f64,
    phi: impl Fn(f64, FourVector) -> f64 + Send + Sync + 'static,
) -> Result<CrossPotential> {
    ensure_positive("mass", m)?;
    ensure_finite("charge", charge)?;
    let phi = Arc::new(phi);
    let smoothed = move |t_rel: f64, x: FourVector| {
        let grad = |t: f64, k: usize| deriv(|c| phi(t, x.with(k + 1, c)), x.get(k + 1));
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = if t_rel == 0.0 { -grad(0.0, k) } else { -integrate(|t| grad(t, k), 0.0, t_rel).unwrap_or(f64::NAN) / t_rel };
        }
        out
    };
    Ok(CrossPotential { kind: CrossKind::Electric, charge, m, smoothed: Arc::new(smoothed), static_a: None })
}

/// Cross potential of a time-dependent vector potential `a(t_τ, x⃗)`.
///
/// `⟨∂A⃗/∂t_τ⟩ = (A⃗(t_τ, x⃗) − A⃗(0, x⃗))/t_τ`, the derivative itself at
/// `t_τ = 0`.
pub fn cross_potential_magnetic(
    charge: f64,
    m: f64,
    a: impl Fn(f64, FourVector) -> [f64; 3] + Send + Sync + 'static,
) -> Result<CrossPotential> {
    ensure_positive("mass", m)?;
    ensure_finite("charge", charge)?;
    let a = Arc::new(a);
    let a0 = a.clone();
    let smoothed = move |t_rel: f64, x: FourVector| {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = if t_rel == 0.0 { deriv(|t| a(t, x)[k], 0.0) } else { (a(t_rel, x)[k] - a(0.0, x)[k]) / t_rel };
        }
        out
    };
    let static_a = move |x: FourVector| a0(0.0, x);
    Ok(CrossPotential { kind: CrossKind::Magnetic, charge, m, smoothed: Arc::new(smoothed), static_a: Some(Arc::new(static_a)) })
}

/// An operator acting on grid functions.
pub trait GridOperator: Sync {
    fn apply(&self, psi: &GridWaveFunction) -> Result<GridWaveFunction>;
}

/// Multiplication by coordinate `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coordinate(pub usize);

impl GridOperator for Coordinate {
    fn apply(&self, psi: &GridWaveFunction) -> Result<GridWaveFunction> {
        let mut out = psi.clone();
        let shape = psi.clone_shape();
        let mu = self.0;
        par::fill_indexed(&mut out.data, |i| psi.data[i] * shape.point(i).get(mu));
        Ok(out)
    }
}

/// `E = i∂_t` for `mu = 0`, `p_k = −i∂_k` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Momentum(pub usize);

impl GridOperator for Momentum {
    fn apply(&self, psi: &GridWaveFunction) -> Result<GridWaveFunction> {
        let pos = psi.axis_position(self.0).ok_or_else(|| Error::Unsupported(format!("grid has no axis for coordinate {}", self.0)))?;
        let a = psi.axes[pos];
        let factor = if self.0 == 0 { I } else { -I };
        let mut out = psi.clone();
        out.for_each_line(pos, |_, vals| {
            let n = vals.len();
            let src = vals.to_vec();
            for (j, v) in vals.iter_mut().enumerate() {
                let (start, d1, _) = stencil_row(j, n, a.spacing, Boundary::OneSided);
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..6 {
                    if start + c < n {
                        acc += d1[c] * src[start + c];
                    }
                }
                *v = factor * acc;
            }
        });
        Ok(out)
    }
}

/// `d⟨O⟩/dτ = ⟨−i[O, H]⟩ (+ ⟨∂O/∂τ⟩)`, normalized by `⟨ψ|ψ⟩`.
pub fn expectation_rate(op: &dyn GridOperator, psi: &GridWaveFunction, f: &FieldConfig, d_tau: Option<&dyn GridOperator>) -> Result<C64> {
    let h = hamiltonian_apply(psi, f)?;
    let o = op.apply(psi)?;
    let ho = hamiltonian_apply(&o, f)?;
    let oh = op.apply(&h)?;
    let norm = psi.norm_sqr();
    let mut r = -I * (psi.inner(&oh) - psi.inner(&ho)) / norm;
    if let Some(d) = d_tau {
        r += psi.inner(&d.apply(psi)?) / norm;
    }
    Ok(r)
}

/// `d²⟨O⟩/dτ² = ⟨−[[O, H], H]⟩` for an operator without explicit τ
/// dependence.
pub fn expectation_second_rate(op: &dyn GridOperator, psi: &GridWaveFunction, f: &FieldConfig) -> Result<C64> {
    let h1 = hamiltonian_apply(psi, f)?;
    let h2 = hamiltonian_apply(&h1, f)?;
    let o0 = op.apply(psi)?;
    let o1 = op.apply(&h1)?;
    let o2 = op.apply(&h2)?;
    // ⟨[[O,H],H]⟩ = ⟨OHH⟩ − 2⟨HOH⟩ + ⟨HHO⟩.
    let v = psi.inner(&o2) - 2.0 * h1.inner(&o1) + h2.inner(&o0);
    Ok(-v / psi.norm_sqr())
}

/// `‖Hψ‖/‖ψ‖`; zero for solutions of the Klein-Gordon equation.
pub fn stationary_residual(psi: &GridWaveFunction, f: &FieldConfig) -> Result<f64> {
    let h = hamiltonian_apply(psi, f)?;
    Ok((h.norm_sqr() / psi.norm_sqr()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridAxis;

    #[test]
    fn stencils_are_exact_on_quartics() {
        let n = 12;
        let h = 0.3;
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x.powi(3) + x).collect();
        for j in 0..n {
            let (start, d1, d2) = stencil_row(j, n, h, Boundary::OneSided);
            let (mut a, mut b) = (0.0, 0.0);
            for c in 0..6 {
                if start + c < n {
                    a += d1[c] * f[start + c];
                    b += d2[c] * f[start + c];
                }
            }
            let x = xs[j];
            assert!((a - (4.0 * x.powi(3) - 6.0 * x * x + 1.0)).abs() < 1e-9, "d1 row {j}");
            assert!((b - (12.0 * x * x - 12.0 * x)).abs() < 1e-8, "d2 row {j}");
        }
    }

    #[test]
    fn dirichlet_axis_operator_is_hermitian() {
        let v: Vec<f64> = (0..10).map(|k| (k as f64 * 0.7).sin()).collect();
        for time in [true, false] {
            let rows = axis_rows(&v, 0.2, time, time, 0.8, 1.3, Boundary::Dirichlet);
            let entry = |j: usize, k: usize| {
                let (s, w) = rows[j];
                if k >= s && k < s + 6 {
                    w[k - s]
                } else {
                    C64::new(0.0, 0.0)
                }
            };
            for j in 0..10 {
                for k in 0..10 {
                    assert!((entry(j, k) - entry(k, j).conj()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cayley_step_is_unitary() {
        let v: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let rows = axis_rows(&v, 0.1, false, false, 1.0, 1.0, Boundary::Dirichlet);
        let mut x: Vec<C64> = (0..40).map(|k| C64::new((k as f64).cos(), (k as f64 * 0.3).sin())).collect();
        let before: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        cayley_solve(&rows, 0.37, &mut x);
        let after: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        assert!((before - after).abs() < 1e-12 * before);
    }

    #[test]
    fn time_gauge_cases() {
        let x = FourVector::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(time_gauge(|_, _| 0.0).eval(2.0, x).unwrap(), 0.0);
        assert!((time_gauge(|_, _| 1.5).eval(2.0, x).unwrap() - 3.0).abs() < 1e-13);
        assert!((time_gauge(|t, _| 0.4 * t).eval(3.0, x).unwrap() - 0.2 * 9.0).abs() < 1e-13);
        let coulomb = time_gauge(|_, p: FourVector| 1.0 / p.x.abs());
        assert!(coulomb.eval(1.0, FourVector::ZERO).is_err());
    }

    #[test]
    fn zero_steps_is_identity() {
        let axes = vec![GridAxis::new(0, -5.0, 5.0, 51).unwrap()];
        let g = GridWaveFunction::from_fn(axes, Representation::Block, |p| C64::new((-p.t * p.t).exp(), 0.0)).unwrap();
        assert_eq!(evolve(&g, &FieldConfig::free(1.0), 1.0, 0).unwrap(), g);
    }

    #[test]
    fn spectral_representations_rejected() {
        let axes = vec![GridAxis::new(0, -5.0, 5.0, 51).unwrap()];
        let g = GridWaveFunction::from_fn(axes, Representation::EnergyMomentum, |_| C64::new(1.0, 0.0)).unwrap();
        assert!(matches!(hamiltonian_apply(&g, &FieldConfig::free(1.0)), Err(Error::Unsupported(_))));
    }
}
