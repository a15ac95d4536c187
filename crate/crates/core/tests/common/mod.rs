#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use qtsim_core::foundation::complex_sqrt;
use qtsim_core::C64;

/// Exact `∫ e^{Q(v)} dⁿv` for a quadratic `Q` with negative definite real part,
/// given only as a black box. Coefficients are read off by finite differences
/// (exact for quadratics up to rounding) and the integral is done one
/// variable at a time, which keeps every principal square root on the right
/// branch.
pub fn gaussian_integral(q: &dyn Fn(&[f64]) -> C64, n: usize) -> C64 {
    let (a, g, c) = quadratic_coeffs(q, n);
    integrate(a, g, c)
}

/// `(A, g, c)` with `Q(v) = c + gᵀv − ½ vᵀ A v`.
pub fn quadratic_coeffs(q: &dyn Fn(&[f64]) -> C64, n: usize) -> (Vec<Vec<C64>>, Vec<C64>, C64) {
    let zero = vec![0.0; n];
    // grow the stencil from a tiny step while every phase difference stays
    // small, so no logarithm can wrap
    let q0 = q(&zero);
    let phase = |h: f64| {
        (0..n)
            .flat_map(|i| [2.0 * h, -2.0 * h].map(|s| (i, s)))
            .map(|(i, s)| {
                let mut v = zero.clone();
                v[i] = s;
                (q(&v) - q0).im.abs()
            })
            .fold(0.0, f64::max)
    };
    let mut h = 1e-9;
    while 2.0 * h <= 0.01 && phase(2.0 * h) < 0.5 {
        h *= 2.0;
    }
    let at = |i: Option<(usize, f64)>, j: Option<(usize, f64)>| {
        let mut v = zero.clone();
        if let Some((i, s)) = i {
            v[i] += s;
        }
        if let Some((j, s)) = j {
            v[j] += s;
        }
        q(&v)
    };
    let c = at(None, None);
    let mut g = vec![C64::new(0.0, 0.0); n];
    let mut a = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        g[i] = (at(Some((i, h)), None) - at(Some((i, -h)), None)) / (2.0 * h);
        for j in 0..n {
            let v = (at(Some((i, h)), Some((j, h))) - at(Some((i, h)), Some((j, -h))) - at(Some((i, -h)), Some((j, h)))
                + at(Some((i, -h)), Some((j, -h))))
                / (4.0 * h * h);
            // Q = c + gᵀv − ½ vᵀ A v
            a[i][j] = -v;
        }
    }
    (a, g, c)
}

/// Exact `∫ exp(c + gᵀv − ½ vᵀ A v) dⁿv`.
pub fn integrate(mut a: Vec<Vec<C64>>, mut g: Vec<C64>, mut c: C64) -> C64 {
    let n = g.len();
    let mut pref = C64::new(1.0, 0.0);
    for k in (0..n).rev() {
        let akk = a[k][k];
        assert!(akk.re > 0.0, "integral does not converge");
        // ∫ exp(−½akk v² + (g_k − Σ a_kj v_j) v) dv
        pref *= complex_sqrt(C64::new(2.0 * std::f64::consts::PI, 0.0) / akk);
        c += g[k] * g[k] / (2.0 * akk);
        let gk = g[k];
        let col: Vec<C64> = (0..k).map(|i| a[i][k]).collect();
        for i in 0..k {
            g[i] -= col[i] * gk / akk;
            for j in 0..k {
                a[i][j] -= col[i] * col[j] / akk;
            }
        }
    }
    pref * c.exp()
}

/// Exact `∫ K(x″, v) ψ(v) dⁿv` for a kernel whose logarithm is jointly quadratic
/// in both endpoints and a Gaussian `ψ`. All coefficients are read off near
/// the origin, where no phase is large, and output points are then handled
/// algebraically.
pub struct KernelAction {
    n: usize,
    a: Vec<Vec<C64>>,
    g: Vec<C64>,
    c: C64,
    scale: C64,
}

impl KernelAction {
    pub fn new(k: &dyn Fn(&[f64], &[f64]) -> C64, psi: &dyn Fn(&[f64]) -> C64, n: usize) -> Self {
        let zero = vec![0.0; n];
        let k0 = k(&zero, &zero);
        let p0 = psi(&zero);
        let joint = |z: &[f64]| {
            let (o, v) = z.split_at(n);
            (k(o, v) / k0).ln() + (psi(v) / p0).ln()
        };
        let (a, g, c) = quadratic_coeffs(&joint, 2 * n);
        Self { n, a, g, c, scale: k0 * p0 }
    }

    pub fn eval(&self, out: &[f64]) -> C64 {
        let n = self.n;
        // z = (o, v): Q = c + g_oᵀo + g_vᵀv − ½(oᵀA_oo o + 2 vᵀA_vo o + vᵀA_vv v)
        let mut c = self.c;
        for i in 0..n {
            c += self.g[i] * out[i];
            for j in 0..n {
                c -= 0.5 * self.a[i][j] * out[i] * out[j];
            }
        }
        let g: Vec<C64> = (0..n).map(|i| self.g[n + i] - (0..n).map(|j| self.a[n + i][j] * out[j]).sum::<C64>()).collect();
        let a: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| self.a[n + i][n + j]).collect()).collect();
        self.scale * integrate(a, g, c)
    }
}
