//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use proptest::test_runner::{Config, TestRunner};
use qtsim_core::bound::width_in_time_seconds;
use qtsim_core::experiments::{
    ab_time_phase, double_slit_tq, fringe_frequency, fringe_phase, single_slit_sqt, single_slit_tq, DetectorDensity, ExperimentConfig,
};
use qtsim_core::foundation::{FourMomentum, FourVector, C64, CONSTANTS, I};
use qtsim_core::grid::GridAxis;
use qtsim_core::kernels::{electric_kernel, electric_kernel_complex, free_space_kernel_1d, free_time_kernel, magnetic_kernel};
use qtsim_core::morlet::{admissibility_constant, analyze, synthesize, SampledSignal, WaveletGridSpec};
use qtsim_core::pathint::{propagate_sliced, DiscreteLagrangian, SliceConfig};
use qtsim_core::schrodinger::{evolve, evolve_with, expectation_rate, Coordinate, EvolveOptions, FieldConfig};
use qtsim_core::wavepackets::GaussianTestFunction;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn packet(e0: f64, px: f64) -> GaussianTestFunction {
    GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(e0, px, 0.0, 0.0), [1.0; 4]).unwrap()
}

fn axes(t: (f64, f64), x: (f64, f64), h: f64) -> Vec<GridAxis> {
    let n = |r: (f64, f64)| ((r.1 - r.0) / h).round() as usize + 1;
    vec![GridAxis::new(0, t.0, t.1, n(t)).unwrap(), GridAxis::new(1, x.0, x.1, n(x)).unwrap()]
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn gauss(x: f64, s2: f64) -> f64 {
    (-x * x / s2).exp() / (PI * s2).sqrt()
}

fn line(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn free_dispersion() -> Outcome {
    let start = Instant::now();
    let mut g = packet(1.0, 0.0).sample(axes((-9.0, 12.0), (-10.0, 10.0), 0.1)).map_err(|e| e.to_string())?;
    let (mut now, mut worst) = (0.0, 0.0f64);
    for tau in [0.5, 1.0, 2.0] {
        g = evolve(&g, &FieldConfig::free(1.0), tau - now, 50).map_err(|e| e.to_string())?;
        now = tau;
        let (_, var) = g.moments(0);
        let want = 0.5 * (1.0 + tau * tau);
        worst = worst.max(((var - want) / want).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst < 1e-3 && secs < 60.0, format!("max relative error {worst:.2e}, {secs:.1} s"))
}

fn path_integral_convergence() -> Outcome {
    let start = Instant::now();
    let psi = packet(1.0, 0.0);
    let mut errs = Vec::new();
    for n in [16usize, 32, 64] {
        let cfg = SliceConfig::ladder(n, 1.0, &psi, 1.0, &[0]).map_err(|e| e.to_string())?;
        let out = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(1.0)).map_err(|e| e.to_string())?;
        let exact = psi.evolve(1.0, 1.0).unwrap().sample(cfg.axes.clone()).unwrap();
        errs.push(out.l2_distance(&exact));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-3 && secs < 120.0;
    check(ok, format!("L2 errors {:.2e} {:.2e} {:.2e}, {secs:.1} s", errs[0], errs[1], errs[2]))
}

fn unitarity() -> Outcome {
    let g0 = packet(1.0, 0.2).sample(axes((-8.0, 9.0), (-8.0, 8.0), 0.1)).unwrap();
    let tau = 1.0;
    let fields = [
        ("free", FieldConfig::free(1.0)),
        ("constant scalar", FieldConfig::free(1.0).with_scalar(1.0, |_| 0.4)),
        ("time-dependent vector", FieldConfig::free(1.0).with_vector(1.0, |p: FourVector| [0.05 * p.t, 0.0, 0.0])),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, f) in fields {
        let mut opts = EvolveOptions::new(20);
        opts.lorentz = true;
        let (out, _) = evolve_with(&g0, &f, tau, opts).map_err(|e| format!("{name}: {e}"))?;
        let drift = (out.norm_sqr() - g0.norm_sqr()).abs() / tau;
        ok &= drift < 1e-6;
        parts.push(format!("{name} {drift:.1e}"));
    }
    check(ok, format!("drift per unit tau: {}", parts.join(", ")))
}

fn electric_kernel_checks() -> Outcome {
    let (m, alpha, h) = (1.0, 0.6, 1e-3);
    let p0 = [0.2, -0.3];
    let k = |tau: f64, t: f64, x: f64| electric_kernel(alpha, tau, m, p0[0], p0[1], t, x).unwrap();
    let d1 = |f: &dyn Fn(f64) -> C64, u: f64| (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h);
    let d2 = |f: &dyn Fn(f64) -> C64, u: f64| {
        (-f(u - 2.0 * h) + 16.0 * f(u - h) - 30.0 * f(u) + 16.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h * h)
    };
    let mut residual = 0.0f64;
    for tau in [0.7, 1.0, 1.6] {
        for t in line(-1.0, 1.5, 6) {
            for x in line(-1.2, 1.0, 6) {
                let kv = k(tau, t, x);
                let dtau = d1(&|s| k(s, t, x), tau);
                let kt = d1(&|s| k(tau, s, x), t);
                let ktt = d2(&|s| k(tau, s, x), t);
                let kx = d1(&|s| k(tau, t, s), x);
                let kxx = d2(&|s| k(tau, t, s), x);
                let (ephi, ea) = (-(m * alpha / 2.0) * x, -(m * alpha / 2.0) * t);
                let e2 = -ktt - 2.0 * I * ephi * kt + ephi * ephi * kv;
                let p2 = -kxx + 2.0 * I * ea * kx + ea * ea * kv;
                let hk = -(e2 - p2) / (2.0 * m);
                residual = residual.max((I * dtau - hk).norm() / kv.norm());
            }
        }
    }

    let (m2, tau) = (1.3, 0.8);
    let mut limit = 0.0f64;
    for (p1, q) in [([0.3, 0.4], [-0.2, 0.1]), ([1.0, -2.0], [0.5, 0.5])] {
        let free = free_time_kernel(tau, m2, p1[0], q[0]).unwrap()
            * free_space_kernel_1d(tau, m2, p1[1], q[1]).unwrap()
            * C64::from_polar(1.0, m2 * tau / 2.0);
        for a in [0.0, 1e-9] {
            limit = limit.max((electric_kernel(a, tau, m2, q[0], q[1], p1[0], p1[1]).unwrap() - free).norm());
        }
    }

    let (tau, omega) = (1.1, 0.9);
    let (x0, y0, x1, y1) = (0.3, -0.4, 1.2, 0.5);
    let sub = electric_kernel_complex(I * omega, tau, 1.0, I * x0, C64::new(y0, 0.0), I * x1, C64::new(y1, 0.0));
    let mag = magnetic_kernel(omega, tau, 1.0, x0, y0, x1, y1).unwrap();
    let mapping = (sub + mag).norm() / mag.norm();

    check(
        residual < 1e-5 && limit < 1e-9 && mapping < 1e-12,
        format!("residual {residual:.1e}, zero-field limit {limit:.1e}, substitution vs -magnetic {mapping:.1e}"),
    )
}

fn slit_config() -> ExperimentConfig {
    ExperimentConfig {
        m: 1.0,
        p_bar: 0.1,
        sigma1_hat: 0.002,
        sigma0: 1.0,
        l_gate: 1.0,
        l_detector: 100.0,
        gate_center: 10.0,
        delta_t: 3.0,
        gate_width: 1.0,
        delta_phi: 0.3,
        tau_s: 0.0,
    }
}

fn grid_linf(d: &DetectorDensity, f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let (a, b) = d.support();
    line(a, b, n + 1).map(|x| (f(x) - d.eval(x)).abs()).fold(0.0, f64::max)
}

fn single_slit() -> Outcome {
    let mut widened = 0.0f64;
    for t in [8.0, 10.0, 11.5] {
        let c = ExperimentConfig { gate_center: t, ..slit_config() };
        let tq = single_slit_tq(&c).map_err(|e| e.to_string())?;
        let wide = ExperimentConfig { gate_width: (c.gate_width.powi(2) + c.sigma0.powi(2)).sqrt(), ..c };
        let sqt = single_slit_sqt(&wide).unwrap();
        widened = widened.max(grid_linf(&sqt, |x| tq.space.eval(x), 400));
    }
    let c = ExperimentConfig { sigma0: 1e-6, ..slit_config() };
    let tq = single_slit_tq(&c).unwrap();
    let sqt = single_slit_sqt(&c).unwrap();
    let collapse = grid_linf(&sqt, |x| tq.space.eval(x) * tq.time_norm2, 1000);
    check(
        widened < 1e-9 && collapse < 1e-9,
        format!("widened-gate match {widened:.1e}, sigma0 = 1e-6 collapse {collapse:.1e} (space part times time norm)"),
    )
}

/// Marginal over quantum time of the 2D density: a Gaussian time part times
/// the two-source amplitude density at the shifted arrival offset.
fn double_slit_marginal(c: &ExperimentConfig) -> impl Fn(f64) -> f64 {
    let (s2, dt, f, phi) = (c.sigma_bar_detector2(), c.delta_t, fringe_frequency(c), fringe_phase(c));
    let amp = move |x: f64| {
        let th = 0.5 * (phi + f * x);
        let a = (-(x + dt).powi(2) / (2.0 * s2)).exp();
        let b = (-(x - dt).powi(2) / (2.0 * s2)).exp();
        (a * th.cos() + b * th.cos()).powi(2) + (a * th.sin() - b * th.sin()).powi(2)
    };
    let w = dt + 10.0 * s2.sqrt();
    let norm = simpson(-w, w, 40_000, amp);
    let sh2 = c.sigma_hat_detector2();
    move |t| simpson(-w, w, 6000, |u| gauss(t - u, sh2) * amp(u) / norm)
}

fn double_slit() -> Outcome {
    let mut err = 0.0f64;
    for sigma0 in [0.5, 1.0, 3.0] {
        let c = ExperimentConfig { sigma0, ..slit_config() };
        let d = double_slit_tq(&c).map_err(|e| e.to_string())?;
        let direct = double_slit_marginal(&c);
        let w = c.delta_t + 10.0 * c.sigma_bar_detector2().sqrt();
        err = err.max(line(-w, w, 201).map(|t| (d.eval(t) - direct(t)).abs()).fold(0.0, f64::max));
    }
    let c = slit_config();
    let DetectorDensity::DoubleHump { frequency, .. } = double_slit_tq(&c).unwrap() else {
        return Err("time-quantum double slit is not a double hump".into());
    };
    let (b2, h2) = (c.sigma_bar_detector2(), c.sigma_hat_detector2());
    let ratio = frequency / fringe_frequency(&c);
    let exact = b2 / (h2 + b2);
    check(err < 1e-4 && ratio == exact, format!("max deviation from quadrature {err:.1e}, frequency factor {ratio} vs {exact}"))
}

fn published_numbers() -> Outcome {
    let compton = CONSTANTS.compton_time(CONSTANTS.electron_mass_ev).map_err(|e| e.to_string())?;
    let argon = width_in_time_seconds(106e-12).map_err(|e| e.to_string())? * 1e18;
    let rc = (compton / 1.29e-21 - 1.0).abs();
    let ra = (argon / 0.354 - 1.0).abs();
    check(rc < 0.01 && ra < 0.01, format!("Compton time {compton:.3e} s, argon width {argon:.4} as"))
}

fn morlet_round_trip() -> Outcome {
    let (t0, h, n) = (-10.0, 0.02, 1001);
    let spec = WaveletGridSpec::default();
    let c = admissibility_constant(&spec, t0, h, n).map_err(|e| e.to_string())?;
    let c_fine = admissibility_constant(&spec, t0, h / 2.0, 2 * n - 1).map_err(|e| e.to_string())?;
    let g = |center: f64, w: f64, k: f64| move |t: f64| C64::from_polar((-(t - center).powi(2) / (2.0 * w * w)).exp(), k * t);
    let (a, b) = (g(-2.0, 1.0, 0.8), g(2.5, 1.4, -0.4));
    let f = SampledSignal::from_fn(t0, h, n, |t| a(t) + b(t) * 0.6).unwrap();
    let back = synthesize(&analyze(&f, &spec).unwrap(), c, t0, h, n).map_err(|e| e.to_string())?;
    let err = back.l2_distance(&f) / f.norm();
    let drift = (c_fine / c - 1.0).abs();
    check(err < 1e-3 && drift < 1e-3, format!("relative L2 error {err:.1e}, C = {c:.6}, change under grid doubling {drift:.1e}"))
}

fn operator_dynamics() -> Outcome {
    let (m, px) = (1.0f64, 0.3f64);
    let e0 = (m * m + px * px).sqrt();
    let gamma = e0 / m;
    let g0 = packet(e0, px).sample(axes((-8.0, 9.0), (-8.0, 8.0), 0.08)).unwrap();
    let f = FieldConfig::free(m);
    let d = 0.05;
    let fwd = evolve(&g0, &f, d, 10).map_err(|e| e.to_string())?;
    let back = evolve(&g0, &f, -d, 10).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (mu, want) in [(0, gamma), (1, px / m)] {
        let rate = expectation_rate(&Coordinate(mu), &g0, &f, None).map_err(|e| e.to_string())?.re;
        let fd = (fwd.moments(mu).0 - back.moments(mu).0) / (2.0 * d);
        worst = worst.max((rate - fd).abs()).max((rate - want).abs());
        parts.push(format!("{rate:.6} (fd {fd:.6}, closed form {want:.6})"));
    }
    check(worst < 1e-3, format!("d<t>/dtau {}, d<x>/dtau {}", parts[0], parts[1]))
}

fn ab_in_time() -> Outcome {
    let mut runner = TestRunner::new(Config { cases: 2000, failure_persistence: None, ..Config::default() });
    let worst = std::cell::Cell::new(0.0f64);
    let strategy = (-10.0f64..10.0, 1e-3f64..100.0, 1.0f64..20.0);
    let result = runner.run(&strategy, |(v, dtau, gamma)| {
        if v.abs() < 1e-6 {
            return Ok(());
        }
        let (tq, sqt) = ab_time_phase(v, dtau, gamma, 1.0).unwrap();
        let ulps = (tq / sqt - gamma).abs() / (gamma * f64::EPSILON);
        worst.set(worst.get().max(ulps));
        proptest::prop_assert!(ulps <= 1.0, "ratio {} vs {gamma}", tq / sqt);
        Ok(())
    });
    check(
        result.is_ok(),
        format!(
            "2000 random cases, worst deviation {:.1} ulp of gamma{}",
            worst.get(),
            result.err().map(|e| format!(": {e}")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("free dispersion law", free_dispersion),
        ("path-integral convergence", path_integral_convergence),
        ("unitarity", unitarity),
        ("electric kernel", electric_kernel_checks),
        ("single slit", single_slit),
        ("double slit", double_slit),
        ("published numbers", published_numbers),
        ("Morlet round trip", morlet_round_trip),
        ("operator dynamics", operator_dynamics),
        ("AB in time", ab_in_time),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
