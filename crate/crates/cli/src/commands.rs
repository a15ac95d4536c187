//! One function per subcommand. Each returns the tables to write and the
//! derived quantities for the parameters record.

use std::path::{Path, PathBuf};

use qtsim_core::bound::width_in_time_seconds;
use qtsim_core::experiments::{
    ab_time_phase, double_slit_density, double_slit_flags, double_slit_sqt, double_slit_tq, free_density, free_density_sqt, larmor_shift,
    lindner_predictions, single_slit_sqt, single_slit_tq, x_discrepancy_rate, Assumption, DetectorDensity, ExperimentConfig,
};
use qtsim_core::grid::{GridAxis, GridWaveFunction};
use qtsim_core::kernels::{electric_kernel, free_space_kernel_1d, free_time_kernel, magnetic_kernel};
use qtsim_core::morlet::{admissibility_constant, analyze, synthesize, SampledSignal, WaveletGridSpec};
use qtsim_core::pathint::{propagate_sliced, DiscreteLagrangian, SliceConfig};
use qtsim_core::schrodinger::{evolve_with, EvolveOptions, FieldConfig};
use qtsim_core::wavepackets::GaussianTestFunction;
use qtsim_core::{FourMomentum, FourVector, C64};

use crate::output::{numbered, Record, Table};
use crate::params::Values;
use crate::CliError;

pub struct Outcome {
    pub tables: Vec<(PathBuf, Table)>,
    pub record: Record,
}

pub fn run(v: &Values) -> Result<Outcome, CliError> {
    let out = PathBuf::from(v.str("out"));
    let mut record = Record::default();
    record.text("command", v.cmd.clone());
    for (k, val) in v.pairs() {
        record.text(k, val);
    }
    let tables = match v.cmd.as_str() {
        "kernel" => kernel(v, &out, &mut record)?,
        "pathint" => pathint(v, &out, &mut record)?,
        "evolve" => evolve(v, &out, &mut record)?,
        "slit" => slit(v, &out, &mut record)?,
        "doubleslit" => doubleslit(v, &out, &mut record)?,
        "lindner" => lindner(v, &out, &mut record)?,
        "fields" => fields(v, &out, &mut record)?,
        "abtime" => abtime(v, &out, &mut record)?,
        "wavelet" => wavelet(v, &out, &mut record)?,
        other => return Err(CliError::Usage(format!("unknown subcommand {other}"))),
    };
    Ok(Outcome { tables, record })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::Config(format!("need at least two samples on an increasing range, got {n} on [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn axis_samples(v: &Values, name: &str) -> Result<Vec<f64>, CliError> {
    linspace(v.f64(&format!("{name}-min"))?, v.f64(&format!("{name}-max"))?, v.usize(&format!("{name}-n"))?)
}

fn grid_axis(v: &Values, name: &str, coord: usize) -> Result<GridAxis, CliError> {
    Ok(GridAxis::new(coord, v.f64(&format!("{name}-min"))?, v.f64(&format!("{name}-max"))?, v.usize(&format!("{name}-n"))?)?)
}

fn kernel(v: &Values, out: &Path, _: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let kind = v.str("kind");
    let (m, tau) = (v.f64("m")?, v.f64("tau")?);
    let (t0, x0, y0) = (v.f64("t0")?, v.f64("x0")?, v.f64("y0")?);
    let (alpha, omega, charge, phi, ax) = (v.f64("alpha")?, v.f64("omega")?, v.f64("charge")?, v.f64("phi")?, v.f64("ax")?);
    let (names, a, b) = if kind == "magnetic" {
        (["x", "y"], axis_samples(v, "x")?, axis_samples(v, "y")?)
    } else {
        (["t", "x"], axis_samples(v, "t")?, axis_samples(v, "x")?)
    };
    // the field kernels leave out the constant mass phase e^{−imτ/2}; the
    // free ones drop it too so every kind shares one convention
    let free = |p: f64, q: f64| -> qtsim_core::Result<C64> {
        Ok(free_time_kernel(tau, m, p, t0)? * free_space_kernel_1d(tau, m, q, x0)? * C64::from_polar(1.0, m * tau / 2.0))
    };
    let eval = |p: f64, q: f64| -> qtsim_core::Result<C64> {
        match kind {
            "electric" => electric_kernel(alpha, tau, m, t0, x0, p, q),
            "magnetic" => magnetic_kernel(omega, tau, m, x0, y0, p, q),
            "potential" => Ok(free(p, q)? * C64::from_polar(1.0, -charge * (p - t0) * phi + charge * (q - x0) * ax)),
            _ => free(p, q),
        }
    };
    let rows = qtsim_core::par::map_indexed(a.len() * b.len(), |i| {
        let (p, q) = (a[i / b.len()], b[i % b.len()]);
        eval(p, q).map(|k| vec![p, q, k.re, k.im])
    });
    let mut t = Table::new(&[names[0], names[1], "re", "im"]);
    for r in rows {
        t.push(r?);
    }
    Ok(vec![(out.to_path_buf(), t)])
}

fn packet(v: &Values, coords: &[usize]) -> Result<GaussianTestFunction, CliError> {
    let (e, px) = (v.f64("energy")?, v.f64("px")?);
    let s = [v.f64("sigma2-t")?, v.f64("sigma2-x")?, 1.0, 1.0];
    let px = if coords.contains(&1) { px } else { 0.0 };
    Ok(GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(e, px, 0.0, 0.0), s)?)
}

fn snapshot(g: &GridWaveFunction) -> Table {
    let mut t = Table::new(&["t", "x", "re", "im", "rho"]);
    for (i, z) in g.data.iter().enumerate() {
        let p = g.point(i);
        t.push(vec![p.t, p.x, z.re, z.im, z.norm_sqr()]);
    }
    t
}

fn pathint(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let coords: &[usize] = if v.str("dims") == "2" { &[0, 1] } else { &[0] };
    let (m, tau, n) = (v.f64("m")?, v.f64("tau")?, v.usize("slices")?);
    let psi = packet(v, coords)?;
    let (charge, phi) = (v.f64("charge")?, v.f64("phi")?);
    let mut lag = DiscreteLagrangian::free(m);
    if phi != 0.0 {
        lag = lag.with_scalar(charge, move |_| phi);
    }
    let cfg = SliceConfig::ladder(n, tau, &psi, m, coords)?;
    let g = propagate_sliced(&psi, &cfg, &lag)?;
    if phi == 0.0 {
        let exact = psi.evolve(tau, m)?.sample(cfg.axes.clone())?;
        rec.num("l2_error_vs_closed_form", g.l2_distance(&exact));
    }
    rec.num("norm", g.norm_sqr());
    rec.num("eps", cfg.eps());
    for a in &cfg.axes {
        rec.text(format!("axis{}", a.coord), format!("{}..{} n={}", a.origin, a.max(), a.n));
    }
    Ok(vec![(out.to_path_buf(), snapshot(&g))])
}

fn evolve(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let (m, tau, samples, steps) = (v.f64("m")?, v.f64("tau")?, v.usize("samples")?.max(1), v.usize("steps")?);
    let psi = packet(v, &[0, 1])?;
    let axes = vec![grid_axis(v, "t", 0)?, grid_axis(v, "x", 1)?];
    let charge = v.f64("charge")?;
    let f = match v.str("field") {
        "scalar" => {
            let phi = v.f64("phi")?;
            FieldConfig::free(m).with_scalar(charge, move |_| phi)
        }
        "electric" => {
            let e = v.f64("efield")?;
            FieldConfig::free(m).with_scalar(charge, move |p: FourVector| -e * p.x)
        }
        _ => FieldConfig::free(m),
    };
    let mut g = psi.sample(axes)?;
    let mut tables = Vec::new();
    let dt = tau / samples as f64;
    for i in 0..samples {
        let (next, report) = evolve_with(&g, &f, dt, EvolveOptions::new(steps))?;
        g = next;
        let (mt, vt) = g.moments(0);
        let (mx, vx) = g.moments(1);
        let p = if samples == 1 { out.to_path_buf() } else { numbered(out, i) };
        rec.num(format!("tau_{i}"), g.tau);
        rec.num(format!("steps_{i}"), report.steps as f64);
        rec.num(format!("norm_drift_{i}"), report.norm_drift);
        rec.num(format!("mean_t_{i}"), mt);
        rec.num(format!("var_t_{i}"), vt);
        rec.num(format!("mean_x_{i}"), mx);
        rec.num(format!("var_x_{i}"), vx);
        tables.push((p, snapshot(&g)));
    }
    Ok(tables)
}

fn experiment(v: &Values) -> Result<ExperimentConfig, CliError> {
    let cfg = ExperimentConfig {
        m: v.f64("m")?,
        p_bar: v.f64("p-bar")?,
        sigma1_hat: v.f64("sigma1-hat")?,
        sigma0: v.f64("sigma0")?,
        l_gate: v.f64("l-gate")?,
        l_detector: v.f64("l-detector")?,
        gate_center: v.f64("gate-center")?,
        delta_t: v.f64("delta-t")?,
        gate_width: v.f64("gate-width")?,
        delta_phi: v.f64("delta-phi")?,
        tau_s: v.f64("tau-s")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn density_table(v: &Values, d: &DetectorDensity) -> Result<Table, CliError> {
    let (lo, hi) = d.support();
    let lo = v.auto_f64("min")?.unwrap_or(lo);
    let hi = v.auto_f64("max")?.unwrap_or(hi);
    let mut t = Table::new(&["coordinate", "density"]);
    for x in linspace(lo, hi, v.usize("points")?)? {
        t.push(vec![x, d.eval(x)]);
    }
    Ok(t)
}

fn describe(rec: &mut Record, cfg: &ExperimentConfig, d: &DetectorDensity, flags: &[Assumption]) {
    rec.num("tau_gate", cfg.tau_gate());
    rec.num("tau_detector", cfg.tau_detector());
    rec.num("arrival_detector", cfg.arrival_detector());
    for (k, val) in d.params() {
        rec.num(k, val);
    }
    rec.num("total", d.total());
    for f in flags {
        rec.text("assumption", f.describe());
    }
}

fn slit(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let cfg = experiment(v)?;
    let tq = v.str("theory") == "tq";
    let d = match (v.str("mode"), tq) {
        ("free", true) => free_density(&cfg)?,
        ("free", false) => free_density_sqt(&cfg)?,
        (_, false) => single_slit_sqt(&cfg)?,
        (_, true) => {
            let r = single_slit_tq(&cfg)?;
            rec.num("sigma_x2", r.sigma_x2);
            rec.num("sigma_hat2", r.sigma_hat2);
            rec.num("time_norm2", r.time_norm2);
            r.density
        }
    };
    describe(rec, &cfg, &d, &cfg.assumption_flags());
    Ok(vec![(out.to_path_buf(), density_table(v, &d)?)])
}

fn doubleslit(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let cfg = experiment(v)?;
    let d = if v.str("theory") == "tq" { double_slit_tq(&cfg)? } else { double_slit_sqt(&cfg)? };
    rec.num("sigma_bar2", cfg.sigma_bar_detector2());
    rec.num("sigma_hat2", cfg.sigma_hat_detector2());
    describe(rec, &cfg, &d, &double_slit_flags(&cfg));
    Ok(vec![(out.to_path_buf(), density_table(v, &d)?)])
}

fn lindner(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let sigma_a = match v.auto_f64("sigma-a")? {
        Some(s) => s,
        None => width_in_time_seconds(v.f64("radius-pm")? * 1e-12)? * 1e18,
    };
    let (sd, f, phi, dt) = (v.f64("sigma-bar-d")?, v.f64("f-bar")?, v.f64("phi-bar")?, v.f64("delta-t")?);
    let l = lindner_predictions(sigma_a, sd, f)?;
    rec.num("sigma_a", sigma_a);
    rec.num("widened_sigma2", l.widened_sigma2);
    rec.num("variance_factor", l.variance_factor);
    rec.num("width_factor", l.width_factor);
    rec.num("frequency_factor", l.frequency_factor);
    rec.num("central_suppression", l.central_suppression);
    let sqt = double_slit_density(sd * sd, 0.0, dt, f, phi);
    let tq = double_slit_density(sd * sd, sigma_a * sigma_a, dt, f, phi);
    let (lo, hi) = tq.support();
    let mut t = Table::new(&["coordinate", "sqt", "tq"]);
    for x in linspace(lo, hi, v.usize("points")?)? {
        t.push(vec![x, sqt.eval(x), tq.eval(x)]);
    }
    Ok(vec![(out.to_path_buf(), t)])
}

fn fields(v: &Values, out: &Path, _: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let (m, e) = (v.f64("m")?, v.f64("charge")?);
    let taus = linspace(v.f64("tau-min")?, v.f64("tau-max")?, v.usize("points")?)?;
    let mt = v.f64("mean-t")?;
    let t = if v.str("kind") == "larmor" {
        let b = [v.f64("b0")?, v.f64("b1")?, v.f64("b2")?];
        let s0 = v.f64("sigma0")?;
        let mut t = Table::new(&["tau", "omega_bar", "omega_hat"]);
        for tau in taus {
            let (bar, hat) = larmor_shift(b, tau, mt, s0 * s0, m, e)?;
            t.push(vec![tau, bar, hat]);
        }
        t
    } else {
        let ef = [v.f64("e0")?, v.f64("e1")?, v.f64("e2")?];
        let (mt2, r2) = (v.f64("mean-t2")?, v.f64("mean-r2")?);
        let mut t = Table::new(&["tau", "rate"]);
        for tau in taus {
            t.push(vec![tau, x_discrepancy_rate(ef, tau, mt, mt2, r2, m, e)?]);
        }
        t
    };
    Ok(vec![(out.to_path_buf(), t)])
}

fn abtime(v: &Values, out: &Path, _: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let (pot, dtau, gamma, e) = (v.f64("v")?, v.f64("dtau")?, v.f64("gamma")?, v.f64("charge")?);
    let (tq, sqt) = ab_time_phase(pot, dtau, gamma, e)?;
    let mut t = Table::new(&["v", "dtau", "gamma", "phase_tq", "phase_sqt"]);
    t.push(vec![pot, dtau, gamma, tq, sqt]);
    Ok(vec![(out.to_path_buf(), t)])
}

fn read_signal(path: &str) -> Result<SampledSignal, CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{path}: {e}"));
    let mut r = csv::Reader::from_path(path).map_err(io)?;
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(io)?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("{path}: expected numeric columns t,re,im")))
        };
        ts.push(num(0)?);
        vs.push(C64::new(num(1)?, num(2)?));
    }
    Ok(SampledSignal::from_points(&ts, vs)?)
}

fn wavelet(v: &Values, out: &Path, rec: &mut Record) -> Result<Vec<(PathBuf, Table)>, CliError> {
    let spec = WaveletGridSpec {
        s_min: v.f64("s-min")?,
        s_max: v.f64("s-max")?,
        per_decade: v.usize("per-decade")?,
        d_step: v.f64("d-step")?,
        cutoff: v.f64("cutoff")?,
    };
    spec.validate()?;
    let f = if v.str("input").is_empty() {
        let (c, w, k) = (v.f64("center")?, v.f64("width")?, v.f64("k")?);
        SampledSignal::from_fn(v.f64("origin")?, v.f64("step")?, v.usize("n")?, move |t| {
            C64::from_polar((-(t - c).powi(2) / (2.0 * w * w)).exp(), k * t)
        })?
    } else {
        read_signal(v.str("input"))?
    };
    let coeffs = analyze(&f, &spec)?;
    let mut t = Table::new(&["s", "d", "re", "im"]);
    for (s, d, z) in coeffs.iter() {
        t.push(vec![s, d, z.re, z.im]);
    }
    let mut tables = vec![(out.to_path_buf(), t)];
    if v.str("reconstruct") == "yes" {
        let c = admissibility_constant(&spec, f.origin, f.step, f.len())?;
        let back = synthesize(&coeffs, c, f.origin, f.step, f.len())?;
        rec.num("admissibility", c);
        rec.num("relative_l2_error", back.l2_distance(&f) / f.norm());
        let mut s = Table::new(&["t", "re", "im"]);
        for (k, z) in back.values.iter().enumerate() {
            s.push(vec![back.time(k), z.re, z.im]);
        }
        tables.push((numbered(out, "synth"), s));
    }
    Ok(tables)
}
