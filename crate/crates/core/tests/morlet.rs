use qtsim_core::morlet::*;
use qtsim_core::C64;

const T0: f64 = -10.0;
const H: f64 = 0.02;
const N: usize = 1001;

fn gauss(center: f64, w: f64, k: f64) -> impl Fn(f64) -> C64 {
    move |t| C64::from_polar((-(t - center).powi(2) / (2.0 * w * w)).exp(), k * t)
}

/// `C = 2π ∫ du/|u| |φ̂(u)|²` with `φ̂(u) = e^{−(u−1)²/2} − e^{−1/2} e^{−u²/2}`, by a fine
/// midpoint rule in `ln|u|` on both half lines.
fn fourier_constant() -> f64 {
    let phi = |u: f64| (-(u - 1.0).powi(2) / 2.0).exp() - (-0.5f64).exp() * (-u * u / 2.0).exp();
    let (a, b, n) = (-30.0f64, 5.0f64, 400_000);
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for k in 0..n {
        let u = (a + h * (k as f64 + 0.5)).exp();
        s += (phi(u).powi(2) + phi(-u).powi(2)) * h;
    }
    2.0 * std::f64::consts::PI * s
}

#[test]
fn admissibility_matches_fourier_oracle() {
    let spec = WaveletGridSpec::default();
    let c = admissibility_constant(&spec, T0, H, N).unwrap();
    let oracle = fourier_constant();
    eprintln!("C = {c}, oracle = {oracle}");
    assert!((c / oracle - 1.0).abs() < 1e-3);
}

#[test]
fn admissibility_independent_of_width() {
    let spec = WaveletGridSpec::default();
    let rs: Vec<f64> =
        [0.5, 1.0, 2.0].iter().map(|&w| admissibility_ratio(&spec, &reference_gaussian(T0, H, N, w).unwrap()).unwrap()).collect();
    eprintln!("{rs:?}");
    for r in &rs {
        assert!((r / rs[1] - 1.0).abs() < 1e-3);
    }
}

#[test]
fn two_gaussian_round_trip() {
    let spec = WaveletGridSpec::default();
    let c = admissibility_constant(&spec, T0, H, N).unwrap();
    let f = SampledSignal::from_fn(T0, H, N, |t| gauss(-2.0, 1.0, 0.8)(t) + gauss(2.5, 1.4, -0.4)(t) * 0.6).unwrap();
    let back = synthesize(&analyze(&f, &spec).unwrap(), c, T0, H, N).unwrap();
    let err = back.l2_distance(&f) / f.norm();
    eprintln!("two-gaussian relative L2 error {err}");
    assert!(err < 1e-3);
}

#[test]
fn self_coefficient_is_norm() {
    let w = WaveletPoint::new(1.0, 0.0).unwrap();
    let f = SampledSignal::from_fn(T0, H, N, |t| morlet_eval(w, t).unwrap()).unwrap();
    let spec = WaveletGridSpec { s_min: 1.0, s_max: 10.0, per_decade: 1, d_step: 0.25, cutoff: 12.0 };
    let c = analyze(&f, &spec).unwrap();
    let row = c.rows.iter().find(|r| r.s == 1.0).unwrap();
    let k = row.coeffs.iter().enumerate().position(|(k, _)| row.d(k).abs() < 1e-9).unwrap();
    let norm2 = f.norm().powi(2);
    assert!((row.coeffs[k] - C64::new(norm2, 0.0)).norm() < 1e-10);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
    #[test]
    fn wavelets_have_zero_mean(log_s in -1.0f64..1.0, neg in proptest::bool::ANY, d in -5.0f64..5.0) {
        let s = if neg { -10f64.powf(log_s) } else { 10f64.powf(log_s) };
        let w = WaveletPoint::new(s, d).unwrap();
        let (a, b, n) = (d - 16.0 * s.abs(), d + 16.0 * s.abs(), 8000);
        let h = (b - a) / n as f64;
        let mut sum = C64::new(0.0, 0.0);
        for k in 0..=n {
            let wt = if k == 0 || k == n { 0.5 } else { 1.0 };
            sum += morlet_eval(w, a + k as f64 * h).unwrap() * wt * h;
        }
        proptest::prop_assert!(sum.norm() < 1e-8, "{sum}");
    }

    #[test]
    fn analyze_is_linear(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let spec = WaveletGridSpec { s_min: 0.5, s_max: 4.0, per_decade: 4, d_step: 0.5, cutoff: 8.0 };
        let f = SampledSignal::from_fn(T0, H, N, gauss(0.5, 1.2, 0.7)).unwrap();
        let alpha = C64::new(re, im);
        let g = SampledSignal::from_fn(T0, H, N, |t| gauss(0.5, 1.2, 0.7)(t) * alpha).unwrap();
        let (a, b) = (analyze(&f, &spec).unwrap(), analyze(&g, &spec).unwrap());
        for ((_, _, x), (_, _, y)) in a.iter().zip(b.iter()) {
            proptest::prop_assert!((x * alpha - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }
}
