use std::f64::consts::PI;

use qtsim_core::foundation::{complex_sqrt, FourMomentum, FourVector, C64};
use qtsim_core::grid::{GridAxis, GridWaveFunction};
use qtsim_core::pathint::{propagate_sliced, DiscreteLagrangian, SliceConfig};
use qtsim_core::wavepackets::GaussianTestFunction;
use qtsim_core::Error;

fn packet(e0: f64, px: f64) -> GaussianTestFunction {
    GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(e0, px, 0.0, 0.0), [1.0; 4]).unwrap()
}

fn exact(psi: &GaussianTestFunction, tau: f64, m: f64, cfg: &SliceConfig) -> GridWaveFunction {
    psi.evolve(tau, m).unwrap().sample(cfg.axes.clone()).unwrap()
}

#[test]
fn single_slice_matches_first_step_wave_function() {
    let (m, e0, s2, eps) = (1.3, 0.8, 0.7, 0.4);
    let psi = GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(e0, 0.0, 0.0, 0.0), [s2, 1.0, 1.0, 1.0]).unwrap();
    let cfg = SliceConfig::auto(1, eps, &psi, m, &[0], 1e-9).unwrap();
    let out = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(m)).unwrap();
    // Single Gaussian integral written out by hand, times the slice normalization.
    let f = C64::new(1.0, -eps / (m * s2));
    let pref = (1.0 / (PI * s2)).powf(0.25) / complex_sqrt(f);
    let oracle = GridWaveFunction::from_fn(cfg.axes.clone(), out.rep, |p| {
        let t = p.t;
        let d = t - e0 * eps / m;
        let arg = C64::new(0.0, -e0 * t + e0 * e0 * eps / (2.0 * m) - 0.5 * m * eps) - d * d / (2.0 * s2 * f);
        pref * arg.exp()
    })
    .unwrap();
    assert!(out.l2_distance(&oracle) < 1e-6, "{}", out.l2_distance(&oracle));
}

#[test]
fn sixteen_slices_match_closed_form() {
    let psi = packet(1.0, 0.0);
    let cfg = SliceConfig::ladder(16, 1.0, &psi, 1.0, &[0]).unwrap();
    let out = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(1.0)).unwrap();
    assert!(out.l2_distance(&exact(&psi, 1.0, 1.0, &cfg)) < 1e-3);
    assert!((out.norm_sqr() - 1.0).abs() < 1e-4);
    assert_eq!(out.tau, 1.0);
}

#[test]
fn ladder_error_decreases() {
    let psi = packet(1.0, 0.0);
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let cfg = SliceConfig::ladder(n, 1.0, &psi, 1.0, &[0]).unwrap();
            let out = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(1.0)).unwrap();
            out.l2_distance(&exact(&psi, 1.0, 1.0, &cfg))
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn mass_term_is_a_global_phase() {
    let (m, tau) = (1.7, 0.6);
    let psi = packet(0.5, 0.0);
    let cfg = SliceConfig::auto(4, tau, &psi, m, &[0], 1e-8).unwrap();
    let with = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(m)).unwrap();
    let without = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(m).without_mass_term()).unwrap();
    let phase = C64::from_polar(1.0, -0.5 * m * tau);
    for (a, b) in with.data.iter().zip(&without.data) {
        assert!((a - b * phase).norm() < 1e-12);
    }
}

#[test]
fn constant_scalar_potential_matches_gauge_oracle() {
    let (m, tau, e, phi) = (1.0, 0.8, 0.5, 0.6);
    let psi = packet(1.0, 0.0);
    let cfg = SliceConfig::auto(3, tau, &psi, m, &[0], 1e-8).unwrap();
    let lag = DiscreteLagrangian::free(m).with_scalar(e, move |_| phi);
    let out = propagate_sliced(&psi, &cfg, &lag).unwrap();
    // K_Φ = e^{−ieΦ(t₁−t₀)}K₀: shift the energy of the input by −eΦ, evolve
    // freely, then restore the phase at the output.
    let shifted = GaussianTestFunction::new(FourVector::ZERO, FourMomentum::new(1.0 - e * phi, 0.0, 0.0, 0.0), [1.0; 4]).unwrap();
    let mut oracle = exact(&shifted, tau, m, &cfg);
    for (i, v) in oracle.data.iter_mut().enumerate() {
        let t = cfg.axes[0].value(i);
        *v *= C64::from_polar(1.0, -e * phi * t);
    }
    assert!(out.l2_distance(&oracle) < 1e-3, "{}", out.l2_distance(&oracle));
}

#[test]
fn weak_scalar_potential_phase_on_centroid_path() {
    // To first order in eΦ the relative phase at the centroid is −eΦΔt with
    // Δt = E₀τ/m the centroid displacement in time.
    let (m, tau, e, phi) = (1.0, 1.0, 1.0, 0.01);
    let psi = packet(1.0, 0.0);
    let cfg = SliceConfig::auto(4, tau, &psi, m, &[0], 1e-8).unwrap();
    let field = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(m).with_scalar(e, move |_| phi)).unwrap();
    let free = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(m)).unwrap();
    let dt = tau / m;
    let c = ((dt - cfg.axes[0].origin) / cfg.axes[0].spacing).round() as usize;
    let rel = (field.data[c] / free.data[c]).arg();
    assert!((rel + e * phi * dt).abs() < 1e-3, "{rel}");
}

#[test]
fn one_plus_one_free_matches_closed_form() {
    let psi = packet(1.0, 0.5);
    let cfg = SliceConfig::auto(4, 0.5, &psi, 1.0, &[0, 1], 1e-7).unwrap();
    let out = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(1.0)).unwrap();
    assert!(out.l2_distance(&exact(&psi, 0.5, 1.0, &cfg)) < 1e-5);
}

#[test]
fn general_sum_agrees_with_separable_sum() {
    let psi = packet(1.0, 0.0);
    let cfg = SliceConfig::auto(3, 0.5, &psi, 1.0, &[0], 1e-8).unwrap();
    let zero = DiscreteLagrangian::free(1.0).with_scalar(1.0, |_| 0.0);
    let a = propagate_sliced(&psi, &cfg, &zero).unwrap();
    let b = propagate_sliced(&psi, &cfg, &DiscreteLagrangian::free(1.0)).unwrap();
    assert!(a.l2_distance(&b) < 1e-12);
}

#[test]
fn constant_vector_potential_in_one_plus_one() {
    let (m, tau, e, ax) = (1.0, 0.4, 1.0, 0.3);
    let psi = packet(1.0, 0.2);
    let cfg = SliceConfig::auto(1, tau, &psi, m, &[0, 1], 1e-5).unwrap();
    let lag = DiscreteLagrangian::free(m).with_vector(e, move |_| [ax, 0.0, 0.0]);
    let out = propagate_sliced(&psi, &cfg, &lag).unwrap();
    // K_A = e^{ieA(x₁−x₀)}K₀.
    let shifted = packet(1.0, 0.2 - e * ax);
    let mut oracle = exact(&shifted, tau, m, &cfg);
    let axes = oracle.axes.clone();
    let shape: Vec<usize> = axes.iter().map(|a| a.n).collect();
    for (i, v) in oracle.data.iter_mut().enumerate() {
        let x = axes[1].value(i % shape[1]);
        *v *= C64::from_polar(1.0, e * ax * x);
    }
    assert!(out.l2_distance(&oracle) < 1e-3, "{}", out.l2_distance(&oracle));
}

#[test]
fn validation_failures() {
    let psi = packet(1.0, 0.0);
    let narrow = SliceConfig::new(4, 1.0, vec![GridAxis::new(0, -1.0, 1.0, 400).unwrap()]).unwrap();
    assert!(matches!(propagate_sliced(&psi, &narrow, &DiscreteLagrangian::free(1.0)), Err(Error::Grid(_))));
    let coarse = SliceConfig::new(64, 1.0, vec![GridAxis::new(0, -10.0, 10.0, 101).unwrap()]).unwrap();
    assert!(matches!(propagate_sliced(&psi, &coarse, &DiscreteLagrangian::free(1.0)), Err(Error::Grid(_))));
    let mut bad = psi;
    bad.sigma[0] = C64::new(-1.0, 0.0);
    let cfg = SliceConfig::ladder(4, 1.0, &psi, 1.0, &[0]).unwrap();
    assert!(propagate_sliced(&bad, &cfg, &DiscreteLagrangian::free(1.0)).is_err());
}
