mod common;

use std::f64::consts::PI;

use common::mean_var;
use dsncp::cluster::{ClusterSimulator, ModelFamily, ModelParams};
use dsncp::dpp::{ginibre_spectrum, max_beta, sample_dpp, GinibreParams, DEFAULT_RELATIVE_TOL};
use dsncp::envelope::{global_envelope, CurveEnsemble};
use dsncp::summaries::{k_hat, linspace, pcf_hat};
use dsncp::{Point, PointPattern, RngStream, Window};

fn counts(sim: &ClusterSimulator, reps: usize, stream: u64) -> Vec<f64> {
    let root = RngStream::new(11, stream);
    (0..reps).map(|k| sim.sample(&mut root.child(k as u64)).unwrap().len() as f64).collect()
}

#[test]
fn mean_count_matches_intensity_for_all_families() {
    let w = Window::unit_square();
    for (i, family) in ModelFamily::ALL.into_iter().enumerate() {
        let m = if family.is_dpp() {
            ModelParams::dpp(family, 50.0, 0.03, 30.0, max_beta(30.0)).unwrap()
        } else {
            ModelParams::thomas(50.0, 0.03, 30.0).unwrap()
        };
        let sim = ClusterSimulator::with_default_extension(m, w).unwrap();
        let c = counts(&sim, 200, i as u64);
        let (mean, var) = mean_var(&c);
        let se = (var / c.len() as f64).sqrt();
        assert!((mean - 1500.0).abs() <= 3.0 * se, "{family}: mean {mean} vs 1500 (SE {se})");
    }
}

#[test]
fn large_window_regime_has_about_400_points() {
    let w = Window::square(20.0).unwrap();
    for (i, family) in ModelFamily::ALL.into_iter().enumerate() {
        let m = ModelParams::from_beta(family, 16.0 * PI, 1.0, 4.0).unwrap();
        let sim = ClusterSimulator::with_default_extension(m, w).unwrap();
        let c = counts(&sim, 200, 10 + i as u64);
        let (mean, var) = mean_var(&c);
        let se = (var / c.len() as f64).sqrt();
        assert!((mean - 400.0).abs() <= 3.0 * se, "{family}: mean {mean} vs 400 (SE {se})");
    }
}

#[test]
fn ginibre_pcf_estimate_follows_one_minus_correlation() {
    // standard Ginibre on a disc of radius 15, observed in [-10, 10]²; the n(n-1)
    // normalisation is biased by about 1/n for nearly fixed counts, so n ≈ 127 keeps it small
    let params = GinibreParams::new(1.0, 1.0 / PI).unwrap();
    let spec = ginibre_spectrum(params, Point::new(0.0, 0.0), 15.0, DEFAULT_RELATIVE_TOL).unwrap();
    let w = Window::rect(-10.0, 10.0, -10.0, 10.0).unwrap();
    let grid = linspace(0.6, 2.0, 15);
    let reps = 200;
    let root = RngStream::new(12, 0);
    let mut mean = vec![0.0; grid.len()];
    for k in 0..reps {
        let x = sample_dpp(&spec, &mut root.child(k)).unwrap();
        let x = PointPattern::restricted(x.into_points(), w);
        let g = pcf_hat(&x, &grid, Some(0.3)).unwrap();
        for (m, v) in mean.iter_mut().zip(&g.values) {
            *m += v / reps as f64;
        }
    }
    for (r, g) in grid.iter().zip(&mean) {
        let want = 1.0 - (-r * r).exp();
        assert!((g - want).abs() < 0.05, "r = {r}: mean pcf {g} vs {want}");
    }
}

/// 95% global envelope of K̂ − πr² from `n` simulations of `m`.
fn k_envelope(m: ModelParams, stream: u64, n: usize) -> dsncp::envelope::EnvelopeResult {
    let w = Window::unit_square();
    let sim = ClusterSimulator::with_default_extension(m, w).unwrap();
    let grid = linspace(0.005, 0.1, 20);
    let root = RngStream::new(13, stream);
    let curves: Vec<Vec<f64>> = (0..=n)
        .map(|k| {
            let x = sim.sample(&mut root.child(k as u64)).unwrap();
            let kh = k_hat(&x, &grid).unwrap();
            kh.values.iter().zip(&grid).map(|(v, r)| v - PI * r * r).collect()
        })
        .collect();
    let ens = CurveEnsemble::new(grid, curves[0].clone(), curves[1..].to_vec()).unwrap();
    global_envelope(&ens, 0.95).unwrap()
}

#[test]
fn tiny_dpp_scale_approaches_thomas() {
    let (gamma, alpha, rho) = (10.0, 0.03, 30.0);
    let thomas = k_envelope(ModelParams::thomas(gamma, alpha, rho).unwrap(), 0, 199);
    let near = ModelParams::dpp(ModelFamily::GinibreDppThomas, gamma, alpha, rho, 0.01 * max_beta(rho)).unwrap();
    let dpp = k_envelope(near, 1, 199);
    for k in 0..thomas.r.len() {
        assert!(
            thomas.lower[k] <= dpp.central[k] && dpp.central[k] <= thomas.upper[k],
            "r = {}: DPP mean {} outside Thomas envelope [{}, {}]",
            thomas.r[k],
            dpp.central[k],
            thomas.lower[k],
            thomas.upper[k]
        );
        assert!(dpp.lower[k] <= thomas.central[k] && thomas.central[k] <= dpp.upper[k]);
    }
}
