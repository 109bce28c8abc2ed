use proptest::prelude::*;
use thzfade::channel::{
    derive_pointing, ftr_power_pdf, path_gain, pointing_pdf, FtrParams, LinkBudget, PointingParams,
};
use thzfade::montecarlo::{ftr_power_samples, ks_distance, pointing_samples, EmpiricalMetric, SimConfig};
use thzfade::special::gamma_p;
use thzfade::special::quad::integrate;

/// Distribution function of the normalized FTR power from the mixture weights.
fn ftr_power_cdf(p: &FtrParams, x: f64) -> f64 {
    let t = x / (2.0 * p.sigma2());
    p.weights()
        .iter()
        .enumerate()
        .map(|(j, w)| w * gamma_p(j as f64 + 1.0, t).unwrap())
        .sum()
}

fn bisect(mut f: impl FnMut(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn mixture_weights_pass_chi_square_against_sampler() {
    // equal-probability bins; 49 degrees of freedom, 0.1 % critical value 85.35
    for (k, m, delta) in [(10.0, 2.0, 0.5), (2.0, 2.0, 0.1), (2.0, 2.0, 0.9), (15.0, 10.0, 1.0)] {
        let p = FtrParams::new(k, m, delta).unwrap();
        let bins = 50;
        let edges: Vec<f64> = (1..bins)
            .map(|i| bisect(|x| ftr_power_cdf(&p, x), i as f64 / bins as f64, 0.0, 60.0))
            .collect();
        let n = 200_000;
        let samples = ftr_power_samples(&p, &SimConfig::new(n, 11)).unwrap();
        let mut counts = vec![0usize; bins];
        for x in samples {
            counts[edges.partition_point(|&e| e < x)] += 1;
        }
        let expect = n as f64 / bins as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        assert!(chi2 < 85.35, "K={k} m={m} Delta={delta}: chi2 = {chi2}");
    }
}

#[test]
fn sampler_ks_against_mixture() {
    let p = FtrParams::new(10.0, 2.0, 0.5).unwrap();
    let mut s = ftr_power_samples(&p, &SimConfig::new(100_000, 3)).unwrap();
    let d = ks_distance(&mut s, |x| ftr_power_cdf(&p, x));
    assert!(d < 1.63 / (100_000f64).sqrt(), "KS = {d}");
}

#[test]
fn rayleigh_limit_is_exponential() {
    let p = FtrParams::new(0.0, 2.0, 0.5).unwrap();
    let mut s = ftr_power_samples(&p, &SimConfig::new(100_000, 5)).unwrap();
    let d = ks_distance(&mut s, |x| 1.0 - (-x).exp());
    assert!(d < 1.63 / (100_000f64).sqrt(), "KS = {d}");
    assert!((ftr_power_pdf(&p, 0.7).unwrap().value - (-0.7f64).exp()).abs() < 1e-12);
}

#[test]
fn rician_limit_variance() {
    // m → ∞ with Δ = 0 leaves one steady specular wave: Var|h|² = (1+2K)/(1+K)²
    let k: f64 = 5.0;
    let p = FtrParams::new(k, 1e6, 0.0).unwrap();
    let s = ftr_power_samples(&p, &SimConfig::new(400_000, 9)).unwrap();
    let sq = EmpiricalMetric::mean(s.iter().map(|x| (x - 1.0).powi(2)), 4.0);
    let expect = (1.0 + 2.0 * k) / (1.0 + k).powi(2);
    assert!(sq.contains(expect), "{sq:?} vs {expect}");
}

#[test]
fn ftr_power_has_unit_mean_by_simulation() {
    for (k, m, delta) in [(10.0, 2.0, 0.5), (1.0, 4.0, 0.9)] {
        let p = FtrParams::new(k, m, delta).unwrap();
        let s = ftr_power_samples(&p, &SimConfig::new(200_000, 2)).unwrap();
        let mean = EmpiricalMetric::mean(s.into_iter(), 4.0);
        assert!(mean.contains(1.0), "{mean:?}");
        assert!((p.mean_power() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn pointing_samples_respect_support_and_moment() {
    for phi in [1.0, 2.5, 6.0] {
        let p = PointingParams::from_phi_s0(phi, 0.054).unwrap();
        let s = pointing_samples(&p, &SimConfig::new(200_000, 4)).unwrap();
        assert!(s.iter().all(|&h| h > 0.0 && h <= 0.054));
        let m2 = EmpiricalMetric::mean(s.iter().map(|h| h * h), 4.0);
        let phi2 = phi * phi;
        let expect = 0.054f64.powi(2) * phi2 / (phi2 + 2.0);
        assert!(m2.contains(expect), "phi={phi}: {m2:?} vs {expect}");
    }
}

#[test]
fn pointing_samples_ks_against_density() {
    let p = PointingParams::from_phi_s0(2.5, 0.054).unwrap();
    let mut s = pointing_samples(&p, &SimConfig::new(100_000, 8)).unwrap();
    let d = ks_distance(&mut s, |h| (h / 0.054).clamp(0.0, 1.0).powf(6.25));
    assert!(d < 1.63 / (100_000f64).sqrt(), "KS = {d}");
}

#[test]
fn derived_pointing_matches_sampler() {
    let p = derive_pointing(0.8, 0.12, 0.1).unwrap();
    let mut s = pointing_samples(&p, &SimConfig::new(50_000, 1)).unwrap();
    let r = p.s0();
    let d = ks_distance(&mut s, |h| (h / r).clamp(0.0, 1.0).powf(p.phi2()));
    assert!(d < 1.63 / (50_000f64).sqrt());
    let z = integrate(|h| pointing_pdf(&p, h), 0.0, r, 1e-12, 1e-10, 200).unwrap().value;
    assert!((z - 1.0).abs() < 1e-7);
}

#[test]
fn reference_link_budget() {
    let b = LinkBudget::thz_275ghz();
    let h = path_gain(&b);
    // lossless spreading gain times exp(−k d / 2)
    let expect = 0.173_503_46 * (-0.5 * 1.6e-3 * 50.0f64).exp();
    assert!((h - expect).abs() < 1e-8);
    assert_eq!(b.environment.pressure_pa, 101_325.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ftr_density_normalized(k in 0.0f64..15.0, m in 0.5f64..10.0, delta in 0.0f64..=1.0) {
        let p = FtrParams::new(k, m, delta).unwrap();
        let f = |x: f64| ftr_power_pdf(&p, x).unwrap().value;
        let total = integrate(f, 0.0, 1.0, 1e-12, 1e-9, 400).unwrap().value
            + integrate(f, 1.0, 80.0, 1e-12, 1e-9, 400).unwrap().value;
        prop_assert!((total - 1.0).abs() < 1e-4, "total = {}", total);
    }

    #[test]
    fn path_gain_decreases(d in 1.0f64..200.0, f in 50e9f64..500e9, k in 0.0f64..0.1) {
        let b = LinkBudget::new(f, d, 1e5, 1e5, k, 1e-3, 1e-12).unwrap();
        let h = path_gain(&b);
        prop_assert!(path_gain(&b.with_distance(d * 1.1).unwrap()) < h);
        prop_assert!(path_gain(&b.with_absorption(k + 1e-3).unwrap()) < h);
        let b2 = LinkBudget::new(f * 1.1, d, 1e5, 1e5, k, 1e-3, 1e-12).unwrap();
        prop_assert!(path_gain(&b2) < h);
    }

    #[test]
    fn pointing_density_normalized(phi in 0.5f64..8.0, s0 in 0.01f64..1.0) {
        let p = PointingParams::from_phi_s0(phi, s0).unwrap();
        let z = integrate(|h| pointing_pdf(&p, h), 0.0, s0, 1e-12, 1e-10, 400).unwrap().value;
        prop_assert!((z - 1.0).abs() < 1e-6);
        prop_assert_eq!(pointing_pdf(&p, s0 * 1.01), 0.0);
    }
}
