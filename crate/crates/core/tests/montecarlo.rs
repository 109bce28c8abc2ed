use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thzfade::channel::{FtrParams, PointingParams};
use thzfade::montecarlo::*;
use thzfade::mrc::MrcChannel;
use thzfade::singlelink::{ModulationSpec, SingleLinkChannel};

fn channel(l: usize) -> MrcChannel {
    let b = SingleLinkChannel::new(
        FtrParams::new(10.0, 2.0, 0.5).unwrap(),
        PointingParams::from_phi_s0(2.5, 0.054).unwrap(),
        35.0,
    )
    .unwrap();
    MrcChannel::iid(b, l).unwrap()
}

#[test]
fn vanishing_threshold_gives_no_outage() {
    let m = estimate_outage(&channel(1), -300.0, &SimConfig::new(20_000, 1)).unwrap();
    assert_eq!(m.value, 0.0);
    assert!(m.undersampled);
}

#[test]
fn diversity_lowers_simulated_outage() {
    let cfg = SimConfig::new(100_000, 2);
    let one = estimate_outage(&channel(1), 4.0, &cfg).unwrap();
    let two = estimate_outage(&channel(2), 4.0, &cfg).unwrap();
    assert!(two.ci_high < one.ci_low);
}

#[test]
fn bit_identical_reruns() {
    let cfg = SimConfig::new(50_000, 33);
    let ch = channel(2);
    assert_eq!(estimate_ber(&ch, ModulationSpec::bpsk(), &cfg).unwrap(), estimate_ber(&ch, ModulationSpec::bpsk(), &cfg).unwrap());
    assert_eq!(estimate_capacity(&ch, &cfg).unwrap(), estimate_capacity(&ch, &cfg).unwrap());
}

#[test]
fn interval_contains_estimate_and_shrinks() {
    let ch = channel(1);
    let small = estimate_capacity(&ch, &SimConfig::new(20_000, 4)).unwrap();
    let large = estimate_capacity(&ch, &SimConfig::new(320_000, 4)).unwrap();
    for m in [small, large] {
        assert!(m.contains(m.value));
    }
    let ratio = (small.ci_high - small.ci_low) / (large.ci_high - large.ci_low);
    assert!((ratio - 4.0).abs() < 0.4, "width ratio {ratio}");
}

#[test]
fn outage_curve_reuses_samples() {
    let ch = channel(2);
    let cfg = SimConfig::new(50_000, 6);
    let curve = estimate_outage_curve(&ch, 4.0, &[35.0, 45.0], &cfg).unwrap();
    let direct = estimate_outage(&ch, 4.0, &cfg).unwrap();
    assert_eq!(curve[0], direct);
    assert!(curve[1].value < curve[0].value);
}

#[test]
fn disjoint_streams_uncorrelated() {
    // batch means from consecutive chunks: lag-one correlation within 3/√B
    let cfg = SimConfig {
        chunk: 1000,
        ..SimConfig::new(400_000, 12)
    };
    let s = sample_unit_snr(&channel(1), &cfg).unwrap();
    let means: Vec<f64> = s.chunks(1000).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let b = means.len() as f64;
    let mu = means.iter().sum::<f64>() / b;
    let var: f64 = means.iter().map(|m| (m - mu).powi(2)).sum();
    let cov: f64 = means.windows(2).map(|w| (w[0] - mu) * (w[1] - mu)).sum();
    let r = cov / var;
    assert!(r.abs() < 3.0 / b.sqrt(), "lag-one correlation {r}");
}

#[test]
fn samplers_accept_any_rng() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = PointingParams::from_phi_s0(1.0, 0.5).unwrap();
    let h = sample_pointing(&p, &mut rng);
    assert!(h > 0.0 && h <= 0.5);
    let f = FtrParams::new(3.0, 1.0, 0.2).unwrap();
    assert!(sample_ftr_power(&f, &mut rng) >= 0.0);
}

#[test]
fn small_runs_rejected() {
    assert!(estimate_outage(&channel(1), 4.0, &SimConfig::new(500, 1)).is_err());
}
