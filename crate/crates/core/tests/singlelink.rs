use proptest::prelude::*;
use thzfade::channel::{FtrParams, PointingParams};
use thzfade::montecarlo::{estimate_ber, estimate_capacity, estimate_outage, SimConfig};
use thzfade::mrc::MrcChannel;
use thzfade::singlelink::*;
use thzfade::special::quad::integrate_log;

fn link(phi: f64, gamma0_db: f64) -> SingleLinkChannel {
    SingleLinkChannel::new(
        FtrParams::new(10.0, 2.0, 0.5).unwrap(),
        PointingParams::from_phi_s0(phi, 0.054).unwrap(),
        gamma0_db,
    )
    .unwrap()
}

fn sim() -> SimConfig {
    SimConfig::new(200_000, 21).with_z(3.0)
}

#[test]
fn xi_scale() {
    let ch = link(2.5, 0.0);
    // 2σ²S₀² with σ² = 1/22
    assert!((ch.xi() - 0.054f64.powi(2) / 11.0).abs() < 1e-15);
    assert!((ch.a() - 3.125).abs() < 1e-15);
}

#[test]
fn density_integrates_to_one() {
    for phi in [1.0, 2f64.sqrt(), 2.5, 6.0] {
        let ch = link(phi, 30.0);
        let xi = ch.xi();
        let r = integrate_log(|x| snr_pdf(&ch, x).unwrap().value, xi * 1e-14, xi * 500.0, 1e-300, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-6, "phi={phi}: {}", r.value);
    }
}

#[test]
fn density_is_derivative_of_distribution() {
    let ch = link(2.5, 30.0);
    for x in [0.5, 2.0, 8.0] {
        let h = 1e-5 * x;
        let d = (snr_cdf(&ch, x + h).unwrap().value - snr_cdf(&ch, x - h).unwrap().value) / (2.0 * h);
        let f = snr_pdf(&ch, x).unwrap().value;
        assert!((d - f).abs() < 1e-6 * f, "x={x}: {d} vs {f}");
    }
}

#[test]
fn outage_matches_simulation() {
    for phi in [1.0, 2.5] {
        for g0 in [30.0, 45.0] {
            let ch = link(phi, g0);
            let a = outage_single(&ch, 4.0).unwrap().value;
            let m = estimate_outage(&MrcChannel::from(ch), 4.0, &sim()).unwrap();
            assert!(m.contains(a), "phi={phi} g0={g0}: {a} vs {m:?}");
        }
    }
}

#[test]
fn ber_matches_simulation() {
    for name in ["bpsk", "ncfsk"] {
        let modulation = ModulationSpec::by_name(name).unwrap();
        let ch = link(2.5, 40.0);
        let a = ber_single(&ch, modulation).unwrap().value;
        let m = estimate_ber(&MrcChannel::from(ch), modulation, &sim()).unwrap();
        assert!(m.contains(a), "{name}: {a} vs {m:?}");
    }
}

#[test]
fn capacity_paths_agree() {
    for phi in [1.0, 6.0] {
        let ch = link(phi, 40.0);
        let exact = capacity_single_exact(&ch).unwrap();
        let quad = capacity_single_quadrature(&ch).unwrap();
        assert!((exact.value - quad.value).abs() < 1e-6 * exact.value);
        let bound = capacity_single_bound(&ch).unwrap();
        assert!(bound.value <= exact.value);
        let m = estimate_capacity(&MrcChannel::from(ch), &sim()).unwrap();
        assert!(m.contains(exact.value), "{} vs {m:?}", exact.value);
    }
}

#[test]
fn capacity_bound_tightens_with_snr() {
    let gap = |g0| {
        let ch = link(2.5, g0);
        capacity_single_exact(&ch).unwrap().value - capacity_single_bound(&ch).unwrap().value
    };
    assert!(gap(60.0) < gap(40.0));
    assert!(gap(60.0) < 1e-2);
}

#[test]
fn modulation_presets() {
    assert_eq!(ModulationSpec::bpsk(), ModulationSpec::new(0.5, 1.0).unwrap());
    assert_eq!(ModulationSpec::by_name("dbpsk"), Some(ModulationSpec::new(1.0, 1.0).unwrap()));
    assert!(ModulationSpec::by_name("qam").is_none());
    assert!(ModulationSpec::new(0.0, 1.0).is_err());
    // DBPSK conditional error is e^{−γ}/2
    assert!((ModulationSpec::dbpsk().conditional_ber(2.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
}

#[test]
fn rejects_negative_snr() {
    let ch = link(2.5, 30.0);
    assert!(snr_cdf(&ch, -1.0).is_err());
    assert!(snr_pdf(&ch, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distribution_is_monotone_and_bounded(phi in 0.6f64..7.0, x in 1e-4f64..50.0, g0 in 0.0f64..60.0) {
        let ch = link(phi, g0);
        let lo = snr_cdf(&ch, x).unwrap().value;
        let hi = snr_cdf(&ch, x * 1.5).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-12);
        prop_assert!(snr_pdf(&ch, x).unwrap().value >= 0.0);
    }

    #[test]
    fn outage_falls_with_gamma0(phi in 0.6f64..7.0, g0 in 0.0f64..70.0) {
        let a = outage_single(&link(phi, g0), 4.0).unwrap().value;
        let b = outage_single(&link(phi, g0 + 3.0), 4.0).unwrap().value;
        prop_assert!(b <= a + 1e-12);
    }
}
