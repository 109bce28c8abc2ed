use proptest::prelude::*;
use thzfade::channel::{FtrParams, PointingParams};
use thzfade::montecarlo::{estimate_capacity, estimate_outage, SimConfig};
use thzfade::mrc::*;
use thzfade::singlelink::*;
use thzfade::special::quad::integrate_log;
use thzfade::units::db_to_linear;

fn branch(k: f64, phi: f64, gamma0_db: f64) -> SingleLinkChannel {
    SingleLinkChannel::new(
        FtrParams::new(k, 2.0, 0.5).unwrap(),
        PointingParams::from_phi_s0(phi, 0.054).unwrap(),
        gamma0_db,
    )
    .unwrap()
}

#[test]
fn single_branch_reduction_all_metrics() {
    let ctl = default_control();
    for phi in [1.0, 6.0] {
        let b = branch(10.0, phi, 35.0);
        let ch = MrcChannel::from(b.clone());
        let pairs = [
            (
                ber_mrc(&ch, ModulationSpec::bpsk(), &ctl).unwrap().value,
                ber_single(&b, ModulationSpec::bpsk()).unwrap().value,
            ),
            (
                capacity_mrc(&ch, &ctl, DEFAULT_EPSILON).unwrap().value,
                capacity_single_exact(&b).unwrap().value,
            ),
            (outage_mrc(&ch, 4.0).unwrap().value, outage_single(&b, 4.0).unwrap().value),
        ];
        for (m, s) in pairs {
            assert!((m - s).abs() < 1e-6 * s, "phi={phi}: {m} vs {s}");
        }
    }
}

#[test]
fn two_branch_density_normalized() {
    let ch = MrcChannel::iid(branch(10.0, 2.5, 30.0), 2).unwrap();
    let d = MrcDistribution::new(&ch);
    let ctl = default_control();
    let xi = ch.xis()[0];
    let r = integrate_log(|x| d.pdf(x, &ctl).unwrap().value, xi * 1e-12, xi * 800.0, 1e-300, 1e-8).unwrap();
    assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
}

#[test]
fn non_identical_branches_match_simulation() {
    let ch = MrcChannel::new(vec![branch(10.0, 2.5, 40.0), branch(2.0, 2.5, 40.0), branch(0.5, 2.5, 40.0)]).unwrap();
    let cfg = SimConfig::new(200_000, 17).with_z(3.0);
    let a = outage_mrc(&ch, 4.0).unwrap().value;
    let m = estimate_outage(&ch, 4.0, &cfg).unwrap();
    assert!(m.contains(a), "{a} vs {m:?}");
    let c = capacity_mrc(&ch, &default_control(), DEFAULT_EPSILON).unwrap().value;
    let m = estimate_capacity(&ch, &cfg).unwrap();
    assert!(m.contains(c), "{c} vs {m:?}");
}

#[test]
fn termwise_series_matches_aggregated_kernel() {
    let ctl = default_control();
    let ch = MrcChannel::new(vec![branch(1.0, 1.0, 40.0), branch(0.3, 1.0, 40.0)]).unwrap();
    for g in [0.3, 2.0] {
        let agg = mrc_snr_cdf(&ch, g, &ctl).unwrap().value;
        let tw = mrc_snr_cdf_termwise(&ch, g, 1e-10, &ctl).unwrap();
        assert!((agg - tw.value).abs() < 1e-6 * agg, "g={g}: {agg} vs {}", tw.value);
        assert!(tw.series_terms > 2);
    }
}

#[test]
fn termwise_spec_shape() {
    let ch = MrcChannel::iid(branch(1.0, 2.5, 40.0), 3).unwrap();
    let spec = termwise_cdf_spec(&ch, &[0, 1, 2], 1.0).unwrap();
    assert_eq!(spec.dim(), 3);
    assert!(termwise_cdf_spec(&ch, &[0, 1], 1.0).is_err());
}

#[test]
fn more_branches_lower_outage() {
    let mut prev = 1.0;
    for l in 1..=4 {
        let ch = MrcChannel::iid(branch(10.0, 2.5, 35.0), l).unwrap();
        let p = outage_mrc(&ch, 4.0).unwrap().value;
        assert!(p < prev, "L={l}: {p} !< {prev}");
        prev = p;
    }
}

#[test]
fn asymptotic_ratio_tends_to_one() {
    for (l, phi) in [(2, 1.0), (3, 2.5)] {
        let ch = MrcChannel::iid(branch(10.0, phi, 90.0), l).unwrap();
        let e = outage_mrc(&ch, 4.0).unwrap().value;
        let a = outage_mrc_asymptotic(&ch, 4.0).unwrap().value;
        assert!((e / a - 1.0).abs() < 1e-2, "L={l} phi={phi}: {}", e / a);
        let e = ber_mrc(&ch, ModulationSpec::bpsk(), &default_control()).unwrap().value;
        let a = ber_mrc_asymptotic(&ch, ModulationSpec::bpsk()).unwrap().value;
        assert!((e / a - 1.0).abs() < 1e-2, "L={l} phi={phi}: {}", e / a);
    }
}

#[test]
fn asymptotic_terms_leading_exponent() {
    let t = AsymptoticTerms::new(&MrcChannel::iid(branch(10.0, 2.5, 40.0), 2).unwrap());
    assert_eq!(t.leading_exponents, vec![1.0, 1.0]);
    assert_eq!(t.diversity_order, 2.0);
    let t = AsymptoticTerms::new(&MrcChannel::iid(branch(10.0, 2f64.sqrt(), 40.0), 2).unwrap());
    assert!(!t.notes.is_empty());
}

#[test]
fn capacity_flags_large_epsilon() {
    let ch = MrcChannel::iid(branch(10.0, 2.5, 40.0), 2).unwrap();
    let r = capacity_mrc(&ch, &default_control(), 0.5).unwrap();
    assert!(!r.converged);
    assert!(r.notes.iter().any(|n| n == "epsilon-unstable"));
    assert!(capacity_mrc(&ch, &default_control(), 0.0).is_err());
}

#[test]
fn ber_dual_path_two_branches() {
    let ch = MrcChannel::iid(branch(10.0, 2.5, 30.0), 2).unwrap();
    let r = ber_mrc_checked(&ch, ModulationSpec::dbpsk(), &default_control()).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("cross-check")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distribution_monotone(phi in 0.8f64..6.0, g0 in 10.0f64..60.0, x_db in -10.0f64..10.0) {
        let ch = MrcChannel::iid(branch(10.0, phi, g0), 2).unwrap();
        let d = MrcDistribution::new(&ch);
        let ctl = default_control();
        let lo = d.cdf(db_to_linear(x_db), &ctl).unwrap().value;
        let hi = d.cdf(db_to_linear(x_db + 2.0), &ctl).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-9);
    }
}
