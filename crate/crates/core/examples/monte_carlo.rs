//! Simulated outage, BER and capacity with confidence intervals next to the analytic values.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::montecarlo::{estimate_ber, estimate_capacity, estimate_outage, SimConfig};
use thzfade::mrc::{ber_mrc, capacity_mrc, default_control, outage_mrc, MrcChannel, DEFAULT_EPSILON};
use thzfade::singlelink::{ModulationSpec, SingleLinkChannel};

fn main() -> thzfade::Result<()> {
    let branch = SingleLinkChannel::new(FtrParams::new(10.0, 2.0, 0.5)?, PointingParams::from_phi_s0(2.5, 0.054)?, 30.0)?;
    let ch = MrcChannel::iid(branch, 2)?;
    let cfg = SimConfig::new(200_000, 42);
    let ctl = default_control();

    let show = |name: &str, exact: f64, m: thzfade::montecarlo::EmpiricalMetric| {
        println!("{name:>8}: analytic {exact:.5e}, simulated {:.5e} in [{:.5e}, {:.5e}]", m.value, m.ci_low, m.ci_high);
    };
    show("outage", outage_mrc(&ch, 4.0)?.value, estimate_outage(&ch, 4.0, &cfg)?);
    show("ber", ber_mrc(&ch, ModulationSpec::bpsk(), &ctl)?.value, estimate_ber(&ch, ModulationSpec::bpsk(), &cfg)?);
    show("capacity", capacity_mrc(&ch, &ctl, DEFAULT_EPSILON)?.value, estimate_capacity(&ch, &cfg)?);
    Ok(())
}
