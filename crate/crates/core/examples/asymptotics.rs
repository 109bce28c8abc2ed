//! High-SNR outage and BER expansions and the diversity order L·min(1, phi²/2).

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::mrc::*;
use thzfade::singlelink::{ModulationSpec, SingleLinkChannel};

fn main() -> thzfade::Result<()> {
    let ctl = default_control();
    for (l, phi) in [(1, 1.0), (2, 2.5), (4, 6.0)] {
        let branch = SingleLinkChannel::new(FtrParams::new(10.0, 2.0, 0.5)?, PointingParams::from_phi_s0(phi, 0.054)?, 0.0)?;
        let ch = MrcChannel::iid(branch, l)?;
        println!("L = {l}, phi = {phi}: diversity order {}", diversity_order(&ch));
        for g0 in [30.0, 60.0, 90.0] {
            let c = ch.at_gamma0_db(g0)?;
            let po = outage_mrc(&c, 4.0)?.value / outage_mrc_asymptotic(&c, 4.0)?.value;
            let pb = ber_mrc(&c, ModulationSpec::bpsk(), &ctl)?.value / ber_mrc_asymptotic(&c, ModulationSpec::bpsk())?.value;
            println!("  {g0} dB: exact/asymptotic outage {po:.4}, BER {pb:.4}");
        }
    }
    Ok(())
}
