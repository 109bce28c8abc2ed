//! Average BER under MRC from the Fox H form, checked against direct quadrature.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::mrc::{ber_mrc, ber_mrc_quadrature, default_control, MrcChannel};
use thzfade::singlelink::{ModulationSpec, SingleLinkChannel};

fn main() -> thzfade::Result<()> {
    let ctl = default_control();
    let branch = SingleLinkChannel::new(FtrParams::new(10.0, 2.0, 0.5)?, PointingParams::from_phi_s0(2.5, 0.054)?, 0.0)?;
    for name in ["bpsk", "dbpsk"] {
        let modulation = ModulationSpec::by_name(name).expect("preset");
        for g0 in [20.0, 30.0] {
            let ch = MrcChannel::iid(branch.at_gamma0_db(g0)?, 2)?;
            let fox = ber_mrc(&ch, modulation, &ctl)?.value;
            let quad = ber_mrc_quadrature(&ch, modulation, &ctl)?.value;
            println!("{name:>5} L = 2, {g0} dB: Fox H {fox:.6e}, quadrature {quad:.6e}");
        }
    }
    Ok(())
}
