//! Outage of L-branch maximal ratio combining, including unequal branches.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::mrc::{outage_mrc, MrcChannel};
use thzfade::singlelink::SingleLinkChannel;

fn main() -> thzfade::Result<()> {
    let pointing = PointingParams::from_phi_s0(2.5, 0.054)?;
    let branch = |k: f64| SingleLinkChannel::new(FtrParams::new(k, 2.0, 0.5)?, pointing, 35.0);

    for l in 1..=4 {
        let ch = MrcChannel::iid(branch(10.0)?, l)?;
        let r = outage_mrc(&ch, 4.0)?;
        println!("L = {l}: P_out = {:.4e} (+/- {:.1e})", r.value, r.abs_error);
    }

    let mixed = MrcChannel::new(vec![branch(10.0)?, branch(2.0)?, branch(0.5)?])?;
    println!("K = 10, 2, 0.5: P_out = {:.4e}", outage_mrc(&mixed, 4.0)?.value);
    Ok(())
}
