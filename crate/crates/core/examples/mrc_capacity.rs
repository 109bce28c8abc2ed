//! Ergodic capacity against the number of combined branches.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::mrc::{capacity_mrc, default_control, MrcChannel, DEFAULT_EPSILON};
use thzfade::singlelink::SingleLinkChannel;

fn main() -> thzfade::Result<()> {
    let ctl = default_control();
    let branch = SingleLinkChannel::new(FtrParams::new(10.0, 2.0, 0.5)?, PointingParams::from_phi_s0(2.5, 0.054)?, 30.0)?;
    let mut prev = 0.0;
    for l in 1..=4 {
        let c = capacity_mrc(&MrcChannel::iid(branch.clone(), l)?, &ctl, DEFAULT_EPSILON)?;
        println!("L = {l}: C = {:.4} bit/s/Hz, gain {:.4}, notes {:?}", c.value, c.value - prev, c.notes);
        prev = c.value;
    }
    Ok(())
}
