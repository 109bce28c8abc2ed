//! Outage, BER and ergodic capacity of one link across the average SNR.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::singlelink::*;

fn main() -> thzfade::Result<()> {
    let ftr = FtrParams::new(10.0, 2.0, 0.5)?;
    let pointing = PointingParams::from_phi_s0(2.5, 0.054)?;
    println!("gamma0_db  outage(4 dB)  ber_bpsk      capacity  bound");
    for g0 in [0.0, 10.0, 20.0, 30.0, 40.0, 50.0] {
        let ch = SingleLinkChannel::new(ftr.clone(), pointing, g0)?;
        println!(
            "{g0:>9}  {:.4e}    {:.4e}    {:.4}    {:.4}",
            outage_single(&ch, 4.0)?.value,
            ber_single(&ch, ModulationSpec::bpsk())?.value,
            capacity_single_exact(&ch)?.value,
            capacity_single_bound(&ch)?.value
        );
    }
    Ok(())
}
