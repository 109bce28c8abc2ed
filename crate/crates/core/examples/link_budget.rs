//! Link budget at 275 GHz and the pointing-error parameters it implies.

use thzfade::channel::{derive_pointing, path_gain, LinkBudget};
use thzfade::units::linear_to_db;

fn main() -> thzfade::Result<()> {
    let budget = LinkBudget::thz_275ghz();
    println!("path gain h_l       = {:.6}", path_gain(&budget));
    println!("average SNR gamma_0 = {:.2} dB", linear_to_db(budget.gamma0()));

    for d in [10.0, 50.0, 100.0] {
        let b = budget.with_distance(d)?;
        println!("  d = {d:>5} m: h_l = {:.6}, gamma_0 = {:.2} dB", path_gain(&b), linear_to_db(b.gamma0()));
    }

    // Beam width 0.8 m and jitter 0.12 m at a 0.1 m receiver aperture.
    let p = derive_pointing(0.8, 0.12, 0.1)?;
    println!("pointing: phi = {:.4}, S0 = {:.6}", p.phi(), p.s0());
    Ok(())
}
