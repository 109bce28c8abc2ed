//! FTR mixture weights and power density for a few parameter sets.

use thzfade::channel::{ftr_power_pdf, FtrParams};

fn main() -> thzfade::Result<()> {
    for (k, m, delta) in [(10.0, 2.0, 0.5), (2.0, 4.0, 0.9), (0.0, 2.0, 0.5)] {
        let p = FtrParams::new(k, m, delta)?;
        println!(
            "K = {k}, m = {m}, Delta = {delta}: {} terms, tail mass {:.1e}, mean power {:.6}",
            p.weights().len(),
            p.tail_mass(),
            p.mean_power()
        );
        for x in [0.1, 0.5, 1.0, 2.0, 4.0] {
            println!("  f({x:>3}) = {:.6}", ftr_power_pdf(&p, x)?.value);
        }
    }
    Ok(())
}
