//! Meijer G and multivariate Fox H evaluation on closed-form cases.

use thzfade::channel::{FtrParams, PointingParams};
use thzfade::mrc::{default_control, mrc_snr_cdf, mrc_snr_cdf_termwise, termwise_cdf_spec, MrcChannel};
use thzfade::singlelink::SingleLinkChannel;
use thzfade::special::{fox_h_multivariate, meijer_g, FoxHSpec, GammaFactorGroup, QuadratureControl};

fn main() -> thzfade::Result<()> {
    let ctl = QuadratureControl::default();

    // G^{1,1}_{1,1}(z | 0; 0) = 1/(1+z)
    let g = GammaFactorGroup::meijer(&[0.0], 1, &[0.0], 1)?;
    for z in [0.1, 1.0, 10.0] {
        println!("G(1/(1+z)) at {z}: {:.12} vs {:.12}", meijer_g(&g, z, &ctl)?.value, 1.0 / (1.0 + z));
    }

    // Two Γ(s) kernels with no coupling factorize into e^{-x} e^{-y}.
    let exp_kernel = GammaFactorGroup::meijer(&[], 0, &[0.0], 1)?;
    let spec = FoxHSpec::new(vec![0.5, 1.5], vec![exp_kernel.clone(), exp_kernel], vec![], vec![], vec![None, None])?;
    println!("H(0.5, 1.5) = {:.12} vs {:.12}", fox_h_multivariate(&spec, &ctl)?.value, (-2.0f64).exp());

    // A coupled case: one term of the two-branch MRC distribution function,
    // summed over the series and compared with the aggregated kernel.
    let branch = SingleLinkChannel::new(FtrParams::new(1.0, 2.0, 0.5)?, PointingParams::from_phi_s0(1.0, 0.054)?, 40.0)?;
    let ch = MrcChannel::iid(branch, 2)?;
    let term = termwise_cdf_spec(&ch, &[0, 0], 1.0)?;
    println!("leading term (j = 0, 0) at gamma = 1: {:.6e}", fox_h_multivariate(&term, &ctl)?.value);
    let mctl = default_control();
    let series = mrc_snr_cdf_termwise(&ch, 1.0, 1e-10, &mctl)?;
    println!(
        "series over {} terms {:.10e}, aggregated {:.10e}",
        series.series_terms,
        series.value,
        mrc_snr_cdf(&ch, 1.0, &mctl)?.value
    );
    Ok(())
}
