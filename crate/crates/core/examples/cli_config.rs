//! Parse a flat dotted-key TOML config and run a small sweep through the CLI layer.

use thzfade::cli::commands::run_sweep;
use thzfade::cli::config::Config;

const CONFIG: &str = r#"
ftr.k = 10.0
pointing.phi = 2.5
sweep.metric = "outage"
sweep.mode = "exact,asymptotic"
sweep.gamma0_db = [20.0, 40.0]
sweep.branches = [1, 2]
sweep.phi = [2.5]
sweep.threshold_db = 4.0
"#;

fn main() -> thzfade::Result<()> {
    let cfg = Config::from_toml_str(CONFIG)?;
    cfg.validate()?;
    print!("{}", run_sweep(&cfg, "sweep")?);
    Ok(())
}
