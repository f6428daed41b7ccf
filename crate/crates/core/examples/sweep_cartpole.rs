//! Train and verify CartPole at several granularities.

use absmc::cli::sweep_rows;
use absmc::RunConfig;

fn main() -> absmc::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/cartpole_sweep.toml");
    let cfg = RunConfig::load(&path)?;
    let threshold = cfg.verify_settings()?.threshold;
    println!(
        "{:<24} {:>8} {:<16} {:>8}  counterexample",
        "granularity", "reward", "outcome", "states"
    );
    for r in sweep_rows(&cfg, threshold)? {
        println!(
            "{:<24} {:>8.1} {:<16} {:>8}  {}",
            r.granularity, r.mean_reward, r.outcome, r.states, r.counterexample
        );
    }
    Ok(())
}
