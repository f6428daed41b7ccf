//! Train one Pendulum policy and check the upright invariant under three
//! perturbation bounds. Training takes a few minutes in release mode.
//!
//!     cargo run --release --example verify_pendulum

use absmc::cli::{outcome_name, verify_policy};
use absmc::trainer::train;
use absmc::{Policy, RunConfig};

fn main() -> absmc::Result<()> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let base = RunConfig::load(&dir.join("pendulum_safety.toml"))?;
    let t = std::time::Instant::now();
    let policy = Policy::from(train(&base.env, &base.granularity, &base.train)?.policy);
    println!("trained in {:.0}s", t.elapsed().as_secs_f64());

    for name in [
        "pendulum_safety.toml",
        "pendulum_safety_eps001.toml",
        "pendulum_safety_eps01.toml",
    ] {
        let cfg = RunConfig::load(&dir.join(name))?;
        let v = cfg.verify_settings()?;
        let res = verify_policy(&cfg, &cfg.granularity, &policy, v.threshold)?;
        println!(
            "epsilon {:?}: {} with {} states ({:.3}s)",
            v.perturbation.epsilon(),
            outcome_name(res.verdict.outcome),
            res.verdict.stats.explored_states,
            res.time_s
        );
    }
    Ok(())
}
