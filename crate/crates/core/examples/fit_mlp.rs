//! Distil a trained Q-table into a small network and verify the network
//! policy on the same abstraction.

use absmc::cli::{outcome_name, verify_policy};
use absmc::trainer::{evaluate, fit_mlp, train, MlpFitConfig};
use absmc::{Policy, RunConfig};

fn main() -> absmc::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/cartpole_bounded.toml");
    let cfg = RunConfig::load(&path)?;
    let out = train(&cfg.env, &cfg.granularity, &cfg.train)?;
    let net = Policy::from(fit_mlp(&out.q, &cfg.granularity, &MlpFitConfig::default())?);
    let table = Policy::from(out.policy);

    let agree = out
        .q
        .cells()
        .filter(|&c| table.act(&cfg.granularity.state_of(c)).ok() == net.act(&cfg.granularity.state_of(c)).ok())
        .count();
    println!("network agrees with the table on {agree}/{} visited cells", out.q.len());

    for (name, p) in [("table", &table), ("network", &net)] {
        let e = evaluate(&cfg.env, p, 5, 500, cfg.seed)?;
        let v = verify_policy(&cfg, &cfg.granularity, p, cfg.verify_settings()?.threshold)?;
        println!(
            "{name:<8} mean reward {:>6.1}  {} after {} states",
            e.mean,
            outcome_name(v.verdict.outcome),
            v.verdict.stats.explored_states
        );
    }
    Ok(())
}
