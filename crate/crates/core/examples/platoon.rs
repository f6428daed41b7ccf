//! Build the linear platoon model from its TOML description, train a
//! policy, and explore the closed loop up to a state budget.

use absmc::cli::{outcome_name, verify_policy};
use absmc::trainer::{evaluate, train};
use absmc::{Policy, RunConfig};

fn main() -> absmc::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/platoon_safety.toml");
    let cfg = RunConfig::load(&path)?;
    println!(
        "{}: {} variables, {} actions",
        cfg.env.name(),
        cfg.env.dim(),
        cfg.env.num_actions()
    );
    let policy = Policy::from(train(&cfg.env, &cfg.granularity, &cfg.train)?.policy);
    let e = evaluate(&cfg.env, &policy, 5, 200, cfg.seed)?;
    println!("mean reward {:.1}", e.mean);

    let v = cfg.verify_settings()?;
    let res = verify_policy(&cfg, &cfg.granularity, &policy, v.threshold)?;
    println!(
        "{}: {} ({} states, exhausted={})",
        v.formula_text,
        outcome_name(res.verdict.outcome),
        res.verdict.stats.explored_states,
        res.verdict.stats.exhausted
    );
    Ok(())
}
