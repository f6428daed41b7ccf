//! Train Mountain Car, check the goal property, and replay the abstract
//! counterexample on the concrete dynamics to see whether it is spurious.

use absmc::check::replay_counterexample;
use absmc::cli::{outcome_name, verify_policy};
use absmc::trainer::train;
use absmc::{Policy, RunConfig};

fn main() -> absmc::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mountain_car_goal.toml");
    let cfg = RunConfig::load(&path)?;
    let policy = Policy::from(train(&cfg.env, &cfg.granularity, &cfg.train)?.policy);
    let v = cfg.verify_settings()?;
    let res = verify_policy(&cfg, &cfg.granularity, &policy, v.threshold)?;
    println!(
        "{}: {} ({} states, exhausted={})",
        v.formula_text,
        outcome_name(res.verdict.outcome),
        res.verdict.stats.explored_states,
        res.verdict.stats.exhausted
    );
    let Some(lasso) = &res.verdict.counterexample else {
        return Ok(());
    };
    let (stem, cycle) = lasso.kripke_lasso();
    println!("lasso: stem of {} states, cycle of {}", stem.len(), cycle.len());
    for &s in cycle.iter().take(5) {
        let c = res.kripke.cell(s);
        println!(
            "  cycle state {s}: {}",
            cfg.granularity.concretize(&cfg.granularity.state_of(c))
        );
    }
    let r = replay_counterexample(lasso, &cfg.env, &policy, &cfg.granularity, &v.replay)?;
    println!(
        "replay: {} after {} samples (best match {}/{} steps)",
        r.label, r.samples, r.longest_match, r.required
    );
    Ok(())
}
