//! Train a tabular policy for Mountain Car and roll it out greedily from
//! the bottom of the valley.

use absmc::trainer::{rollout, train, TrainConfig};
use absmc::{Environment, Policy};

fn main() -> absmc::Result<()> {
    let env = Environment::mountain_car();
    let g = env.granularity(&[0.01, 0.001])?;
    let cfg = TrainConfig::default();
    let out = train(&env, &g, &cfg)?;
    let last: Vec<_> = out.log.iter().rev().take(10).map(|e| e.steps).collect();
    println!("visited cells: {}", out.q.len());
    println!("steps in last 10 episodes: {last:?}");

    let policy = Policy::from(out.policy);
    let traj = rollout(&env, &policy, &[-0.5, 0.0], 200)?;
    match traj.states.iter().position(|s| s[0] >= 0.5) {
        Some(t) => println!("goal reached after {t} steps"),
        None => println!("goal not reached in 200 steps"),
    }
    Ok(())
}
