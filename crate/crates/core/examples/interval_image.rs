//! Push one Pendulum cell through the abstract transformer and list the
//! cells its image touches, with and without a perturbation bound.

use absmc::policy::TabularPolicy;
use absmc::transformer::{AbstractTransformer, Perturbation, SINK};
use absmc::{Environment, Policy};

fn main() -> absmc::Result<()> {
    let env = Environment::pendulum();
    let g = env.granularity(&[0.05, 0.05])?;
    // push right everywhere
    let policy = Policy::from(TabularPolicy::new(g.clone(), env.num_actions(), 2)?);
    let cell = g.abstract_of(&[0.12, -0.3])?;
    println!("cell {:?} = {}", cell.index(), g.concretize(&cell));

    for eps in [vec![0.0, 0.0], vec![0.0, 0.1]] {
        let eps = Perturbation::new(eps)?;
        let t = AbstractTransformer::new(&env, &policy, &g, &eps)?;
        let img = t.image(&cell)?;
        println!(
            "\nepsilon {:?}: action {}, image {}",
            eps.epsilon(),
            img.action,
            img.image
        );
        if let Some(v) = &img.expanded {
            println!("  widened {v}");
        }
        for c in t.successors(g.cell_id(&cell))? {
            match c {
                SINK => println!("  -> sink"),
                c => println!("  -> {:?} {}", g.state_of(c).index(), g.concretize(&g.state_of(c))),
            }
        }
    }
    Ok(())
}
