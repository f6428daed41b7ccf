//! Model-check LTL formulas on a small hand-built Kripke structure.
//!
//! States: 0 -> 1 -> 2 -> 1, with `p` true on 0 and 2 and `q` unknown on 1.

use absmc::check::{check, Outcome};
use absmc::kripke::KripkeStructure;
use absmc::ltl::parse_ltl;
use absmc::ltl::Truth::{DefinitelyFalse as F, DefinitelyTrue as T, Unknown as U};

fn main() -> absmc::Result<()> {
    let k = KripkeStructure::from_parts(
        vec!["p".into(), "q".into()],
        Vec::new(),
        vec![0],
        vec![vec![1], vec![2], vec![1]],
        vec![vec![T, F], vec![F, U], vec![T, T]],
        true,
    )?;
    for text in ["G F p", "F G p", "G (p -> X !p)", "G F q", "F q", "p U q"] {
        let v = check(&k, &parse_ltl(text)?)?;
        print!("{text:<16} {:?}", v.outcome);
        if let (Outcome::NotVerified, Some(l)) = (v.outcome, &v.counterexample) {
            let (stem, cycle) = l.kripke_lasso();
            print!("  counterexample {stem:?} ({cycle:?})^w");
        }
        println!();
    }
    Ok(())
}
