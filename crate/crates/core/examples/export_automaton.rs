//! Translate an LTL formula and its negation to Büchi automata and print
//! them in HOA format.
//!
//!     cargo run --example export_automaton -- "G (a -> F b)"

use absmc::buchi::{translate, translate_negation};
use absmc::ltl::parse_ltl;

fn main() -> absmc::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "G (a -> F b)".into());
    let f = parse_ltl(&text)?;
    let atoms = f.atoms();
    let a = translate(&f, &atoms)?;
    let na = translate_negation(&f, &atoms)?;
    println!("{} states, {} edges for {text}", a.num_states(), a.num_edges());
    print!("{}", a.to_hoa(&text));
    println!();
    println!("{} states, {} edges for the negation", na.num_states(), na.num_edges());
    print!("{}", na.to_hoa(&format!("!({text})")));
    Ok(())
}
