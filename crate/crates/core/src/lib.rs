//! Train control policies over finite interval abstractions of continuous
//! state spaces, then model-check the closed loop against LTL properties.

pub mod abstraction;
pub mod buchi;
pub mod check;
pub mod cli;
pub mod config;
pub mod constants;
pub mod env;
pub mod error;
pub mod interval;
pub mod kripke;
pub mod ltl;
pub mod policy;
pub mod trainer;
pub mod transformer;

pub use abstraction::{AbstractState, CellId, Granularity, IntervalBox};
pub use check::{check, Outcome, Verdict};
pub use config::RunConfig;
pub use env::{builtin, Environment};
pub use error::{Error, Result};
pub use interval::Interval;
pub use kripke::{build_kripke, KripkeStructure};
pub use policy::{load_policy, save_policy, MlpPolicy, Policy, TabularPolicy};
pub use transformer::{expand, AbstractTransformer, Perturbation, SINK};
