//! The `absmc` command line: `train`, `verify`, `sweep` and `simulate`.
//!
//! Every command reads a [`RunConfig`], writes its artifacts plus a copy of
//! the config and a `manifest.json` into the output directory, and returns
//! an exit code. `verify` exits 0 when Verified, 1 when NotVerified, 2 when
//! BoundedVerified; every error exits 3.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::abstraction::{Granularity, IntervalBox};
use crate::buchi::{translate_negation, BuchiAutomaton};
use crate::check::{check, replay_counterexample, Lasso, LassoStep, Outcome, ReplayReport, Verdict};
use crate::config::RunConfig;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::kripke::{build_kripke, KripkeStructure};
use crate::ltl::Truth;
use crate::policy::{load_policy, save_policy, Policy};
use crate::trainer::{evaluate, fit_mlp, rollout, train, write_log_csv};
use crate::transformer::SINK;

pub const EXIT_VERIFIED: i32 = 0;
pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_NOT_VERIFIED: i32 = 1;
pub const EXIT_BOUNDED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "absmc",
    version,
    about = "Train policies on interval abstractions and model-check them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a tabular policy.
    Train(RunArgs),
    /// Build the abstract closed loop and check the configured formula.
    Verify(RunArgs),
    /// Train and verify at every granularity of the `[sweep]` section.
    Sweep(RunArgs),
    /// Roll a policy out from a concrete state.
    Simulate(RunArgs),
}

#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// Run configuration (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Policy file; defaults to `policy.json` in the output directory.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exploration threshold; overrides `verify.threshold`.
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Simulation steps; overrides `simulate.steps`.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Write kripke.dot and kripke.txt.
    #[arg(long)]
    pub export_kripke: bool,
    /// Write the automaton for the negated formula as automaton.hoa.
    #[arg(long)]
    pub export_automaton: bool,
}

pub fn run(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn report_error(cmd: &str, e: &Error) -> i32 {
    eprintln!("absmc {cmd}: error: {e}");
    EXIT_ERROR
}

pub fn cmd_train(args: &RunArgs) -> i32 {
    match train_run(args) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => report_error("train", &e),
    }
}

pub fn cmd_verify(args: &RunArgs) -> i32 {
    match verify_run(args) {
        Ok(Outcome::Verified) => EXIT_VERIFIED,
        Ok(Outcome::NotVerified) => EXIT_NOT_VERIFIED,
        Ok(Outcome::BoundedVerified) => EXIT_BOUNDED,
        Err(e) => report_error("verify", &e),
    }
}

pub fn cmd_sweep(args: &RunArgs) -> i32 {
    match sweep_run(args) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => report_error("sweep", &e),
    }
}

pub fn cmd_simulate(args: &RunArgs) -> i32 {
    match simulate_run(args) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => report_error("simulate", &e),
    }
}

/// A loaded config plus the resolved output directory.
struct Run {
    text: String,
    cfg: RunConfig,
    out: PathBuf,
}

impl Run {
    fn open(args: &RunArgs) -> Result<Self> {
        let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
        let base = args.config.parent().unwrap_or(Path::new("."));
        let mut cfg = RunConfig::parse(&text, base)?;
        if let Some(seed) = args.seed {
            cfg.set_seed(seed);
        }
        let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Run { text, cfg, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, contents).map_err(|e| Error::io(&p, e))
    }

    /// Config copy and manifest. `extra` records every input beyond the
    /// config file that can change the artifacts.
    fn write_manifest(&self, command: &str, extra: serde_json::Value) -> Result<()> {
        self.write("config.toml", &self.text)?;
        let manifest = json!({
            "tool": "absmc",
            "version": env!("CARGO_PKG_VERSION"),
            "policy_format_version": crate::policy::FORMAT_VERSION,
            "command": command,
            "config": "config.toml",
            "config_sha256": sha256_hex(self.text.as_bytes()),
            "seed": self.cfg.seed,
            "inputs": extra,
        });
        self.write("manifest.json", pretty(&manifest)?)
    }

    fn load_policy(&self, args: &RunArgs) -> Result<(PathBuf, Policy)> {
        let path = args.policy.clone().unwrap_or_else(|| self.path("policy.json"));
        let policy = load_policy(&path)?;
        policy.check_granularity(&self.cfg.granularity)?;
        if policy.num_actions() != self.cfg.env.num_actions() {
            return Err(Error::Config(format!(
                "policy has {} actions but `{}` has {}",
                policy.num_actions(),
                self.cfg.env.name(),
                self.cfg.env.num_actions()
            )));
        }
        Ok((path, policy))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Format(e.to_string()))
}

fn train_run(args: &RunArgs) -> Result<()> {
    let run = Run::open(args)?;
    let cfg = &run.cfg;
    let outcome = train(&cfg.env, &cfg.granularity, &cfg.train)?;
    let policy = Policy::from(outcome.policy.clone());
    save_policy(&policy, &run.path("policy.json"))?;
    let mut csv = Vec::new();
    write_log_csv(&outcome.log, &mut csv)?;
    run.write("rewards.csv", csv)?;
    if let Some(mlp) = &cfg.mlp {
        let net = Policy::from(fit_mlp(&outcome.q, &cfg.granularity, mlp)?);
        save_policy(&net, &run.path("policy_mlp.json"))?;
    }
    run.write_manifest("train", json!({}))?;
    println!(
        "trained {} episodes on `{}`: {} cells visited, policy written to {}",
        cfg.train.episodes,
        cfg.env.name(),
        outcome.q.len(),
        run.path("policy.json").display()
    );
    Ok(())
}

/// The result of building and checking one closed loop.
pub struct Verification {
    pub kripke: KripkeStructure,
    pub automaton: BuchiAutomaton,
    pub verdict: Verdict,
    /// Wall time of construction and checking together.
    pub time_s: f64,
}

/// Build the abstract closed loop for `cfg`'s verification problem and
/// check its formula.
pub fn verify_policy(cfg: &RunConfig, g: &Granularity, policy: &Policy, threshold: u64) -> Result<Verification> {
    let start = Instant::now();
    let v = cfg.verify_settings()?;
    let props = v.propositions.resolve(&v.formula)?;
    let kripke = build_kripke(&cfg.env, g, policy, &v.initial_box, &v.perturbation, &props, threshold)?;
    let verdict = check(&kripke, &v.formula)?;
    let automaton = translate_negation(&v.formula, &v.formula.atoms())?;
    Ok(Verification {
        kripke,
        automaton,
        verdict,
        time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Verified => "Verified",
        Outcome::BoundedVerified => "BoundedVerified",
        Outcome::NotVerified => "NotVerified",
    }
}

#[derive(Serialize)]
struct StepReport {
    state: usize,
    cell: Option<u64>,
    sink: bool,
    #[serde(rename = "box")]
    bounds: Option<Vec<[f64; 2]>>,
    labels: String,
    automaton: usize,
}

#[derive(Serialize)]
struct CounterexampleReport {
    stem: Vec<StepReport>,
    cycle: Vec<StepReport>,
    replay: ReplayReport,
}

fn step_report(k: &KripkeStructure, g: &Granularity, s: &LassoStep) -> StepReport {
    let sink = s.cell == SINK;
    StepReport {
        state: s.state,
        cell: (!sink).then_some(s.cell.0),
        sink,
        bounds: (!sink).then(|| box_pairs(&g.concretize(&g.state_of(s.cell)))),
        labels: k.labels(s.state).iter().map(|t: &Truth| t.symbol()).collect(),
        automaton: s.automaton,
    }
}

fn box_pairs(b: &IntervalBox) -> Vec<[f64; 2]> {
    b.intervals().iter().map(|iv| [iv.lo, iv.hi]).collect()
}

fn counterexample_report(
    lasso: &Lasso,
    k: &KripkeStructure,
    env: &Environment,
    policy: &Policy,
    g: &Granularity,
    cfg: &RunConfig,
) -> Result<CounterexampleReport> {
    let replay = replay_counterexample(lasso, env, policy, g, &cfg.verify_settings()?.replay)?;
    Ok(CounterexampleReport {
        stem: lasso.stem.iter().map(|s| step_report(k, g, s)).collect(),
        cycle: lasso.cycle.iter().map(|s| step_report(k, g, s)).collect(),
        replay,
    })
}

fn verify_run(args: &RunArgs) -> Result<Outcome> {
    let run = Run::open(args)?;
    let cfg = &run.cfg;
    let v = cfg.verify_settings()?;
    let threshold = args.threshold.unwrap_or(v.threshold);
    let (policy_path, policy) = run.load_policy(args)?;
    let policy_text = std::fs::read(&policy_path).map_err(|e| Error::io(&policy_path, e))?;

    let res = verify_policy(cfg, &cfg.granularity, &policy, threshold)?;
    let verdict = &res.verdict;
    let cex = match &verdict.counterexample {
        Some(l) => Some(counterexample_report(
            l,
            &res.kripke,
            &cfg.env,
            &policy,
            &cfg.granularity,
            cfg,
        )?),
        None => None,
    };
    let declared: Vec<String> = v
        .propositions
        .declared()
        .iter()
        .map(|p| format!("{} := {}", p.name(), p.comparison()))
        .collect();
    let report = json!({
        "environment": cfg.env.name(),
        "formula": v.formula_text,
        "propositions": declared,
        "granularity": cfg.granularity.diameters(),
        "initial_box": box_pairs(&v.initial_box),
        "perturbation": v.perturbation.epsilon(),
        "threshold": threshold,
        "outcome": outcome_name(verdict.outcome),
        "explored_states": verdict.stats.explored_states,
        "edges": verdict.stats.edges,
        "exhausted": verdict.stats.exhausted,
        "automaton_states": verdict.stats.automaton_states,
        "product_states": verdict.stats.product_states,
        "time_s": res.time_s,
        "check_time_s": verdict.stats.time_s,
        "counterexample": cex,
    });
    run.write("report.json", pretty(&report)?)?;
    if args.export_kripke {
        run.write("kripke.dot", res.kripke.to_dot(Some(&cfg.granularity)))?;
        run.write("kripke.txt", res.kripke.to_text(Some(&cfg.granularity)))?;
    }
    if args.export_automaton {
        run.write("automaton.hoa", res.automaton.to_hoa(&format!("!({})", v.formula)))?;
    }
    run.write_manifest(
        "verify",
        json!({
            "policy_sha256": sha256_hex(&policy_text),
            "threshold": threshold,
            "export_kripke": args.export_kripke,
            "export_automaton": args.export_automaton,
        }),
    )?;
    println!(
        "{}: {} states, {} edges, exhausted={}",
        outcome_name(verdict.outcome),
        verdict.stats.explored_states,
        verdict.stats.edges,
        verdict.stats.exhausted
    );
    if let Some(c) = &cex {
        println!(
            "counterexample: stem {} + cycle {} ({})",
            c.stem.len(),
            c.cycle.len(),
            c.replay.label
        );
    }
    Ok(verdict.outcome)
}

/// One row of a granularity sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub granularity: String,
    pub mean_reward: f64,
    pub outcome: String,
    pub states: usize,
    pub exhausted: bool,
    pub counterexample: bool,
    pub time_s: f64,
}

/// Train, evaluate and verify at every sweep granularity. Runs are
/// independent and execute in parallel; rows keep the configured order.
pub fn sweep_rows(cfg: &RunConfig, threshold: u64) -> Result<Vec<SweepRow>> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    if s.granularities.len() < 2 {
        return Err(Error::Config(format!(
            "sweep.granularities needs at least 2 entries, got {}",
            s.granularities.len()
        )));
    }
    cfg.verify_settings()?;
    s.granularities
        .par_iter()
        .map(|g| {
            let out = train(&cfg.env, g, &cfg.train)?;
            let policy = Policy::from(out.policy);
            let eval = evaluate(&cfg.env, &policy, s.eval_episodes, s.eval_horizon, cfg.seed)?;
            let res = verify_policy(cfg, g, &policy, threshold)?;
            let v = &res.verdict;
            Ok(SweepRow {
                granularity: g.diameters().iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
                mean_reward: eval.mean,
                outcome: outcome_name(v.outcome).to_string(),
                states: v.stats.explored_states,
                exhausted: v.stats.exhausted,
                counterexample: v.counterexample.is_some(),
                time_s: res.time_s,
            })
        })
        .collect()
}

fn sweep_run(args: &RunArgs) -> Result<()> {
    let run = Run::open(args)?;
    let cfg = &run.cfg;
    let threshold = args.threshold.unwrap_or(cfg.verify_settings()?.threshold);
    let rows = sweep_rows(cfg, threshold)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    run.write("sweep.csv", bytes)?;
    run.write_manifest("sweep", json!({ "threshold": threshold }))?;
    for r in &rows {
        println!(
            "[{}] reward {:.2}  {}  {} states",
            r.granularity, r.mean_reward, r.outcome, r.states
        );
    }
    Ok(())
}

fn simulate_run(args: &RunArgs) -> Result<()> {
    let run = Run::open(args)?;
    let cfg = &run.cfg;
    let (policy_path, policy) = run.load_policy(args)?;
    let policy_text = std::fs::read(&policy_path).map_err(|e| Error::io(&policy_path, e))?;
    let steps = args.steps.unwrap_or(cfg.simulate.steps);
    let start = cfg.simulation_start();
    let traj = rollout(&cfg.env, &policy, &start, steps)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(cfg.env.variables().iter().cloned());
    header.extend(["action".to_string(), "cell_index".to_string()]);
    w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
    for (t, &a) in traj.actions.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(traj.states[t].iter().map(f64::to_string));
        rec.push(a.to_string());
        rec.push(traj.cells[t].0.to_string());
        w.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    run.write("trajectory.csv", bytes)?;

    let mut cells = String::new();
    for c in &traj.cells {
        let _ = match *c {
            SINK => writeln!(cells, "sink"),
            c => writeln!(cells, "{}", c.0),
        };
    }
    run.write("cells.txt", cells)?;
    run.write_manifest(
        "simulate",
        json!({
            "policy_sha256": sha256_hex(&policy_text),
            "steps": steps,
            "start": start,
        }),
    )?;
    println!(
        "simulated {} steps from {:?}; trajectory written to {}",
        traj.actions.len(),
        start,
        run.path("trajectory.csv").display()
    );
    Ok(())
}
