//! Kripke structures induced by a policy on the abstract state space.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::abstraction::{CellId, Granularity, IntervalBox};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::ltl::{AtomicProposition, Truth};
use crate::policy::Policy;
use crate::transformer::{AbstractTransformer, Perturbation, SINK};

#[derive(Clone, Debug, PartialEq)]
pub struct KripkeStructure {
    props: Vec<String>,
    /// Sorted; the sink, when present, is last.
    cells: Vec<CellId>,
    initial: Vec<usize>,
    succ: Vec<Vec<usize>>,
    labels: Vec<Vec<Truth>>,
    /// False for states whose successors were cut off by the threshold;
    /// they carry a self-loop instead.
    expanded: Vec<bool>,
    exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KripkeStats {
    /// Discovered states, including initial states and the sink.
    pub explored_states: usize,
    pub edges: usize,
    pub exhausted: bool,
}

impl KripkeStructure {
    /// Assemble a structure directly. States are indices `0..succ.len()`;
    /// `cells` defaults to `CellId(i)` when empty.
    pub fn from_parts(
        props: Vec<String>,
        cells: Vec<CellId>,
        initial: Vec<usize>,
        succ: Vec<Vec<usize>>,
        labels: Vec<Vec<Truth>>,
        exhausted: bool,
    ) -> Result<Self> {
        let n = succ.len();
        let cells = if cells.is_empty() {
            (0..n as u64).map(CellId).collect()
        } else {
            cells
        };
        if cells.len() != n || labels.len() != n {
            return Err(Error::Format(format!(
                "kripke structure has {n} successor lists, {} cells and {} label rows",
                cells.len(),
                labels.len()
            )));
        }
        if let Some(row) = labels.iter().position(|l| l.len() != props.len()) {
            return Err(Error::Format(format!(
                "label row {row} does not cover all propositions"
            )));
        }
        if let Some(s) = succ.iter().position(Vec::is_empty) {
            return Err(Error::Format(format!("state {s} has no successor")));
        }
        if succ.iter().flatten().chain(&initial).any(|&t| t >= n) {
            return Err(Error::Format("edge or initial state out of range".into()));
        }
        if initial.is_empty() {
            return Err(Error::Format("no initial state".into()));
        }
        if cells.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("cells must be strictly increasing".into()));
        }
        let succ = succ
            .into_iter()
            .map(|mut ts| {
                ts.sort_unstable();
                ts.dedup();
                ts
            })
            .collect();
        Ok(KripkeStructure {
            props,
            cells,
            initial,
            succ,
            labels,
            expanded: vec![true; n],
            exhausted,
        })
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn num_states(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn successors(&self, s: usize) -> &[usize] {
        &self.succ[s]
    }

    pub fn labels(&self, s: usize) -> &[Truth] {
        &self.labels[s]
    }

    pub fn cell(&self, s: usize) -> CellId {
        self.cells[s]
    }

    pub fn index_of(&self, c: CellId) -> Option<usize> {
        self.cells.binary_search(&c).ok()
    }

    pub fn is_expanded(&self, s: usize) -> bool {
        self.expanded[s]
    }

    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn stats(&self) -> KripkeStats {
        KripkeStats {
            explored_states: self.num_states(),
            edges: self.num_edges(),
            exhausted: self.exhausted,
        }
    }

    /// Whether `run` starts in an initial state and follows edges.
    pub fn contains_run(&self, run: &[CellId]) -> bool {
        let Some(idx) = run.iter().map(|&c| self.index_of(c)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        match idx.first() {
            None => true,
            Some(s0) => {
                self.initial.contains(s0) && idx.windows(2).all(|w| self.succ[w[0]].binary_search(&w[1]).is_ok())
            }
        }
    }

    fn label_text(&self, s: usize) -> String {
        self.props
            .iter()
            .zip(&self.labels[s])
            .map(|(p, t)| format!("{p}={}", t.symbol()))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn box_text(&self, s: usize, g: Option<&Granularity>) -> String {
        match (self.cells[s], g) {
            (SINK, _) => "sink".into(),
            (c, Some(g)) => g.concretize(&g.state_of(c)).to_string(),
            (c, None) => format!("cell {}", c.0),
        }
    }

    /// Graphviz rendering; initial states have a double border.
    pub fn to_dot(&self, g: Option<&Granularity>) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph kripke {\n  node [shape=box, fontname=monospace];\n");
        let initial: HashSet<usize> = self.initial.iter().copied().collect();
        for s in 0..self.num_states() {
            let cell = match self.cells[s] {
                SINK => "sink".to_string(),
                c => c.0.to_string(),
            };
            let label = format!(
                "{s}: {cell}\\n{}\\n{}",
                esc(&self.box_text(s, g)),
                esc(&self.label_text(s))
            );
            let extra = if initial.contains(&s) { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  s{s} [label=\"{label}\"{extra}];");
        }
        for (s, ts) in self.succ.iter().enumerate() {
            for t in ts {
                let _ = writeln!(out, "  s{s} -> s{t};");
            }
        }
        out.push_str("}\n");
        out
    }

    /// One line per state:
    /// `index<TAB>cell<TAB>initial<TAB>box<TAB>labels<TAB>successors`.
    pub fn to_text(&self, g: Option<&Granularity>) -> String {
        let mut out = format!(
            "# states={} edges={} exhausted={}\n# props: {}\n",
            self.num_states(),
            self.num_edges(),
            self.exhausted,
            self.props.join(" ; ")
        );
        let initial: HashSet<usize> = self.initial.iter().copied().collect();
        for s in 0..self.num_states() {
            let cell = match self.cells[s] {
                SINK => "sink".to_string(),
                c => c.0.to_string(),
            };
            let labels: String = self.labels[s].iter().map(|t| t.symbol()).collect();
            let succ: Vec<String> = self.succ[s].iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{s}\t{cell}\t{}\t{}\t{labels}\t{}",
                u8::from(initial.contains(&s)),
                self.box_text(s, g),
                succ.join(" ")
            );
        }
        out
    }
}

/// Breadth-first exploration of the closed loop from `cover(initial_box)`.
///
/// Each BFS level is expanded in parallel and merged in cell order, so the
/// result does not depend on scheduling. At most `threshold` states are
/// discovered; states left unexpanded, or expanded only partially because
/// the threshold was reached, get a self-loop.
pub fn build_kripke(
    env: &Environment,
    g: &Granularity,
    policy: &Policy,
    initial_box: &IntervalBox,
    eps: &Perturbation,
    props: &[AtomicProposition],
    threshold: u64,
) -> Result<KripkeStructure> {
    if threshold == 0 {
        return Err(Error::Config("threshold must be at least 1".into()));
    }
    if let Some(p) = props.iter().find(|p| p.dim() != g.dim()) {
        return Err(Error::dims(format!("proposition `{}`", p.name()), g.dim(), p.dim()));
    }
    let t = AbstractTransformer::new(env, policy, g, eps)?;
    let init = t.initial_cells(initial_box)?;
    if init.len() as u64 > threshold {
        return Err(Error::Config(format!(
            "the initial box covers {} cells, more than the threshold {threshold}",
            init.len()
        )));
    }

    let mut seen: HashSet<CellId> = init.iter().copied().collect();
    let mut succ: HashMap<CellId, Vec<CellId>> = HashMap::new();
    let mut partial: HashSet<CellId> = HashSet::new();
    let mut frontier = init.clone();
    let mut count = init.len() as u64;
    while !frontier.is_empty() && count < threshold {
        let results: Vec<Result<Vec<CellId>>> = frontier.par_iter().map(|&c| t.successors(c)).collect();
        let mut next = Vec::new();
        for (&c, r) in frontier.iter().zip(results) {
            let mut kept = Vec::new();
            for s in r? {
                if seen.contains(&s) {
                    kept.push(s);
                } else if count < threshold {
                    seen.insert(s);
                    count += 1;
                    next.push(s);
                    kept.push(s);
                } else {
                    partial.insert(c);
                }
            }
            succ.insert(c, kept);
        }
        next.sort_unstable();
        frontier = next;
    }
    let exhausted = frontier.is_empty() && partial.is_empty();

    let mut cells: Vec<CellId> = seen.into_iter().collect();
    cells.sort_unstable();
    let index: HashMap<CellId, usize> = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut expanded = vec![true; cells.len()];
    let mut edges = vec![Vec::new(); cells.len()];
    for (i, c) in cells.iter().enumerate() {
        let mut out: Vec<usize> = succ
            .get(c)
            .map_or_else(Vec::new, |ss| ss.iter().map(|s| index[s]).collect());
        if !succ.contains_key(c) || partial.contains(c) {
            expanded[i] = false;
            out.push(i);
        }
        out.sort_unstable();
        out.dedup();
        edges[i] = out;
    }
    let labels: Vec<Vec<Truth>> = cells
        .par_iter()
        .map(|&c| {
            if c == SINK {
                vec![Truth::Unknown; props.len()]
            } else {
                let b = g.concretize(&g.state_of(c));
                props.iter().map(|p| p.label(&b)).collect()
            }
        })
        .collect();
    let mut initial: Vec<usize> = init.iter().map(|c| index[c]).collect();
    initial.sort_unstable();
    Ok(KripkeStructure {
        props: props.iter().map(|p| p.name().to_string()).collect(),
        cells,
        initial,
        succ: edges,
        labels,
        expanded,
        exhausted,
    })
}
