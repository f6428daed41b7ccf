//! Model checking a Kripke structure against an LTL formula.
//!
//! The formula is negated and translated to a Büchi automaton; an accepting
//! lasso in the product with the structure is a counterexample. A literal
//! `p` is enabled on a state unless its label is DefinitelyFalse and `!p`
//! unless DefinitelyTrue, so Unknown states admit both and the search can
//! only over-report violations.

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abstraction::{CellId, Granularity};
use crate::buchi::tarjan;
use crate::buchi::{translate_negation, BuchiAutomaton, Guard};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::kripke::KripkeStructure;
use crate::ltl::{Ltl, Truth};
use crate::policy::Policy;
use crate::trainer::rollout;
use crate::transformer::SINK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Verified,
    BoundedVerified,
    NotVerified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LassoStep {
    /// Kripke state index.
    pub state: usize,
    pub cell: CellId,
    /// Automaton state after reading this state's label.
    pub automaton: usize,
}

/// `stem` followed by `cycle` repeated forever; the last cycle step has an
/// edge back to the first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lasso {
    pub stem: Vec<LassoStep>,
    pub cycle: Vec<LassoStep>,
}

impl Lasso {
    pub fn states(&self) -> impl Iterator<Item = &LassoStep> {
        self.stem.iter().chain(&self.cycle)
    }

    /// The Kripke states visited, in the shortest stem-and-cycle form.
    pub fn kripke_lasso(&self) -> (Vec<usize>, Vec<usize>) {
        let mut stem: Vec<usize> = self.stem.iter().map(|s| s.state).collect();
        let mut cycle: Vec<usize> = self.cycle.iter().map(|s| s.state).collect();
        let n = cycle.len();
        if let Some(p) = (1..=n).find(|&p| n.is_multiple_of(p) && (0..n).all(|i| cycle[i] == cycle[i % p])) {
            cycle.truncate(p);
        }
        while let Some(&last) = stem.last() {
            if cycle.last() != Some(&last) {
                break;
            }
            stem.pop();
            cycle.rotate_right(1);
        }
        (stem, cycle)
    }

    /// Cells of the stem followed by `reps` copies of the cycle.
    pub fn unrolled_cells(&self, reps: usize) -> Vec<CellId> {
        let mut out: Vec<CellId> = self.stem.iter().map(|s| s.cell).collect();
        for _ in 0..reps {
            out.extend(self.cycle.iter().map(|s| s.cell));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckStats {
    pub explored_states: usize,
    pub edges: usize,
    pub exhausted: bool,
    pub automaton_states: usize,
    pub product_states: usize,
    pub time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub counterexample: Option<Lasso>,
    pub stats: CheckStats,
}

/// Product of a Kripke structure with an automaton, explored on the fly.
pub struct Product<'a> {
    k: &'a KripkeStructure,
    a: &'a BuchiAutomaton,
    /// Per Kripke state: atoms (automaton order) whose positive literal is
    /// enabled, and those whose negative literal is enabled.
    can_true: Vec<u64>,
    can_false: Vec<u64>,
}

type Node = (usize, usize);

impl<'a> Product<'a> {
    pub fn new(k: &'a KripkeStructure, a: &'a BuchiAutomaton) -> Result<Self> {
        let map: Vec<usize> = a
            .atoms()
            .iter()
            .map(|atom| {
                k.props()
                    .iter()
                    .position(|p| p == atom)
                    .ok_or_else(|| Error::UndeclaredAtom(atom.clone()))
            })
            .collect::<Result<_>>()?;
        let mut can_true = Vec::with_capacity(k.num_states());
        let mut can_false = Vec::with_capacity(k.num_states());
        for s in 0..k.num_states() {
            let labels = k.labels(s);
            let (mut t, mut f) = (0u64, 0u64);
            for (i, &j) in map.iter().enumerate() {
                if labels[j] != Truth::DefinitelyFalse {
                    t |= 1 << i;
                }
                if labels[j] != Truth::DefinitelyTrue {
                    f |= 1 << i;
                }
            }
            can_true.push(t);
            can_false.push(f);
        }
        Ok(Product {
            k,
            a,
            can_true,
            can_false,
        })
    }

    fn enabled(&self, g: &Guard, s: usize) -> bool {
        g.pos & !self.can_true[s] == 0 && g.neg & !self.can_false[s] == 0
    }

    pub fn initial(&self) -> Vec<Node> {
        let mut out = Vec::new();
        for &s in self.k.initial() {
            for e in self.a.edges(self.a.initial()) {
                if self.enabled(&e.guard, s) {
                    out.push((s, e.to));
                }
            }
        }
        out
    }

    pub fn successors(&self, (s, q): Node) -> Vec<Node> {
        let mut out = Vec::new();
        for &t in self.k.successors(s) {
            for e in self.a.edges(q) {
                if self.enabled(&e.guard, t) {
                    out.push((t, e.to));
                }
            }
        }
        out
    }

    pub fn is_accepting(&self, (_, q): Node) -> bool {
        self.a.is_accepting(q)
    }

    fn step(&self, (s, q): Node) -> LassoStep {
        LassoStep {
            state: s,
            cell: self.k.cell(s),
            automaton: q,
        }
    }

    /// Nested depth-first search. Returns an accepting lasso if one exists.
    /// Also returns the number of product states visited by the outer search.
    pub fn nested_dfs(&self) -> (Option<Lasso>, usize) {
        let mut outer_seen: HashSet<Node> = HashSet::new();
        let mut inner_seen: HashSet<Node> = HashSet::new();
        for root in self.initial() {
            if !outer_seen.insert(root) {
                continue;
            }
            // (node, successors, next successor index)
            let mut stack: Vec<(Node, Vec<Node>, usize)> = vec![(root, self.successors(root), 0)];
            let mut on_stack: HashMap<Node, usize> = HashMap::from([(root, 0)]);
            while let Some(top) = stack.last_mut() {
                if let Some(&m) = top.1.get(top.2) {
                    top.2 += 1;
                    if outer_seen.insert(m) {
                        on_stack.insert(m, stack.len());
                        let succ = self.successors(m);
                        stack.push((m, succ, 0));
                    }
                    continue;
                }
                let seed = top.0;
                if self.is_accepting(seed) {
                    if let Some((inner_path, target)) = self.inner_dfs(seed, &on_stack, &mut inner_seen) {
                        let j = on_stack[&target];
                        let stem = stack[..j].iter().map(|f| self.step(f.0)).collect();
                        let mut cycle: Vec<LassoStep> = stack[j..].iter().map(|f| self.step(f.0)).collect();
                        cycle.extend(inner_path.iter().skip(1).map(|&n| self.step(n)));
                        return (Some(Lasso { stem, cycle }), outer_seen.len());
                    }
                }
                on_stack.remove(&seed);
                stack.pop();
            }
        }
        (None, outer_seen.len())
    }

    /// Search from `seed` for an edge into the outer stack. Returns the path
    /// from `seed` to the node with that edge, and the stack node it hits.
    fn inner_dfs(
        &self,
        seed: Node,
        on_stack: &HashMap<Node, usize>,
        seen: &mut HashSet<Node>,
    ) -> Option<(Vec<Node>, Node)> {
        let mut stack: Vec<(Node, Vec<Node>, usize)> = vec![(seed, self.successors(seed), 0)];
        while let Some(top) = stack.last_mut() {
            if let Some(&m) = top.1.get(top.2) {
                top.2 += 1;
                if on_stack.contains_key(&m) {
                    return Some((stack.iter().map(|f| f.0).collect(), m));
                }
                if seen.insert(m) {
                    let succ = self.successors(m);
                    stack.push((m, succ, 0));
                }
                continue;
            }
            stack.pop();
        }
        None
    }

    /// Emptiness via strongly connected components of the reachable
    /// product; `true` when some accepting state lies on a cycle.
    pub fn has_accepting_cycle_scc(&self) -> bool {
        let mut ids: HashMap<Node, usize> = HashMap::new();
        let mut nodes: Vec<Node> = Vec::new();
        let mut queue: VecDeque<Node> = VecDeque::new();
        for n in self.initial() {
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(n) {
                e.insert(nodes.len());
                nodes.push(n);
                queue.push_back(n);
            }
        }
        let mut adj: Vec<Vec<usize>> = Vec::new();
        while let Some(n) = queue.pop_front() {
            let mut out = Vec::new();
            for m in self.successors(n) {
                let id = *ids.entry(m).or_insert_with(|| {
                    nodes.push(m);
                    queue.push_back(m);
                    nodes.len() - 1
                });
                out.push(id);
            }
            adj.push(out);
        }
        let comp = tarjan(&adj);
        let mut size = vec![0usize; nodes.len()];
        comp.iter().for_each(|&c| size[c] += 1);
        (0..nodes.len()).any(|i| self.is_accepting(nodes[i]) && (size[comp[i]] > 1 || adj[i].contains(&i)))
    }
}

/// Check `f` on `k`: Verified when the product with the automaton for `!f`
/// is empty and `k` is exhausted, BoundedVerified when empty but truncated,
/// NotVerified with a lasso otherwise.
pub fn check(k: &KripkeStructure, f: &Ltl) -> Result<Verdict> {
    let start = Instant::now();
    let atoms = f.atoms();
    if let Some(a) = atoms.iter().find(|a| !k.props().contains(a)) {
        return Err(Error::UndeclaredAtom(a.clone()));
    }
    let automaton = translate_negation(f, &atoms)?;
    let product = Product::new(k, &automaton)?;
    let (lasso, visited) = product.nested_dfs();
    let outcome = match (&lasso, k.exhausted()) {
        (Some(_), _) => Outcome::NotVerified,
        (None, true) => Outcome::Verified,
        (None, false) => Outcome::BoundedVerified,
    };
    Ok(Verdict {
        outcome,
        counterexample: lasso,
        stats: CheckStats {
            explored_states: k.num_states(),
            edges: k.num_edges(),
            exhausted: k.exhausted(),
            automaton_states: automaton.num_states(),
            product_states: visited,
            time_s: start.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayOptions {
    pub samples: usize,
    /// Cycle repetitions a trajectory must follow.
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            samples: 1000,
            repetitions: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub witnessed: bool,
    pub label: String,
    pub samples: usize,
    /// Steps of the unrolled lasso the best trajectory matched.
    pub longest_match: usize,
    pub required: usize,
    /// A start state whose trajectory follows the lasso, if any.
    pub witness: Option<Vec<f64>>,
}

pub const WITNESSED: &str = "concretely-witnessed";
pub const NOT_WITNESSED: &str = "not-witnessed (possibly spurious)";

/// Simulate from points sampled in the lasso's first cell and report
/// whether any trajectory's cells follow the stem plus `repetitions`
/// copies of the cycle. A negative result does not show the property
/// holds.
pub fn replay_counterexample(
    lasso: &Lasso,
    env: &Environment,
    policy: &Policy,
    g: &Granularity,
    opts: &ReplayOptions,
) -> Result<ReplayReport> {
    policy.check_granularity(g)?;
    let target = lasso.unrolled_cells(opts.repetitions.max(1));
    let mut report = ReplayReport {
        witnessed: false,
        label: NOT_WITNESSED.into(),
        samples: 0,
        longest_match: 0,
        required: target.len(),
        witness: None,
    };
    let Some(&first) = target.first() else {
        return Ok(report);
    };
    if first == SINK {
        return Ok(report);
    }
    let b = g.concretize(&g.state_of(first));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![b.intervals().iter().map(|iv| iv.mid()).collect::<Vec<f64>>()];
    starts.extend((1..opts.samples).map(|_| {
        b.intervals()
            .iter()
            .map(|iv| {
                if iv.width() > 0.0 {
                    rng.gen_range(iv.lo..=iv.hi)
                } else {
                    iv.lo
                }
            })
            .collect()
    }));
    for s0 in starts {
        report.samples += 1;
        let traj = rollout(env, policy, &s0, target.len() - 1)?;
        let mut cells = traj.cells.clone();
        // a trajectory that left the bounds stays in the sink
        cells.resize(target.len(), SINK);
        let matched = cells.iter().zip(&target).take_while(|(a, b)| a == b).count();
        report.longest_match = report.longest_match.max(matched);
        if matched == target.len() {
            report.witnessed = true;
            report.label = WITNESSED.into();
            report.witness = Some(s0);
            break;
        }
    }
    Ok(report)
}
