//! LTL to Büchi automata.
//!
//! The translation is the on-the-fly tableau of Gerth, Peled, Vardi and
//! Wolper: nodes collect the obligations that must hold now (`old`) and at
//! the next position (`next`), splitting on disjunctions, untils and
//! releases. The resulting generalized automaton is degeneralized with a
//! counter, pruned to states that can still accept, and quotiented by
//! bisimulation.
//!
//! Every edge consumes one letter: a run on `w0 w1 ...` starts in the
//! initial state and its first edge must be enabled by `w0`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ltl::{Ltl, Nnf, Truth};

/// Conjunction of literals: atoms in `pos` must hold, atoms in `neg` must not.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard {
    pub pos: u64,
    pub neg: u64,
}

impl Guard {
    pub const TRUE: Guard = Guard { pos: 0, neg: 0 };

    pub fn is_consistent(&self) -> bool {
        self.pos & self.neg == 0
    }

    /// Two-valued letter: bit `i` set iff atom `i` holds.
    pub fn eval(&self, letter: u64) -> bool {
        letter & self.pos == self.pos && letter & self.neg == 0
    }

    /// Three-valued letter: `p` is enabled unless DefinitelyFalse, `!p`
    /// unless DefinitelyTrue.
    pub fn enabled(&self, labels: &[Truth]) -> bool {
        labels.iter().enumerate().all(|(i, t)| {
            let bit = 1u64 << i;
            !(self.pos & bit != 0 && *t == Truth::DefinitelyFalse || self.neg & bit != 0 && *t == Truth::DefinitelyTrue)
        })
    }

    /// Every letter satisfying `self` satisfies `other`.
    fn implies(&self, other: &Guard) -> bool {
        other.pos & !self.pos == 0 && other.neg & !self.neg == 0
    }

    fn hoa(&self) -> String {
        if self.pos == 0 && self.neg == 0 {
            return "t".into();
        }
        let mut lits = Vec::new();
        for i in 0..64 {
            if self.pos >> i & 1 == 1 {
                lits.push(format!("{i}"));
            }
            if self.neg >> i & 1 == 1 {
                lits.push(format!("!{i}"));
            }
        }
        lits.join("&")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub guard: Guard,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuchiAutomaton {
    atoms: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    edges: Vec<Vec<Edge>>,
}

impl BuchiAutomaton {
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn edges(&self, q: usize) -> &[Edge] {
        &self.edges[q]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Whether the automaton accepts `stem cycle^omega`, letters as bitsets.
    pub fn accepts(&self, stem: &[u64], cycle: &[u64]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let len = stem.len() + cycle.len();
        let letter = |i: usize| if i < stem.len() { stem[i] } else { cycle[i - stem.len()] };
        let next_pos = |i: usize| if i + 1 < len { i + 1 } else { stem.len() };
        // node (i, q): about to read letter i in state q
        let succ = |(i, q): (usize, usize)| -> Vec<(usize, usize)> {
            self.edges[q]
                .iter()
                .filter(|e| e.guard.eval(letter(i)))
                .map(|e| (next_pos(i), e.to))
                .collect()
        };
        let reach = |from: Vec<(usize, usize)>| {
            let mut seen: BTreeSet<(usize, usize)> = from.iter().copied().collect();
            let mut queue: VecDeque<_> = from.into();
            while let Some(n) = queue.pop_front() {
                for m in succ(n) {
                    if seen.insert(m) {
                        queue.push_back(m);
                    }
                }
            }
            seen
        };
        let reachable = reach(vec![(0, self.initial)]);
        reachable
            .iter()
            .filter(|&&(i, q)| i >= stem.len() && self.accepting[q])
            .any(|&n| reach(succ(n)).contains(&n))
    }

    /// HOA v1 text.
    pub fn to_hoa(&self, name: &str) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::new();
        let _ = writeln!(out, "HOA: v1");
        let _ = writeln!(out, "name: {}", quote(name));
        let _ = writeln!(out, "States: {}", self.num_states());
        let _ = writeln!(out, "Start: {}", self.initial);
        let aps: Vec<String> = self.atoms.iter().map(|a| quote(a)).collect();
        let _ = writeln!(out, "AP: {} {}", self.atoms.len(), aps.join(" "));
        let _ = writeln!(out, "acc-name: Buchi");
        let _ = writeln!(out, "Acceptance: 1 Inf(0)");
        let _ = writeln!(out, "properties: trans-labels explicit-labels state-acc");
        let _ = writeln!(out, "--BODY--");
        for q in 0..self.num_states() {
            if self.accepting[q] {
                let _ = writeln!(out, "State: {q} {{0}}");
            } else {
                let _ = writeln!(out, "State: {q}");
            }
            for e in &self.edges[q] {
                let _ = writeln!(out, "[{}] {}", e.guard.hoa(), e.to);
            }
        }
        let _ = writeln!(out, "--END--");
        out
    }
}

/// Automaton for `f` over `atoms` (at most 64).
pub fn translate(f: &Ltl, atoms: &[String]) -> Result<BuchiAutomaton> {
    if atoms.len() > 64 {
        return Err(Error::Config(format!(
            "{} atoms; at most 64 are supported",
            atoms.len()
        )));
    }
    let nnf = f.to_nnf(atoms)?;
    let (nodes, untils) = tableau(&nnf);
    let general = generalized(&nodes, &untils);
    let degen = degeneralize(&general, atoms.to_vec());
    Ok(minimize(prune(degen)))
}

/// Automaton for `!f`, the one product emptiness runs against.
pub fn translate_negation(f: &Ltl, atoms: &[String]) -> Result<BuchiAutomaton> {
    translate(&f.clone().not(), atoms)
}

const INIT: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node {
    incoming: BTreeSet<usize>,
    old: BTreeSet<Nnf>,
}

struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Nnf>,
    old: BTreeSet<Nnf>,
    next: BTreeSet<Nnf>,
}

fn tableau(f: &Nnf) -> (Vec<Node>, Vec<Nnf>) {
    let mut nodes: Vec<Node> = Vec::new();
    let mut index: BTreeMap<(BTreeSet<Nnf>, BTreeSet<Nnf>), usize> = BTreeMap::new();
    let mut work = vec![Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([f.clone()]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut n) = work.pop() {
        let Some(eta) = n.new.pop_first() else {
            let key = (n.old, n.next);
            match index.get(&key) {
                Some(&q) => nodes[q].incoming.extend(n.incoming),
                None => {
                    let id = nodes.len();
                    index.insert(key.clone(), id);
                    work.push(Pending {
                        incoming: BTreeSet::from([id]),
                        new: key.1.clone(),
                        old: BTreeSet::new(),
                        next: BTreeSet::new(),
                    });
                    nodes.push(Node {
                        incoming: n.incoming,
                        old: key.0,
                    });
                }
            }
            continue;
        };
        if n.old.contains(&eta) {
            work.push(n);
            continue;
        }
        match &eta {
            Nnf::False => {}
            Nnf::True => {
                n.old.insert(eta);
                work.push(n);
            }
            Nnf::Lit(i, b) => {
                if !n.old.contains(&Nnf::Lit(*i, !b)) {
                    n.old.insert(eta);
                    work.push(n);
                }
            }
            Nnf::And(a, b) => {
                for g in [a, b] {
                    if !n.old.contains(g) {
                        n.new.insert((**g).clone());
                    }
                }
                n.old.insert(eta);
                work.push(n);
            }
            Nnf::Next(a) => {
                n.next.insert((**a).clone());
                n.old.insert(eta);
                work.push(n);
            }
            Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                let (first_now, first_next, second_now): (Vec<&Nnf>, bool, Vec<&Nnf>) = match &eta {
                    Nnf::Or(..) => (vec![a], false, vec![b]),
                    Nnf::Until(..) => (vec![a], true, vec![b]),
                    _ => (vec![b], true, vec![a, b]),
                };
                let mut n2 = Pending {
                    incoming: n.incoming.clone(),
                    new: n.new.clone(),
                    old: n.old.clone(),
                    next: n.next.clone(),
                };
                for g in first_now {
                    if !n.old.contains(g) {
                        n.new.insert(g.clone());
                    }
                }
                if first_next {
                    n.next.insert(eta.clone());
                }
                for g in second_now {
                    if !n2.old.contains(g) {
                        n2.new.insert(g.clone());
                    }
                }
                n.old.insert(eta.clone());
                n2.old.insert(eta);
                // second branch is pushed first so the first is expanded first
                work.push(n2);
                work.push(n);
            }
        }
    }
    let mut untils = Vec::new();
    collect_untils(f, &mut untils);
    (nodes, untils)
}

fn collect_untils(f: &Nnf, out: &mut Vec<Nnf>) {
    match f {
        Nnf::True | Nnf::False | Nnf::Lit(..) => {}
        Nnf::Next(a) => collect_untils(a, out),
        Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Release(a, b) => {
            collect_untils(a, out);
            collect_untils(b, out);
        }
        Nnf::Until(a, b) => {
            if !out.contains(f) {
                out.push(f.clone());
            }
            collect_untils(a, out);
            collect_untils(b, out);
        }
    }
}

/// State-based generalized automaton; state 0 is a fresh initial state
/// that belongs to no acceptance set.
struct Generalized {
    edges: Vec<Vec<Edge>>,
    /// `sets[j][q]`: state `q` is in acceptance set `j`.
    sets: Vec<Vec<bool>>,
}

fn generalized(nodes: &[Node], untils: &[Nnf]) -> Generalized {
    let guard = |n: &Node| {
        let mut g = Guard::TRUE;
        for f in &n.old {
            if let Nnf::Lit(i, b) = f {
                if *b {
                    g.pos |= 1 << i;
                } else {
                    g.neg |= 1 << i;
                }
            }
        }
        g
    };
    let mut edges = vec![Vec::new(); nodes.len() + 1];
    for (q, n) in nodes.iter().enumerate() {
        let g = guard(n);
        for &p in &n.incoming {
            let from = if p == INIT { 0 } else { p + 1 };
            edges[from].push(Edge { guard: g, to: q + 1 });
        }
    }
    let sets = untils
        .iter()
        .map(|u| {
            let Nnf::Until(_, b) = u else {
                unreachable!("only untils are collected")
            };
            std::iter::once(false)
                .chain(nodes.iter().map(|n| !n.old.contains(u) || n.old.contains(b)))
                .collect()
        })
        .collect();
    Generalized { edges, sets }
}

fn degeneralize(g: &Generalized, atoms: Vec<String>) -> BuchiAutomaton {
    let k = g.sets.len();
    if k == 0 {
        // no eventualities: every infinite run accepts
        return BuchiAutomaton {
            atoms,
            initial: 0,
            accepting: vec![true; g.edges.len()],
            edges: g.edges.clone(),
        };
    }
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::from([((0, 0), 0)]);
    let mut order = vec![(0usize, 0usize)];
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new()];
    let mut i = 0;
    while i < order.len() {
        let (q, c) = order[i];
        let next_c = if g.sets[c][q] { (c + 1) % k } else { c };
        for e in &g.edges[q] {
            let key = (e.to, next_c);
            let id = *ids.entry(key).or_insert_with(|| {
                order.push(key);
                edges.push(Vec::new());
                order.len() - 1
            });
            edges[i].push(Edge { guard: e.guard, to: id });
        }
        i += 1;
    }
    let accepting = order.iter().map(|&(q, c)| c == 0 && g.sets[0][q]).collect();
    BuchiAutomaton {
        atoms,
        initial: 0,
        accepting,
        edges,
    }
}

/// Drop states that cannot reach an accepting cycle, then unreachable ones.
fn prune(a: BuchiAutomaton) -> BuchiAutomaton {
    let n = a.num_states();
    let comp = sccs(&a.edges);
    let mut comp_size = vec![0usize; n];
    comp.iter().for_each(|&c| comp_size[c] += 1);
    let cyclic = |q: usize| comp_size[comp[q]] > 1 || a.edges[q].iter().any(|e| e.to == q);
    let mut preds = vec![Vec::new(); n];
    for (q, es) in a.edges.iter().enumerate() {
        for e in es {
            preds[e.to].push(q);
        }
    }
    let mut live = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&q| a.accepting[q] && cyclic(q)).collect();
    stack.iter().for_each(|&q| live[q] = true);
    while let Some(q) = stack.pop() {
        for &p in &preds[q] {
            if !live[p] {
                live[p] = true;
                stack.push(p);
            }
        }
    }
    // renumber reachable live states, keeping the initial state even if dead
    let mut map = vec![usize::MAX; n];
    let mut order = vec![a.initial];
    map[a.initial] = 0;
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        for e in &a.edges[q] {
            if live[e.to] && map[e.to] == usize::MAX {
                map[e.to] = order.len();
                order.push(e.to);
            }
        }
        i += 1;
    }
    let edges = order
        .iter()
        .map(|&q| {
            a.edges[q]
                .iter()
                .filter(|e| live[e.to])
                .map(|e| Edge {
                    guard: e.guard,
                    to: map[e.to],
                })
                .collect()
        })
        .collect();
    BuchiAutomaton {
        atoms: a.atoms,
        initial: 0,
        accepting: order.iter().map(|&q| a.accepting[q]).collect(),
        edges,
    }
}

/// Quotient by the coarsest bisimulation that respects acceptance and
/// guards. Per-target guard subsumption is applied at every round so that
/// signatures are canonical.
fn minimize(a: BuchiAutomaton) -> BuchiAutomaton {
    let n = a.num_states();
    let mut class: Vec<usize> = a.accepting.iter().map(|&b| usize::from(b)).collect();
    let mut count = class.iter().collect::<BTreeSet<_>>().len();
    loop {
        let sigs: Vec<(usize, Vec<Edge>)> = (0..n)
            .map(|q| {
                let es = a.edges[q]
                    .iter()
                    .map(|e| Edge {
                        guard: e.guard,
                        to: class[e.to],
                    })
                    .collect();
                (class[q], simplify(es))
            })
            .collect();
        let mut ids: BTreeMap<&(usize, Vec<Edge>), usize> = BTreeMap::new();
        let next: Vec<usize> = sigs
            .iter()
            .map(|s| {
                let k = ids.len();
                *ids.entry(s).or_insert(k)
            })
            .collect();
        let new_count = ids.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    // renumber so the initial class is 0 and others follow BFS order
    let mut edges_of = vec![Vec::new(); count];
    let mut accepting = vec![false; count];
    for q in 0..n {
        accepting[class[q]] = a.accepting[q];
        edges_of[class[q]] = simplify(
            a.edges[q]
                .iter()
                .map(|e| Edge {
                    guard: e.guard,
                    to: class[e.to],
                })
                .collect(),
        );
    }
    let mut map = vec![usize::MAX; count];
    let mut order = vec![class[a.initial]];
    map[class[a.initial]] = 0;
    let mut i = 0;
    while i < order.len() {
        for e in &edges_of[order[i]] {
            if map[e.to] == usize::MAX {
                map[e.to] = order.len();
                order.push(e.to);
            }
        }
        i += 1;
    }
    let edges = order
        .iter()
        .map(|&c| {
            let mut es: Vec<Edge> = edges_of[c]
                .iter()
                .map(|e| Edge {
                    guard: e.guard,
                    to: map[e.to],
                })
                .collect();
            es.sort();
            es
        })
        .collect();
    BuchiAutomaton {
        atoms: a.atoms,
        initial: 0,
        accepting: order.iter().map(|&c| accepting[c]).collect(),
        edges,
    }
}

/// Sort, dedupe, and drop edges whose guard is subsumed by a weaker guard
/// to the same target.
fn simplify(mut es: Vec<Edge>) -> Vec<Edge> {
    es.sort();
    es.dedup();
    let keep: Vec<bool> = es
        .iter()
        .map(|e| !es.iter().any(|f| f != e && f.to == e.to && e.guard.implies(&f.guard)))
        .collect();
    es.into_iter().zip(keep).filter_map(|(e, k)| k.then_some(e)).collect()
}

/// Tarjan's algorithm, iterative. Returns the component index of each
/// node; components are numbered in reverse topological order.
pub(crate) fn sccs(edges: &[Vec<Edge>]) -> Vec<usize> {
    let adj: Vec<Vec<usize>> = edges.iter().map(|es| es.iter().map(|e| e.to).collect()).collect();
    tarjan(&adj)
}

pub(crate) fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*i) {
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("scc stack");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn atoms(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn aut(text: &str, names: &[&str]) -> BuchiAutomaton {
        translate(&parse_ltl(text).unwrap(), &atoms(names)).unwrap()
    }

    #[test]
    fn globally_is_one_accepting_self_loop() {
        let a = aut("G p", &["p"]);
        assert_eq!(a.num_states(), 1);
        assert!(a.is_accepting(0));
        assert_eq!(
            a.edges(0),
            &[Edge {
                guard: Guard { pos: 1, neg: 0 },
                to: 0
            }]
        );
    }

    #[test]
    fn finally_has_two_states() {
        let a = aut("F p", &["p"]);
        assert_eq!(a.num_states(), 2);
        assert!(!a.is_accepting(0));
        assert!(a.is_accepting(1));
        assert!(a.edges(0).contains(&Edge {
            guard: Guard { pos: 1, neg: 0 },
            to: 1
        }));
        assert_eq!(
            a.edges(1),
            &[Edge {
                guard: Guard::TRUE,
                to: 1
            }]
        );
    }

    #[test]
    fn unsatisfiable_formula_has_empty_language() {
        let a = aut("p && !p", &["p"]);
        assert!(!a.accepts(&[], &[0]));
        assert!(!a.accepts(&[], &[1]));
        assert_eq!(a.num_edges(), 0);
    }

    #[test]
    fn word_acceptance() {
        let a = aut("G F p", &["p"]);
        assert!(a.accepts(&[0, 0], &[0, 1]));
        assert!(!a.accepts(&[1, 1], &[0]));
        let b = aut("a U b", &["a", "b"]);
        assert!(b.accepts(&[0b01, 0b01, 0b10], &[0]));
        assert!(!b.accepts(&[0b01, 0b00, 0b10], &[0]));
        assert!(!b.accepts(&[], &[0b01]));
        let c = aut("X !p", &["p"]);
        assert!(c.accepts(&[1, 0], &[1]));
        assert!(!c.accepts(&[0, 1], &[0]));
    }

    #[test]
    fn three_valued_guards() {
        let g = Guard { pos: 0b01, neg: 0b10 };
        assert!(g.enabled(&[Truth::Unknown, Truth::Unknown]));
        assert!(g.enabled(&[Truth::DefinitelyTrue, Truth::DefinitelyFalse]));
        assert!(!g.enabled(&[Truth::DefinitelyFalse, Truth::Unknown]));
        assert!(!g.enabled(&[Truth::Unknown, Truth::DefinitelyTrue]));
    }

    #[test]
    fn hoa_output() {
        let a = aut("F p", &["p"]);
        let hoa = a.to_hoa("F p");
        assert!(hoa.starts_with("HOA: v1\n"));
        assert!(hoa.contains("States: 2\n"));
        assert!(hoa.contains("AP: 1 \"p\"\n"));
        assert!(hoa.contains("State: 1 {0}\n[t] 1\n"));
        assert!(hoa.trim_end().ends_with("--END--"));
    }

    #[test]
    fn tarjan_components() {
        let adj = vec![vec![1], vec![2], vec![0, 3], vec![3], vec![]];
        let c = tarjan(&adj);
        assert_eq!(c[0], c[1]);
        assert_eq!(c[1], c[2]);
        assert_ne!(c[2], c[3]);
        assert_ne!(c[3], c[4]);
    }
}
