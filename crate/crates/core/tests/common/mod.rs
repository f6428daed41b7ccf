//! Reference implementations the integration tests compare against. None
//! of them share code with the library beyond its data types.

#![allow(dead_code)]

pub mod suites;

use absmc::kripke::KripkeStructure;
use absmc::ltl::{Ltl, Truth};
use absmc::Environment;
use rand::Rng;

pub const ATOMS: [&str; 3] = ["p0", "p1", "p2"];

pub fn atoms(k: usize) -> Vec<String> {
    ATOMS[..k].iter().map(|s| s.to_string()).collect()
}

/// Truth of `f` at every position of the word `stem · cycle^ω`, where
/// `letters[i]` holds the atoms true at position `i` (bit j = `atoms[j]`)
/// and position `n - 1` is followed by position `loop_start`.
pub fn eval_lasso(f: &Ltl, atoms: &[String], letters: &[u64], loop_start: usize) -> Vec<bool> {
    let n = letters.len();
    let next = |i: usize| if i + 1 < n { i + 1 } else { loop_start };
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(a) => {
            let j = atoms.iter().position(|x| x == a).expect("atom in alphabet");
            letters.iter().map(|l| l >> j & 1 == 1).collect()
        }
        Ltl::Not(g) => eval_lasso(g, atoms, letters, loop_start)
            .into_iter()
            .map(|b| !b)
            .collect(),
        Ltl::And(a, b) => pointwise(a, b, atoms, letters, loop_start, |x, y| x && y),
        Ltl::Or(a, b) => pointwise(a, b, atoms, letters, loop_start, |x, y| x || y),
        Ltl::Implies(a, b) => pointwise(a, b, atoms, letters, loop_start, |x, y| !x || y),
        Ltl::Next(g) => {
            let v = eval_lasso(g, atoms, letters, loop_start);
            (0..n).map(|i| v[next(i)]).collect()
        }
        Ltl::Finally(g) => least(&vec![true; n], &eval_lasso(g, atoms, letters, loop_start), next),
        Ltl::Globally(g) => greatest(&vec![false; n], &eval_lasso(g, atoms, letters, loop_start), next),
        Ltl::Until(a, b) => least(
            &eval_lasso(a, atoms, letters, loop_start),
            &eval_lasso(b, atoms, letters, loop_start),
            next,
        ),
        Ltl::Release(a, b) => greatest(
            &eval_lasso(a, atoms, letters, loop_start),
            &eval_lasso(b, atoms, letters, loop_start),
            next,
        ),
    }
}

fn pointwise(
    a: &Ltl,
    b: &Ltl,
    atoms: &[String],
    letters: &[u64],
    loop_start: usize,
    op: fn(bool, bool) -> bool,
) -> Vec<bool> {
    let va = eval_lasso(a, atoms, letters, loop_start);
    let vb = eval_lasso(b, atoms, letters, loop_start);
    va.into_iter().zip(vb).map(|(x, y)| op(x, y)).collect()
}

/// Least solution of `x_i = b_i || (a_i && x_next(i))` (a U b).
fn least(a: &[bool], b: &[bool], next: impl Fn(usize) -> usize) -> Vec<bool> {
    iterate(vec![false; b.len()], |x, i| b[i] || (a[i] && x[next(i)]))
}

/// Greatest solution of `x_i = b_i && (a_i || x_next(i))` (a R b).
fn greatest(a: &[bool], b: &[bool], next: impl Fn(usize) -> usize) -> Vec<bool> {
    iterate(vec![true; b.len()], |x, i| b[i] && (a[i] || x[next(i)]))
}

fn iterate(mut x: Vec<bool>, f: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    loop {
        let y: Vec<bool> = (0..x.len()).map(|i| f(&x, i)).collect();
        if y == x {
            return x;
        }
        x = y;
    }
}

/// Whether `stem · cycle^ω` satisfies `f`.
pub fn satisfies(f: &Ltl, atoms: &[String], stem: &[u64], cycle: &[u64]) -> bool {
    assert!(!cycle.is_empty());
    let letters: Vec<u64> = stem.iter().chain(cycle).copied().collect();
    eval_lasso(f, atoms, &letters, stem.len())[0]
}

/// Random formula of nesting depth at most `depth` over `atoms`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[String], depth: usize) -> Ltl {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Ltl::True,
            1 => Ltl::False,
            _ => Ltl::atom(&atoms[rng.gen_range(0..atoms.len())]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..11) {
        0 => random_formula(rng, atoms, d).not(),
        1 => random_formula(rng, atoms, d).and(random_formula(rng, atoms, d)),
        2 => random_formula(rng, atoms, d).or(random_formula(rng, atoms, d)),
        3 => random_formula(rng, atoms, d).implies(random_formula(rng, atoms, d)),
        4 => random_formula(rng, atoms, d).next(),
        5 | 6 => random_formula(rng, atoms, d).finally(),
        7 | 8 => random_formula(rng, atoms, d).globally(),
        9 => random_formula(rng, atoms, d).until(random_formula(rng, atoms, d)),
        _ => random_formula(rng, atoms, d).release(random_formula(rng, atoms, d)),
    }
}

/// Random total structure with two-valued labels and 1 or 2 successors
/// per state.
pub fn random_kripke<R: Rng>(rng: &mut R, max_states: usize, props: usize) -> KripkeStructure {
    let n = rng.gen_range(1..=max_states);
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    let labels: Vec<Vec<Truth>> = (0..n)
        .map(|_| {
            (0..props)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Truth::DefinitelyTrue
                    } else {
                        Truth::DefinitelyFalse
                    }
                })
                .collect()
        })
        .collect();
    let mut initial: Vec<usize> = (0..rng.gen_range(1..=2.min(n))).map(|_| rng.gen_range(0..n)).collect();
    initial.sort_unstable();
    initial.dedup();
    KripkeStructure::from_parts(atoms(props), Vec::new(), initial, succ, labels, true).expect("valid structure")
}

/// Bitset letter of a two-valued state.
pub fn letter(k: &KripkeStructure, s: usize) -> u64 {
    k.labels(s)
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == Truth::DefinitelyTrue)
        .fold(0, |acc, (j, _)| acc | 1 << j)
}

/// Search every lasso of `k` whose stem and cycle together have at most
/// `max_len` states for one that violates `f`. Returns the violating
/// (stem, cycle) of state indices.
pub fn brute_force_violation(k: &KripkeStructure, f: &Ltl, max_len: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let atoms = k.props().to_vec();
    let mut path = Vec::new();
    for &s in k.initial() {
        path.push(s);
        if let Some(v) = extend(k, f, &atoms, &mut path, max_len) {
            return Some(v);
        }
        path.pop();
    }
    None
}

fn extend(
    k: &KripkeStructure,
    f: &Ltl,
    atoms: &[String],
    path: &mut Vec<usize>,
    max_len: usize,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let last = *path.last().expect("non-empty path");
    // close the lasso at every earlier occurrence of a successor
    for &t in k.successors(last) {
        for (j, &s) in path.iter().enumerate() {
            if s == t {
                let letters: Vec<u64> = path.iter().map(|&s| letter(k, s)).collect();
                if !eval_lasso(f, atoms, &letters, j)[0] {
                    return Some((path[..j].to_vec(), path[j..].to_vec()));
                }
            }
        }
    }
    if path.len() < max_len {
        for &t in k.successors(last) {
            path.push(t);
            let r = extend(k, f, atoms, path, max_len);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
    }
    None
}

/// Whether (stem, cycle) is a lasso of `k` starting in an initial state.
pub fn is_lasso_of(k: &KripkeStructure, stem: &[usize], cycle: &[usize]) -> bool {
    if cycle.is_empty() {
        return false;
    }
    let run: Vec<usize> = stem.iter().chain(cycle).copied().collect();
    k.initial().contains(&run[0])
        && run.windows(2).all(|w| k.successors(w[0]).contains(&w[1]))
        && k.successors(*cycle.last().unwrap()).contains(&cycle[0])
}

/// Scalar transcriptions of the classic-control update equations.
pub fn reference_step(env: &Environment, s: &[f64], a: usize) -> Vec<f64> {
    match env.name() {
        "mountain-car" => {
            let force = [-1.0, 0.0, 1.0][a];
            let mut v = s[1] + force * 0.001 - 0.0025 * (3.0 * s[0]).cos();
            v = v.clamp(-0.07, 0.07);
            let mut p = s[0] + v;
            p = p.clamp(-1.2, 0.6);
            if p == -1.2 && v < 0.0 {
                v = 0.0;
            }
            vec![p, v]
        }
        "pendulum" => {
            let u = [-2.0, 0.0, 2.0][a];
            let dt = 0.05;
            let mut w = s[1] + (3.0 * 10.0 / 2.0 * s[0].sin() + 3.0 * u) * dt;
            w = w.clamp(-8.0, 8.0);
            vec![s[0] + w * dt, w]
        }
        "cartpole" => {
            let force = [-10.0, 10.0][a];
            let (x, x_dot, th, th_dot) = (s[0], s[1], s[2], s[3]);
            let (mc, mp, l, g, tau) = (1.0, 0.1, 0.5, 9.8, 0.02);
            let total = mc + mp;
            let temp = (force + mp * l * th_dot * th_dot * th.sin()) / total;
            let th_acc = (g * th.sin() - th.cos() * temp) / (l * (4.0 / 3.0 - mp * th.cos() * th.cos() / total));
            let x_acc = temp - mp * l * th_acc * th.cos() / total;
            vec![
                x + tau * x_dot,
                x_dot + tau * x_acc,
                th + tau * th_dot,
                th_dot + tau * th_acc,
            ]
        }
        other => panic!("no reference dynamics for {other}"),
    }
}

/// Uniform point of a box; with probability 1/4 per coordinate an
/// endpoint instead, so faces and corners get exercised.
pub fn sample_in<R: Rng>(rng: &mut R, b: &absmc::IntervalBox) -> Vec<f64> {
    b.intervals()
        .iter()
        .map(|iv| match rng.gen_range(0..8) {
            0 => iv.lo,
            1 => iv.hi,
            _ if iv.width() > 0.0 => rng.gen_range(iv.lo..=iv.hi),
            _ => iv.lo,
        })
        .collect()
}
