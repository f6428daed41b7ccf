//! Randomized suites shared by the property tests and the acceptance run.
//! Each returns a tally instead of panicking so callers can report it.

use absmc::abstraction::IntervalBox;
use absmc::buchi::translate_negation;
use absmc::check::{check, Outcome, Product};
use absmc::interval::Interval;
use absmc::policy::TabularPolicy;
use absmc::transformer::{AbstractTransformer, Perturbation};
use absmc::{Environment, Granularity, Policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{atoms, brute_force_violation, is_lasso_of, letter, random_formula, random_kripke, sample_in, satisfies};

/// Longest lasso (stem plus cycle) the brute-force search enumerates.
pub const LASSO_CAP: usize = 12;

#[derive(Debug, Default)]
pub struct Tally {
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(why());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }
}

pub fn environments() -> Vec<Environment> {
    vec![
        Environment::mountain_car(),
        Environment::pendulum(),
        Environment::cartpole(),
        Environment::platoon(),
    ]
}

/// A few grids per environment, from a handful of cells to fine ones.
pub fn grids(env: &Environment) -> Vec<Granularity> {
    let width: Vec<f64> = env.lower().iter().zip(env.upper()).map(|(l, u)| u - l).collect();
    // cells per dimension, kept small enough that the 7-dimensional grid
    // still has a u64 cell count
    let per_dim: &[f64] = if env.dim() > 4 {
        &[3.0, 7.0, 17.0, 40.0]
    } else {
        &[3.0, 17.0, 100.0, 1000.0]
    };
    per_dim
        .iter()
        .map(|k| {
            env.granularity(&width.iter().map(|w| w / k).collect::<Vec<_>>())
                .unwrap()
        })
        .collect()
}

/// Random box inside the bounds, at most `frac` of the range wide per
/// dimension; sometimes degenerate.
pub fn random_box<R: Rng>(rng: &mut R, env: &Environment, frac: f64) -> IntervalBox {
    IntervalBox::new(
        env.lower()
            .iter()
            .zip(env.upper())
            .map(|(&l, &u)| {
                let w = if rng.gen_bool(0.1) {
                    0.0
                } else {
                    rng.gen_range(0.0..frac) * (u - l)
                };
                let lo = rng.gen_range(l..=u - w);
                Interval::new(lo, (lo + w).min(u))
            })
            .collect(),
    )
}

pub fn random_point<R: Rng>(rng: &mut R, env: &Environment) -> Vec<f64> {
    sample_in(rng, &env.bounds())
}

/// step(s, a) lies in step_box(B, a) for s in B.
pub fn step_containment(seed: u64, cases: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs = environments();
    let mut t = Tally::default();
    for case in 0..cases {
        let env = &envs[case % envs.len()];
        let b = random_box(&mut rng, env, 0.05);
        let s = sample_in(&mut rng, &b);
        let a = rng.gen_range(0..env.num_actions());
        let next = env.step(&s, a).unwrap();
        let image = env.step_box(&b, a).unwrap();
        t.record(image.contains_point(&next), || {
            format!(
                "case {case} ({}): step({s:?}, {a}) = {next:?} escapes {image}",
                env.name()
            )
        });
    }
    t
}

/// abstract_of(s) is in cover(V) for s in V.
pub fn cover_containment(seed: u64, cases: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs = environments();
    let grids: Vec<Vec<Granularity>> = envs.iter().map(grids).collect();
    let mut t = Tally::default();
    for case in 0..cases {
        let e = case % envs.len();
        let g = &grids[e][rng.gen_range(0..grids[e].len())];
        let v = random_box(&mut rng, &envs[e], 0.05);
        let s = sample_in(&mut rng, &v);
        let cell = g.abstract_of(&s).unwrap();
        let ok = g.cover(&v).unwrap().contains(&cell);
        t.record(ok, || format!("case {case}: {s:?} in {v} but {cell:?} not covered"));
    }
    t
}

/// The cell of a (possibly perturbed) concrete successor is among the
/// abstract successors, for random cells, policies and perturbations.
pub fn transformer_soundness(seed: u64, cases: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let envs = environments();
    let grids: Vec<Vec<Granularity>> = envs.iter().map(grids).collect();
    let mut t = Tally::default();
    for case in 0..cases {
        let e = case % envs.len();
        let env = &envs[e];
        let g = &grids[e][rng.gen_range(0..grids[e].len())];
        let cell = g.cell_id(&g.abstract_of(&random_point(&mut rng, env)).unwrap());
        // random policy: random default plus a random action on this cell
        let mut table = TabularPolicy::new(g.clone(), env.num_actions(), rng.gen_range(0..env.num_actions())).unwrap();
        table.insert(cell, rng.gen_range(0..env.num_actions())).unwrap();
        let policy = Policy::from(table);
        let eps = if rng.gen_bool(0.5) {
            Perturbation::zero(env.dim())
        } else {
            Perturbation::new(g.diameters().iter().map(|d| rng.gen_range(0.0..2.0 * d)).collect()).unwrap()
        };
        let tr = AbstractTransformer::new(env, &policy, g, &eps).unwrap();
        let succ = tr.successors(cell).unwrap();

        let s = sample_in(&mut rng, &g.concretize(&g.state_of(cell)));
        let a = policy.act(&g.state_of(cell)).unwrap();
        let mut next = env.step(&s, a).unwrap();
        if env.in_bounds(&next) {
            for (i, x) in next.iter_mut().enumerate() {
                let e = eps.epsilon()[i];
                let d = if e > 0.0 { rng.gen_range(-e..=e) } else { 0.0 };
                *x = (*x + d).clamp(env.lower()[i], env.upper()[i]);
            }
        }
        let target = tr.locate(&next);
        t.record(succ.binary_search(&target).is_ok(), || {
            format!(
                "case {case} ({}): {s:?} -> {next:?} lands in {target:?}, not among {} successors",
                env.name(),
                succ.len()
            )
        });
    }
    t
}

pub struct OracleTallies {
    pub verdicts: Tally,
    pub emptiness: Tally,
    pub verified: usize,
    pub refuted: usize,
}

/// Checker verdicts against lasso enumeration on random small structures,
/// plus agreement of the two emptiness checks on every product.
pub fn checker_oracle(seed: u64, cases: usize) -> OracleTallies {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OracleTallies {
        verdicts: Tally::default(),
        emptiness: Tally::default(),
        verified: 0,
        refuted: 0,
    };
    for case in 0..cases {
        let props = rng.gen_range(1..=3);
        let k = random_kripke(&mut rng, 6, props);
        let f = random_formula(&mut rng, &atoms(props), 3);
        let v = check(&k, &f).unwrap();
        let oracle = brute_force_violation(&k, &f, LASSO_CAP);
        let (ok, why) = match v.outcome {
            Outcome::Verified => {
                out.verified += 1;
                (
                    oracle.is_none(),
                    format!("case {case}: {f} verified but {oracle:?} violates it"),
                )
            }
            Outcome::NotVerified => {
                out.refuted += 1;
                let (stem, cycle) = v.counterexample.as_ref().unwrap().kripke_lasso();
                let ls: Vec<u64> = stem.iter().map(|&s| letter(&k, s)).collect();
                let lc: Vec<u64> = cycle.iter().map(|&s| letter(&k, s)).collect();
                let genuine = is_lasso_of(&k, &stem, &cycle) && !satisfies(&f, k.props(), &ls, &lc);
                (
                    oracle.is_some() && genuine,
                    format!("case {case}: bad counterexample for {f}"),
                )
            }
            Outcome::BoundedVerified => (false, format!("case {case}: complete structure reported as bounded")),
        };
        out.verdicts.record(ok, || why);

        let na = translate_negation(&f, k.props()).unwrap();
        let product = Product::new(&k, &na).unwrap();
        out.emptiness.record(
            product.nested_dfs().0.is_some() == product.has_accepting_cycle_scc(),
            || format!("case {case}: emptiness checks disagree on {f}"),
        );
    }
    out
}
