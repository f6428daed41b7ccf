//! Deterministic benchmark dynamics and their interval extensions.
//!
//! `step` advances a concrete state by one explicit-Euler step. `step_box`
//! evaluates the same expression tree in interval arithmetic, so that for
//! every `s` in a box `B`, `step(s, a)` lies in `step_box(B, a)`. Both
//! apply the environment's own clamps (velocity limits, walls). Neither
//! clips to the state-space bounds: a successor outside the bounds is the
//! caller's business (the abstract transformer maps it to the sink).

use std::path::Path;

use serde::Deserialize;

use crate::abstraction::{Granularity, IntervalBox};
use crate::constants::{cartpole as cp, mountain_car as mc, pendulum as pd};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// One discrete action: a label and the control input vector it applies.
#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dynamics {
    MountainCar,
    Pendulum,
    CartPole,
    Linear(LinearDynamics),
}

/// `s' = A s + B a`, with a platoon-style reward.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearDynamics {
    /// Row-major `n x n`.
    pub a: Vec<f64>,
    /// Row-major `n x m`.
    pub b: Vec<f64>,
    pub inputs: usize,
    pub distance_dims: Vec<usize>,
    pub reference_gap: f64,
    pub collision_penalty: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    name: String,
    variables: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    actions: Vec<Action>,
    dt: f64,
    initial_box: IntervalBox,
    dynamics: Dynamics,
}

impl Environment {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn initial_box(&self) -> &IntervalBox {
        &self.initial_box
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn bounds(&self) -> IntervalBox {
        IntervalBox::new(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(&l, &u)| Interval::new(l, u))
                .collect(),
        )
    }

    /// A grid over this environment's bounds.
    pub fn granularity(&self, diameters: &[f64]) -> Result<Granularity> {
        Granularity::new(&self.lower, &self.upper, diameters)
    }

    pub fn in_bounds(&self, s: &[f64]) -> bool {
        s.len() == self.dim()
            && s.iter()
                .enumerate()
                .all(|(i, &x)| self.lower[i] <= x && x <= self.upper[i])
    }

    /// Replace the action grid (e.g. a finer torque grid for the pendulum).
    pub fn with_actions(mut self, actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Config("action list is empty".into()));
        }
        let arity = self.actions[0].values.len();
        if let Some(a) = actions.iter().find(|a| a.values.len() != arity) {
            return Err(Error::Config(format!(
                "action `{}` has {} inputs, expected {arity}",
                a.label,
                a.values.len()
            )));
        }
        self.actions = actions;
        Ok(self)
    }

    pub fn with_initial_box(mut self, b: IntervalBox) -> Result<Self> {
        if b.dim() != self.dim() {
            return Err(Error::dims("initial box", self.dim(), b.dim()));
        }
        self.initial_box = b;
        Ok(self)
    }

    fn action(&self, a: usize) -> Result<&Action> {
        self.actions.get(a).ok_or(Error::UnknownAction(a))
    }

    pub fn step(&self, s: &[f64], a: usize) -> Result<Vec<f64>> {
        if s.len() != self.dim() {
            return Err(Error::dims("state", self.dim(), s.len()));
        }
        let u = &self.action(a)?.values;
        Ok(match &self.dynamics {
            Dynamics::MountainCar => mountain_car_step(s, u[0]),
            Dynamics::Pendulum => pendulum_step(s, u[0]),
            Dynamics::CartPole => cartpole_step(s, u[0]),
            Dynamics::Linear(lin) => lin.step(s, u),
        })
    }

    pub fn step_box(&self, b: &IntervalBox, a: usize) -> Result<IntervalBox> {
        if b.dim() != self.dim() {
            return Err(Error::dims("box", self.dim(), b.dim()));
        }
        let u = &self.action(a)?.values;
        let s = b.intervals();
        Ok(IntervalBox::new(match &self.dynamics {
            Dynamics::MountainCar => mountain_car_step_box(s, u[0]),
            Dynamics::Pendulum => pendulum_step_box(s, u[0]),
            Dynamics::CartPole => cartpole_step_box(s, u[0]),
            Dynamics::Linear(lin) => lin.step_box(s, u),
        }))
    }

    pub fn reward(&self, _s: &[f64], a: usize, next: &[f64]) -> f64 {
        let u = self.actions.get(a).map(|x| x.values.as_slice()).unwrap_or(&[0.0]);
        match &self.dynamics {
            Dynamics::MountainCar => mc::STEP_REWARD,
            Dynamics::Pendulum => {
                let (th, w) = (next[0], next[1]);
                let r = -(th * th + pd::W_OMEGA * w * w + pd::W_TORQUE * u[0] * u[0]);
                if th.abs() > pd::FALL_ANGLE {
                    r + pd::FALL_PENALTY
                } else {
                    r
                }
            }
            Dynamics::CartPole => cp::STEP_REWARD,
            Dynamics::Linear(lin) => {
                let dev: f64 = lin
                    .distance_dims
                    .iter()
                    .map(|&i| (next[i] - lin.reference_gap).abs())
                    .sum();
                if lin.distance_dims.iter().any(|&i| next[i] < 0.0) {
                    -dev - lin.collision_penalty
                } else {
                    -dev
                }
            }
        }
    }

    /// Episode termination (training and evaluation only). States outside
    /// the bounds always terminate.
    pub fn done(&self, s: &[f64]) -> bool {
        if !self.in_bounds(s) {
            return true;
        }
        match &self.dynamics {
            Dynamics::MountainCar => s[0] >= mc::GOAL_POSITION,
            Dynamics::Pendulum => s[0].abs() > pd::FALL_ANGLE,
            Dynamics::CartPole => s[0].abs() > cp::X_THRESHOLD || s[2].abs() > cp::THETA_THRESHOLD,
            Dynamics::Linear(lin) => lin.distance_dims.iter().any(|&i| s[i] < 0.0),
        }
    }

    pub fn mountain_car() -> Self {
        Environment {
            name: "mountain-car".into(),
            variables: vec!["p".into(), "v".into()],
            lower: vec![mc::MIN_POSITION, -mc::MAX_SPEED],
            upper: vec![mc::MAX_POSITION, mc::MAX_SPEED],
            actions: scalar_actions(&mc::ACTIONS, &["left", "coast", "right"]),
            dt: 1.0,
            initial_box: IntervalBox::from_pairs(&mc::INITIAL).expect("valid constant box"),
            dynamics: Dynamics::MountainCar,
        }
    }

    pub fn pendulum() -> Self {
        Environment {
            name: "pendulum".into(),
            variables: vec!["theta".into(), "omega".into()],
            lower: vec![-pd::THETA_BOUND, -pd::MAX_SPEED],
            upper: vec![pd::THETA_BOUND, pd::MAX_SPEED],
            actions: scalar_actions(&pd::ACTIONS, &["ccw", "zero", "cw"]),
            dt: pd::DT,
            initial_box: IntervalBox::from_pairs(&pd::INITIAL).expect("valid constant box"),
            dynamics: Dynamics::Pendulum,
        }
    }

    pub fn cartpole() -> Self {
        Environment {
            name: "cartpole".into(),
            variables: vec!["x".into(), "x_dot".into(), "theta".into(), "theta_dot".into()],
            lower: vec![-cp::X_BOUND, -cp::X_DOT_BOUND, -cp::THETA_BOUND, -cp::THETA_DOT_BOUND],
            upper: vec![cp::X_BOUND, cp::X_DOT_BOUND, cp::THETA_BOUND, cp::THETA_DOT_BOUND],
            actions: scalar_actions(&cp::ACTIONS, &["push_left", "push_right"]),
            dt: cp::TAU,
            initial_box: IntervalBox::from_pairs(&cp::INITIAL).expect("valid constant box"),
            dynamics: Dynamics::CartPole,
        }
    }

    /// The shipped default platoon model.
    pub fn platoon() -> Self {
        PlatoonConfig::parse(crate::constants::platoon::DEFAULT_CONFIG)
            .and_then(PlatoonConfig::into_environment)
            .expect("shipped platoon config is valid")
    }

    pub fn platoon_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PlatoonConfig::parse(&text)?.into_environment()
    }
}

/// Look up a built-in environment by name.
pub fn builtin(name: &str) -> Result<Environment> {
    match name {
        "mountain-car" | "mountaincar" | "mountain_car" => Ok(Environment::mountain_car()),
        "pendulum" => Ok(Environment::pendulum()),
        "cartpole" | "cart-pole" => Ok(Environment::cartpole()),
        "platoon" | "4-car-platoon" => Ok(Environment::platoon()),
        other => Err(Error::UnknownEnvironment(other.to_string())),
    }
}

fn scalar_actions(values: &[f64], labels: &[&str]) -> Vec<Action> {
    values
        .iter()
        .zip(labels)
        .map(|(&v, &l)| Action {
            label: l.to_string(),
            values: vec![v],
        })
        .collect()
}

fn mountain_car_step(s: &[f64], throttle: f64) -> Vec<f64> {
    let (p, v) = (s[0], s[1]);
    let mut v2 = (v + throttle * mc::FORCE + (3.0 * p).cos() * (-mc::GRAVITY)).clamp(-mc::MAX_SPEED, mc::MAX_SPEED);
    let p2 = (p + v2).clamp(mc::MIN_POSITION, mc::MAX_POSITION);
    if p2 == mc::MIN_POSITION && v2 < 0.0 {
        v2 = 0.0;
    }
    vec![p2, v2]
}

fn mountain_car_step_box(s: &[Interval], throttle: f64) -> Vec<Interval> {
    let (p, v) = (s[0], s[1]);
    let gravity = p.scale(3.0).cos().scale(-mc::GRAVITY);
    let mut v2 = (v.add_scalar(throttle * mc::FORCE) + gravity).clamp(-mc::MAX_SPEED, mc::MAX_SPEED);
    let p2 = (p + v2).clamp(mc::MIN_POSITION, mc::MAX_POSITION);
    // left wall: states that hit it with negative velocity are stopped
    if p2.lo <= mc::MIN_POSITION && v2.lo < 0.0 {
        v2 = v2.hull_point(0.0);
    }
    vec![p2, v2]
}

fn pendulum_step(s: &[f64], torque: f64) -> Vec<f64> {
    let (th, w) = (s[0], s[1]);
    let acc = 3.0 * pd::GRAVITY / (2.0 * pd::LENGTH) * th.sin() + 3.0 / (pd::MASS * pd::LENGTH * pd::LENGTH) * torque;
    let w2 = (w + acc * pd::DT).clamp(-pd::MAX_SPEED, pd::MAX_SPEED);
    let th2 = th + w2 * pd::DT;
    vec![th2, w2]
}

fn pendulum_step_box(s: &[Interval], torque: f64) -> Vec<Interval> {
    let (th, w) = (s[0], s[1]);
    let acc = th
        .sin()
        .scale(3.0 * pd::GRAVITY / (2.0 * pd::LENGTH))
        .add_scalar(3.0 / (pd::MASS * pd::LENGTH * pd::LENGTH) * torque);
    let w2 = (w + acc.scale(pd::DT)).clamp(-pd::MAX_SPEED, pd::MAX_SPEED);
    let th2 = th + w2.scale(pd::DT);
    vec![th2, w2]
}

fn cartpole_step(s: &[f64], force: f64) -> Vec<f64> {
    let (x, x_dot, th, th_dot) = (s[0], s[1], s[2], s[3]);
    let c = th.cos();
    let sn = th.sin();
    let temp = (force + cp::POLE_MASS_LENGTH * (th_dot * th_dot) * sn) / cp::TOTAL_MASS;
    let denom = cp::LENGTH * (4.0 / 3.0 - cp::MASS_POLE * (c * c) / cp::TOTAL_MASS);
    let th_acc = (cp::GRAVITY * sn - c * temp) / denom;
    let x_acc = temp - cp::POLE_MASS_LENGTH * th_acc * c / cp::TOTAL_MASS;
    vec![
        x + cp::TAU * x_dot,
        x_dot + cp::TAU * x_acc,
        th + cp::TAU * th_dot,
        th_dot + cp::TAU * th_acc,
    ]
}

fn div_scalar(x: Interval, k: f64) -> Interval {
    x.checked_div(&Interval::point(k)).expect("nonzero scalar divisor")
}

fn cartpole_step_box(s: &[Interval], force: f64) -> Vec<Interval> {
    let (x, x_dot, th, th_dot) = (s[0], s[1], s[2], s[3]);
    let c = th.cos();
    let sn = th.sin();
    let temp = div_scalar(
        (th_dot.sqr().scale(cp::POLE_MASS_LENGTH) * sn).add_scalar(force),
        cp::TOTAL_MASS,
    );
    let denom = Interval::point(4.0 / 3.0) - div_scalar(c.sqr().scale(cp::MASS_POLE), cp::TOTAL_MASS);
    let denom = denom.scale(cp::LENGTH);
    let num = sn.scale(cp::GRAVITY) - c * temp;
    let th_acc = num
        .checked_div(&denom)
        .expect("cart-pole denominator is bounded away from zero");
    let x_acc = temp - div_scalar(th_acc.scale(cp::POLE_MASS_LENGTH) * c, cp::TOTAL_MASS);
    vec![
        x + x_dot.scale(cp::TAU),
        x_dot + x_acc.scale(cp::TAU),
        th + th_dot.scale(cp::TAU),
        th_dot + th_acc.scale(cp::TAU),
    ]
}

impl LinearDynamics {
    fn n(&self) -> usize {
        (self.a.len() as f64).sqrt() as usize
    }

    fn input_term(&self, i: usize, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (k, &uk) in u.iter().enumerate() {
            acc += self.b[i * self.inputs + k] * uk;
        }
        acc
    }

    fn step(&self, s: &[f64], u: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for (j, &sj) in s.iter().enumerate() {
                    let aij = self.a[i * n + j];
                    if aij != 0.0 {
                        acc += aij * sj;
                    }
                }
                acc + self.input_term(i, u)
            })
            .collect()
    }

    fn step_box(&self, s: &[Interval], u: &[f64]) -> Vec<Interval> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut acc = Interval::point(0.0);
                for (j, sj) in s.iter().enumerate() {
                    let aij = self.a[i * n + j];
                    if aij != 0.0 {
                        acc = acc + sj.scale(aij);
                    }
                }
                acc.add_scalar(self.input_term(i, u))
            })
            .collect()
    }
}

/// A matrix given either as nested rows or as one flat row-major array.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl MatrixSpec {
    fn flatten(self, rows: usize, cols: usize, name: &str) -> Result<Vec<f64>> {
        let flat = match self {
            MatrixSpec::Rows(r) => {
                if r.len() != rows {
                    return Err(Error::Format(format!(
                        "matrix {name} has {} rows, expected {rows}",
                        r.len()
                    )));
                }
                if let Some((i, row)) = r.iter().enumerate().find(|(_, row)| row.len() != cols) {
                    return Err(Error::Format(format!(
                        "matrix {name} row {i} has {} columns, expected {cols}",
                        row.len()
                    )));
                }
                r.into_iter().flatten().collect()
            }
            MatrixSpec::Flat(f) => f,
        };
        if flat.len() != rows * cols {
            return Err(Error::Format(format!(
                "matrix {name} has {} entries, expected {rows}x{cols}",
                flat.len()
            )));
        }
        Ok(flat)
    }
}

#[derive(Debug, Deserialize)]
struct PlatoonReward {
    distance_dims: Vec<usize>,
    reference_gap: f64,
    collision_penalty: f64,
}

/// TOML description of a linear platoon model.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonConfig {
    #[serde(default = "default_platoon_name")]
    name: String,
    #[serde(default = "default_platoon_dt")]
    dt: f64,
    variables: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(rename = "A")]
    a: MatrixSpec,
    #[serde(rename = "B")]
    b: MatrixSpec,
    action_grid: Vec<Vec<f64>>,
    initial_box: Vec<[f64; 2]>,
    reward: PlatoonReward,
}

fn default_platoon_name() -> String {
    "platoon".into()
}

fn default_platoon_dt() -> f64 {
    0.1
}

impl PlatoonConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("platoon config: {e}")))
    }

    pub fn into_environment(self) -> Result<Environment> {
        let n = self.variables.len();
        if n == 0 {
            return Err(Error::Format("platoon config declares no variables".into()));
        }
        if self.lower.len() != n {
            return Err(Error::dims("platoon lower", n, self.lower.len()));
        }
        if self.upper.len() != n {
            return Err(Error::dims("platoon upper", n, self.upper.len()));
        }
        if self.initial_box.len() != n {
            return Err(Error::dims("platoon initial_box", n, self.initial_box.len()));
        }
        let m = self.action_grid.len();
        if m == 0 || self.action_grid.iter().any(|g| g.is_empty()) {
            return Err(Error::Format(
                "action_grid needs a non-empty choice list per input".into(),
            ));
        }
        if let Some(&d) = self.reward.distance_dims.iter().find(|&&d| d >= n) {
            return Err(Error::Format(format!("distance dimension {d} out of range")));
        }
        let a = self.a.flatten(n, n, "A")?;
        let b = self.b.flatten(n, m, "B")?;
        let mut actions = vec![Vec::new()];
        for choices in &self.action_grid {
            actions = actions
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    choices.iter().map(move |&c| {
                        let mut v = prefix.clone();
                        v.push(c);
                        v
                    })
                })
                .collect();
        }
        let actions = actions
            .into_iter()
            .map(|values| Action {
                label: format!("{values:?}"),
                values,
            })
            .collect();
        for (i, (&l, &u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.partial_cmp(&u).is_none_or(|o| o.is_ge()) {
                return Err(Error::EmptyRange {
                    dim: i,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(Environment {
            name: self.name,
            variables: self.variables,
            lower: self.lower,
            upper: self.upper,
            actions,
            dt: self.dt,
            initial_box: IntervalBox::from_pairs(&self.initial_box)?,
            dynamics: Dynamics::Linear(LinearDynamics {
                a,
                b,
                inputs: m,
                distance_dims: self.reward.distance_dims,
                reference_gap: self.reward.reference_gap,
                collision_penalty: self.reward.collision_penalty,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let m = builtin("mountain-car").unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.num_actions(), 3);
        assert_eq!(mc::GOAL_POSITION, 0.5);
        let p = builtin("pendulum").unwrap();
        assert_eq!(p.variables(), &["theta".to_string(), "omega".to_string()]);
        assert_eq!(builtin("cartpole").unwrap().dim(), 4);
        let pl = builtin("platoon").unwrap();
        assert_eq!(pl.dim(), 7);
        assert_eq!(pl.num_actions(), 27);
        assert!(matches!(builtin("acrobot"), Err(Error::UnknownEnvironment(_))));
    }

    #[test]
    fn mountain_car_reference_step() {
        let env = Environment::mountain_car();
        let s2 = env.step(&[-0.5, 0.0], 2).unwrap();
        let v = 0.0 + 0.001 * 1.0 - 0.0025 * (3.0f64 * -0.5).cos();
        assert!((s2[1] - v).abs() < 1e-15);
        assert!((s2[0] - (-0.5 + v)).abs() < 1e-15);
    }

    #[test]
    fn mountain_car_left_wall_stops_the_car() {
        let env = Environment::mountain_car();
        let s2 = env.step(&[-1.19, -0.05], 0).unwrap();
        assert_eq!(s2, vec![-1.2, 0.0]);
        let b = env
            .step_box(&IntervalBox::from_pairs(&[[-1.2, -1.19], [-0.05, -0.04]]).unwrap(), 0)
            .unwrap();
        assert!(b.contains_point(&s2));
    }

    #[test]
    fn pendulum_upright_equilibrium() {
        let env = Environment::pendulum();
        assert_eq!(env.step(&[0.0, 0.0], 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn unknown_action_is_rejected() {
        let env = Environment::pendulum();
        assert!(matches!(env.step(&[0.0, 0.0], 3), Err(Error::UnknownAction(3))));
        assert!(matches!(
            env.step_box(&IntervalBox::point(&[0.0, 0.0]), 7),
            Err(Error::UnknownAction(7))
        ));
    }

    #[test]
    fn pendulum_box_over_sine_peak_reaches_peak_acceleration() {
        let env = Environment::pendulum();
        let b = IntervalBox::from_pairs(&[[1.4, 1.8], [0.0, 0.0]]).unwrap();
        let out = env.step_box(&b, 1).unwrap();
        // omega' = 0.75 * sin(theta); the peak at pi/2 gives exactly 0.75
        assert!((out.intervals()[1].hi - 0.75).abs() < 1e-12);
    }

    #[test]
    fn point_box_is_tight() {
        for env in [
            Environment::mountain_car(),
            Environment::pendulum(),
            Environment::cartpole(),
            Environment::platoon(),
        ] {
            let s: Vec<f64> = env.initial_box().intervals().iter().map(|iv| iv.mid()).collect();
            for a in 0..env.num_actions() {
                let out = env.step_box(&IntervalBox::point(&s), a).unwrap();
                let s2 = env.step(&s, a).unwrap();
                assert!(out.contains_point(&s2));
                assert!(out.intervals().iter().all(|iv| iv.width() <= 1e-9), "{}", env.name());
            }
        }
    }

    #[test]
    fn platoon_config_errors_name_the_matrix() {
        let bad = crate::constants::platoon::DEFAULT_CONFIG.replace(
            "[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],\n]",
            "[0.0, 0.0, 0.0, 0.0, 0.0, 1.0],\n]",
        );
        let err = PlatoonConfig::parse(&bad)
            .and_then(PlatoonConfig::into_environment)
            .unwrap_err();
        assert!(err.to_string().contains("matrix A"), "{err}");
    }

    #[test]
    fn platoon_flat_matrices_accepted() {
        let text = r#"
variables = ["d", "w"]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]
A = [1.0, 0.1, 0.0, 1.0]
B = [0.0, 0.1]
action_grid = [[-1.0, 1.0]]
initial_box = [[0.0, 0.1], [0.0, 0.0]]
[reward]
distance_dims = [0]
reference_gap = 0.5
collision_penalty = 10.0
"#;
        let env = PlatoonConfig::parse(text).unwrap().into_environment().unwrap();
        assert_eq!(env.step(&[0.5, 0.2], 1).unwrap(), vec![0.5 + 0.1 * 0.2, 0.2 + 0.1]);
    }
}
