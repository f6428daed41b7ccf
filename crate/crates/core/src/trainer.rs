//! Q-learning over abstract states.
//!
//! Each episode resets to a state drawn uniformly from the environment's
//! initial box, maps every observed state to its cell, acts epsilon-greedily
//! on the Q-table, stores the transition in a FIFO replay buffer and applies
//! the tabular Bellman update to the newest transition plus a uniformly
//! sampled batch from the buffer. The learner never keys anything on a
//! concrete state.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abstraction::{CellId, Granularity, IntervalBox};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::policy::{argmax, Activation, Layer, MlpPolicy, Policy, TabularPolicy};
use crate::transformer::SINK;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub episodes: usize,
    /// Step limit per training episode.
    pub horizon: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Global steps over which exploration decays linearly to `epsilon_end`.
    pub epsilon_decay_steps: u64,
    pub buffer_capacity: usize,
    /// Updates per environment step: the newest transition plus
    /// `batch_size - 1` replayed ones.
    pub batch_size: usize,
    /// Initial Q-value of unseen state-action pairs.
    pub q_init: f64,
    /// Action for cells training never visited.
    pub default_action: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 500,
            horizon: 1000,
            learning_rate: 0.5,
            discount: 0.99,
            epsilon_start: 0.1,
            epsilon_end: 0.0,
            epsilon_decay_steps: 20_000,
            buffer_capacity: 200_000,
            batch_size: 64,
            q_init: -50.0,
            default_action: 0,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("train: {m}")));
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.discount) {
            return bad("discount must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_end) {
            return bad("epsilon_start and epsilon_end must be in [0, 1]");
        }
        if self.epsilon_end > self.epsilon_start {
            return bad("epsilon_end must not exceed epsilon_start");
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 {
            return bad("buffer_capacity and batch_size must be positive");
        }
        if !self.q_init.is_finite() {
            return bad("q_init must be finite");
        }
        Ok(())
    }

    /// Exploration rate after `step` global steps.
    pub fn epsilon_at(&self, step: u64) -> f64 {
        if step >= self.epsilon_decay_steps {
            self.epsilon_end
        } else {
            let t = step as f64 / self.epsilon_decay_steps as f64;
            self.epsilon_start + (self.epsilon_end - self.epsilon_start) * t
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub s: CellId,
    pub a: usize,
    pub r: f64,
    pub s_next: CellId,
    pub done: bool,
}

/// Sparse Q-table; unseen cells read as `q_init` for every action.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    num_actions: usize,
    q_init: f64,
    values: HashMap<CellId, Vec<f64>>,
}

impl QTable {
    pub fn new(num_actions: usize, q_init: f64) -> Self {
        QTable {
            num_actions,
            q_init,
            values: HashMap::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, s: CellId, a: usize) -> f64 {
        self.values.get(&s).map_or(self.q_init, |row| row[a])
    }

    pub fn row(&self, s: CellId) -> Option<&[f64]> {
        self.values.get(&s).map(Vec::as_slice)
    }

    pub fn set(&mut self, s: CellId, a: usize, v: f64) {
        let (n, init) = (self.num_actions, self.q_init);
        self.values.entry(s).or_insert_with(|| vec![init; n])[a] = v;
    }

    pub fn max_value(&self, s: CellId) -> f64 {
        self.values
            .get(&s)
            .map_or(self.q_init, |row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn greedy(&self, s: CellId) -> usize {
        self.values.get(&s).map_or(0, |row| argmax(row))
    }

    /// Visited cells in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = CellId> {
        let mut cells: Vec<CellId> = self.values.keys().copied().collect();
        cells.sort_unstable();
        cells.into_iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `q[s,a] += alpha * (r + gamma * max_a' q[s',a'] * (1 - done) - q[s,a])`.
pub fn q_update(q: &mut QTable, t: &Transition, alpha: f64, gamma: f64) {
    let future = if t.done { 0.0 } else { q.max_value(t.s_next) };
    let old = q.get(t.s, t.a);
    q.set(t.s, t.a, old + alpha * (t.r + gamma * future - old));
}

/// Bounded FIFO buffer of transitions.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Uniform draw with replacement.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<&Transition> {
        if self.items.is_empty() {
            None
        } else {
            Some(&self.items[rng.gen_range(0..self.items.len())])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    pub reward: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub policy: TabularPolicy,
    pub q: QTable,
    pub log: Vec<EpisodeLog>,
}

pub fn sample_box<R: Rng>(b: &IntervalBox, rng: &mut R) -> Vec<f64> {
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
}

fn locate(g: &Granularity, s: &[f64]) -> CellId {
    g.abstract_of(s).map_or(SINK, |a| g.cell_id(&a))
}

pub fn train(env: &Environment, g: &Granularity, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if g.dim() != env.dim() || g.lower() != env.lower() || g.upper() != env.upper() {
        return Err(Error::GranularityMismatch(format!(
            "granularity bounds do not match environment `{}`",
            env.name()
        )));
    }
    if cfg.default_action >= env.num_actions() {
        return Err(Error::UnknownAction(cfg.default_action));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q = QTable::new(env.num_actions(), cfg.q_init);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut log = Vec::with_capacity(cfg.episodes);
    let mut global: u64 = 0;

    for episode in 0..cfg.episodes {
        let mut s = sample_box(env.initial_box(), &mut rng);
        let mut cell = locate(g, &s);
        let mut total = 0.0;
        let mut steps = 0;
        let mut eps = cfg.epsilon_at(global);
        if cell == SINK {
            return Err(Error::Config(format!(
                "initial state {s:?} of `{}` lies outside the bounds",
                env.name()
            )));
        }
        for _ in 0..cfg.horizon {
            eps = cfg.epsilon_at(global);
            let a = if rng.gen::<f64>() < eps {
                rng.gen_range(0..env.num_actions())
            } else {
                q.greedy(cell)
            };
            let s2 = env.step(&s, a)?;
            let r = env.reward(&s, a, &s2);
            let cell2 = locate(g, &s2);
            let done = cell2 == SINK || env.done(&s2);
            let t = Transition {
                s: cell,
                a,
                r,
                s_next: cell2,
                done,
            };
            q_update(&mut q, &t, cfg.learning_rate, cfg.discount);
            buffer.push(t);
            for _ in 1..cfg.batch_size {
                let replay = buffer.sample(&mut rng).expect("buffer is non-empty").clone();
                q_update(&mut q, &replay, cfg.learning_rate, cfg.discount);
            }
            total += r;
            steps += 1;
            global += 1;
            if done {
                break;
            }
            s = s2;
            cell = cell2;
        }
        log.push(EpisodeLog {
            episode,
            steps,
            reward: total,
            epsilon: eps,
        });
    }

    let policy = greedy_policy(&q, g, cfg.default_action)?;
    Ok(TrainOutcome { policy, q, log })
}

/// Greedy policy of a Q-table; unseen cells get `default_action`.
pub fn greedy_policy(q: &QTable, g: &Granularity, default_action: usize) -> Result<TabularPolicy> {
    let mut p = TabularPolicy::new(g.clone(), q.num_actions(), default_action)?;
    for cell in q.cells().filter(|&c| c != SINK) {
        p.insert(cell, q.greedy(cell))?;
    }
    Ok(p)
}

/// Writes the per-episode log as CSV (`episode,steps,reward,epsilon`).
pub fn write_log_csv<W: std::io::Write>(log: &[EpisodeLog], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in log {
        w.serialize(row)
            .map_err(|e| Error::Format(format!("writing training log: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("training log", e))?;
    Ok(())
}

/// A concrete closed-loop trajectory. `cells[i]` is the cell of
/// `states[i]`; the policy acted on `cells[i]` to produce `actions[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub cells: Vec<CellId>,
}

/// Greedy rollout for at most `steps` steps. Stops early only when the
/// state leaves the bounds (it then ends in the sink).
pub fn rollout(env: &Environment, policy: &Policy, start: &[f64], steps: usize) -> Result<Trajectory> {
    let g = policy.granularity();
    let mut s = start.to_vec();
    let mut traj = Trajectory {
        states: vec![s.clone()],
        actions: Vec::new(),
        rewards: Vec::new(),
        cells: vec![locate(g, &s)],
    };
    for _ in 0..steps {
        let cell = *traj.cells.last().expect("non-empty");
        if cell == SINK {
            break;
        }
        let a = policy.act(&g.state_of(cell))?;
        let s2 = env.step(&s, a)?;
        traj.rewards.push(env.reward(&s, a, &s2));
        traj.actions.push(a);
        traj.cells.push(locate(g, &s2));
        traj.states.push(s2.clone());
        s = s2;
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub rewards: Vec<f64>,
    pub mean: f64,
}

/// Greedy evaluation from initial states sampled uniformly from the
/// environment's initial box. Episodes end at `horizon` steps or when the
/// environment reports termination.
pub fn evaluate(env: &Environment, policy: &Policy, episodes: usize, horizon: usize, seed: u64) -> Result<Evaluation> {
    if episodes == 0 {
        return Err(Error::Config("evaluate needs at least one episode".into()));
    }
    let g = policy.granularity();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rewards = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut s = sample_box(env.initial_box(), &mut rng);
        let mut total = 0.0;
        for _ in 0..horizon {
            let a = policy.act(&g.abstract_of(&s)?)?;
            let s2 = env.step(&s, a)?;
            total += env.reward(&s, a, &s2);
            if env.done(&s2) {
                break;
            }
            s = s2;
        }
        rewards.push(total);
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    Ok(Evaluation { rewards, mean })
}

/// Settings for fitting a feedforward network to a learned Q-table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpFitConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpFitConfig {
    fn default() -> Self {
        MlpFitConfig {
            hidden: vec![32, 32],
            epochs: 200,
            learning_rate: 0.01,
            batch_size: 32,
            seed: 7,
        }
    }
}

/// Regress the Q-values of every visited cell from the cell's `2n`
/// endpoints. Training runs on endpoints rescaled to `[-1, 1]` and Q-values
/// divided by their largest magnitude; both affine maps are folded back into
/// the first and last layers, so the returned network reads raw endpoints.
pub fn fit_mlp(q: &QTable, g: &Granularity, cfg: &MlpFitConfig) -> Result<MlpPolicy> {
    let cells: Vec<CellId> = q.cells().filter(|&c| c != SINK).collect();
    if cells.is_empty() {
        return Err(Error::Config("cannot fit a network to an empty Q-table".into()));
    }
    let n_in = 2 * g.dim();
    let n_out = q.num_actions();
    // endpoint i belongs to dimension i / 2
    let shift: Vec<f64> = (0..n_in).map(|i| 0.5 * (g.lower()[i / 2] + g.upper()[i / 2])).collect();
    let half: Vec<f64> = (0..n_in).map(|i| 0.5 * (g.upper()[i / 2] - g.lower()[i / 2])).collect();
    let q_scale = cells
        .iter()
        .flat_map(|&c| q.row(c).unwrap_or(&[]).iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let xs: Vec<Vec<f64>> = cells
        .iter()
        .map(|&c| {
            g.concretize(&g.state_of(c))
                .endpoints()
                .iter()
                .enumerate()
                .map(|(i, &e)| (e - shift[i]) / half[i])
                .collect()
        })
        .collect();
    let ys: Vec<Vec<f64>> = cells
        .iter()
        .map(|&c| (0..n_out).map(|a| q.get(c, a) / q_scale).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sizes = vec![n_in];
    sizes.extend(&cfg.hidden);
    sizes.push(n_out);
    let mut layers: Vec<Layer> = sizes
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let scale = (2.0 / w[0] as f64).sqrt();
            Layer {
                weights: (0..w[1])
                    .map(|_| (0..w[0]).map(|_| rng.gen_range(-1.0..1.0) * scale).collect())
                    .collect(),
                bias: vec![0.0; w[1]],
                activation: if k + 2 == sizes.len() {
                    Activation::Identity
                } else {
                    Activation::Relu
                },
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        for batch in order.chunks(cfg.batch_size.max(1)) {
            sgd_step(
                &mut layers,
                batch.iter().map(|&i| (&xs[i], &ys[i])),
                cfg.learning_rate / batch.len() as f64,
            );
        }
    }

    // fold input normalization into the first layer
    let first = &mut layers[0];
    for (row, b) in first.weights.iter_mut().zip(first.bias.iter_mut()) {
        for (i, w) in row.iter_mut().enumerate() {
            *w /= half[i];
            *b -= *w * shift[i];
        }
    }
    // and the output scaling into the last
    let last = layers.last_mut().expect("at least one layer");
    for (row, b) in last.weights.iter_mut().zip(last.bias.iter_mut()) {
        row.iter_mut().for_each(|w| *w *= q_scale);
        *b *= q_scale;
    }
    MlpPolicy::new(g.clone(), layers)
}

fn sgd_step<'a>(layers: &mut [Layer], batch: impl Iterator<Item = (&'a Vec<f64>, &'a Vec<f64>)>, lr: f64) {
    let mut grad_w: Vec<Vec<Vec<f64>>> = layers
        .iter()
        .map(|l| vec![vec![0.0; l.weights[0].len()]; l.weights.len()])
        .collect();
    let mut grad_b: Vec<Vec<f64>> = layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
    for (x, y) in batch {
        // forward, keeping every layer's output
        let mut acts = vec![x.clone()];
        for l in layers.iter() {
            let inp = acts.last().expect("non-empty");
            let out: Vec<f64> = l
                .weights
                .iter()
                .zip(&l.bias)
                .map(|(row, &b)| {
                    let z = row.iter().zip(inp).fold(b, |acc, (&w, &xi)| acc + w * xi);
                    match l.activation {
                        Activation::Relu => z.max(0.0),
                        Activation::Identity => z,
                    }
                })
                .collect();
            acts.push(out);
        }
        let mut delta: Vec<f64> = acts.last().expect("output").iter().zip(y).map(|(o, t)| o - t).collect();
        for k in (0..layers.len()).rev() {
            let l = &layers[k];
            if l.activation == Activation::Relu {
                for (d, &o) in delta.iter_mut().zip(&acts[k + 1]) {
                    if o <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            for (j, &d) in delta.iter().enumerate() {
                grad_b[k][j] += d;
                for (i, &xi) in acts[k].iter().enumerate() {
                    grad_w[k][j][i] += d * xi;
                }
            }
            let mut prev = vec![0.0; acts[k].len()];
            for (j, &d) in delta.iter().enumerate() {
                for (i, p) in prev.iter_mut().enumerate() {
                    *p += l.weights[j][i] * d;
                }
            }
            delta = prev;
        }
    }
    for (k, l) in layers.iter_mut().enumerate() {
        for (j, row) in l.weights.iter_mut().enumerate() {
            for (i, w) in row.iter_mut().enumerate() {
                *w -= lr * grad_w[k][j][i];
            }
            l.bias[j] -= lr * grad_b[k][j];
        }
    }
}
