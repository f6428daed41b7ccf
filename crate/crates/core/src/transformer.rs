//! The abstract transformer: concretize a cell, push its box through the
//! interval dynamics under the policy's action, widen by the perturbation,
//! and cover the result with cells.
//!
//! Successor sets are returned as sorted [`CellId`] lists. [`SINK`] stands
//! for "left the state-space bounds" and sorts after every real cell.

use serde::{Deserialize, Serialize};

use crate::abstraction::{AbstractState, CellId, Granularity, IntervalBox};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::policy::Policy;

/// The out-of-bounds absorbing state.
pub const SINK: CellId = CellId(u64::MAX);

/// Per-dimension bound on how far an actual successor may stray from the
/// nominal one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    epsilon: Vec<f64>,
}

impl Perturbation {
    pub fn new(epsilon: Vec<f64>) -> Result<Self> {
        if let Some((i, &e)) = epsilon.iter().enumerate().find(|(_, e)| !(**e >= 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("perturbation component {i} = {e} must be >= 0")));
        }
        Ok(Perturbation { epsilon })
    }

    pub fn zero(n: usize) -> Self {
        Perturbation { epsilon: vec![0.0; n] }
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    pub fn is_zero(&self) -> bool {
        self.epsilon.iter().all(|&e| e == 0.0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Perturbation) -> bool {
        self.epsilon.len() == other.epsilon.len() && self.epsilon.iter().zip(&other.epsilon).all(|(a, b)| a <= b)
    }
}

/// Widen each interval by `eps_i` on both sides, then clip to `bounds`.
/// `None` when the clipped box is empty.
pub fn expand(v: &IntervalBox, eps: &Perturbation, bounds: &IntervalBox) -> Option<IntervalBox> {
    let mut out = Vec::with_capacity(v.dim());
    for ((iv, &e), b) in v.intervals().iter().zip(eps.epsilon()).zip(bounds.intervals()) {
        let w = if e == 0.0 { *iv } else { iv.widen(e) };
        out.push(w.intersect(b)?);
    }
    Some(IntervalBox::new(out))
}

/// Everything needed to compute abstract successors of a closed loop.
#[derive(Clone, Debug)]
pub struct AbstractTransformer<'a> {
    env: &'a Environment,
    policy: &'a Policy,
    granularity: &'a Granularity,
    eps: &'a Perturbation,
    bounds: IntervalBox,
}

/// Intermediate results of one successor computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub action: usize,
    /// Interval image before perturbation and clipping.
    pub image: IntervalBox,
    /// Widened and clipped image; `None` when nothing is left in bounds.
    pub expanded: Option<IntervalBox>,
    /// Some concrete successor may leave the bounds.
    pub exits: bool,
}

impl<'a> AbstractTransformer<'a> {
    pub fn new(
        env: &'a Environment,
        policy: &'a Policy,
        granularity: &'a Granularity,
        eps: &'a Perturbation,
    ) -> Result<Self> {
        if granularity.dim() != env.dim() {
            return Err(Error::dims("granularity", env.dim(), granularity.dim()));
        }
        if eps.epsilon().len() != env.dim() {
            return Err(Error::dims("perturbation", env.dim(), eps.epsilon().len()));
        }
        policy.check_granularity(granularity)?;
        if policy.num_actions() != env.num_actions() {
            return Err(Error::Config(format!(
                "policy has {} actions, environment `{}` has {}",
                policy.num_actions(),
                env.name(),
                env.num_actions()
            )));
        }
        Ok(AbstractTransformer {
            env,
            policy,
            granularity,
            eps,
            bounds: granularity.bounds(),
        })
    }

    pub fn env(&self) -> &Environment {
        self.env
    }

    pub fn policy(&self) -> &Policy {
        self.policy
    }

    pub fn granularity(&self) -> &Granularity {
        self.granularity
    }

    pub fn perturbation(&self) -> &Perturbation {
        self.eps
    }

    pub fn image(&self, a: &AbstractState) -> Result<Image> {
        let action = self.policy.act(a)?;
        let image = self.env.step_box(&self.granularity.concretize(a), action)?;
        let exits = !self.bounds.contains_box(&image);
        let expanded = expand(&image, self.eps, &self.bounds);
        Ok(Image {
            action,
            image,
            expanded,
            exits,
        })
    }

    /// Sorted successor ids of `cell`. The sink's only successor is itself.
    pub fn successors(&self, cell: CellId) -> Result<Vec<CellId>> {
        if cell == SINK {
            return Ok(vec![SINK]);
        }
        let a = self.granularity.state_of(cell);
        let img = self.image(&a)?;
        let mut out = match &img.expanded {
            Some(v) => self.granularity.cover_ids(v)?,
            None => Vec::new(),
        };
        if img.exits || out.is_empty() {
            out.push(SINK);
        }
        Ok(out)
    }

    /// Cell (or sink) of a concrete state.
    pub fn locate(&self, s: &[f64]) -> CellId {
        match self.granularity.abstract_of(s) {
            Ok(a) => self.granularity.cell_id(&a),
            Err(_) => SINK,
        }
    }

    pub fn initial_cells(&self, initial: &IntervalBox) -> Result<Vec<CellId>> {
        if initial.dim() != self.granularity.dim() {
            return Err(Error::dims("initial box", self.granularity.dim(), initial.dim()));
        }
        let mut ids = match self.granularity.cover_ids(initial) {
            Ok(ids) => ids,
            Err(Error::EmptyIntersection) => Vec::new(),
            Err(e) => return Err(e),
        };
        if !self.bounds.contains_box(initial) {
            ids.push(SINK);
        }
        Ok(ids)
    }
}

/// One-shot successor computation over abstract states. The sink appears
/// as `None`.
pub fn successors(
    a: &AbstractState,
    policy: &Policy,
    env: &Environment,
    g: &Granularity,
    eps: &Perturbation,
) -> Result<Vec<Option<AbstractState>>> {
    let t = AbstractTransformer::new(env, policy, g, eps)?;
    if !g.is_valid(a) {
        return Err(Error::GranularityMismatch(format!(
            "{:?} is not a cell of the grid",
            a.index()
        )));
    }
    Ok(t.successors(g.cell_id(a))?
        .into_iter()
        .map(|c| (c != SINK).then(|| g.state_of(c)))
        .collect())
}

/// Interval hull of a set of boxes.
pub fn hull(boxes: &[IntervalBox]) -> Option<IntervalBox> {
    let (first, rest) = boxes.split_first()?;
    Some(IntervalBox::new(
        first
            .intervals()
            .iter()
            .enumerate()
            .map(|(i, iv)| rest.iter().fold(*iv, |acc: Interval, b| acc.hull(&b.intervals()[i])))
            .collect(),
    ))
}
