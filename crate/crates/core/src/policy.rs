//! Deterministic policies over abstract states and their JSON file format.
//!
//! A policy never sees a concrete state: it is queried with an
//! [`AbstractState`], so every concrete state in one cell receives the same
//! action.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abstraction::{AbstractState, CellId, Granularity};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct TabularPolicy {
    granularity: Granularity,
    num_actions: usize,
    default_action: usize,
    table: BTreeMap<CellId, usize>,
}

impl TabularPolicy {
    pub fn new(granularity: Granularity, num_actions: usize, default_action: usize) -> Result<Self> {
        if default_action >= num_actions {
            return Err(Error::UnknownAction(default_action));
        }
        Ok(TabularPolicy {
            granularity,
            num_actions,
            default_action,
            table: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, cell: CellId, action: usize) -> Result<()> {
        if action >= self.num_actions {
            return Err(Error::UnknownAction(action));
        }
        if cell.0 >= self.granularity.total_states() {
            return Err(Error::GranularityMismatch(format!(
                "cell id {} outside a grid of {} cells",
                cell.0,
                self.granularity.total_states()
            )));
        }
        self.table.insert(cell, action);
        Ok(())
    }

    pub fn default_action(&self) -> usize {
        self.default_action
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (CellId, usize)> + '_ {
        self.table.iter().map(|(&c, &a)| (c, a))
    }

    pub fn lookup(&self, cell: CellId) -> usize {
        self.table.get(&cell).copied().unwrap_or(self.default_action)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `outputs x inputs`, one row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn outputs(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| {
                let z = row.iter().zip(x).fold(b, |acc, (&w, &xi)| acc + w * xi);
                match self.activation {
                    Activation::Relu => z.max(0.0),
                    Activation::Identity => z,
                }
            })
            .collect()
    }
}

/// Feedforward network reading the `2n` cell endpoints
/// `(l_1, u_1, ..., l_n, u_n)` and producing one score per action.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpPolicy {
    granularity: Granularity,
    layers: Vec<Layer>,
}

impl MlpPolicy {
    pub fn new(granularity: Granularity, layers: Vec<Layer>) -> Result<Self> {
        validate_layers(&layers, 2 * granularity.dim())?;
        Ok(MlpPolicy { granularity, layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn num_actions(&self) -> usize {
        self.layers.last().map_or(0, Layer::outputs)
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.layers.iter().fold(input.to_vec(), |x, layer| layer.apply(&x))
    }

    pub fn scores(&self, a: &AbstractState) -> Vec<f64> {
        self.forward(&self.granularity.concretize(a).endpoints())
    }
}

fn validate_layers(layers: &[Layer], input_arity: usize) -> Result<()> {
    if layers.is_empty() {
        return Err(Error::Format("mlp policy has no layers".into()));
    }
    let mut width = input_arity;
    for (i, layer) in layers.iter().enumerate() {
        if layer.outputs() == 0 {
            return Err(Error::Format(format!("layer {i}: weight matrix has no rows")));
        }
        if let Some((r, row)) = layer.weights.iter().enumerate().find(|(_, row)| row.len() != width) {
            return Err(Error::Format(format!(
                "layer {i}: weight row {r} has {} columns, expected {width}",
                row.len()
            )));
        }
        if layer.bias.len() != layer.outputs() {
            return Err(Error::Format(format!(
                "layer {i}: bias has {} entries, expected {}",
                layer.bias.len(),
                layer.outputs()
            )));
        }
        width = layer.outputs();
    }
    Ok(())
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    Tabular(TabularPolicy),
    Mlp(MlpPolicy),
}

impl From<TabularPolicy> for Policy {
    fn from(p: TabularPolicy) -> Self {
        Policy::Tabular(p)
    }
}

impl From<MlpPolicy> for Policy {
    fn from(p: MlpPolicy) -> Self {
        Policy::Mlp(p)
    }
}

impl Policy {
    pub fn granularity(&self) -> &Granularity {
        match self {
            Policy::Tabular(p) => &p.granularity,
            Policy::Mlp(p) => &p.granularity,
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Policy::Tabular(p) => p.num_actions,
            Policy::Mlp(p) => p.num_actions(),
        }
    }

    pub fn act(&self, a: &AbstractState) -> Result<usize> {
        let g = self.granularity();
        if !g.is_valid(a) {
            return Err(Error::GranularityMismatch(format!(
                "abstract state {:?} is not a cell of a grid with counts {:?}",
                a.index(),
                g.counts()
            )));
        }
        Ok(match self {
            Policy::Tabular(p) => p.lookup(g.cell_id(a)),
            Policy::Mlp(p) => argmax(&p.scores(a)),
        })
    }

    /// Errors unless the policy's grid equals `g` exactly.
    pub fn check_granularity(&self, g: &Granularity) -> Result<()> {
        if self.granularity().same_grid(g) {
            Ok(())
        } else {
            Err(Error::GranularityMismatch(format!(
                "policy diameters {:?} over [{:?}, {:?}], configuration diameters {:?} over [{:?}, {:?}]",
                self.granularity().diameters(),
                self.granularity().lower(),
                self.granularity().upper(),
                g.diameters(),
                g.lower(),
                g.upper(),
            )))
        }
    }

    pub fn to_json(&self) -> String {
        let doc = match self {
            Policy::Tabular(p) => PolicyFile {
                format_version: FORMAT_VERSION,
                granularity: p.granularity.clone(),
                body: PolicyBody::Tabular {
                    num_actions: p.num_actions,
                    default_action: p.default_action,
                    entries: p.table.iter().map(|(c, &a)| (c.0, a)).collect(),
                },
            },
            Policy::Mlp(p) => PolicyFile {
                format_version: FORMAT_VERSION,
                granularity: p.granularity.clone(),
                body: PolicyBody::Mlp {
                    layers: p.layers.clone(),
                },
            },
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("policy serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolicyFile = serde_json::from_str(text).map_err(|e| Error::Format(format!("policy file: {e}")))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported policy format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        match doc.body {
            PolicyBody::Tabular {
                num_actions,
                default_action,
                entries,
            } => {
                let mut p = TabularPolicy::new(doc.granularity, num_actions, default_action)
                    .map_err(|e| Error::Format(format!("default_action: {e}")))?;
                for (i, (cell, action)) in entries.into_iter().enumerate() {
                    p.insert(CellId(cell), action)
                        .map_err(|e| Error::Format(format!("entries[{i}]: {e}")))?;
                }
                Ok(Policy::Tabular(p))
            }
            PolicyBody::Mlp { layers } => Ok(Policy::Mlp(MlpPolicy::new(doc.granularity, layers)?)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolicyFile {
    format_version: u32,
    granularity: Granularity,
    #[serde(flatten)]
    body: PolicyBody,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PolicyBody {
    Tabular {
        num_actions: usize,
        default_action: usize,
        entries: Vec<(u64, usize)>,
    },
    Mlp {
        layers: Vec<Layer>,
    },
}

pub fn save_policy(p: &Policy, path: &Path) -> Result<()> {
    std::fs::write(path, p.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_policy(path: &Path) -> Result<Policy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Policy::from_json(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}
