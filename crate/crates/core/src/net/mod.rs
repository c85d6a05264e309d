//! Layered digraphs with an activation at every non-input vertex, and the
//! functions they represent by generalized composition.

mod document;
mod example;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{compose_with_arity, project, AlgebraError, Elem, FiniteOperation, Universe};

pub use document::NetDocument;
pub use example::f5_example_net;

/// `v_{i}_{j}`: layer `i`, position `j` in that layer's order, both from 1.
pub fn vertex_id(layer: usize, position: usize) -> String {
    format!("v_{layer}_{position}")
}

/// `((layer, position), (layer, position))`, both 1-based.
pub type LayeredEdge = ((usize, usize), (usize, usize));

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// Each layer lists its vertices in increasing order.
    pub layers: Vec<Vec<String>>,
    pub edges: Vec<(String, String)>,
}

impl Architecture {
    pub fn new(layers: Vec<Vec<String>>, edges: Vec<(String, String)>) -> Self {
        Architecture { layers, edges }
    }

    /// Layers of the given sizes with `v_i_j` ids. Edges are
    /// `((layer, pos), (layer + 1, pos))` pairs, all 1-based.
    pub fn layered(sizes: &[usize], edges: &[LayeredEdge]) -> Self {
        let layers = sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| (1..=s).map(|j| vertex_id(i + 1, j)).collect())
            .collect();
        let edges = edges
            .iter()
            .map(|&((i, j), (k, l))| (vertex_id(i, j), vertex_id(k, l)))
            .collect();
        Architecture { layers, edges }
    }

    /// Every vertex joined to every vertex of the next layer.
    pub fn dense(sizes: &[usize]) -> Self {
        let mut edges = Vec::new();
        for (i, pair) in sizes.windows(2).enumerate() {
            for j in 1..=pair[0] {
                for l in 1..=pair[1] {
                    edges.push(((i + 1, j), (i + 2, l)));
                }
            }
        }
        Architecture::layered(sizes, &edges)
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoLayers,
    EmptyLayer { layer: usize },
    DuplicateVertex { vertex: String },
    UnknownVertex { vertex: String },
    NonConsecutiveEdge { from: String, to: String },
    DuplicateEdge { from: String, to: String },
    ZeroOutdegree { vertex: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoLayers => write!(f, "no layers"),
            Violation::EmptyLayer { layer } => write!(f, "empty layer {layer}"),
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate vertex {vertex}"),
            Violation::UnknownVertex { vertex } => write!(f, "unknown vertex {vertex}"),
            Violation::NonConsecutiveEdge { from, to } => {
                write!(f, "non-consecutive edge {from} -> {to}")
            }
            Violation::DuplicateEdge { from, to } => write!(f, "duplicate edge {from} -> {to}"),
            Violation::ZeroOutdegree { vertex } => write!(f, "zero outdegree at {vertex}"),
        }
    }
}

fn list_violations(vs: &[Violation]) -> String {
    vs.iter().map(Violation::to_string).collect::<Vec<_>>().join("; ")
}

/// All failures of the net conditions, in a stable order.
pub fn validate_architecture(arch: &Architecture) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if arch.layers.is_empty() {
        out.push(Violation::NoLayers);
    }
    let mut layer_of: HashMap<&str, usize> = HashMap::new();
    for (i, layer) in arch.layers.iter().enumerate() {
        if layer.is_empty() {
            out.push(Violation::EmptyLayer { layer: i + 1 });
        }
        for v in layer {
            if layer_of.insert(v, i).is_some() {
                out.push(Violation::DuplicateVertex { vertex: v.clone() });
            }
        }
    }
    let mut seen = HashSet::new();
    let mut has_out: HashSet<&str> = HashSet::new();
    for (from, to) in &arch.edges {
        let mut known = true;
        for v in [from, to] {
            if !layer_of.contains_key(v.as_str()) {
                out.push(Violation::UnknownVertex { vertex: v.clone() });
                known = false;
            }
        }
        if !seen.insert((from, to)) {
            out.push(Violation::DuplicateEdge {
                from: from.clone(),
                to: to.clone(),
            });
            continue;
        }
        if known {
            if layer_of[to.as_str()] != layer_of[from.as_str()] + 1 {
                out.push(Violation::NonConsecutiveEdge {
                    from: from.clone(),
                    to: to.clone(),
                });
            }
            has_out.insert(from);
        }
    }
    if let Some((_, hidden)) = arch.layers.split_last() {
        for v in hidden.iter().flatten() {
            if !has_out.contains(v.as_str()) {
                out.push(Violation::ZeroOutdegree { vertex: v.clone() });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("invalid architecture: {}", list_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("{0} is an input vertex and carries no activation")]
    InputVertex(String),
    #[error("missing activation for {0}")]
    MissingActivation(String),
    #[error("activation at {vertex} has arity {found}, indegree is {expected}")]
    Arity {
        vertex: String,
        expected: usize,
        found: usize,
    },
    #[error("activation at {vertex} is over {found}, net is over {expected}")]
    Universe {
        vertex: String,
        expected: Universe,
        found: Universe,
    },
    #[error("expected {expected} inputs, got {found}")]
    InputLength { expected: usize, found: usize },
    #[error("output coordinate {0} out of range")]
    Coordinate(usize),
    #[error("net document: {}", .0.join("; "))]
    Document(Vec<String>),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Indices of each vertex's in-neighbors in the previous layer, ascending.
#[derive(Debug)]
struct Plan {
    position: HashMap<String, (usize, usize)>,
    inputs: Vec<Vec<Vec<usize>>>,
}

impl Plan {
    fn compile(arch: &Architecture) -> Self {
        let mut position = HashMap::new();
        for (i, layer) in arch.layers.iter().enumerate() {
            for (j, v) in layer.iter().enumerate() {
                position.insert(v.clone(), (i, j));
            }
        }
        let mut inputs: Vec<Vec<Vec<usize>>> =
            arch.layers.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for (from, to) in &arch.edges {
            let (_, j) = position[from];
            let (l, k) = position[to];
            inputs[l][k].push(j);
        }
        for layer in &mut inputs {
            for ins in layer {
                ins.sort_unstable();
            }
        }
        Plan { position, inputs }
    }
}

/// An architecture, a universe and one activation per non-input vertex.
/// Cloning is cheap; [`NeuralNet::set_activation`] returns a modified copy.
#[derive(Clone, Debug)]
pub struct NeuralNet {
    arch: Arc<Architecture>,
    plan: Arc<Plan>,
    universe: Universe,
    /// `activations[i - 1][j]` belongs to vertex `j` of layer `i`, `i >= 1`.
    activations: Vec<Vec<FiniteOperation>>,
}

impl NeuralNet {
    pub fn new(
        arch: Architecture,
        universe: Universe,
        mut activations: BTreeMap<String, FiniteOperation>,
    ) -> Result<Self, NetError> {
        validate_architecture(&arch).map_err(NetError::Invalid)?;
        let plan = Plan::compile(&arch);
        let mut table = Vec::with_capacity(arch.layers.len().saturating_sub(1));
        for (i, layer) in arch.layers.iter().enumerate().skip(1) {
            let mut row = Vec::with_capacity(layer.len());
            for (j, v) in layer.iter().enumerate() {
                let op = activations
                    .remove(v)
                    .ok_or_else(|| NetError::MissingActivation(v.clone()))?;
                check_activation(v, plan.inputs[i][j].len(), universe, &op)?;
                row.push(op);
            }
            table.push(row);
        }
        if let Some(extra) = activations.into_keys().next() {
            return Err(match plan.position.get(&extra) {
                Some(_) => NetError::InputVertex(extra),
                None => NetError::UnknownVertex(extra),
            });
        }
        Ok(NeuralNet {
            arch: Arc::new(arch),
            plan: Arc::new(plan),
            universe,
            activations: table,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn input_len(&self) -> usize {
        self.arch.layers[0].len()
    }

    pub fn output_len(&self) -> usize {
        self.arch.layers.last().map_or(0, Vec::len)
    }

    /// Non-input vertices, layer by layer in each layer's order.
    pub fn non_input_vertices(&self) -> Vec<String> {
        self.arch.layers.iter().skip(1).flatten().cloned().collect()
    }

    pub fn indegree(&self, vertex: &str) -> Result<usize, NetError> {
        let (i, j) = self.locate(vertex)?;
        Ok(self.plan.inputs[i][j].len())
    }

    /// In-neighbors of `vertex` in the previous layer's order.
    pub fn in_neighbors(&self, vertex: &str) -> Result<Vec<String>, NetError> {
        let (i, j) = self.locate(vertex)?;
        Ok(self.plan.inputs[i][j]
            .iter()
            .map(|&p| self.arch.layers[i - 1][p].clone())
            .collect())
    }

    pub fn activation(&self, vertex: &str) -> Result<&FiniteOperation, NetError> {
        let (i, j) = self.locate(vertex)?;
        if i == 0 {
            return Err(NetError::InputVertex(vertex.to_string()));
        }
        Ok(&self.activations[i - 1][j])
    }

    /// `(vertex, activation)` pairs for every non-input vertex.
    pub fn activations(&self) -> impl Iterator<Item = (&str, &FiniteOperation)> {
        self.arch
            .layers
            .iter()
            .skip(1)
            .zip(&self.activations)
            .flat_map(|(vs, ops)| vs.iter().map(String::as_str).zip(ops))
    }

    fn locate(&self, vertex: &str) -> Result<(usize, usize), NetError> {
        self.plan
            .position
            .get(vertex)
            .copied()
            .ok_or_else(|| NetError::UnknownVertex(vertex.to_string()))
    }

    /// A copy with `Phi(vertex)` replaced by `op`.
    pub fn set_activation(&self, vertex: &str, op: FiniteOperation) -> Result<NeuralNet, NetError> {
        let (i, j) = self.locate(vertex)?;
        if i == 0 {
            return Err(NetError::InputVertex(vertex.to_string()));
        }
        check_activation(vertex, self.plan.inputs[i][j].len(), self.universe, &op)?;
        let mut next = self.clone();
        next.activations[i - 1][j] = op;
        Ok(next)
    }

    /// The represented function, with input checks.
    pub fn evaluate(&self, input: &[Elem]) -> Result<Vec<Elem>, NetError> {
        if input.len() != self.input_len() {
            return Err(NetError::InputLength {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        for &x in input {
            self.universe.check(x)?;
        }
        Ok(self.eval(input))
    }

    /// The represented function without checks, one sweep per layer.
    pub fn eval(&self, input: &[Elem]) -> Vec<Elem> {
        let mut current = input.to_vec();
        let mut args = Vec::new();
        for (layer_inputs, ops) in self.plan.inputs.iter().skip(1).zip(&self.activations) {
            current = layer_inputs
                .iter()
                .zip(ops)
                .map(|(ins, op)| {
                    args.clear();
                    args.extend(ins.iter().map(|&p| current[p]));
                    op.eval(&args)
                })
                .collect();
        }
        current
    }

    /// Output coordinate `j` (from 1) as a single operation of arity `|V_1|`,
    /// built from projections by composition.
    pub fn coordinate_operation(&self, j: usize) -> Result<FiniteOperation, NetError> {
        if j == 0 || j > self.output_len() {
            return Err(NetError::Coordinate(j));
        }
        let n = self.input_len();
        let mut prev: Vec<FiniteOperation> = (1..=n)
            .map(|k| project(n, k, self.universe))
            .collect::<Result<_, _>>()?;
        for (layer_inputs, ops) in self.plan.inputs.iter().skip(1).zip(&self.activations) {
            prev = layer_inputs
                .iter()
                .zip(ops)
                .map(|(ins, op)| {
                    let inner: Vec<FiniteOperation> = ins.iter().map(|&p| prev[p].clone()).collect();
                    compose_with_arity(op, &inner, n)
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(prev.swap_remove(j - 1))
    }
}

fn check_activation(
    vertex: &str,
    indegree: usize,
    universe: Universe,
    op: &FiniteOperation,
) -> Result<(), NetError> {
    if op.arity() != indegree {
        return Err(NetError::Arity {
            vertex: vertex.to_string(),
            expected: indegree,
            found: op.arity(),
        });
    }
    if op.universe() != universe {
        return Err(NetError::Universe {
            vertex: vertex.to_string(),
            expected: universe,
            found: op.universe(),
        });
    }
    Ok(())
}
