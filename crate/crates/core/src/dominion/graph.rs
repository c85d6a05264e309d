//! Minimum constraint graphs, tree embeddings and label assignments.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dominion, DominionError};
use crate::algebra::{FiniteOperation, OpKind, Universe};
use crate::hamming::{hamming_distance, BinaryImage};
use crate::rng::stream_rng;

const WALK_STREAM: u64 = 0x7EE;

/// Simple undirected graph on vertices `0..order`; edges stored as `(min, max)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LabelGraph {
    order: u32,
    edges: BTreeSet<(u32, u32)>,
}

impl LabelGraph {
    pub fn new(order: u32) -> Self {
        LabelGraph {
            order,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(order: u32, edges: &[(u32, u32)]) -> Result<Self, DominionError> {
        let mut g = LabelGraph::new(order);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Adds `{a, b}`; loops are ignored since the graph is simple.
    pub fn add_edge(&mut self, a: u32, b: u32) -> Result<(), DominionError> {
        if a >= self.order || b >= self.order {
            return Err(DominionError::Parameter(format!(
                "edge {a}-{b} outside 0..{}",
                self.order
            )));
        }
        if a != b {
            self.edges.insert((a.min(b), a.max(b)));
        }
        Ok(())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Every edge of `other` is an edge of `self`.
    pub fn contains_graph(&self, other: &LabelGraph) -> bool {
        other.edges.iter().all(|e| self.edges.contains(e))
    }

    pub fn is_acyclic(&self) -> bool {
        let mut uf = UnionFind::new(self.order as usize);
        self.edges.iter().all(|&(a, b)| uf.union(a as usize, b as usize))
    }

    pub fn is_tree(&self) -> bool {
        self.order > 0 && self.edges.len() + 1 == self.order as usize && self.is_acyclic()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Labels `l1 != l2` are adjacent when some basic cube uses both.
pub fn minc(d: &Dominion) -> LabelGraph {
    let mut g = LabelGraph::new(d.num_labels());
    for labels in d.labeling().all_cube_labels() {
        if let [a, b] = labels[..] {
            g.edges.insert((a, b));
        }
    }
    g
}

/// Extends an acyclic graph to a spanning tree by joining each component to
/// the one containing vertex 0.
pub fn embed_in_tree(g: &LabelGraph) -> Result<LabelGraph, DominionError> {
    let n = g.order as usize;
    let mut uf = UnionFind::new(n);
    for (a, b) in g.edges() {
        if !uf.union(a as usize, b as usize) {
            return Err(DominionError::Cyclic(a, b));
        }
    }
    let mut tree = g.clone();
    for v in 1..n {
        if uf.union(0, v) {
            tree.edges.insert((0, v as u32));
        }
    }
    Ok(tree)
}

/// Label images indexed by label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<BinaryImage>", into = "Vec<BinaryImage>")]
pub struct LabelAssignment {
    images: Vec<BinaryImage>,
}

impl TryFrom<Vec<BinaryImage>> for LabelAssignment {
    type Error = DominionError;

    fn try_from(images: Vec<BinaryImage>) -> Result<Self, Self::Error> {
        LabelAssignment::new(images)
    }
}

impl From<LabelAssignment> for Vec<BinaryImage> {
    fn from(a: LabelAssignment) -> Self {
        a.images
    }
}

impl LabelAssignment {
    pub fn new(images: Vec<BinaryImage>) -> Result<Self, DominionError> {
        let Some(first) = images.first() else {
            return Err(DominionError::Parameter("empty label assignment".into()));
        };
        let n = first.side();
        if images.iter().any(|a| a.side() != n) {
            return Err(DominionError::Shape("label images of mixed sizes".into()));
        }
        Ok(LabelAssignment { images })
    }

    pub fn constant(labels: u32, image: BinaryImage) -> Self {
        LabelAssignment {
            images: vec![image; labels.max(1) as usize],
        }
    }

    pub fn image(&self, label: u32) -> BinaryImage {
        self.images[label as usize]
    }

    pub fn images(&self) -> &[BinaryImage] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn side(&self) -> usize {
        self.images[0].side()
    }

    /// Checks that every edge of `g` lands on an adjacent pair.
    pub fn check_homomorphism(&self, g: &LabelGraph) -> Result<(), DominionError> {
        if (g.order() as usize) > self.images.len() {
            return Err(DominionError::Shape(format!(
                "assignment covers {} labels, graph has {}",
                self.images.len(),
                g.order()
            )));
        }
        for (a, b) in g.edges() {
            let d = hamming_distance(&self.image(a), &self.image(b))?;
            if d > 1 {
                return Err(DominionError::NonAdjacentEdge(a, b, d));
            }
        }
        Ok(())
    }
}

/// Walks the tree breadth-first from label 0: the root gets a random image and
/// each child copies its parent, flipping one random pixel with probability 1/2.
pub fn tree_walk_homomorphism(
    tree: &LabelGraph,
    n: usize,
    seed: u64,
) -> Result<LabelAssignment, DominionError> {
    if !tree.is_tree() {
        return Err(DominionError::NotATree(format!(
            "{} vertices, {} edges",
            tree.order(),
            tree.edge_count()
        )));
    }
    BinaryImage::try_zeros(n)?;
    let mut rng = stream_rng(seed, WALK_STREAM);
    let root = BinaryImage::random(n, &mut rng);
    let mut images: Vec<Option<BinaryImage>> = vec![None; tree.order() as usize];
    images[0] = Some(root);
    let mut queue = VecDeque::from([0u32]);
    while let Some(v) = queue.pop_front() {
        let parent = images[v as usize].expect("visited");
        for w in tree.neighbors(v) {
            if images[w as usize].is_some() {
                continue;
            }
            let child = if rng.gen_bool(0.5) {
                parent.flip(rng.gen_range(0..n * n))
            } else {
                parent
            };
            images[w as usize] = Some(child);
            queue.push_back(w);
        }
    }
    LabelAssignment::new(images.into_iter().map(|a| a.expect("tree is connected")).collect())
}

/// `g(a_1, .., a_k) = alpha(D(|a_1|, .., |a_k|))`.
pub fn dominion_polymorphism(
    d: &Dominion,
    alpha: &LabelAssignment,
) -> Result<FiniteOperation, DominionError> {
    if alpha.side() != d.n() {
        return Err(DominionError::Shape(format!(
            "assignment images are {0}x{0}, dominion expects {1}x{1}",
            alpha.side(),
            d.n()
        )));
    }
    alpha.check_homomorphism(&minc(d))?;
    Ok(FiniteOperation::from_parts(
        d.k(),
        Universe::images(d.n()).map_err(|e| DominionError::Parameter(e.to_string()))?,
        OpKind::DominionPolymorphism {
            dominion: d.clone(),
            assignment: alpha.clone(),
        },
    ))
}
