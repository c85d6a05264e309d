//! Polymorphisms of `ham_n` that factor through Hamming weights.
//!
//! A `k`-tuple of images is sent to its weight vector in `[0..n^2]^k`. Two
//! componentwise-adjacent tuples have weight vectors differing by at most one
//! in every coordinate, hence lying in a common basic cube. A dominion labels
//! the weight grid so that every basic cube carries at most two labels; the
//! labels that share a cube form the minimum constraint graph, and any
//! homomorphism from that graph into `ham_n` turns the labeling into a
//! polymorphism.

mod generate;
mod graph;
pub mod io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Counterexample, Elem, HomWitness};
use crate::hamming::{BinaryImage, HammingError};

pub use generate::generate_dominion;
pub use graph::{
    dominion_polymorphism, embed_in_tree, minc, tree_walk_homomorphism, LabelAssignment,
    LabelGraph,
};

/// Largest weight grid stored densely: `(7^2 + 1)^3` cells.
pub const MAX_CELLS: usize = 125_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DominionError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("weight grid for k = {k}, n = {n} has {cells} cells, above the limit {MAX_CELLS}")]
    TooLarge { k: usize, n: usize, cells: u128 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("basic cube at {corner:?} uses labels {labels:?}")]
    NotADominion { corner: Vec<usize>, labels: Vec<u32> },
    #[error("graph has a cycle through edge {0}-{1}; not tree-embeddable by this procedure")]
    Cyclic(u32, u32),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("labels {0} and {1} are constraint-adjacent but their images are at distance {2}")]
    NonAdjacentEdge(u32, u32, u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Hamming(#[from] HammingError),
}

/// A vertex of the `k`-ary Hamming weight graph of size `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector {
    n: usize,
    entries: Vec<usize>,
}

impl WeightVector {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self, DominionError> {
        if let Some(&bad) = entries.iter().find(|&&w| w > n * n) {
            return Err(DominionError::Parameter(format!(
                "weight {bad} outside [0, {}]",
                n * n
            )));
        }
        Ok(WeightVector { n, entries })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `(a_1, .., a_k) -> (|a_1|, .., |a_k|)`.
pub fn weight_map(images: &[BinaryImage]) -> Result<WeightVector, DominionError> {
    let n = images.first().map_or(1, |a| a.side());
    if let Some(bad) = images.iter().find(|a| a.side() != n) {
        return Err(HammingError::SizeMismatch {
            left: n,
            right: bad.side(),
        }
        .into());
    }
    WeightVector::new(n, images.iter().map(|a| a.weight() as usize).collect())
}

/// King-move adjacency (loops included) in the weight grid.
pub fn weight_adjacent(u: &WeightVector, v: &WeightVector) -> Result<bool, DominionError> {
    if u.n != v.n || u.entries.len() != v.entries.len() {
        return Err(DominionError::Shape(format!(
            "weight vectors of shape ({}, {}) and ({}, {})",
            u.entries.len(),
            u.n,
            v.entries.len(),
            v.n
        )));
    }
    Ok(u.entries.iter().zip(&v.entries).all(|(&a, &b)| a.abs_diff(b) <= 1))
}

/// The `2^k` vertices `u + d`, `d` in `{0,1}^k`, of the basic cube with top corner `u`.
pub fn basic_cube(u: &WeightVector) -> Result<Vec<WeightVector>, DominionError> {
    let top = u.n * u.n;
    if u.entries.iter().any(|&w| w >= top) {
        return Err(DominionError::Parameter(format!(
            "top corner {:?} must have entries below {top}",
            u.entries
        )));
    }
    let k = u.entries.len();
    Ok((0..1usize << k)
        .map(|mask| WeightVector {
            n: u.n,
            entries: u
                .entries
                .iter()
                .enumerate()
                .map(|(i, &w)| w + (mask >> (k - 1 - i) & 1))
                .collect(),
        })
        .collect())
}

fn grid_cells(k: usize, n: usize) -> Result<usize, DominionError> {
    if k == 0 {
        return Err(DominionError::Parameter("k must be at least 1".into()));
    }
    if n == 0 || n > crate::hamming::MAX_SIDE {
        return Err(DominionError::Parameter(format!("image side {n} unsupported")));
    }
    let side = (n * n + 1) as u128;
    let cells = side.checked_pow(k as u32).unwrap_or(u128::MAX);
    if cells > MAX_CELLS as u128 {
        return Err(DominionError::TooLarge { k, n, cells });
    }
    Ok(cells as usize)
}

/// A total labeling of the weight grid `[0..n^2]^k`, stored densely in
/// lexicographic order (first coordinate most significant). Not yet checked
/// against the basic-cube condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labeling {
    pub k: usize,
    pub n: usize,
    pub num_labels: u32,
    pub labels: Vec<u32>,
}

impl Labeling {
    pub fn new(k: usize, n: usize, num_labels: u32, labels: Vec<u32>) -> Result<Self, DominionError> {
        let cells = grid_cells(k, n)?;
        if num_labels == 0 {
            return Err(DominionError::Parameter("label set is empty".into()));
        }
        if labels.len() != cells {
            return Err(DominionError::Shape(format!(
                "labeling has {} cells, expected {cells}",
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_labels) {
            return Err(DominionError::Parameter(format!(
                "label {bad} outside 0..{num_labels}"
            )));
        }
        Ok(Labeling {
            k,
            n,
            num_labels,
            labels,
        })
    }

    /// Labels every vertex with `f(weight vector)`.
    pub fn from_fn(
        k: usize,
        n: usize,
        num_labels: u32,
        f: impl Fn(&[usize]) -> u32,
    ) -> Result<Self, DominionError> {
        let cells = grid_cells(k, n)?;
        let side = n * n + 1;
        let mut coords = vec![0; k];
        let labels = (0..cells)
            .map(|idx| {
                decode(idx, side, &mut coords);
                f(&coords)
            })
            .collect();
        Labeling::new(k, n, num_labels, labels)
    }

    pub fn constant(k: usize, n: usize, num_labels: u32, label: u32) -> Result<Self, DominionError> {
        Labeling::from_fn(k, n, num_labels, |_| label)
    }

    pub fn side(&self) -> usize {
        self.n * self.n + 1
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        let side = self.side();
        coords.iter().fold(0, |acc, &c| acc * side + c)
    }

    pub fn label_at(&self, coords: &[usize]) -> u32 {
        self.labels[self.index_of(coords)]
    }

    /// Top corners `[0..n^2 - 1]^k` of all basic cubes, in lexicographic order.
    fn cube_count(&self) -> usize {
        (self.n * self.n).pow(self.k as u32)
    }

    fn cube_corner(&self, idx: usize, out: &mut [usize]) {
        decode(idx, self.n * self.n, out);
    }

    /// Distinct labels used on the basic cube with the given top corner, sorted.
    pub fn cube_labels(&self, corner: &[usize]) -> Vec<u32> {
        let k = self.k;
        let side = self.side();
        let base = self.index_of(corner);
        let mut labels: Vec<u32> = (0..1usize << k)
            .map(|mask| {
                let offset = (0..k).fold(0, |acc, i| acc * side + (mask >> (k - 1 - i) & 1));
                self.labels[base + offset]
            })
            .collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    /// Distinct label sets of every basic cube, in corner order.
    pub(crate) fn all_cube_labels(&self) -> Vec<Vec<u32>> {
        (0..self.cube_count())
            .into_par_iter()
            .map(|idx| {
                let mut corner = vec![0; self.k];
                self.cube_corner(idx, &mut corner);
                self.cube_labels(&corner)
            })
            .collect()
    }
}

pub(crate) fn decode(mut idx: usize, base: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
}

/// Checks the basic-cube condition. The counterexample names the top corner
/// (as `arguments[0]`) and its three or more labels (as `image`).
pub fn is_dominion(labeling: &Labeling) -> HomWitness {
    let found = (0..labeling.cube_count()).into_par_iter().find_map_first(|idx| {
        let mut corner = vec![0; labeling.k];
        labeling.cube_corner(idx, &mut corner);
        let labels = labeling.cube_labels(&corner);
        (labels.len() > 2).then(|| Counterexample {
            symbol: "basic cube".into(),
            arguments: vec![corner.iter().map(|&c| c as Elem).collect()],
            image: labels.iter().map(|&l| Elem::from(l)).collect(),
        })
    });
    HomWitness {
        verdict: found.is_none(),
        sampled: false,
        checked: labeling.cube_count() as u64,
        counterexample: found,
    }
}

/// A labeling that satisfies the basic-cube condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Labeling", into = "Labeling")]
pub struct Dominion(Labeling);

impl TryFrom<Labeling> for Dominion {
    type Error = DominionError;

    fn try_from(labeling: Labeling) -> Result<Self, Self::Error> {
        let labeling = Labeling::new(labeling.k, labeling.n, labeling.num_labels, labeling.labels)?;
        let w = is_dominion(&labeling);
        if let Some(cex) = w.counterexample {
            return Err(DominionError::NotADominion {
                corner: cex.arguments[0].iter().map(|&c| c as usize).collect(),
                labels: cex.image.iter().map(|&l| l as u32).collect(),
            });
        }
        Ok(Dominion(labeling))
    }
}

impl From<Dominion> for Labeling {
    fn from(d: Dominion) -> Labeling {
        d.0
    }
}

impl Dominion {
    pub fn labeling(&self) -> &Labeling {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.k
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn num_labels(&self) -> u32 {
        self.0.num_labels
    }

    pub fn label_at(&self, coords: &[usize]) -> u32 {
        self.0.label_at(coords)
    }

    /// Label of the grid vertex given by a weight sequence of length `k`.
    pub fn label_of_weights(&self, weights: impl Iterator<Item = usize>) -> u32 {
        let side = self.0.side();
        self.0.labels[weights.fold(0, |acc, w| acc * side + w)]
    }

    /// Labels actually used.
    pub fn image(&self) -> Vec<u32> {
        let mut used = self.0.labels.clone();
        used.sort_unstable();
        used.dedup();
        used
    }
}
