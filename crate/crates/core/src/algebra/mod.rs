//! Finite operations, generalized composition, relational structures, and
//! brute-force homomorphism and polymorphism oracles.

mod descriptor;
mod operation;
mod oracle;
mod structure;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamming::{pixel_mask, BinaryImage, MAX_SIDE};

pub use descriptor::OpDoc;
pub use operation::{compose, compose_with_arity, project, FiniteOperation, Monomial, OpKind};
pub use oracle::{
    extensionally_equal, is_endomorphism, is_homomorphism, is_polymorphism, power_adjacent,
    recheck_polymorphism_violation, CheckMode, Counterexample, HomWitness, DEFAULT_CEILING,
};
pub use structure::{Relation, RelationBody, RelationalStructure};

/// A universe element. Table universes use `0..m`; image universes use the
/// bit-packed image (see [`BinaryImage::bits`]).
pub type Elem = u64;

/// Largest table universe; also the bound for table-backed operations.
pub const TABLE_UNIVERSE_LIMIT: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Universe {
    /// `{0, .., size - 1}`.
    Table { size: u64 },
    /// All `n x n` binary images.
    Images { n: u8 },
}

impl Universe {
    pub fn table(size: u64) -> Result<Self, AlgebraError> {
        if size == 0 || size > TABLE_UNIVERSE_LIMIT {
            return Err(AlgebraError::Parameter(format!(
                "table universe size {size} outside 1..={TABLE_UNIVERSE_LIMIT}"
            )));
        }
        Ok(Universe::Table { size })
    }

    pub fn images(n: usize) -> Result<Self, AlgebraError> {
        if n == 0 || n > MAX_SIDE {
            return Err(AlgebraError::Parameter(format!(
                "image side {n} outside 1..={MAX_SIDE}"
            )));
        }
        Ok(Universe::Images { n: n as u8 })
    }

    pub fn cardinality(&self) -> u128 {
        match *self {
            Universe::Table { size } => u128::from(size),
            Universe::Images { n } => 1u128 << (u32::from(n) * u32::from(n)),
        }
    }

    pub fn contains(&self, e: Elem) -> bool {
        match *self {
            Universe::Table { size } => e < size,
            Universe::Images { n } => e & !pixel_mask(n as usize) == 0,
        }
    }

    pub fn image_side(&self) -> Option<usize> {
        match *self {
            Universe::Images { n } => Some(n as usize),
            Universe::Table { .. } => None,
        }
    }

    /// Uniform random element.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        match *self {
            Universe::Table { size } => rng.gen_range(0..size),
            Universe::Images { n } => rng.gen::<u64>() & pixel_mask(n as usize),
        }
    }

    /// All elements in increasing order, when there are at most `limit` of them.
    pub fn elements(&self, limit: u64) -> Result<std::ops::Range<Elem>, AlgebraError> {
        let card = self.cardinality();
        if card > u128::from(limit) {
            return Err(AlgebraError::ExhaustiveTooLarge {
                estimate: card,
                ceiling: limit,
            });
        }
        Ok(0..card as u64)
    }

    pub fn check(&self, e: Elem) -> Result<(), AlgebraError> {
        if self.contains(e) {
            Ok(())
        } else {
            Err(AlgebraError::ElementOutOfUniverse {
                elem: e,
                universe: *self,
            })
        }
    }

    /// Interprets an element of an image universe.
    pub fn image(&self, e: Elem) -> Result<BinaryImage, AlgebraError> {
        match *self {
            Universe::Images { n } => BinaryImage::from_bits(n as usize, e).map_err(|_| {
                AlgebraError::ElementOutOfUniverse {
                    elem: e,
                    universe: *self,
                }
            }),
            Universe::Table { .. } => Err(AlgebraError::Parameter(format!(
                "{self} is not an image universe"
            ))),
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Table { size } => write!(f, "table({size})"),
            Universe::Images { n } => write!(f, "images({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("expected {expected} arguments, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("universe mismatch: expected {expected}, found {found}")]
    UniverseMismatch { expected: Universe, found: Universe },
    #[error("element {elem} is not in {universe}")]
    ElementOutOfUniverse { elem: Elem, universe: Universe },
    #[error("composition error: {0}")]
    Composition(String),
    #[error("exhaustive enumeration of {estimate} cases exceeds ceiling {ceiling}; use sampled mode")]
    ExhaustiveTooLarge { estimate: u128, ceiling: u64 },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("unknown operation family {0:?}")]
    UnknownFamily(String),
    #[error("malformed descriptor for family {family:?}: {reason}")]
    Descriptor { family: String, reason: String },
    #[error("sampling failed: {0}")]
    Sampling(String),
}
