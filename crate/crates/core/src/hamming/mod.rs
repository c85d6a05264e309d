//! Binary images and the Hamming graph `ham_n`: images adjacent when they
//! differ in at most one pixel, with a loop at every vertex.
//!
//! Supplies the endomorphism families used to twist activations (dihedral,
//! swapping, blanking) and the multi-linear indicator polymorphisms.

mod affine;
pub mod dihedral;
mod image;
pub mod pbm;

use rand::Rng;
use thiserror::Error;

use crate::algebra::{
    project, FiniteOperation, OpKind, RelationBody, RelationalStructure, Universe,
};
use crate::rng::stream_rng;

pub use affine::PixelAffine;
pub use dihedral::{gamma, gamma_inverse, DihedralElement};
pub use image::{
    adjacent, hamming_distance, hamming_weight, pixel_mask, standard_basis, BinaryImage, MAX_SIDE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HammingError {
    #[error("image side {0} unsupported (must be 1..=8)")]
    UnsupportedSize(usize),
    #[error("bits {bits:#x} do not fit a {n}x{n} image")]
    StrayBits { n: usize, bits: u64 },
    #[error("image sizes differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("pixel ({i}, {j}) outside a {n}x{n} image")]
    PixelOutOfRange { n: usize, i: usize, j: usize },
    #[error("coordinate ({x}, {y}) not in U_{n}")]
    CoordinateOutOfRange { n: usize, x: i32, y: i32 },
    #[error("unknown dihedral symbol {0:?}")]
    UnknownDihedral(String),
    #[error("indicator output image must have weight 1, got weight {0}")]
    NotBasisImage(u32),
    #[error("materializing ham_{0} is refused above n = 2")]
    TooLargeToMaterialize(usize),
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

fn images_universe(n: usize) -> Universe {
    Universe::images(n).expect("image side already validated")
}

/// `h_sigma`: output pixel `p` reads input pixel `gamma^-1(sigma(gamma(p)))`.
pub fn dihedral_endo(sigma: DihedralElement, n: usize) -> FiniteOperation {
    FiniteOperation::from_parts(1, images_universe(n), OpKind::Dihedral { sigma })
}

/// `a -> a + b` over F2; an involutive automorphism of `ham_n`.
pub fn swap_endo(b: BinaryImage) -> FiniteOperation {
    FiniteOperation::from_parts(1, images_universe(b.side()), OpKind::Swap { mask: b })
}

/// `a -> a * b` pixelwise; never increases distances.
pub fn blank_endo(b: BinaryImage) -> FiniteOperation {
    FiniteOperation::from_parts(1, images_universe(b.side()), OpKind::Blank { mask: b })
}

/// `g_{b,c}(a_1..a_k) = (prod_i a_i . c_i) b` with `b` a single-pixel image.
///
/// The image of the map is `{0, b}`, an adjacent pair, so it is a
/// polymorphism of `ham_n` for every `c`.
pub fn multilinear_indicator(
    b: BinaryImage,
    c: &[BinaryImage],
) -> Result<FiniteOperation, HammingError> {
    if b.weight() != 1 {
        return Err(HammingError::NotBasisImage(b.weight()));
    }
    if let Some(bad) = c.iter().find(|ci| ci.side() != b.side()) {
        return Err(HammingError::SizeMismatch {
            left: b.side(),
            right: bad.side(),
        });
    }
    Ok(FiniteOperation::from_parts(
        c.len(),
        images_universe(b.side()),
        OpKind::MultilinearIndicator { b, c: c.to_vec() },
    ))
}

/// Random indicator of arity `k`: uniform basis image and uniform parameter images.
pub fn random_multilinear_indicator<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> FiniteOperation {
    let b = BinaryImage::zeros(n).flip(rng.gen_range(0..n * n));
    let c: Vec<BinaryImage> = (0..k).map(|_| BinaryImage::random(n, rng)).collect();
    multilinear_indicator(b, &c).expect("basis image has weight 1")
}

/// `ham_n` as a relational structure with one binary relation `adj`, decided
/// by predicate.
pub fn hamming_structure(n: usize) -> RelationalStructure {
    RelationalStructure::new(images_universe(n))
        .with_relation("adj", RelationBody::HammingAdjacency)
        .expect("fresh structure")
}

/// `ham_n` with its edge set stored as explicit tuples; refused above `n = 2`.
pub fn materialized_hamming_structure(n: usize) -> Result<RelationalStructure, HammingError> {
    if n > 2 {
        return Err(HammingError::TooLargeToMaterialize(n));
    }
    let universe = Universe::images(n).map_err(|_| HammingError::UnsupportedSize(n))?;
    let vertices = 1u64 << (n * n);
    let tuples = (0..vertices).flat_map(|a| {
        (0..vertices)
            .filter(move |b| (a ^ b).count_ones() <= 1)
            .map(move |b| vec![a, b])
    });
    Ok(RelationalStructure::new(universe)
        .with_tuples("adj", 2, tuples)
        .expect("tuples lie in the universe"))
}

/// Which endomorphisms go into the twisting set `H_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSpec {
    pub dihedral: bool,
    /// Number of random swap masks to draw.
    pub swap_masks: usize,
    /// Number of random blanking masks to draw.
    pub blank_masks: usize,
    pub seed: u64,
}

impl HSpec {
    pub fn dihedral_only() -> Self {
        HSpec {
            dihedral: true,
            swap_masks: 0,
            blank_masks: 0,
            seed: 0,
        }
    }
}

const H_STREAM: u64 = 0x4E;

/// Builds the twisting set: the identity first, then the dihedral
/// endomorphisms and seeded random swap and blank masks as requested.
///
/// The full swap and blank families have `2^(n^2)` members each, so they are
/// sampled. Masks that give the identity (zero swap, all-ones blank) and
/// repeated masks are dropped.
pub fn build_h(n: usize, spec: &HSpec) -> Vec<FiniteOperation> {
    let mut rng = stream_rng(spec.seed, H_STREAM);
    let swaps: Vec<BinaryImage> = (0..spec.swap_masks)
        .map(|_| BinaryImage::random(n, &mut rng))
        .collect();
    let blanks: Vec<BinaryImage> = (0..spec.blank_masks)
        .map(|_| BinaryImage::random(n, &mut rng))
        .collect();
    build_h_with_masks(n, spec.dihedral, &swaps, &blanks)
}

pub fn build_h_with_masks(
    n: usize,
    dihedral: bool,
    swap_masks: &[BinaryImage],
    blank_masks: &[BinaryImage],
) -> Vec<FiniteOperation> {
    let mut out: Vec<FiniteOperation> = Vec::new();
    if dihedral {
        out.extend(DihedralElement::ALL.iter().map(|&g| dihedral_endo(g, n)));
    } else {
        out.push(project(1, 1, images_universe(n)).expect("valid projection"));
    }
    let candidates = swap_masks
        .iter()
        .map(|&b| swap_endo(b))
        .chain(blank_masks.iter().map(|&b| blank_endo(b)));
    for op in candidates {
        if !op.is_identity() && !out.contains(&op) {
            out.push(op);
        }
    }
    out
}
