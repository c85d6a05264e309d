//! Normal form for unary maps built from dihedral, swap and blank
//! endomorphisms: `a -> h_sigma(a) * mask + offset`.
//!
//! Dihedral maps permute pixels, so they distribute over `*` and `+`, and the
//! form is closed under composition. Twisting an activation repeatedly then
//! keeps a composition tree of bounded depth.

use super::dihedral::permute_bits;
use super::{blank_endo, dihedral_endo, pixel_mask, swap_endo, BinaryImage, DihedralElement};
use crate::algebra::{compose, project, FiniteOperation, OpKind, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PixelAffine {
    pub n: usize,
    pub sigma: DihedralElement,
    pub mask: u64,
    pub offset: u64,
}

impl PixelAffine {
    pub fn identity(n: usize) -> Self {
        PixelAffine {
            n,
            sigma: DihedralElement::E,
            mask: pixel_mask(n),
            offset: 0,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == PixelAffine::identity(self.n)
    }

    pub fn apply(&self, a: u64) -> u64 {
        permute_bits(self.sigma, self.n, a) & self.mask ^ self.offset
    }

    /// `outer . self`.
    pub fn then(&self, outer: &PixelAffine) -> PixelAffine {
        let p = |x| permute_bits(outer.sigma, self.n, x);
        PixelAffine {
            n: self.n,
            // h_b(h_a(x)) = h_{a * b} under the matrix product
            sigma: self.sigma * outer.sigma,
            mask: p(self.mask) & outer.mask,
            offset: p(self.offset) & outer.mask ^ outer.offset,
        }
    }

    /// Recognizes unary operations on images assembled from the three families.
    pub fn of(op: &FiniteOperation) -> Option<PixelAffine> {
        let n = match op.universe() {
            Universe::Images { n } if op.arity() == 1 => n as usize,
            _ => return None,
        };
        let id = PixelAffine::identity(n);
        match op.kind() {
            OpKind::Projection { .. } => Some(id),
            OpKind::Dihedral { sigma } => Some(PixelAffine { sigma: *sigma, ..id }),
            OpKind::Swap { mask } => Some(PixelAffine {
                offset: mask.bits(),
                ..id
            }),
            OpKind::Blank { mask } => Some(PixelAffine {
                mask: mask.bits(),
                ..id
            }),
            OpKind::Compose { outer, inner } if inner.len() == 1 => {
                Some(PixelAffine::of(&inner[0])?.then(&PixelAffine::of(outer)?))
            }
            _ => None,
        }
    }

    /// `swap(blank(dihedral(a)))`, leaving out identity stages.
    pub fn to_operation(&self) -> FiniteOperation {
        let image = |bits| BinaryImage::from_bits(self.n, bits).expect("bits fit the image");
        let mut stages = Vec::new();
        if self.sigma != DihedralElement::E {
            stages.push(dihedral_endo(self.sigma, self.n));
        }
        if self.mask != pixel_mask(self.n) {
            stages.push(blank_endo(image(self.mask)));
        }
        if self.offset != 0 {
            stages.push(swap_endo(image(self.offset)));
        }
        let mut stages = stages.into_iter();
        let Some(first) = stages.next() else {
            let u = Universe::images(self.n).expect("valid side");
            return project(1, 1, u).expect("unary projection");
        };
        stages.fold(first, |acc, stage| {
            compose(&stage, &[acc]).expect("unary stages compose")
        })
    }
}
