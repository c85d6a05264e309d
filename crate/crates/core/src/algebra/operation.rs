use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AlgebraError, Elem, Universe, TABLE_UNIVERSE_LIMIT};
use crate::dominion::{Dominion, LabelAssignment};
use crate::hamming::{dihedral, pixel_mask, BinaryImage, DihedralElement};

/// One term `coeff * x_1^e_1 * ... * x_n^e_n` of a polynomial over `Z/m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: u64,
    pub exponents: Vec<u32>,
}

/// The family and parameters of an operation. Evaluation is a pure function
/// of the variant, the arity and the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// Returns argument `k`, counted from 1.
    Projection { k: usize },
    Constant { value: Elem },
    /// Values in mixed radix order, first argument most significant.
    Table { values: Vec<Elem> },
    /// `x -> sum coeffs[i] * x[i]` modulo the universe size.
    LinearForm { coeffs: Vec<u64> },
    Polynomial { terms: Vec<Monomial> },
    /// `x -> outer(inner[0](x), .., inner[k-1](x))`.
    Compose {
        outer: FiniteOperation,
        inner: Vec<FiniteOperation>,
    },
    /// Pixelwise AND of all arguments.
    BitwiseAnd,
    Dihedral { sigma: DihedralElement },
    /// `a -> a + mask` over F2.
    Swap { mask: BinaryImage },
    /// `a -> a * mask` (Hadamard) over F2.
    Blank { mask: BinaryImage },
    /// `(a_1..a_k) -> (prod_i a_i . c_i) b`.
    MultilinearIndicator { b: BinaryImage, c: Vec<BinaryImage> },
    /// `(a_1..a_k) -> assignment(dominion(weights(a)))`.
    DominionPolymorphism {
        dominion: Dominion,
        assignment: LabelAssignment,
    },
}

/// An operation of fixed arity on a finite universe.
///
/// Cheap to clone; the parameters sit behind an `Arc`. Equality is
/// structural (same family and parameters), not extensional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteOperation {
    arity: usize,
    universe: Universe,
    kind: Arc<OpKind>,
}

fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

fn mod_pow(mut base: u64, mut exp: u32, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Cardinality of a universe small enough for table backing.
fn table_size(universe: Universe) -> Result<u64, AlgebraError> {
    let card = universe.cardinality();
    if card > u128::from(TABLE_UNIVERSE_LIMIT) {
        return Err(AlgebraError::Parameter(format!(
            "table backing needs at most {TABLE_UNIVERSE_LIMIT} elements, {universe} has {card}"
        )));
    }
    Ok(card as u64)
}

/// The `(n, k)`-projection: the `n`-ary operation returning argument `k` (1-based).
pub fn project(n: usize, k: usize, universe: Universe) -> Result<FiniteOperation, AlgebraError> {
    if k < 1 || k > n {
        return Err(AlgebraError::Parameter(format!(
            "projection index {k} outside 1..={n}"
        )));
    }
    Ok(FiniteOperation::from_parts(n, universe, OpKind::Projection { k }))
}

/// Generalized composite `f[g_1, .., g_k]`; the arity is taken from the `gs`.
pub fn compose(
    f: &FiniteOperation,
    gs: &[FiniteOperation],
) -> Result<FiniteOperation, AlgebraError> {
    let n = gs.first().map(|g| g.arity).ok_or_else(|| {
        AlgebraError::Composition(
            "cannot infer the arity of a composite with no inner operations; use compose_with_arity"
                .into(),
        )
    })?;
    compose_with_arity(f, gs, n)
}

/// Generalized composite with an explicit result arity, which is needed when
/// `f` is nullary.
pub fn compose_with_arity(
    f: &FiniteOperation,
    gs: &[FiniteOperation],
    n: usize,
) -> Result<FiniteOperation, AlgebraError> {
    if gs.len() != f.arity {
        return Err(AlgebraError::Composition(format!(
            "outer operation has arity {} but {} inner operations were given",
            f.arity,
            gs.len()
        )));
    }
    for (i, g) in gs.iter().enumerate() {
        if g.arity != n {
            return Err(AlgebraError::Composition(format!(
                "inner operation {i} has arity {}, expected {n}",
                g.arity
            )));
        }
        if g.universe != f.universe {
            return Err(AlgebraError::Composition(format!(
                "inner operation {i} is on {}, outer on {}",
                g.universe, f.universe
            )));
        }
    }
    Ok(FiniteOperation::from_parts(
        n,
        f.universe,
        OpKind::Compose {
            outer: f.clone(),
            inner: gs.to_vec(),
        },
    ))
}

impl FiniteOperation {
    pub(crate) fn from_parts(arity: usize, universe: Universe, kind: OpKind) -> Self {
        FiniteOperation {
            arity,
            universe,
            kind: Arc::new(kind),
        }
    }

    pub fn constant(universe: Universe, arity: usize, value: Elem) -> Result<Self, AlgebraError> {
        universe.check(value)?;
        Ok(Self::from_parts(arity, universe, OpKind::Constant { value }))
    }

    /// Table-backed operation on a universe of at most 4096 elements.
    pub fn from_table(
        arity: usize,
        universe: Universe,
        values: Vec<Elem>,
    ) -> Result<Self, AlgebraError> {
        let m = table_size(universe)?;
        let expected = checked_pow(m, arity)
            .filter(|&len| len <= TABLE_UNIVERSE_LIMIT.pow(2))
            .ok_or_else(|| {
                AlgebraError::Parameter(format!("table for {m}^{arity} arguments is too large"))
            })?;
        if values.len() as u64 != expected {
            return Err(AlgebraError::Parameter(format!(
                "table has {} entries, expected {expected}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= m) {
            return Err(AlgebraError::ElementOutOfUniverse { elem: bad, universe });
        }
        Ok(Self::from_parts(arity, universe, OpKind::Table { values }))
    }

    /// The linear form `x -> coeffs . x` over `Z/p`, on universe `table(p)`.
    pub fn linear_form(p: u64, coeffs: Vec<u64>) -> Result<Self, AlgebraError> {
        let universe = Universe::table(p)?;
        let coeffs = coeffs.into_iter().map(|c| c % p).collect::<Vec<_>>();
        Ok(Self::from_parts(coeffs.len(), universe, OpKind::LinearForm { coeffs }))
    }

    /// A polynomial over `Z/m`, on universe `table(m)`.
    pub fn polynomial(m: u64, arity: usize, terms: Vec<Monomial>) -> Result<Self, AlgebraError> {
        let universe = Universe::table(m)?;
        for t in &terms {
            if t.exponents.len() != arity {
                return Err(AlgebraError::Parameter(format!(
                    "monomial has {} exponents, expected {arity}",
                    t.exponents.len()
                )));
            }
        }
        let terms = terms
            .into_iter()
            .map(|t| Monomial {
                coeff: t.coeff % m,
                exponents: t.exponents,
            })
            .collect();
        Ok(Self::from_parts(arity, universe, OpKind::Polynomial { terms }))
    }

    /// Pixelwise AND of `arity >= 1` images.
    pub fn bitwise_and(n: usize, arity: usize) -> Result<Self, AlgebraError> {
        if arity == 0 {
            return Err(AlgebraError::Parameter("bitwise_and needs arity >= 1".into()));
        }
        Ok(Self::from_parts(arity, Universe::images(n)?, OpKind::BitwiseAnd))
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn kind(&self) -> &OpKind {
        &self.kind
    }

    pub fn family(&self) -> &'static str {
        match *self.kind {
            OpKind::Projection { .. } => "projection",
            OpKind::Constant { .. } => "constant",
            OpKind::Table { .. } => "table",
            OpKind::LinearForm { .. } => "linear_form",
            OpKind::Polynomial { .. } => "polynomial",
            OpKind::Compose { .. } => "compose",
            OpKind::BitwiseAnd => "bitwise_and",
            OpKind::Dihedral { .. } => "dihedral",
            OpKind::Swap { .. } => "swap",
            OpKind::Blank { .. } => "blank",
            OpKind::MultilinearIndicator { .. } => "multilinear_indicator",
            OpKind::DominionPolymorphism { .. } => "dominion_polymorphism",
        }
    }

    /// Evaluates after checking the argument count and that every argument
    /// lies in the universe.
    pub fn apply(&self, args: &[Elem]) -> Result<Elem, AlgebraError> {
        if args.len() != self.arity {
            return Err(AlgebraError::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        for &a in args {
            self.universe.check(a)?;
        }
        Ok(self.eval(args))
    }

    /// Evaluates without validation. Arguments must be universe elements and
    /// there must be exactly `arity` of them.
    pub fn eval(&self, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity);
        match &*self.kind {
            OpKind::Projection { k } => args[k - 1],
            OpKind::Constant { value } => *value,
            OpKind::Table { values } => {
                let m = self.universe.cardinality() as u64;
                let idx = args.iter().fold(0u64, |acc, &a| acc * m + a);
                values[idx as usize]
            }
            OpKind::LinearForm { coeffs } => {
                let m = u128::from(self.table_modulus());
                let sum = coeffs
                    .iter()
                    .zip(args)
                    .fold(0u128, |acc, (&c, &a)| (acc + u128::from(c) * u128::from(a)) % m);
                sum as u64
            }
            OpKind::Polynomial { terms } => {
                let m = self.table_modulus();
                terms.iter().fold(0u64, |acc, t| {
                    let v = t
                        .exponents
                        .iter()
                        .zip(args)
                        .fold(t.coeff % m, |p, (&e, &a)| p * mod_pow(a, e, m) % m);
                    (acc + v) % m
                })
            }
            OpKind::Compose { outer, inner } => {
                let vals: Vec<Elem> = inner.iter().map(|g| g.eval(args)).collect();
                outer.eval(&vals)
            }
            OpKind::BitwiseAnd => args.iter().fold(u64::MAX, |acc, &a| acc & a),
            OpKind::Dihedral { sigma } => {
                dihedral::permute_bits(*sigma, self.image_side_unchecked(), args[0])
            }
            OpKind::Swap { mask } => args[0] ^ mask.bits(),
            OpKind::Blank { mask } => args[0] & mask.bits(),
            OpKind::MultilinearIndicator { b, c } => {
                let on = c
                    .iter()
                    .zip(args)
                    .all(|(ci, &a)| (ci.bits() & a).count_ones() % 2 == 1);
                if on {
                    b.bits()
                } else {
                    0
                }
            }
            OpKind::DominionPolymorphism {
                dominion,
                assignment,
            } => {
                let label = dominion.label_of_weights(args.iter().map(|a| a.count_ones() as usize));
                assignment.image(label).bits()
            }
        }
    }

    fn table_modulus(&self) -> u64 {
        match self.universe {
            Universe::Table { size } => size,
            Universe::Images { .. } => unreachable!("modular families live on table universes"),
        }
    }

    fn image_side_unchecked(&self) -> usize {
        self.universe.image_side().expect("image family on image universe")
    }

    /// Structural identity test: recognizes the unary families that are the
    /// identity map without evaluating anything.
    pub fn is_identity(&self) -> bool {
        if self.arity != 1 {
            return false;
        }
        match &*self.kind {
            OpKind::Projection { .. } => true,
            OpKind::Dihedral { sigma } => *sigma == DihedralElement::E,
            OpKind::Swap { mask } => mask.bits() == 0,
            OpKind::Blank { mask } => {
                mask.bits() == pixel_mask(mask.side())
            }
            OpKind::LinearForm { coeffs } => coeffs[0] == 1 % self.table_modulus(),
            OpKind::Table { values } => values.iter().enumerate().all(|(i, &v)| v == i as u64),
            _ => false,
        }
    }

    /// Linear coefficients, when this is a linear form.
    pub fn linear_coefficients(&self) -> Option<&[u64]> {
        match &*self.kind {
            OpKind::LinearForm { coeffs } => Some(coeffs),
            _ => None,
        }
    }

    /// Full value table in mixed radix order, for universes small enough to
    /// enumerate.
    pub fn to_table(&self) -> Result<Vec<Elem>, AlgebraError> {
        let m = table_size(self.universe)?;
        let len = checked_pow(m, self.arity)
            .filter(|&len| len <= TABLE_UNIVERSE_LIMIT.pow(2))
            .ok_or_else(|| AlgebraError::ExhaustiveTooLarge {
                estimate: u128::from(m).saturating_pow(self.arity as u32),
                ceiling: TABLE_UNIVERSE_LIMIT.pow(2),
            })?;
        let mut args = vec![0; self.arity];
        let mut out = Vec::with_capacity(len as usize);
        for idx in 0..len {
            let mut rest = idx;
            for slot in args.iter_mut().rev() {
                *slot = rest % m;
                rest /= m;
            }
            out.push(self.eval(&args));
        }
        Ok(out)
    }
}
