use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{AlgebraError, Elem, FiniteOperation, Universe};

type Predicate = Arc<dyn Fn(&[Elem]) -> bool + Send + Sync>;

/// How a relation's membership is decided.
#[derive(Clone)]
pub enum RelationBody {
    /// Explicit tuples, kept sorted and deduplicated.
    Tuples { arity: usize, tuples: Vec<Vec<Elem>> },
    /// Hamming-graph adjacency on `images(n)`: at most one differing pixel.
    HammingAdjacency,
    /// Arbitrary membership test; enumeration walks the whole power of the universe.
    Predicate { arity: usize, test: Predicate },
}

impl fmt::Debug for RelationBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationBody::Tuples { arity, tuples } => f
                .debug_struct("Tuples")
                .field("arity", arity)
                .field("len", &tuples.len())
                .finish(),
            RelationBody::HammingAdjacency => f.write_str("HammingAdjacency"),
            RelationBody::Predicate { arity, .. } => {
                f.debug_struct("Predicate").field("arity", arity).finish()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Relation {
    name: String,
    body: RelationBody,
}

const REJECTION_TRIES: usize = 1_000_000;

impl Relation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &RelationBody {
        &self.body
    }

    pub fn arity(&self) -> usize {
        match &self.body {
            RelationBody::Tuples { arity, .. } | RelationBody::Predicate { arity, .. } => *arity,
            RelationBody::HammingAdjacency => 2,
        }
    }

    pub fn contains(&self, t: &[Elem]) -> bool {
        match &self.body {
            RelationBody::Tuples { tuples, .. } => tuples.binary_search_by(|x| x.as_slice().cmp(t)).is_ok(),
            RelationBody::HammingAdjacency => (t[0] ^ t[1]).count_ones() <= 1,
            RelationBody::Predicate { test, .. } => test(t),
        }
    }

    /// Number of tuples an exhaustive walk will produce, or an upper bound
    /// on the work for predicate relations.
    pub(crate) fn enumeration_cost(&self, universe: Universe) -> u128 {
        match &self.body {
            RelationBody::Tuples { tuples, .. } => tuples.len() as u128,
            RelationBody::HammingAdjacency => {
                let n = universe.image_side().unwrap_or(0) as u128;
                universe.cardinality() * (n * n + 1)
            }
            RelationBody::Predicate { arity, .. } => universe
                .cardinality()
                .checked_pow(*arity as u32)
                .unwrap_or(u128::MAX),
        }
    }

    /// Every tuple of the relation, refused above `ceiling`.
    pub fn tuples(&self, universe: Universe, ceiling: u64) -> Result<Vec<Vec<Elem>>, AlgebraError> {
        let cost = self.enumeration_cost(universe);
        if cost > u128::from(ceiling) {
            return Err(AlgebraError::ExhaustiveTooLarge {
                estimate: cost,
                ceiling,
            });
        }
        Ok(match &self.body {
            RelationBody::Tuples { tuples, .. } => tuples.clone(),
            RelationBody::HammingAdjacency => {
                let n = universe.image_side().expect("hamming relation on images");
                let mut out = Vec::with_capacity(cost as usize);
                for a in universe.elements(ceiling)? {
                    out.push(vec![a, a]);
                    for p in 0..n * n {
                        out.push(vec![a, a ^ (1 << p)]);
                    }
                }
                out
            }
            RelationBody::Predicate { arity, test } => {
                let m = universe.cardinality() as u64;
                let total = m.pow(*arity as u32);
                let mut out = Vec::new();
                let mut t = vec![0; *arity];
                for idx in 0..total {
                    let mut rest = idx;
                    for slot in t.iter_mut().rev() {
                        *slot = rest % m;
                        rest /= m;
                    }
                    if test(&t) {
                        out.push(t.clone());
                    }
                }
                out
            }
        })
    }

    /// Draws one member tuple.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        universe: Universe,
        rng: &mut R,
    ) -> Result<Vec<Elem>, AlgebraError> {
        match &self.body {
            RelationBody::Tuples { tuples, .. } => {
                if tuples.is_empty() {
                    return Err(AlgebraError::Sampling(format!("relation {} is empty", self.name)));
                }
                Ok(tuples[rng.gen_range(0..tuples.len())].clone())
            }
            RelationBody::HammingAdjacency => {
                let n = universe.image_side().expect("hamming relation on images");
                let a = universe.sample(rng);
                // n*n flips plus the loop, uniformly
                let p = rng.gen_range(0..=n * n);
                let b = if p == n * n { a } else { a ^ (1 << p) };
                Ok(vec![a, b])
            }
            RelationBody::Predicate { arity, test } => {
                for _ in 0..REJECTION_TRIES {
                    let t: Vec<Elem> = (0..*arity).map(|_| universe.sample(rng)).collect();
                    if test(&t) {
                        return Ok(t);
                    }
                }
                Err(AlgebraError::Sampling(format!(
                    "no member of {} found in {REJECTION_TRIES} draws",
                    self.name
                )))
            }
        }
    }
}

/// A finite universe with named relations and named basic operations.
#[derive(Clone, Debug)]
pub struct RelationalStructure {
    universe: Universe,
    relations: Vec<Relation>,
    operations: Vec<(String, FiniteOperation)>,
}

impl RelationalStructure {
    pub fn new(universe: Universe) -> Self {
        RelationalStructure {
            universe,
            relations: Vec::new(),
            operations: Vec::new(),
        }
    }

    /// Adds a relation given by explicit tuples.
    pub fn with_tuples(
        self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<Elem>>,
    ) -> Result<Self, AlgebraError> {
        let mut tuples: Vec<Vec<Elem>> = tuples.into_iter().collect();
        for t in &tuples {
            if t.len() != arity {
                return Err(AlgebraError::Parameter(format!(
                    "tuple {t:?} in relation {name} has length {}, expected {arity}",
                    t.len()
                )));
            }
            for &e in t {
                self.universe.check(e)?;
            }
        }
        tuples.sort();
        tuples.dedup();
        self.with_relation(name, RelationBody::Tuples { arity, tuples })
    }

    pub fn with_predicate(
        self,
        name: &str,
        arity: usize,
        test: impl Fn(&[Elem]) -> bool + Send + Sync + 'static,
    ) -> Result<Self, AlgebraError> {
        self.with_relation(
            name,
            RelationBody::Predicate {
                arity,
                test: Arc::new(test),
            },
        )
    }

    pub fn with_relation(mut self, name: &str, body: RelationBody) -> Result<Self, AlgebraError> {
        if self.relation(name).is_some() || self.operation(name).is_some() {
            return Err(AlgebraError::Parameter(format!("duplicate symbol {name}")));
        }
        if matches!(body, RelationBody::HammingAdjacency) && self.universe.image_side().is_none() {
            return Err(AlgebraError::Parameter(
                "Hamming adjacency needs an image universe".into(),
            ));
        }
        self.relations.push(Relation {
            name: name.to_string(),
            body,
        });
        Ok(self)
    }

    pub fn with_operation(mut self, name: &str, op: FiniteOperation) -> Result<Self, AlgebraError> {
        if op.universe() != self.universe {
            return Err(AlgebraError::UniverseMismatch {
                expected: self.universe,
                found: op.universe(),
            });
        }
        if self.relation(name).is_some() || self.operation(name).is_some() {
            return Err(AlgebraError::Parameter(format!("duplicate symbol {name}")));
        }
        self.operations.push((name.to_string(), op));
        Ok(self)
    }

    /// A graph on `table(size)`; with `symmetric` each edge is added both ways.
    pub fn graph(
        size: u64,
        edges: &[(Elem, Elem)],
        symmetric: bool,
    ) -> Result<Self, AlgebraError> {
        let tuples = edges.iter().flat_map(|&(a, b)| {
            let mut v = vec![vec![a, b]];
            if symmetric {
                v.push(vec![b, a]);
            }
            v
        });
        RelationalStructure::new(Universe::table(size)?).with_tuples("edge", 2, tuples)
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn operations(&self) -> &[(String, FiniteOperation)] {
        &self.operations
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn operation(&self, name: &str) -> Option<&FiniteOperation> {
        self.operations.iter().find(|(n, _)| n == name).map(|(_, op)| op)
    }
}
