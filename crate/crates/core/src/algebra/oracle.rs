//! Brute-force verification of homomorphisms and polymorphisms.
//!
//! Every check runs in an explicit [`CheckMode`]. Exhaustive checks enumerate
//! all cases and refuse when the count exceeds a ceiling. Sampled checks draw
//! their cases from a seeded generator before any parallel evaluation, so a
//! verdict depends only on the seed, never on the thread count. A passing
//! sampled verdict is flagged as such and is not a proof.

use rayon::prelude::*;

use super::{AlgebraError, Elem, FiniteOperation, RelationalStructure, Universe};
use crate::rng::stream_rng;

/// Default bound on the number of cases an exhaustive check may enumerate.
pub const DEFAULT_CEILING: u64 = 50_000_000;

const ORACLE_STREAM: u64 = 0x0AC1E;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive { ceiling: u64 },
    Sampled { budget: usize, seed: u64 },
}

impl CheckMode {
    pub fn exhaustive() -> Self {
        CheckMode::Exhaustive {
            ceiling: DEFAULT_CEILING,
        }
    }

    pub fn sampled(budget: usize, seed: u64) -> Self {
        CheckMode::Sampled { budget, seed }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, CheckMode::Sampled { .. })
    }
}

/// A concrete violation.
///
/// For a relation `symbol`, `arguments` are the related tuples fed to the
/// operation (one per argument position) and `image` is the resulting tuple
/// that falls outside the relation. For a basic operation, `image` holds the
/// two sides of the failed commutation, `[h(o(x)), o(h(x))]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub symbol: String,
    pub arguments: Vec<Vec<Elem>>,
    pub image: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomWitness {
    pub verdict: bool,
    pub sampled: bool,
    /// Number of cases examined.
    pub checked: u64,
    pub counterexample: Option<Counterexample>,
}

impl HomWitness {
    fn pass(sampled: bool) -> Self {
        HomWitness {
            verdict: true,
            sampled,
            checked: 0,
            counterexample: None,
        }
    }

    /// True only for an exhaustive pass.
    pub fn is_proof(&self) -> bool {
        self.verdict && !self.sampled
    }

    fn absorb(&mut self, checked: u64, found: Option<Counterexample>) -> bool {
        self.checked += checked;
        if let Some(c) = found {
            self.verdict = false;
            self.counterexample = Some(c);
            return true;
        }
        false
    }
}

fn decode(mut idx: u64, base: u64, out: &mut [u64]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
}

fn guard(estimate: u128, ceiling: u64) -> Result<u64, AlgebraError> {
    if estimate > u128::from(ceiling) {
        Err(AlgebraError::ExhaustiveTooLarge { estimate, ceiling })
    } else {
        Ok(estimate as u64)
    }
}

fn pow_u128(base: u128, exp: usize) -> u128 {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Row-wise image of a relation matrix: `f` applied to each row of the
/// matrix whose columns are `columns`.
fn row_images(f: &FiniteOperation, columns: &[Vec<Elem>], rows: usize) -> Vec<Elem> {
    let mut args = vec![0; columns.len()];
    (0..rows)
        .map(|j| {
            for (slot, col) in args.iter_mut().zip(columns) {
                *slot = col[j];
            }
            f.eval(&args)
        })
        .collect()
}

/// `(f(o(col_1), .., o(col_k)), o(f(row_1), .., f(row_m)))`.
fn commutation(f: &FiniteOperation, o: &FiniteOperation, columns: &[Vec<Elem>]) -> (Elem, Elem) {
    let lhs_args: Vec<Elem> = columns.iter().map(|c| o.eval(c)).collect();
    let lhs = f.eval(&lhs_args);
    let rhs = o.eval(&row_images(f, columns, o.arity()));
    (lhs, rhs)
}

/// Checks that `f` is a polymorphism of `structure`: for every relation and
/// every choice of related tuples for its arguments, the row-wise images are
/// related; and `f` commutes with every basic operation.
pub fn is_polymorphism(
    f: &FiniteOperation,
    structure: &RelationalStructure,
    mode: CheckMode,
) -> Result<HomWitness, AlgebraError> {
    let universe = structure.universe();
    if f.universe() != universe {
        return Err(AlgebraError::UniverseMismatch {
            expected: universe,
            found: f.universe(),
        });
    }
    let k = f.arity();
    let mut witness = HomWitness::pass(mode.is_sampled());
    let mut rng = match mode {
        CheckMode::Sampled { seed, .. } => Some(stream_rng(seed, ORACLE_STREAM)),
        CheckMode::Exhaustive { .. } => None,
    };

    for rel in structure.relations() {
        let r = rel.arity();
        let violation = |columns: Vec<Vec<Elem>>| -> Option<Counterexample> {
            let image = row_images(f, &columns, r);
            (!rel.contains(&image)).then(|| Counterexample {
                symbol: rel.name().to_string(),
                arguments: columns,
                image,
            })
        };
        let (checked, found) = match mode {
            CheckMode::Exhaustive { ceiling } => {
                guard(pow_u128(rel.enumeration_cost(universe), k), ceiling)?;
                let tuples = rel.tuples(universe, ceiling)?;
                let total = guard(pow_u128(tuples.len() as u128, k), ceiling)?;
                let base = tuples.len() as u64;
                // buffers are reused per worker; a counterexample is only built on failure
                let found = (0..total)
                    .into_par_iter()
                    .map_init(
                        || (vec![0; k], vec![0; k], vec![0; r]),
                        |(digits, args, image), idx| {
                            decode(idx, base, digits);
                            for (j, slot) in image.iter_mut().enumerate() {
                                for (a, &d) in args.iter_mut().zip(digits.iter()) {
                                    *a = tuples[d as usize][j];
                                }
                                *slot = f.eval(args);
                            }
                            (!rel.contains(image)).then_some(idx)
                        },
                    )
                    .find_map_first(|idx| idx)
                    .and_then(|idx| {
                        let mut digits = vec![0; k];
                        decode(idx, base, &mut digits);
                        violation(digits.iter().map(|&d| tuples[d as usize].clone()).collect())
                    });
                (total, found)
            }
            CheckMode::Sampled { budget, .. } => {
                let rng = rng.as_mut().expect("sampled mode has a generator");
                let cases = (0..budget)
                    .map(|_| (0..k).map(|_| rel.sample(universe, rng)).collect())
                    .collect::<Result<Vec<Vec<Vec<Elem>>>, _>>()?;
                let found = cases.into_par_iter().find_map_first(violation);
                (budget as u64, found)
            }
        };
        if witness.absorb(checked, found) {
            return Ok(witness);
        }
    }

    for (name, o) in structure.operations() {
        let m = o.arity();
        let violation = |columns: Vec<Vec<Elem>>| -> Option<Counterexample> {
            let (lhs, rhs) = commutation(f, o, &columns);
            (lhs != rhs).then(|| Counterexample {
                symbol: name.clone(),
                arguments: columns,
                image: vec![lhs, rhs],
            })
        };
        let (checked, found) = match mode {
            CheckMode::Exhaustive { ceiling } => {
                let total = guard(pow_u128(universe.cardinality(), k * m), ceiling)?;
                let base = universe.cardinality() as u64;
                let found = (0..total).into_par_iter().find_map_first(|idx| {
                    let mut flat = vec![0; k * m];
                    decode(idx, base, &mut flat);
                    violation((0..k).map(|i| flat[i * m..(i + 1) * m].to_vec()).collect())
                });
                (total, found)
            }
            CheckMode::Sampled { budget, .. } => {
                let rng = rng.as_mut().expect("sampled mode has a generator");
                let cases: Vec<Vec<Vec<Elem>>> = (0..budget)
                    .map(|_| {
                        (0..k)
                            .map(|_| (0..m).map(|_| universe.sample(rng)).collect())
                            .collect()
                    })
                    .collect();
                (budget as u64, cases.into_par_iter().find_map_first(violation))
            }
        };
        if witness.absorb(checked, found) {
            return Ok(witness);
        }
    }
    Ok(witness)
}

/// Re-evaluates a polymorphism counterexample from scratch; true when it is
/// a genuine violation.
pub fn recheck_polymorphism_violation(
    f: &FiniteOperation,
    structure: &RelationalStructure,
    cex: &Counterexample,
) -> bool {
    if cex.arguments.len() != f.arity() {
        return false;
    }
    if let Some(rel) = structure.relation(&cex.symbol) {
        let r = rel.arity();
        let related = cex
            .arguments
            .iter()
            .all(|c| c.len() == r && rel.contains(c));
        let image = row_images(f, &cex.arguments, r);
        return related && image == cex.image && !rel.contains(&image);
    }
    if let Some(o) = structure.operation(&cex.symbol) {
        if cex.arguments.iter().any(|c| c.len() != o.arity()) {
            return false;
        }
        let (lhs, rhs) = commutation(f, o, &cex.arguments);
        return lhs != rhs && cex.image == [lhs, rhs];
    }
    false
}

fn check_signature(a: &RelationalStructure, b: &RelationalStructure) -> Result<(), AlgebraError> {
    let rel_sig = |s: &RelationalStructure| {
        let mut v: Vec<(String, usize)> = s
            .relations()
            .iter()
            .map(|r| (r.name().to_string(), r.arity()))
            .collect();
        v.sort();
        v
    };
    let op_sig = |s: &RelationalStructure| {
        let mut v: Vec<(String, usize)> = s
            .operations()
            .iter()
            .map(|(n, o)| (n.clone(), o.arity()))
            .collect();
        v.sort();
        v
    };
    if rel_sig(a) != rel_sig(b) || op_sig(a) != op_sig(b) {
        return Err(AlgebraError::SignatureMismatch(format!(
            "relations {:?} / {:?}, operations {:?} / {:?}",
            rel_sig(a),
            rel_sig(b),
            op_sig(a),
            op_sig(b)
        )));
    }
    Ok(())
}

/// Checks that `h: A -> B` maps every relation tuple of `a` into the
/// matching relation of `b`, commutes with every basic operation, and lands
/// in `b`'s universe.
pub fn is_homomorphism(
    h: &(dyn Fn(Elem) -> Elem + Sync),
    a: &RelationalStructure,
    b: &RelationalStructure,
    mode: CheckMode,
) -> Result<HomWitness, AlgebraError> {
    check_signature(a, b)?;
    let (ua, ub) = (a.universe(), b.universe());
    let mut witness = HomWitness::pass(mode.is_sampled());
    let mut rng = match mode {
        CheckMode::Sampled { seed, .. } => Some(stream_rng(seed, ORACLE_STREAM)),
        CheckMode::Exhaustive { .. } => None,
    };

    // Totality into the target universe.
    let escape = |x: Elem| -> Option<Counterexample> {
        let y = h(x);
        (!ub.contains(y)).then(|| Counterexample {
            symbol: "universe".into(),
            arguments: vec![vec![x]],
            image: vec![y],
        })
    };
    let (checked, found) = match mode {
        CheckMode::Exhaustive { ceiling } => {
            let elems = ua.elements(ceiling)?;
            let n = elems.end;
            (n, elems.into_par_iter().find_map_first(escape))
        }
        CheckMode::Sampled { budget, .. } => {
            let rng = rng.as_mut().expect("sampled mode has a generator");
            let xs: Vec<Elem> = (0..budget).map(|_| ua.sample(rng)).collect();
            (budget as u64, xs.into_par_iter().find_map_first(escape))
        }
    };
    if witness.absorb(checked, found) {
        return Ok(witness);
    }

    for rel in a.relations() {
        let target = b.relation(rel.name()).expect("signatures match");
        let violation = |t: Vec<Elem>| -> Option<Counterexample> {
            let image: Vec<Elem> = t.iter().map(|&x| h(x)).collect();
            (!target.contains(&image)).then(|| Counterexample {
                symbol: rel.name().to_string(),
                arguments: vec![t],
                image,
            })
        };
        let (checked, found) = match mode {
            CheckMode::Exhaustive { ceiling } => {
                let tuples = rel.tuples(ua, ceiling)?;
                (tuples.len() as u64, tuples.into_par_iter().find_map_first(violation))
            }
            CheckMode::Sampled { budget, .. } => {
                let rng = rng.as_mut().expect("sampled mode has a generator");
                let cases = (0..budget)
                    .map(|_| rel.sample(ua, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                (budget as u64, cases.into_par_iter().find_map_first(violation))
            }
        };
        if witness.absorb(checked, found) {
            return Ok(witness);
        }
    }

    for (name, oa) in a.operations() {
        let ob = b.operation(name).expect("signatures match");
        let m = oa.arity();
        let violation = |args: Vec<Elem>| -> Option<Counterexample> {
            let lhs = h(oa.eval(&args));
            let mapped: Vec<Elem> = args.iter().map(|&x| h(x)).collect();
            let rhs = ob.eval(&mapped);
            (lhs != rhs).then(|| Counterexample {
                symbol: name.clone(),
                arguments: vec![args],
                image: vec![lhs, rhs],
            })
        };
        let (checked, found) = match mode {
            CheckMode::Exhaustive { ceiling } => {
                let total = guard(pow_u128(ua.cardinality(), m), ceiling)?;
                let base = ua.cardinality() as u64;
                let found = (0..total).into_par_iter().find_map_first(|idx| {
                    let mut args = vec![0; m];
                    decode(idx, base, &mut args);
                    violation(args)
                });
                (total, found)
            }
            CheckMode::Sampled { budget, .. } => {
                let rng = rng.as_mut().expect("sampled mode has a generator");
                let cases: Vec<Vec<Elem>> = (0..budget)
                    .map(|_| (0..m).map(|_| ua.sample(rng)).collect())
                    .collect();
                (budget as u64, cases.into_par_iter().find_map_first(violation))
            }
        };
        if witness.absorb(checked, found) {
            return Ok(witness);
        }
    }
    Ok(witness)
}

/// [`is_homomorphism`] from a structure to itself for a unary operation.
pub fn is_endomorphism(
    op: &FiniteOperation,
    structure: &RelationalStructure,
    mode: CheckMode,
) -> Result<HomWitness, AlgebraError> {
    if op.arity() != 1 {
        return Err(AlgebraError::ArityMismatch {
            expected: 1,
            found: op.arity(),
        });
    }
    if op.universe() != structure.universe() {
        return Err(AlgebraError::UniverseMismatch {
            expected: structure.universe(),
            found: op.universe(),
        });
    }
    is_homomorphism(&|x| op.eval(&[x]), structure, structure, mode)
}

/// Componentwise relatedness of `u` and `v` under every binary relation: the
/// edge relation of the `k`-th direct power, decided without building it.
pub fn power_adjacent(
    structure: &RelationalStructure,
    k: usize,
    u: &[Elem],
    v: &[Elem],
) -> Result<bool, AlgebraError> {
    if u.len() != k || v.len() != k {
        return Err(AlgebraError::Parameter(format!(
            "power_adjacent expects two {k}-tuples, got lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let universe: Universe = structure.universe();
    for &e in u.iter().chain(v) {
        universe.check(e)?;
    }
    Ok(structure
        .relations()
        .iter()
        .filter(|r| r.arity() == 2)
        .all(|r| u.iter().zip(v).all(|(&x, &y)| r.contains(&[x, y]))))
}

/// Compares two operations value by value, exhaustively or on seeded random
/// argument tuples.
pub fn extensionally_equal(
    f: &FiniteOperation,
    g: &FiniteOperation,
    mode: CheckMode,
) -> Result<bool, AlgebraError> {
    if f.arity() != g.arity() || f.universe() != g.universe() {
        return Ok(false);
    }
    let k = f.arity();
    let universe = f.universe();
    match mode {
        CheckMode::Exhaustive { ceiling } => {
            let total = guard(pow_u128(universe.cardinality(), k), ceiling)?;
            let base = universe.cardinality() as u64;
            Ok((0..total).into_par_iter().all(|idx| {
                let mut args = vec![0; k];
                decode(idx, base, &mut args);
                f.eval(&args) == g.eval(&args)
            }))
        }
        CheckMode::Sampled { budget, seed } => {
            let mut rng = stream_rng(seed, ORACLE_STREAM);
            Ok((0..budget).all(|_| {
                let args: Vec<Elem> = (0..k).map(|_| universe.sample(&mut rng)).collect();
                f.eval(&args) == g.eval(&args)
            }))
        }
    }
}
