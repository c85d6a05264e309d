use std::collections::BTreeMap;

use super::{vertex_id, Architecture, NeuralNet};
use crate::algebra::{FiniteOperation, Monomial, Universe};

fn poly(arity: usize, terms: &[(u64, &[u32])]) -> FiniteOperation {
    let terms = terms
        .iter()
        .map(|&(coeff, exponents)| Monomial {
            coeff,
            exponents: exponents.to_vec(),
        })
        .collect();
    FiniteOperation::polynomial(5, arity, terms).expect("valid polynomial over F5")
}

/// Three layers over `F_5`, computing
/// `(-x1 (x1 - x2 + x3)^2, (x1 - x2 + x3)(-x3) - 3)`.
pub fn f5_example_net() -> NeuralNet {
    let arch = Architecture::layered(
        &[3, 4, 2],
        &[
            ((1, 1), (2, 1)),
            ((1, 1), (2, 2)),
            ((1, 2), (2, 2)),
            ((1, 3), (2, 2)),
            ((1, 3), (2, 3)),
            ((2, 1), (3, 1)),
            ((2, 2), (3, 1)),
            ((2, 2), (3, 2)),
            ((2, 3), (3, 2)),
            ((2, 4), (3, 2)),
        ],
    );
    let f5 = Universe::table(5).expect("5 elements");
    let acts = [
        ((2, 1), FiniteOperation::linear_form(5, vec![4]).expect("linear")),
        ((2, 2), FiniteOperation::linear_form(5, vec![1, 4, 1]).expect("linear")),
        ((2, 3), FiniteOperation::linear_form(5, vec![4]).expect("linear")),
        ((2, 4), FiniteOperation::constant(f5, 0, 3).expect("constant")),
        ((3, 1), poly(2, &[(1, &[1, 2])])),
        ((3, 2), poly(3, &[(1, &[1, 1, 0]), (4, &[0, 0, 1])])),
    ];
    let acts: BTreeMap<String, FiniteOperation> = acts
        .into_iter()
        .map(|((i, j), op)| (vertex_id(i, j), op))
        .collect();
    NeuralNet::new(arch, f5, acts).expect("example net is valid")
}
