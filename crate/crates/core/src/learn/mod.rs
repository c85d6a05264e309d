//! Losses, neighbor functions and the one-node-at-a-time local search that
//! trains a net.

mod neighbor;
mod train;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Elem, Universe};
use crate::net::{NetError, NeuralNet};

pub use neighbor::{FullOpSpace, LinearModP, NeighborFunction, Singleton, Twist, DEFAULT_SAMPLE_BOUND};
pub use train::{learn_step, learn_step_at, train, write_trace, StepReport, TrainOutcome, TrainerConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("neighbor function contract violated: {0}")]
    Contract(String),
    #[error("neighborhood of {estimate} operations exceeds the ceiling {ceiling}")]
    TooLarge { estimate: u128, ceiling: u64 },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Per-pair losses. Both are integer counts over a fixed scale, so empirical
/// losses compare exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossFunction {
    /// 0 when the tuples agree, else 1.
    ZeroOne,
    /// Differing pixels over all output images, divided by `n^2 |V_r|`.
    Hamming { n: usize },
}

impl LossFunction {
    pub fn check(&self, universe: Universe) -> Result<(), LearnError> {
        match *self {
            LossFunction::ZeroOne => Ok(()),
            LossFunction::Hamming { n } => match universe {
                Universe::Images { n: m } if m as usize == n => Ok(()),
                _ => Err(LearnError::Parameter(format!(
                    "hamming loss for {n}x{n} images cannot score {universe}"
                ))),
            },
        }
    }

    fn raw(&self, predicted: &[Elem], target: &[Elem]) -> u64 {
        match self {
            LossFunction::ZeroOne => u64::from(predicted != target),
            LossFunction::Hamming { .. } => predicted
                .iter()
                .zip(target)
                .map(|(a, b)| u64::from((a ^ b).count_ones()))
                .sum(),
        }
    }

    fn scale(&self, width: usize) -> u64 {
        match *self {
            LossFunction::ZeroOne => 1,
            LossFunction::Hamming { n } => (n * n * width) as u64,
        }
    }

    pub fn loss(&self, predicted: &[Elem], target: &[Elem]) -> Result<f64, LearnError> {
        if predicted.len() != target.len() {
            return Err(LearnError::Shape(format!(
                "output of length {} against target of length {}",
                predicted.len(),
                target.len()
            )));
        }
        if predicted.is_empty() {
            return Ok(0.0);
        }
        Ok(self.raw(predicted, target) as f64 / self.scale(target.len()) as f64)
    }
}

/// Nonempty list of `(input, target)` pairs with uniform widths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSet {
    pairs: Vec<(Vec<Elem>, Vec<Elem>)>,
}

impl TrainingSet {
    pub fn new(pairs: Vec<(Vec<Elem>, Vec<Elem>)>) -> Result<Self, LearnError> {
        let Some((x0, y0)) = pairs.first() else {
            return Err(LearnError::Parameter("training set is empty".into()));
        };
        let (wx, wy) = (x0.len(), y0.len());
        if let Some(i) = pairs.iter().position(|(x, y)| x.len() != wx || y.len() != wy) {
            return Err(LearnError::Shape(format!(
                "pair {i} has widths ({}, {}), expected ({wx}, {wy})",
                pairs[i].0.len(),
                pairs[i].1.len()
            )));
        }
        Ok(TrainingSet { pairs })
    }

    pub fn pairs(&self) -> &[(Vec<Elem>, Vec<Elem>)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn check(&self, net: &NeuralNet) -> Result<(), LearnError> {
        let (x, y) = &self.pairs[0];
        if x.len() != net.input_len() || y.len() != net.output_len() {
            return Err(LearnError::Shape(format!(
                "pairs have widths ({}, {}), net maps {} -> {}",
                x.len(),
                y.len(),
                net.input_len(),
                net.output_len()
            )));
        }
        let u = net.universe();
        for (x, y) in &self.pairs {
            for &e in x.iter().chain(y) {
                u.check(e)?;
            }
        }
        Ok(())
    }
}

/// Sum of raw per-pair losses; exact, so order of summation is irrelevant.
pub(crate) fn raw_total(net: &NeuralNet, data: &TrainingSet, loss: &LossFunction) -> u64 {
    data.pairs
        .par_iter()
        .map(|(x, y)| loss.raw(&net.eval(x), y))
        .sum()
}

pub(crate) fn normalize(raw: u64, data: &TrainingSet, loss: &LossFunction) -> f64 {
    let width = data.pairs[0].1.len();
    if width == 0 {
        return 0.0;
    }
    raw as f64 / (loss.scale(width) * data.len() as u64) as f64
}

/// Mean per-pair loss of the net over the training set.
pub fn empirical_loss(
    net: &NeuralNet,
    data: &TrainingSet,
    loss: &LossFunction,
) -> Result<f64, LearnError> {
    data.check(net)?;
    loss.check(net.universe())?;
    Ok(normalize(raw_total(net, data, loss), data, loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamming::BinaryImage;
    use crate::net::f5_example_net;

    #[test]
    fn loss_examples() {
        let z = LossFunction::ZeroOne;
        assert_eq!(z.loss(&[1, 2], &[1, 2]).unwrap(), 0.0);
        assert_eq!(z.loss(&[1, 2], &[1, 3]).unwrap(), 1.0);
        let h = LossFunction::Hamming { n: 2 };
        let e = BinaryImage::zeros(2).flip(3).bits();
        assert_eq!(h.loss(&[0], &[e]).unwrap(), 0.25);
        assert_eq!(h.loss(&[0b0110], &[0b1001]).unwrap(), 1.0);
        assert!(h.loss(&[0], &[0, 0]).is_err());
        assert!(h.check(Universe::table(4).unwrap()).is_err());
        assert!(h.check(Universe::images(2).unwrap()).is_ok());
    }

    #[test]
    fn empirical_loss_examples() {
        let net = f5_example_net();
        let fit: Vec<_> = (0..125)
            .map(|i| {
                let x = vec![i / 25, i / 5 % 5, i % 5];
                let y = net.evaluate(&x).unwrap();
                (x, y)
            })
            .collect();
        let data = TrainingSet::new(fit).unwrap();
        assert_eq!(empirical_loss(&net, &data, &LossFunction::ZeroOne).unwrap(), 0.0);
        let half = TrainingSet::new(vec![
            (vec![1, 0, 0], vec![4, 2]),
            (vec![1, 0, 0], vec![4, 3]),
        ])
        .unwrap();
        assert_eq!(empirical_loss(&net, &half, &LossFunction::ZeroOne).unwrap(), 0.5);
    }

    #[test]
    fn training_set_validation() {
        assert!(TrainingSet::new(vec![]).is_err());
        assert!(TrainingSet::new(vec![(vec![1], vec![1]), (vec![1, 2], vec![1])]).is_err());
        let net = f5_example_net();
        let wrong = TrainingSet::new(vec![(vec![1], vec![1, 1])]).unwrap();
        assert!(empirical_loss(&net, &wrong, &LossFunction::ZeroOne).is_err());
        let out_of_range = TrainingSet::new(vec![(vec![1, 0, 7], vec![1, 1])]).unwrap();
        assert!(empirical_loss(&net, &out_of_range, &LossFunction::ZeroOne).is_err());
    }
}
