//! Discrete neural nets over finite universes.
//!
//! Activation functions are operations on a finite set, nets represent
//! functions by generalized composition, and training is a local search that
//! swaps one activation at a time for the best member of its neighborhood.
//! The [`hamming`] and [`dominion`] modules supply endomorphisms and
//! polymorphisms of the Hamming graph on binary images, so nets built from them
//! can only ever represent polymorphisms of that graph.

pub mod algebra;
pub mod dominion;
pub mod hamming;
pub mod learn;
pub mod net;
pub mod rng;

pub use algebra::{Elem, FiniteOperation, Universe};
pub use hamming::BinaryImage;

pub use net::NeuralNet;
