//! Shared fixtures for the criterion benches.

use afc_core::chain_functor::ChainFunctor;
use afc_core::functor::FunctorExpr;
use afc_core::{Field, Matrix};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn square(field: Field, window: usize) -> ChainFunctor {
    ChainFunctor::from_expr(&FunctorExpr::tensor_power(2), field, window).expect("tensor square")
}

pub fn cube(field: Field, window: usize) -> ChainFunctor {
    ChainFunctor::from_expr(&FunctorExpr::tensor_power(3), field, window).expect("tensor cube")
}

/// A seeded dense `n x n` matrix.
pub fn dense(field: Field, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    afc_core::bicomplex::seeded::random_matrix(&mut rng, field, n, n)
}
