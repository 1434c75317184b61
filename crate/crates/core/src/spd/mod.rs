//! Positive definite matrices: validation, functional calculus, product square
//! roots, compound matrices and random ensembles.

mod compound;
mod json;
mod matrix;
mod random;

use serde::{Deserialize, Serialize};

pub use compound::{binomial, compound_matrix, index_subsets};
pub use json::{Entry, MatrixData, MatrixJson};
pub(crate) use matrix::ensure_same_dim;
pub use matrix::{
    hermitian_function, hermitian_part, product_sqrt, validate_spd, CMatrix, Eigh, FunctionValue, GeneralMatrix, HermitianMatrix,
    MatrixFunction, SpdMatrix, C64, DEFAULT_HERM_TOL,
};
pub use random::{
    haar_unitary, random_invertible, random_spd, random_spd_from, random_spectrum, random_weights, standard_normal, RandomEnsembleConfig,
    Substream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}
