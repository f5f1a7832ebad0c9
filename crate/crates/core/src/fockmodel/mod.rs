//! Truncated Fock-space models of the polyball: basis indexing, creation
//! operators, polynomial assembly, coefficient extraction, Berezin kernels.

mod berezin;
pub mod io;
mod matrix;
mod polynomial;
mod truncation;

pub use berezin::{berezin_kernel, BerezinKernel, KERNEL_FACTOR_CAP};
pub use matrix::ComplexMatrix;
pub use polynomial::{
    assemble, assemble_pluriharmonic, evaluate_scalar, extract_pluriharmonic,
    extract_pluriharmonic_checked, is_multi_toeplitz, pluriharmonic_index_pairs,
    reconstruction_residual, FreePolynomial, KPluriharmonic, Scaling, DEFAULT_COEFF_DIM_CAP,
};
pub use truncation::{Truncation, DEFAULT_DIMENSION_CAP};
