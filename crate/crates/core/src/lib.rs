//! Bohr-type inequalities for free holomorphic functions on noncommutative
//! polyballs, studied on finite truncations of the tensor-product Fock space.
//!
//! * [`freewords`]: words, multiwords, minimal and orthogonal sets.
//! * [`fockmodel`]: truncated Fock models, creation operators, polynomial
//!   assembly, Berezin kernels and the polynomial file format.
//! * [`opanalysis`]: operator norms, Hermitian extremal eigenvalues,
//!   positivity and numerical radii.
//! * [`bohrradii`]: majorant series, closed-form bounds and radius solvers.
//! * [`verification`]: seeded randomized suites for the inequalities.

pub mod bohrradii;
pub mod error;
pub mod fockmodel;
pub mod freewords;
pub mod opanalysis;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
