//! Exact integer linear algebra and finitely generated abelian groups.

mod group;
mod matrix;
mod smith;

use thiserror::Error;

pub use group::{
    hom_cokernel, hom_image, hom_kernel, is_exact_at, preimage_representative, try_split, AbHom, DirectSum,
    FgAbGroup, Presentation,
};
pub use matrix::{ints, IntMatrix};
pub use smith::{
    gcd_all, hermite_basis, integer_kernel, reduce_by_reverse_hermite, reverse_hermite_basis, same_lattice,
    smith_normal_form, solve_integer, SmithDecomposition,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FgabError {
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("homomorphism is not surjective")]
    NotSurjective,
    #[error("homomorphism is not invertible")]
    NotInvertible,
    #[error("group {0} is infinite")]
    Infinite(String),
}
