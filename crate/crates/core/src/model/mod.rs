//! Potentials, one-dimensional components, interaction terms and diagonal
//! diffeomorphism weights.

pub mod component;
pub mod expr;
pub mod field;
pub mod interaction;
pub mod potential;
pub mod weight;

pub use component::{ComponentFamily, OneDimComponent};
pub use expr::{Expr, ExprField};
pub use field::{FnField, Point, ScalarField};
pub use interaction::InteractionTerm;
pub use potential::{Potential, PotentialFamily, ProductStructure};
pub use weight::{CustomCoord, DiagonalWeight, WeightFamily};

use crate::error::Result;
use crate::Scalar;

/// Perturbed product potential `Σ |x_i|^a/a + φ_τ(x)`.
pub fn make_power_product<T: Scalar>(d: usize, a: T, c: T, tau: T) -> Result<Potential<T>> {
    Potential::power_product(d, a, c, tau)
}

/// Standard Gaussian potential `|x|²/2`.
pub fn make_gaussian<T: Scalar>(d: usize) -> Result<Potential<T>> {
    Potential::gaussian(d)
}

/// Builds a diagonal weight of the given family. `eps` is ignored for the
/// identity family.
pub fn make_weight<T: Scalar>(
    potential: &Potential<T>,
    family: WeightFamily,
    eps: &[T],
) -> Result<DiagonalWeight<T>> {
    match family {
        WeightFamily::Identity => Ok(DiagonalWeight::identity(potential.dim())),
        WeightFamily::ExpEpsU => DiagonalWeight::exp_eps_u(potential, eps),
        WeightFamily::Custom => Err(crate::error::invalid(
            "family",
            "custom weights are built with DiagonalWeight::custom",
        )),
    }
}
