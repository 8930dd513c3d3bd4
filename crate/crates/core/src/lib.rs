//! Intertwining-based lower bounds on the spectral gap λ₁ and on λ_{d+1} for
//! diffusion generators `L = Δ − ∇Vᵀ∇`, plus a grid-discretised numerical
//! oracle that cross-checks every bound and functional inequality.
//!
//! Everything is generic over the [`Scalar`] type; the `*64` aliases at the
//! crate root fix it to `f64`, which is what the oracle tolerances assume.

// NaN-rejecting `!(x > 0)` guards and index loops in numeric kernels are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod intertwine;
pub mod linalg;
pub mod minimize;
pub mod model;
pub mod oracle;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use bounds::{BoundResult, Constituent, HypothesisCheck, Provenance, Target};
pub use intertwine::{InfRhoResult, MatrixField, SymmetryReport};
pub use model::{
    DiagonalWeight, InteractionTerm, OneDimComponent, Point, Potential, ScalarField, WeightFamily,
};
pub use oracle::{DiscreteOperator, Grid, SpectrumResult};

pub type Potential64 = Potential<f64>;
pub type Potential32 = Potential<f32>;
pub type DiagonalWeight64 = DiagonalWeight<f64>;
pub type DiagonalWeight32 = DiagonalWeight<f32>;
pub type OneDimComponent64 = OneDimComponent<f64>;
pub type BoundResult64 = BoundResult<f64>;
pub type InfRhoResult64 = InfRhoResult<f64>;
pub type Grid64 = Grid<f64>;
pub type DiscreteOperator64 = DiscreteOperator<f64>;
pub type SpectrumResult64 = SpectrumResult<f64>;
