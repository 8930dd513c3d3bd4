//! Grid-discretised ground truth: finite-volume generator, low eigenvalues,
//! Poisson solves, μ-quadrature and discrete checks of the functional
//! inequalities.

pub mod eigen;
pub mod grid;
pub mod operator;
pub mod poisson;
pub mod quadrature;
pub mod verify;

pub use eigen::{
    lowest_eigs, lowest_eigs_extrapolated, lowest_eigs_with, richardson, EigenMethod, EigenOptions,
    SpectrumResult,
};
pub use grid::{Grid, DEFAULT_NODE_CAP};
pub use operator::{discretize, Boundary, DiscreteOperator};
pub use poisson::{solve_poisson, PoissonSolution};
pub use quadrature::{covariance, integrate, variance, weighted_mean_ms};
pub use verify::{
    johnsen_check_1d, verify_bl, verify_cordero, verify_second_order_1d,
    verify_variance_identity_1d, CorderoCheck, IdentityCheck, InequalityCheck, JohnsenCheck,
    SecondOrderCheck,
};
