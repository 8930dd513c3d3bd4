//! Discrete checks of the variance inequalities and identities, evaluated in
//! the same node-weight geometry as the eigenvalues.

use serde::{Deserialize, Serialize};

use crate::bounds::weighted_potential;
use crate::error::{invalid, Result};
use crate::intertwine::curvature_matrix;
use crate::linalg::DenseMatrix;
use crate::model::{DiagonalWeight, Potential, ScalarField};
use crate::oracle::eigen::{lowest_eigs, SpectrumResult};
use crate::oracle::grid::Grid;
use crate::oracle::operator::{discretize, DiscreteOperator};
use crate::oracle::poisson::solve_poisson;
use crate::oracle::quadrature::{
    covariance, gradient, integrate, partial, second_partial, variance,
};
use crate::Scalar;

/// `rhs − lhs` of an inequality `lhs ≤ rhs`, plus the nodes left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
    /// Nodes skipped because the curvature was singular or the node sits in
    /// the puncture of a singular component.
    pub excluded: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorderoCheck<T> {
    pub check: InequalityCheck<T>,
    /// `|μ(f̃)|` followed by `|Cov(f̃, x_j)|` after projection.
    pub centering: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck<T> {
    pub lhs: T,
    pub rhs: T,
    /// `|lhs − rhs| / |lhs|` (absolute when `lhs = 0`).
    pub mismatch: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCheck<T> {
    pub check: InequalityCheck<T>,
    /// Gap of the reweighted measure used in place of the restricted gap.
    pub lambda_1_a: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JohnsenCheck<T> {
    /// Eigenvalues `1..=k` of `−L`.
    pub scalar: Vec<T>,
    /// Eigenvalues `0..k` of `−L + V″`.
    pub schrodinger: Vec<T>,
    pub max_diff: T,
}

fn same_dim<T: Scalar>(op: &DiscreteOperator<T>, v: &Potential<T>, f: &[T]) -> Result<()> {
    if op.grid().dim != v.dim() || f.len() != op.len() {
        return Err(crate::Error::DimensionMismatch {
            expected: op.len(),
            got: f.len(),
        });
    }
    Ok(())
}

/// `Σ_k m_k ∇fᵀ M(x_k)⁻¹ ∇f` over nodes where `M` is positive-definite.
fn quadratic_form_integral<T: Scalar>(
    op: &DiscreteOperator<T>,
    v: &Potential<T>,
    grad: &[Vec<T>],
    matrix_at: impl Fn(&[T]) -> Option<DenseMatrix<T>>,
) -> (T, Vec<usize>) {
    let grid = op.grid();
    let m = op.mass();
    let mut total = T::zero();
    let mut excluded = vec![];
    for k in 0..op.len() {
        let x = grid.node(k);
        let solved = if v.in_puncture(&x) {
            None
        } else {
            matrix_at(&x).and_then(|mat| mat.solve_spd(&grad[k]))
        };
        match solved {
            Some(y) => {
                let q: T = y.iter().zip(&grad[k]).map(|(&a, &b)| a * b).sum();
                if m[k] > T::zero() {
                    total += m[k] * q;
                }
            }
            None => excluded.push(k),
        }
    }
    (total, excluded)
}

/// `Var_μ(f) ≤ ∫ ∇fᵀ M⁻¹ ∇f dμ` with `M = ∇²V` (no weight) or the curvature
/// matrix of `w`.
pub fn verify_bl<T: Scalar>(
    op: &DiscreteOperator<T>,
    v: &Potential<T>,
    w: Option<&DiagonalWeight<T>>,
    f: &[T],
) -> Result<InequalityCheck<T>> {
    same_dim(op, v, f)?;
    let grad = gradient(op.grid(), f);
    let (rhs, excluded) = quadratic_form_integral(op, v, &grad, |x| match w {
        None => Some(v.hessian(x)),
        Some(w) => curvature_matrix(v, w, x).ok(),
    });
    let lhs = variance(op, f);
    Ok(InequalityCheck {
        lhs,
        rhs,
        slack: rhs - lhs,
        excluded,
    })
}

/// `Var_μ(f) ≤ ∫ ∇fᵀ(∇²V + λ₁I)⁻¹∇f dμ` after projecting `f` onto the
/// `L²(m)`-orthogonal complement of `{1, x_1, …, x_d}`.
pub fn verify_cordero<T: Scalar>(
    op: &DiscreteOperator<T>,
    v: &Potential<T>,
    lambda_1: T,
    f: &[T],
) -> Result<CorderoCheck<T>> {
    same_dim(op, v, f)?;
    let grid = op.grid();
    let d = grid.dim;
    let m = op.mass();
    let inner = |a: &[T], b: &[T]| -> T {
        m.iter()
            .zip(a.iter().zip(b))
            .map(|(&w, (&x, &y))| w * x * y)
            .sum()
    };

    let mut basis: Vec<Vec<T>> = vec![];
    let mut candidates = vec![vec![T::one(); op.len()]];
    for a in 0..d {
        candidates.push(grid.nodes().map(|x| x[a]).collect());
    }
    for mut c in candidates {
        for _ in 0..2 {
            for b in &basis {
                let p = inner(&c, b);
                c.iter_mut().zip(b).for_each(|(ci, &bi)| *ci -= p * bi);
            }
        }
        let nrm = inner(&c, &c).sqrt();
        c.iter_mut().for_each(|ci| *ci /= nrm);
        basis.push(c);
    }
    let mut ft = f.to_vec();
    for _ in 0..2 {
        for b in &basis {
            let p = inner(&ft, b);
            ft.iter_mut().zip(b).for_each(|(fi, &bi)| *fi -= p * bi);
        }
    }
    let mut centering = vec![integrate(op, &ft).abs()];
    for a in 0..d {
        let xa: Vec<T> = grid.nodes().map(|x| x[a]).collect();
        centering.push(covariance(op, &ft, &xa).abs());
    }

    let grad = gradient(grid, &ft);
    let (rhs, excluded) = quadratic_form_integral(op, v, &grad, |x| {
        let mut h = v.hessian(x);
        for i in 0..d {
            h[(i, i)] += lambda_1;
        }
        Some(h)
    });
    let lhs = variance(op, &ft);
    Ok(CorderoCheck {
        check: InequalityCheck {
            lhs,
            rhs,
            slack: rhs - lhs,
            excluded,
        },
        centering,
    })
}

/// Nodes whose full stencils fit and carry mass, away from any puncture.
fn usable_nodes_1d<T: Scalar>(op: &DiscreteOperator<T>, v: &Potential<T>) -> Vec<usize> {
    let grid = op.grid();
    (3..grid.n - 3)
        .filter(|&k| op.mass()[k] > T::zero() && !v.in_puncture(&grid.node(k)))
        .collect()
}

/// Pointwise one-dimensional ingredients shared by the two identities.
struct OneDimFields<T> {
    f1: Vec<T>,
    /// `F = a g′` with `a = 1/h′`.
    field: Vec<T>,
    g1: Vec<T>,
    s: Vec<T>,
    curvature: Vec<T>,
    op: DiscreteOperator<T>,
    nodes: Vec<usize>,
    fvals: Vec<T>,
}

fn one_dim_fields<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    f: &dyn ScalarField<T>,
    grid: &Grid<T>,
) -> Result<OneDimFields<T>> {
    if grid.dim != 1 || v.dim() != 1 || w.dim() != 1 || f.dim() != 1 {
        return Err(invalid("dim", "one-dimensional check"));
    }
    let op = discretize(v, grid)?;
    let fvals = grid.sample(|x| f.value(x));
    let sol = solve_poisson(&op, &fvals)?;
    let g1 = partial(grid, &sol.g, 0);
    let xs: Vec<T> = grid.nodes().map(|x| x[0]).collect();
    let field: Vec<T> = g1.iter().zip(&xs).map(|(&d, &x)| d / w.g(0, x)).collect();
    let f1: Vec<T> = grid.nodes().map(|x| f.gradient(&x)[0]).collect();
    let s: Vec<T> = xs.iter().map(|&x| w.g(0, x) * w.g(0, x)).collect();
    let curvature: Vec<T> = xs
        .iter()
        .map(|&x| {
            curvature_matrix(v, w, &[x])
                .map(|m| m[(0, 0)])
                .unwrap_or(T::nan())
        })
        .collect();
    let nodes = usable_nodes_1d(&op, v);
    Ok(OneDimFields {
        f1,
        field,
        g1,
        s,
        curvature,
        op,
        nodes,
        fvals,
    })
}

/// The variance identity in one dimension:
/// `Var(f) = −2∫f′g′ dμ + ∫ F S (𝕃_A F − M_A F) dμ` with `Lg = f − μ(f)`,
/// `F = g′/h′`, `S = h′²`, `𝕃_A F = 𝕃F + 2(h″/h′)F′`.
pub fn verify_variance_identity_1d<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    f: &dyn ScalarField<T>,
    grid: &Grid<T>,
) -> Result<IdentityCheck<T>> {
    let fl = one_dim_fields(v, w, f, grid)?;
    let field_1 = partial(grid, &fl.field, 0);
    let field_2 = second_partial(grid, &fl.field, 0);
    let m = fl.op.mass();
    let mut rhs = T::zero();
    let two = T::c(2.0);
    for &k in &fl.nodes {
        let x = grid.node(k);
        let vp = v.gradient(&x)[0];
        let lf = field_2[k] - vp * field_1[k] + two * w.log_derivative(0, x[0]) * field_1[k];
        let term = -two * fl.f1[k] * fl.g1[k]
            + fl.field[k] * fl.s[k] * (lf - fl.curvature[k] * fl.field[k]);
        rhs += m[k] * term;
    }
    let lhs = variance(&fl.op, &fl.fvals);
    Ok(IdentityCheck {
        lhs,
        rhs,
        mismatch: relative_gap(lhs, rhs),
    })
}

fn relative_gap<T: Scalar>(lhs: T, rhs: T) -> T {
    let diff = (lhs - rhs).abs();
    if lhs.abs() > T::c(1e-300) {
        diff / lhs.abs()
    } else {
        diff
    }
}

/// The second-order inequality in one dimension,
/// `Var(f) ≤ ∫ f′²/(λ + C) dμ + m_S(F)² ∫ S C dμ`, with `λ` the gap of the
/// reweighted measure `e^{−V} h′²` computed on the same grid.
pub fn verify_second_order_1d<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    f: &dyn ScalarField<T>,
    grid: &Grid<T>,
) -> Result<SecondOrderCheck<T>> {
    let fl = one_dim_fields(v, w, f, grid)?;
    let va = weighted_potential(v, w, 0)?;
    let spec = lowest_eigs(&discretize(&va.potential, grid)?, 2, T::c(1e-9))?;
    let lambda = spec.gap().unwrap_or(T::zero());
    let m = fl.op.mass();
    let (mut first, mut s_int, mut sf_int, mut sc_int) =
        (T::zero(), T::zero(), T::zero(), T::zero());
    for &k in &fl.nodes {
        first += m[k] * fl.f1[k] * fl.f1[k] / (lambda + fl.curvature[k]);
        s_int += m[k] * fl.s[k];
        sf_int += m[k] * fl.s[k] * fl.field[k];
        sc_int += m[k] * fl.s[k] * fl.curvature[k];
    }
    let ms = sf_int / s_int;
    let rhs = first + ms * ms * sc_int;
    let lhs = variance(&fl.op, &fl.fvals);
    Ok(SecondOrderCheck {
        check: InequalityCheck {
            lhs,
            rhs,
            slack: rhs - lhs,
            excluded: vec![],
        },
        lambda_1_a: lambda,
    })
}

/// Compares eigenvalues `1..=k` of `−L` with eigenvalues `0..k` of the
/// Schrödinger form `−L + V″` on `L²(μ)`, both discretised with the same
/// Dirichlet form.
pub fn johnsen_check_1d<T: Scalar>(
    v: &Potential<T>,
    grid: &Grid<T>,
    k: usize,
) -> Result<JohnsenCheck<T>> {
    if grid.dim != 1 || v.dim() != 1 {
        return Err(invalid("dim", "one-dimensional check"));
    }
    let op = discretize(v, grid)?;
    let scalar: SpectrumResult<T> = lowest_eigs(&op, k + 1, T::c(1e-9))?;
    let q = grid.sample(|x| v.hessian(x)[(0, 0)]);
    let schrodinger = lowest_eigs(&op.with_potential_term(&q)?, k, T::c(1e-9))?;
    let scalar = scalar.eigenvalues[1..].to_vec();
    let schrodinger = schrodinger.eigenvalues;
    let max_diff = scalar
        .iter()
        .zip(&schrodinger)
        .map(|(&a, &b)| (a - b).abs())
        .fold(T::zero(), T::max);
    Ok(JohnsenCheck {
        scalar,
        schrodinger,
        max_diff,
    })
}
