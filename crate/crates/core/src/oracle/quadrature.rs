//! μ-integrals as node-weight sums, and finite-difference derivatives of
//! nodal functions.

use crate::error::{Error, Result};
use crate::oracle::grid::Grid;
use crate::oracle::operator::DiscreteOperator;
use crate::Scalar;

/// Smallest admissible `∫S_ii dμ`.
pub const SINGULAR_MASS: f64 = 1e-300;

/// `Σ m_i f_i`, summed in node order.
pub fn integrate<T: Scalar>(op: &DiscreteOperator<T>, f: &[T]) -> T {
    op.mass().iter().zip(f).map(|(&m, &x)| m * x).sum()
}

pub fn covariance<T: Scalar>(op: &DiscreteOperator<T>, f: &[T], g: &[T]) -> T {
    let mf = integrate(op, f);
    let mg = integrate(op, g);
    op.mass()
        .iter()
        .zip(f.iter().zip(g))
        .map(|(&m, (&a, &b))| m * (a - mf) * (b - mg))
        .sum()
}

pub fn variance<T: Scalar>(op: &DiscreteOperator<T>, f: &[T]) -> T {
    covariance(op, f, f)
}

/// `m_S(F) = (∫S dμ)⁻¹ ∫ S F dμ` for a diagonal `S`; `s[k]` and `field[k]`
/// hold the diagonal of `S` and the vector `F` at node `k`.
pub fn weighted_mean_ms<T: Scalar>(
    op: &DiscreteOperator<T>,
    s: &[Vec<T>],
    field: &[Vec<T>],
) -> Result<Vec<T>> {
    let d = op.grid().dim;
    let m = op.mass();
    let mut num = vec![T::zero(); d];
    let mut den = vec![T::zero(); d];
    for k in 0..m.len() {
        for i in 0..d {
            den[i] += m[k] * s[k][i];
            num[i] += m[k] * s[k][i] * field[k][i];
        }
    }
    (0..d)
        .map(|i| {
            if den[i] <= T::c(SINGULAR_MASS) {
                Err(Error::SingularMass {
                    coord: i,
                    value: den[i].to_f64_lossy(),
                })
            } else {
                Ok(num[i] / den[i])
            }
        })
        .collect()
}

/// `∂f/∂x_axis` at every node: fourth-order central differences in the
/// interior, second order next to and on the boundary.
pub fn partial<T: Scalar>(grid: &Grid<T>, f: &[T], axis: usize) -> Vec<T> {
    let h = grid.spacing();
    let s = grid.stride(axis);
    let n = grid.n;
    let (two, eight, twelve) = (T::c(2.0), T::c(8.0), T::c(12.0));
    (0..f.len())
        .map(|k| {
            let j = grid.axis_index(k, axis);
            if j >= 2 && j + 2 < n {
                (f[k - 2 * s] - eight * f[k - s] + eight * f[k + s] - f[k + 2 * s]) / (twelve * h)
            } else if j >= 1 && j + 1 < n {
                (f[k + s] - f[k - s]) / (two * h)
            } else if j == 0 {
                (T::c(-3.0) * f[k] + T::c(4.0) * f[k + s] - f[k + 2 * s]) / (two * h)
            } else {
                (T::c(3.0) * f[k] - T::c(4.0) * f[k - s] + f[k - 2 * s]) / (two * h)
            }
        })
        .collect()
}

/// `∂²f/∂x_axis²` with the same stencil orders as [`partial`].
pub fn second_partial<T: Scalar>(grid: &Grid<T>, f: &[T], axis: usize) -> Vec<T> {
    let h2 = grid.spacing() * grid.spacing();
    let s = grid.stride(axis);
    let n = grid.n;
    (0..f.len())
        .map(|k| {
            let j = grid.axis_index(k, axis);
            if j >= 2 && j + 2 < n {
                (-f[k - 2 * s] + T::c(16.0) * f[k - s] - T::c(30.0) * f[k] + T::c(16.0) * f[k + s]
                    - f[k + 2 * s])
                    / (T::c(12.0) * h2)
            } else if j >= 1 && j + 1 < n {
                (f[k - s] - T::c(2.0) * f[k] + f[k + s]) / h2
            } else if j == 0 {
                (T::c(2.0) * f[k] - T::c(5.0) * f[k + s] + T::c(4.0) * f[k + 2 * s] - f[k + 3 * s])
                    / h2
            } else {
                (T::c(2.0) * f[k] - T::c(5.0) * f[k - s] + T::c(4.0) * f[k - 2 * s] - f[k - 3 * s])
                    / h2
            }
        })
        .collect()
}

/// Node-major gradient `∇f(x_k)`.
pub fn gradient<T: Scalar>(grid: &Grid<T>, f: &[T]) -> Vec<Vec<T>> {
    let parts: Vec<Vec<T>> = (0..grid.dim).map(|a| partial(grid, f, a)).collect();
    (0..f.len())
        .map(|k| parts.iter().map(|p| p[k]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;
    use crate::oracle::discretize;

    #[test]
    fn gaussian_moments() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let grid = Grid::new(1, 8.0, 4001).unwrap();
        let op = discretize(&v, &grid).unwrap();
        let x = grid.sample(|y| y[0]);
        assert!(integrate(&op, &x).abs() < 1e-14);
        assert!((variance(&op, &x) - 1.0).abs() < 1e-4);
        let x4: Vec<f64> = x.iter().map(|y| y.powi(4)).collect();
        assert!((integrate(&op, &x4) - 3.0).abs() < 1e-4);
    }

    #[test]
    fn ms_mean() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let grid = Grid::new(2, 5.0, 31).unwrap();
        let op = discretize(&v, &grid).unwrap();
        let s: Vec<Vec<f64>> = grid.nodes().map(|x| vec![1.0 + x[0] * x[0], 2.0]).collect();
        let c: Vec<Vec<f64>> = vec![vec![0.3, -1.2]; grid.len()];
        let m = weighted_mean_ms(&op, &s, &c).unwrap();
        assert!((m[0] - 0.3).abs() < 1e-14 && (m[1] + 1.2).abs() < 1e-14);
        let id: Vec<Vec<f64>> = vec![vec![1.0, 1.0]; grid.len()];
        let f: Vec<Vec<f64>> = grid
            .nodes()
            .map(|x| vec![x[0] + 1.0, x[1] * x[1]])
            .collect();
        let m = weighted_mean_ms(&op, &id, &f).unwrap();
        let plain: Vec<f64> = f.iter().map(|v| v[1]).collect();
        assert!((m[1] - integrate(&op, &plain)).abs() < 1e-14);
        let zero = vec![vec![0.0, 1.0]; grid.len()];
        assert!(matches!(
            weighted_mean_ms(&op, &zero, &c),
            Err(Error::SingularMass { coord: 0, .. })
        ));
    }

    #[test]
    fn stencil_orders() {
        let grid = Grid::<f64>::new(1, 1.0, 21).unwrap();
        let quad = grid.sample(|y| 2.0 * y[0] * y[0] - y[0]);
        let d1 = partial(&grid, &quad, 0);
        let d2 = second_partial(&grid, &quad, 0);
        for (k, x) in grid.nodes().enumerate() {
            assert!((d1[k] - (4.0 * x[0] - 1.0)).abs() < 1e-12);
            assert!((d2[k] - 4.0).abs() < 1e-10);
        }
        let quartic = grid.sample(|y| y[0].powi(4) - y[0]);
        let d1 = partial(&grid, &quartic, 0);
        let d2 = second_partial(&grid, &quartic, 0);
        for (k, x) in grid.nodes().enumerate().skip(2).take(17) {
            assert!((d1[k] - (4.0 * x[0].powi(3) - 1.0)).abs() < 1e-12);
            assert!((d2[k] - 12.0 * x[0] * x[0]).abs() < 1e-10);
        }
    }
}
