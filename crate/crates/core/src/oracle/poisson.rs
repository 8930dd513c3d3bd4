use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::oracle::operator::DiscreteOperator;
use crate::Scalar;

/// Required relative residual `‖Kg + Mf‖ / ‖Mf‖`.
pub const POISSON_TOL: f64 = 1e-10;

/// Centred right-hand sides below this fraction of `‖Mf‖` count as zero.
const NEGLIGIBLE_RHS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSolution<T> {
    /// Centred solution of `Lg = f`.
    pub g: Vec<T>,
    pub relative_residual: T,
    pub iterations: usize,
    /// The mean `μ(f)` removed from the right-hand side before solving.
    pub removed_mean: T,
}

/// Solves `K g = −M f` (i.e. `Lg = f`) with `g` centred in `L²(m)`. The
/// right-hand side is centred first; the removed mean is recorded.
///
/// One-dimensional grids are solved exactly by integrating the flux from
/// whichever end carries less mass; otherwise Jacobi-preconditioned CG on the
/// singular consistent system, projecting the residual onto `1⊥` each step.
pub fn solve_poisson<T: Scalar>(op: &DiscreteOperator<T>, f: &[T]) -> Result<PoissonSolution<T>> {
    if f.len() != op.len() {
        return Err(Error::DimensionMismatch {
            expected: op.len(),
            got: f.len(),
        });
    }
    if !op.annihilates_constants() {
        return Err(invalid(
            "op",
            "Poisson solves need the unperturbed generator",
        ));
    }
    let m = op.mass();
    let mean: T = m.iter().zip(f).map(|(&mi, &fi)| mi * fi).sum();
    let b: Vec<T> = m
        .iter()
        .zip(f)
        .map(|(&mi, &fi)| -mi * (fi - mean))
        .collect();
    let b_norm = norm(&b);
    let raw: Vec<T> = m.iter().zip(f).map(|(&mi, &fi)| mi * fi).collect();
    // a constant right-hand side centres to round-off noise: treat it as zero
    if b_norm <= T::c(NEGLIGIBLE_RHS) * norm(&raw) || b_norm == T::zero() {
        return Ok(PoissonSolution {
            g: vec![T::zero(); f.len()],
            relative_residual: T::zero(),
            iterations: 0,
            removed_mean: mean,
        });
    }
    let (mut g, iterations) = if op.grid().dim == 1 {
        (flux_solve(op, &b), 1)
    } else {
        pcg_singular(op, &b)?
    };
    let gm: T = m.iter().zip(&g).map(|(&mi, &gi)| mi * gi).sum();
    g.iter_mut().for_each(|x| *x -= gm);

    let mut r = op.stiffness().mul_vec(&g);
    axpy(-T::one(), &b, &mut r);
    let relative_residual = norm(&r) / b_norm;
    if !(relative_residual <= T::c(POISSON_TOL)) {
        return Err(Error::NoConvergence {
            solver: "poisson",
            iterations,
            residual: relative_residual.to_f64_lossy(),
        });
    }
    Ok(PoissonSolution {
        g,
        relative_residual,
        iterations,
        removed_mean: mean,
    })
}

/// Tridiagonal Neumann system: the flux through edge `i+½` is minus the sum
/// of `b` on one side of it.
fn flux_solve<T: Scalar>(op: &DiscreteOperator<T>, b: &[T]) -> Vec<T> {
    let n = b.len();
    let k = op.stiffness();
    let m = op.mass();
    let mut prefix = vec![T::zero(); n];
    let mut acc = T::zero();
    for i in 0..n {
        acc += b[i];
        prefix[i] = acc;
    }
    let mut suffix = vec![T::zero(); n];
    acc = T::zero();
    for i in (0..n).rev() {
        suffix[i] = acc; // Σ_{j>i}
        acc += b[i];
    }
    let mut mass_left = T::zero();
    let mut g = vec![T::zero(); n];
    for i in 0..n - 1 {
        mass_left += m[i];
        let c = -k.get(i, i + 1);
        // c_{i+½}(g_{i+1} − g_i) = −Σ_{j≤i} b_j = Σ_{j>i} b_j
        let flux = if mass_left <= T::c(0.5) {
            -prefix[i]
        } else {
            suffix[i]
        };
        let step = flux / c;
        g[i + 1] = g[i] + if step.is_finite() { step } else { T::zero() };
    }
    g
}

fn pcg_singular<T: Scalar>(op: &DiscreteOperator<T>, b: &[T]) -> Result<(Vec<T>, usize)> {
    let k = op.stiffness();
    let n = b.len();
    let precond: Vec<T> = k
        .diagonal()
        .iter()
        .map(|&d| {
            if d > T::zero() {
                T::one() / d
            } else {
                T::zero()
            }
        })
        .collect();
    let nf = T::from_usize_lossy(n);
    let project = |v: &mut [T]| {
        let mean = v.iter().copied().sum::<T>() / nf;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let b_norm = norm(b);
    let tol = T::c(POISSON_TOL) * T::c(0.1) * b_norm;
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    project(&mut r);
    let mut z: Vec<T> = r.iter().zip(&precond).map(|(&a, &p)| a * p).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let max_iter = 20 * n;
    for it in 1..=max_iter {
        k.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        project(&mut r);
        if norm(&r) <= tol {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * precond[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // recompute the true residual before giving up
    let mut res = k.mul_vec(&x);
    axpy(-T::one(), b, &mut res);
    let rel = norm(&res) / b_norm;
    if rel <= T::c(POISSON_TOL) {
        Ok((x, max_iter))
    } else {
        Err(Error::NoConvergence {
            solver: "poisson cg",
            iterations: max_iter,
            residual: rel.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Potential;
    use crate::oracle::{discretize, Grid};

    #[test]
    fn gaussian_eigenfunctions() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let grid = Grid::new(1, 8.0, 2001).unwrap();
        let op = discretize(&v, &grid).unwrap();
        let x: Vec<f64> = grid.sample(|y| y[0]);
        let sol = solve_poisson(&op, &x).unwrap();
        assert!(sol.relative_residual <= 1e-10);
        for (k, &gk) in sol.g.iter().enumerate() {
            if x[k].abs() < 4.0 {
                assert!((gk + x[k]).abs() < 1e-4, "{} {}", x[k], gk);
            }
        }
        let f2: Vec<f64> = x.iter().map(|y| y * y - 1.0).collect();
        let sol = solve_poisson(&op, &f2).unwrap();
        for (k, &gk) in sol.g.iter().enumerate() {
            if x[k].abs() < 4.0 {
                assert!((gk + f2[k] / 2.0).abs() < 3e-4);
            }
        }
        let zero = solve_poisson(&op, &vec![0.0; x.len()]).unwrap();
        assert!(zero.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn two_dimensional_cg() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let grid = Grid::new(2, 6.0, 61).unwrap();
        let op = discretize(&v, &grid).unwrap();
        let f: Vec<f64> = grid.sample(|y| y[0] * y[1]);
        let sol = solve_poisson(&op, &f).unwrap();
        assert!(sol.relative_residual <= 1e-10);
        // x1 x2 is an eigenfunction with eigenvalue 2
        let center = grid.len() / 2 + 3;
        let x = grid.node(center);
        assert!((sol.g[center] + x[0] * x[1] / 2.0).abs() < 2e-2);
    }
}
