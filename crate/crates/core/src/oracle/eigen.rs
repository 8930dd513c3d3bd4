use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    axpy, dot, norm, normalize, tridiagonal_eigenvector, tridiagonal_lowest, CsrMatrix,
};
use crate::model::Potential;
use crate::oracle::grid::Grid;
use crate::oracle::operator::{discretize, DiscreteOperator};
use crate::Scalar;

/// Largest reduced matrix handed to the dense eigensolver.
pub const DENSE_LIMIT: usize = 3000;
/// Largest number of eigenvalues one call may request.
pub const MAX_EIGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    /// Sturm bisection plus inverse iteration (one-dimensional grids).
    Tridiagonal,
    Dense,
    /// Restarted block shift-invert Krylov with Rayleigh–Ritz.
    ShiftInvertBlock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<T> {
    /// Residual tolerance `‖Âv − θv‖ ≤ tol·max(1, |θ|)`.
    pub tol: T,
    pub max_restarts: usize,
    pub seed: u64,
    /// Positive shift `σ` of the inner solves `(Â + σI)⁻¹`.
    pub shift: T,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::c(1e-9),
            max_restarts: 300,
            seed: 0x5eed,
            shift: T::one(),
        }
    }
}

/// Lowest eigenvalues of a discretised operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult<T> {
    pub eigenvalues: Vec<T>,
    pub residuals: Vec<T>,
    pub dim: usize,
    pub n: usize,
    pub radius: T,
    pub spacing: T,
    pub method: EigenMethod,
    /// Richardson estimates from this grid and its coarsening.
    pub extrapolated: Option<Vec<T>>,
    /// Nodal eigenfunctions normalised in `L²(m)` (not serialised).
    #[serde(skip)]
    pub vectors: Vec<Vec<T>>,
}

impl<T: Scalar> SpectrumResult<T> {
    /// `λ₁ − λ₀`, the discrete spectral gap.
    pub fn gap(&self) -> Option<T> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

/// Second-order Richardson combination `(4λ_fine − λ_coarse)/3`.
pub fn richardson<T: Scalar>(coarse: &[T], fine: &[T]) -> Vec<T> {
    coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| (T::c(4.0) * f - c) / T::c(3.0))
        .collect()
}

/// The `k` smallest eigenvalues of `K u = λ M u`.
pub fn lowest_eigs<T: Scalar>(
    op: &DiscreteOperator<T>,
    k: usize,
    tol: T,
) -> Result<SpectrumResult<T>> {
    lowest_eigs_with(
        op,
        k,
        &EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )
}

pub fn lowest_eigs_with<T: Scalar>(
    op: &DiscreteOperator<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<SpectrumResult<T>> {
    if k == 0 || k > MAX_EIGS {
        return Err(invalid("k", format!("must be in 1..={MAX_EIGS}, got {k}")));
    }
    let a = op.reduced();
    let (values, vecs, residuals, method) = symmetric_lowest(&a, k, opts)?;
    let sqrt_m = op.sqrt_mass();
    let vectors = vecs
        .into_iter()
        .map(|v| {
            v.iter()
                .zip(&sqrt_m)
                .map(|(&x, &s)| if s > T::zero() { x / s } else { T::zero() })
                .collect()
        })
        .collect();
    let g = op.grid();
    Ok(SpectrumResult {
        eigenvalues: values,
        residuals,
        dim: g.dim,
        n: g.n,
        radius: g.radius,
        spacing: g.spacing(),
        method,
        extrapolated: None,
        vectors,
    })
}

/// Discretises `V` on `grid` and on its coarsening and attaches Richardson
/// estimates to the fine-grid spectrum.
pub fn lowest_eigs_extrapolated<T: Scalar>(
    v: &Potential<T>,
    grid: &Grid<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<SpectrumResult<T>> {
    let fine = lowest_eigs_with(&discretize(v, grid)?, k, opts)?;
    let coarse = lowest_eigs_with(&discretize(v, &grid.coarsened()?)?, k, opts)?;
    Ok(SpectrumResult {
        extrapolated: Some(richardson(&coarse.eigenvalues, &fine.eigenvalues)),
        ..fine
    })
}

type EigenOutput<T> = (Vec<T>, Vec<Vec<T>>, Vec<T>, EigenMethod);

/// The `k` lowest eigenpairs of a symmetric positive-semidefinite sparse
/// matrix, with unit vectors and residual norms.
pub fn symmetric_lowest<T: Scalar>(
    a: &CsrMatrix<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<EigenOutput<T>> {
    let n = a.dim();
    let k = k.min(n);
    if let Some((diag, off)) = a.as_tridiagonal() {
        let values = tridiagonal_lowest(&diag, &off, k);
        let mut vectors: Vec<Vec<T>> = Vec::with_capacity(k);
        for &lam in &values {
            let v = tridiagonal_eigenvector(&diag, &off, lam, &vectors);
            vectors.push(v);
        }
        let residuals = residuals(a, &values, &vectors);
        check_residuals("tridiagonal", &values, &residuals, opts.tol)?;
        return Ok((values, vectors, residuals, EigenMethod::Tridiagonal));
    }
    if n <= DENSE_LIMIT {
        let eig = a.to_dense().symmetric_eigen();
        let values = eig.values[..k].to_vec();
        let vectors: Vec<Vec<T>> = (0..k).map(|j| eig.vector(j)).collect();
        let residuals = residuals(a, &values, &vectors);
        check_residuals("dense", &values, &residuals, opts.tol)?;
        return Ok((values, vectors, residuals, EigenMethod::Dense));
    }
    let (values, vectors, residuals) = block_shift_invert(a, k, opts)?;
    Ok((values, vectors, residuals, EigenMethod::ShiftInvertBlock))
}

fn residuals<T: Scalar>(a: &CsrMatrix<T>, values: &[T], vectors: &[Vec<T>]) -> Vec<T> {
    values
        .par_iter()
        .zip(vectors)
        .map(|(&lam, v)| {
            let mut r = a.mul_vec(v);
            axpy(-lam, v, &mut r);
            norm(&r)
        })
        .collect()
}

fn check_residuals<T: Scalar>(solver: &'static str, values: &[T], res: &[T], tol: T) -> Result<()> {
    for (&lam, &r) in values.iter().zip(res) {
        let bound = tol * lam.abs().max(T::one());
        if !(r <= bound) {
            return Err(Error::NoConvergence {
                solver,
                iterations: 0,
                residual: r.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Jacobi-preconditioned CG for `(A + σI) x = b`.
fn cg_shifted<T: Scalar>(
    a: &CsrMatrix<T>,
    sigma: T,
    precond: &[T],
    b: &[T],
    rel_tol: T,
    max_iter: usize,
) -> Vec<T> {
    let n = b.len();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let b_norm = norm(b);
    if b_norm == T::zero() {
        return x;
    }
    let mut z: Vec<T> = r.iter().zip(precond).map(|(&ri, &pi)| ri * pi).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        axpy(sigma, &p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm(&r) <= rel_tol * b_norm {
            break;
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
    x
}

/// Orthonormalises `vectors` (two-pass modified Gram–Schmidt), dropping
/// those that are numerically dependent on earlier ones.
fn orthonormal_basis<T: Scalar>(vectors: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let before = norm(&v);
        if before == T::zero() {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                axpy(-c, q, &mut v);
            }
        }
        if norm(&v) > T::c(1e-13) * before {
            normalize(&mut v);
            basis.push(v);
        }
    }
    basis
}

/// Eigenvalues, eigenvectors and residual norms.
type EigenTriple<T> = (Vec<T>, Vec<Vec<T>>, Vec<T>);

fn block_shift_invert<T: Scalar>(
    a: &CsrMatrix<T>,
    k: usize,
    opts: &EigenOptions<T>,
) -> Result<EigenTriple<T>> {
    let n = a.dim();
    let p = (k + 4).min(n);
    let sigma = opts.shift;
    let precond: Vec<T> = a
        .diagonal()
        .iter()
        .map(|&d| T::one() / (d + sigma))
        .collect();
    let inner_tol = T::c(1e-13);
    let inner_max = 20 * n;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<Vec<T>> = (0..p)
        .map(|_| (0..n).map(|_| T::c(rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let mut x = orthonormal_basis(start);
    let mut last_residual = T::infinity();

    for restart in 0..opts.max_restarts {
        let solve = |v: &Vec<T>| cg_shifted(a, sigma, &precond, v, inner_tol, inner_max);
        let y1: Vec<Vec<T>> = x.par_iter().map(solve).collect();
        let y2: Vec<Vec<T>> = y1.par_iter().map(solve).collect();
        let mut all = x.clone();
        all.extend(y1);
        all.extend(y2);
        let q = orthonormal_basis(all);
        let aq: Vec<Vec<T>> = q.par_iter().map(|v| a.mul_vec(v)).collect();
        let m = q.len();
        let mut h = crate::linalg::DenseMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                let v = T::c(0.5) * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = h.symmetric_eigen();
        let keep = p.min(m);
        let mut values = Vec::with_capacity(keep);
        let mut ritz = Vec::with_capacity(keep);
        let mut res = Vec::with_capacity(keep);
        for j in 0..keep {
            let y = eig.vector(j);
            let mut v = vec![T::zero(); n];
            let mut av = vec![T::zero(); n];
            for i in 0..m {
                axpy(y[i], &q[i], &mut v);
                axpy(y[i], &aq[i], &mut av);
            }
            let theta = eig.values[j];
            axpy(-theta, &v, &mut av);
            values.push(theta);
            res.push(norm(&av));
            ritz.push(v);
        }
        let worst = (0..k.min(keep))
            .map(|j| res[j] / values[j].abs().max(T::one()))
            .fold(T::zero(), T::max);
        last_residual = worst;
        if worst <= opts.tol && keep >= k {
            values.truncate(k);
            ritz.truncate(k);
            res.truncate(k);
            return Ok((values, ritz, res));
        }
        x = orthonormal_basis(ritz);
        if x.len() < p {
            // refill a collapsed block deterministically
            let mut fill_rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (restart as u64 + 1));
            let mut extra = x.clone();
            while extra.len() < p {
                extra.push(
                    (0..n)
                        .map(|_| T::c(fill_rng.gen_range(-1.0..1.0)))
                        .collect(),
                );
            }
            x = orthonormal_basis(extra);
        }
    }
    Err(Error::NoConvergence {
        solver: "block shift-invert",
        iterations: opts.max_restarts,
        residual: last_residual.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_1d_spectrum() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let g = Grid::new(1, 8.0, 2001).unwrap();
        let op = discretize(&v, &g).unwrap();
        let s = lowest_eigs(&op, 4, 1e-9).unwrap();
        assert_eq!(s.method, EigenMethod::Tridiagonal);
        for (j, &lam) in s.eigenvalues.iter().enumerate() {
            assert!((lam - j as f64).abs() < 1e-3, "{j}: {lam}");
        }
        assert!(s.residuals[0] < 1e-8);
    }

    #[test]
    fn dense_and_block_agree() {
        let v = Potential::<f64>::from_expression(2, "x1^2/2 + x2^2/2 + 0.1*x1^4").unwrap();
        let g = Grid::new(2, 5.0, 41).unwrap();
        let op = discretize(&v, &g).unwrap();
        let a = op.reduced();
        let opts = EigenOptions::default();
        let (dense, ..) = symmetric_lowest(&a, 5, &opts).unwrap();
        let (block, _, res) = block_shift_invert(&a, 5, &opts).unwrap();
        for j in 0..5 {
            assert!(
                (dense[j] - block[j]).abs() < 1e-8,
                "{j}: {} vs {}",
                dense[j],
                block[j]
            );
            assert!(res[j] < 1e-8);
        }
    }

    #[test]
    fn richardson_combination() {
        assert_eq!(richardson(&[1.0, 2.0], &[1.25, 2.0]), vec![4.0 / 3.0, 2.0]);
    }

    #[test]
    fn rejects_bad_k() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let op = discretize(&v, &Grid::new(1, 4.0, 64).unwrap()).unwrap();
        assert!(lowest_eigs(&op, 0, 1e-9).is_err());
        assert!(lowest_eigs(&op, 21, 1e-9).is_err());
    }
}
