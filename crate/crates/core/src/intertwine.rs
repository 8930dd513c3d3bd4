//! Matrix fields attached to a weight `A`, the curvature matrix
//! `∇²V − (𝕃A⁻¹)A = −J_{𝕃H}ᵀ(J_Hᵀ)⁻¹`, its infimum eigenvalue over a box, and
//! a finite-difference check of the gradient intertwining
//! `A∇Lf = (𝕃_A − M_A)(A∇f)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::minimize::coordinate_descent;
use crate::model::{DiagonalWeight, Potential, ScalarField, WeightFamily};
use crate::Scalar;

/// `𝕃f(x) = Δf(x) − ∇V(x)ᵀ∇f(x)`.
pub fn apply_generator<T: Scalar>(v: &Potential<T>, f: &dyn ScalarField<T>, x: &[T]) -> T {
    let gv = v.gradient(x);
    let gf = f.gradient(x);
    f.laplacian(x) - gv.iter().zip(&gf).map(|(&a, &b)| a * b).sum::<T>()
}

/// `Γ(f, g)(x) = ∇f(x)ᵀ∇g(x)`.
pub fn carre_du_champ<T: Scalar>(f: &dyn ScalarField<T>, g: &dyn ScalarField<T>, x: &[T]) -> T {
    let a = f.gradient(x);
    let b = g.gradient(x);
    a.iter().zip(&b).map(|(&p, &q)| p * q).sum()
}

/// `−J_{𝕃H}ᵀ(J_Hᵀ)⁻¹` for a diagonal weight: off-diagonal entries are
/// `∂²_{ij}V`, diagonal entries `−∂_i(𝕃h_i)/h_i′ = ∂²_{ii}V − h_i‴/h_i′ + ∂_iV·h_i″/h_i′`.
pub fn curvature_matrix<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    x: &[T],
) -> Result<DenseMatrix<T>> {
    if w.dim() != v.dim() || x.len() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: w.dim().min(x.len()),
        });
    }
    w.check_positive(x)?;
    let mut m = v.hessian(x);
    if w.family() != WeightFamily::Identity {
        let gv = v.gradient(x);
        for i in 0..x.len() {
            m[(i, i)] += gv[i] * w.log_derivative(i, x[i]) - w.second_log_ratio(i, x[i]);
        }
    }
    let asym = m.asymmetry();
    let scale = m.norm_inf().max(T::one());
    if asym > T::c(1e-9) * scale {
        return Err(Error::AsymmetricResult {
            asymmetry: (asym / scale).to_f64_lossy(),
        });
    }
    Ok(m)
}

/// Closed form of the curvature matrix for `h_i′ = e^{ε_i U_i}` on a perturbed
/// product potential:
/// `∇²φ + diag[(1−ε_i)(U_i″ + ε_i U_i′²) + ε_i ∂_iφ U_i′]`.
pub fn curvature_matrix_exp_closed_form<T: Scalar>(
    v: &Potential<T>,
    eps: &[T],
    x: &[T],
) -> Result<DenseMatrix<T>> {
    let s = v.require_structure()?;
    let mut m = s.interaction_hessian(x);
    let gphi = s.interaction_gradient(x);
    for (i, u) in s.components.iter().enumerate() {
        let e = eps[i];
        let (u1, u2) = (u.d1(x[i]), u.d2(x[i]));
        m[(i, i)] += (T::one() - e) * (u2 + e * u1 * u1) + e * gphi[i] * u1;
    }
    Ok(m)
}

type MatrixFn<T> = dyn Fn(&[T]) -> DenseMatrix<T> + Send + Sync;

/// Matrix-valued field on ℝ^d.
#[derive(Clone)]
pub struct MatrixField<T> {
    dim: usize,
    eval: Arc<MatrixFn<T>>,
    tol: T,
}

impl<T: Scalar> MatrixField<T> {
    pub fn new(dim: usize, eval: impl Fn(&[T]) -> DenseMatrix<T> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            tol: T::c(1e-9),
        }
    }

    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    /// `A(x) = diag(1/g_i(x_i))`.
    pub fn from_weight(w: &DiagonalWeight<T>) -> Self {
        let w = w.clone();
        Self::new(w.dim(), move |x| w.a_matrix(x))
    }

    /// The curvature matrix of `(V, W)` as a field.
    pub fn curvature(v: &Potential<T>, w: &DiagonalWeight<T>) -> Self {
        let (v, w) = (v.clone(), w.clone());
        Self::new(v.dim(), move |x| {
            curvature_matrix(&v, &w, x)
                .unwrap_or_else(|_| DenseMatrix::from_fn(x.len(), |_, _| T::nan()))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn eval(&self, x: &[T]) -> DenseMatrix<T> {
        (self.eval)(x)
    }

    pub fn is_symmetric_at(&self, x: &[T]) -> bool {
        let m = self.eval(x);
        m.asymmetry() <= self.tol * m.norm_inf()
    }
}

impl<T: Scalar> fmt::Debug for MatrixField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixField")
            .field("dim", &self.dim)
            .field("tol", &self.tol)
            .finish()
    }
}

/// Outcome of checking the four equivalent symmetry assertions:
/// 0. `(A⁻¹)ᵀ ∂_k A⁻¹` symmetric for every `k`,
/// 1. `(A⁻¹)ᵀ 𝕃A⁻¹` symmetric,
/// 2. `S M_A` symmetric,
/// 3. `A⁻¹ M_A A = ∇²V − (𝕃A⁻¹)A` symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport<T> {
    pub holds: [bool; 4],
    /// Worst relative asymmetry seen per assertion.
    pub worst: [T; 4],
    /// `(assertion index, sample point)` for every violation.
    pub violations: Vec<(usize, Vec<T>)>,
    pub samples: usize,
    pub tolerance: T,
}

impl<T: Scalar> SymmetryReport<T> {
    pub fn all_hold(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// Relative tolerance for the differenced symmetry checks.
pub const SYMMETRY_FD_TOL: f64 = 1e-6;

/// Samples `n_samples` points uniformly in `[−R, R]^d` and evaluates the four
/// symmetry assertions with finite-difference derivatives of `A⁻¹`.
pub fn symmetry_report<T: Scalar>(
    v: &Potential<T>,
    a: &MatrixField<T>,
    box_radius: T,
    n_samples: usize,
    seed: u64,
) -> Result<SymmetryReport<T>> {
    let d = v.dim();
    if a.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.dim(),
        });
    }
    let tol = T::c(SYMMETRY_FD_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SymmetryReport {
        holds: [true; 4],
        worst: [T::zero(); 4],
        violations: vec![],
        samples: n_samples,
        tolerance: tol,
    };
    let inv_at = |y: &[T]| -> Result<DenseMatrix<T>> {
        a.eval(y).inverse().ok_or_else(|| Error::SingularWeight {
            point: y.iter().map(|c| c.to_f64_lossy()).collect(),
        })
    };
    let h1 = T::c(1e-5);
    let h2 = T::c(1e-3);
    for _ in 0..n_samples {
        let x: Vec<T> = (0..d)
            .map(|_| T::c(rng.gen_range(-1.0..1.0)) * box_radius)
            .collect();
        let amat = a.eval(&x);
        let binv = inv_at(&x)?;
        let binv_t = binv.transpose();
        let mut partials = Vec::with_capacity(d);
        let mut laplacian = DenseMatrix::zeros(d);
        for k in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h1;
            xm[k] -= h1;
            partials.push(inv_at(&xp)?.sub(&inv_at(&xm)?).scale(T::one() / (h1 + h1)));
            xp[k] = x[k] + h2;
            xm[k] = x[k] - h2;
            let second = inv_at(&xp)?
                .add(&inv_at(&xm)?)
                .sub(&binv.scale(T::c(2.0)))
                .scale(T::one() / (h2 * h2));
            laplacian = laplacian.add(&second);
        }
        let gv = v.gradient(&x);
        let mut gen_binv = laplacian;
        for k in 0..d {
            gen_binv = gen_binv.sub(&partials[k].scale(gv[k]));
        }
        let hess = v.hessian(&x);

        let rel = |m: &DenseMatrix<T>| m.asymmetry() / m.norm_inf().max(T::one());
        let first = partials
            .iter()
            .map(|p| rel(&binv_t.mul(p)))
            .fold(T::zero(), T::max);
        let second = rel(&binv_t.mul(&gen_binv));
        let s = binv_t.mul(&binv);
        let m_a = amat.mul(&hess).mul(&binv).sub(&amat.mul(&gen_binv));
        let third = rel(&s.mul(&m_a));
        let fourth = rel(&hess.sub(&gen_binv.mul(&amat)));

        for (idx, val) in [first, second, third, fourth].into_iter().enumerate() {
            report.worst[idx] = report.worst[idx].max(val);
            if !(val <= tol) {
                report.holds[idx] = false;
                report.violations.push((idx, x.clone()));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementStatus {
    GridOnly,
    LocallyRefined,
}

/// Numerical infimum over a box of a scalar function (typically `ρ` of the
/// curvature matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfRhoResult<T> {
    pub value: T,
    pub argmin: Vec<T>,
    pub box_radius: T,
    pub grid_n: usize,
    /// Best value on the grid before refinement.
    pub grid_value: T,
    pub status: RefinementStatus,
}

impl<T: Scalar> InfRhoResult<T> {
    /// Whether the infimum is positive, i.e. the first-order bound applies.
    pub fn bounded_below(&self) -> bool {
        self.value > T::zero()
    }

    /// Whether the argmin sits strictly inside the box.
    pub fn interior(&self) -> bool {
        let h = T::c(2.0) * self.box_radius / T::from_usize_lossy(self.grid_n - 1);
        self.argmin
            .iter()
            .all(|c| c.abs() < self.box_radius - h * T::c(0.5))
    }
}

/// Position tolerance of the local refinement.
pub const REFINE_TOL: f64 = 1e-8;

/// Infimum of `f` over `[−R, R]^d`: evaluate on a `grid_n^d` lattice
/// (in parallel), take the lexicographically-first minimiser, then refine by
/// coordinate descent. Points where `excluded` holds are skipped.
pub fn box_infimum<T: Scalar>(
    d: usize,
    box_radius: T,
    grid_n: usize,
    f: impl Fn(&[T]) -> T + Sync,
    excluded: impl Fn(&[T]) -> bool + Sync,
) -> Result<InfRhoResult<T>> {
    if grid_n < 8 {
        return Err(invalid(
            "grid_n",
            format!("need at least 8 points per axis, got {grid_n}"),
        ));
    }
    if !(box_radius > T::zero()) {
        return Err(invalid("box_radius", "box must contain the origin"));
    }
    let total = grid_n
        .checked_pow(d as u32)
        .ok_or_else(|| invalid("grid_n", "grid too large"))?;
    let step = T::c(2.0) * box_radius / T::from_usize_lossy(grid_n - 1);
    let point = |mut k: usize| -> Vec<T> {
        let mut x = vec![T::zero(); d];
        for i in (0..d).rev() {
            x[i] = -box_radius + step * T::from_usize_lossy(k % grid_n);
            k /= grid_n;
        }
        x
    };
    let values: Vec<T> = (0..total)
        .into_par_iter()
        .map(|k| {
            let x = point(k);
            if excluded(&x) {
                T::infinity()
            } else {
                let v = f(&x);
                if v.is_nan() {
                    T::infinity()
                } else {
                    v
                }
            }
        })
        .collect();
    // sequential reduction: first strict minimum in lexicographic order
    let (best_k, grid_value) = values.iter().enumerate().fold(
        (0, T::infinity()),
        |(bk, bv), (k, &v)| if v < bv { (k, v) } else { (bk, bv) },
    );
    let start = point(best_k);
    let guarded = |y: &[T]| {
        if excluded(y) {
            T::infinity()
        } else {
            let v = f(y);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        }
    };
    let (refined_x, refined_v) = coordinate_descent(
        guarded,
        &start,
        step,
        -box_radius,
        box_radius,
        T::c(REFINE_TOL),
    );
    let (value, argmin, status) = if refined_v < grid_value {
        (refined_v, refined_x, RefinementStatus::LocallyRefined)
    } else {
        (grid_value, start, RefinementStatus::GridOnly)
    };
    Ok(InfRhoResult {
        value,
        argmin,
        box_radius,
        grid_n,
        grid_value,
        status,
    })
}

/// `inf ρ(−J_{𝕃H}ᵀ(J_Hᵀ)⁻¹)` over `[−R, R]^d`, excluding the puncture of
/// singular power components.
pub fn inf_rho<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    box_radius: T,
    grid_n: usize,
) -> Result<InfRhoResult<T>> {
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: w.dim(),
        });
    }
    box_infimum(
        v.dim(),
        box_radius,
        grid_n,
        |x| match curvature_matrix(v, w, x) {
            Ok(m) => m.min_eigenvalue(),
            Err(_) => T::nan(),
        },
        |x| v.in_puncture(x),
    )
}

/// Residual `A∇(𝕃f)(x) − [𝕃_A(A∇f) − M_A A∇f](x)`. Derivatives of `f` and of
/// the field `F = A∇f` are (nested) central differences of width `step`;
/// derivatives of `V` are analytic. With a non-constant weight the two sides
/// use different stencils, so the residual decays as `O(step²)`.
///
/// `(𝕃_A F)_i = 𝕃F_i + 2(h_i″/h_i′)∂_iF_i` and `M_A = A C A⁻¹` where `C` is the
/// curvature matrix.
pub fn check_intertwining<T: Scalar>(
    v: &Potential<T>,
    w: &DiagonalWeight<T>,
    f: &dyn ScalarField<T>,
    x: &[T],
    step: T,
) -> Result<Vec<T>> {
    let d = v.dim();
    let h = step;
    let two = T::c(2.0);
    let shifted = |y: &[T], k: usize, s: T| {
        let mut z = y.to_vec();
        z[k] += s;
        z
    };
    let central = |g: &dyn Fn(&[T]) -> T, y: &[T], k: usize| {
        (g(&shifted(y, k, h)) - g(&shifted(y, k, -h))) / (two * h)
    };
    let second = |g: &dyn Fn(&[T]) -> T, y: &[T], k: usize| {
        (g(&shifted(y, k, h)) - two * g(y) + g(&shifted(y, k, -h))) / (h * h)
    };
    let fv = |y: &[T]| f.value(y);
    let df = |j: usize| move |y: &[T]| central(&fv, y, j);
    let lap_f = |y: &[T]| -> T { (0..d).map(|k| second(&fv, y, k)).sum() };
    // F_i(y) = ∂_i f(y) / g_i(y_i)
    let field = |i: usize| move |y: &[T]| central(&fv, y, i) / w.g(i, y[i]);

    let gv = v.gradient(x);
    let hv = v.hessian(x);
    let curvature = curvature_matrix(v, w, x)?;
    let g: Vec<T> = (0..d).map(|i| w.g(i, x[i])).collect();
    let grad: Vec<T> = (0..d).map(|j| df(j)(x)).collect();
    let fx: Vec<T> = (0..d).map(|i| field(i)(x)).collect();

    let mut residual = Vec::with_capacity(d);
    for i in 0..d {
        // ∂_i(𝕃f) = ∂_iΔf − Σ_j ∂_ijV ∂_j f − Σ_j ∂_jV ∂_i∂_j f
        let mut grad_gen = central(&lap_f, x, i);
        for j in 0..d {
            grad_gen -= hv[(i, j)] * grad[j] + gv[j] * central(&df(j), x, i);
        }
        let lhs = grad_gen / g[i];

        let fi = field(i);
        let mut lap = T::zero();
        let mut drift = T::zero();
        for k in 0..d {
            lap += second(&fi, x, k);
            drift += gv[k] * central(&fi, x, k);
        }
        let weighted_gen = lap - drift + two * w.log_derivative(i, x[i]) * central(&fi, x, i);
        let m_a_f: T = (0..d)
            .map(|j| g[j] / g[i] * curvature[(i, j)] * fx[j])
            .sum();
        residual.push(lhs - (weighted_gen - m_a_f));
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnField;

    #[test]
    fn generator_examples() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let f = FnField::new(1, |x: &[f64]| x[0] * x[0]);
        assert!((apply_generator(&v, &f, &[0.5]) - 1.5).abs() < 1e-6);
        let c = FnField::<f64>::constant(1, 3.0);
        assert_eq!(apply_generator(&v, &c, &[0.5]), 0.0);
        let v2 = Potential::<f64>::gaussian(2).unwrap();
        let x1 = FnField::<f64>::coordinate(2, 0);
        assert!((apply_generator(&v2, &x1, &[0.3, -1.0]) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn carre_du_champ_examples() {
        let x1 = FnField::<f64>::coordinate(2, 0);
        let x2 = FnField::<f64>::coordinate(2, 1);
        assert_eq!(carre_du_champ(&x1, &x1, &[0.4, 2.0]), 1.0);
        assert_eq!(carre_du_champ(&x1, &x2, &[0.4, 2.0]), 0.0);
        let v = Potential::<f64>::gaussian(2).unwrap();
        assert!((carre_du_champ(&v, &v, &[1.0, 2.0]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn curvature_examples() {
        let g2 = Potential::<f64>::gaussian(2).unwrap();
        let id = DiagonalWeight::<f64>::identity(2);
        assert_eq!(
            curvature_matrix(&g2, &id, &[0.3, -2.0]).unwrap(),
            DenseMatrix::identity(2)
        );

        let p = Potential::<f64>::power_product(1, 1.5, 0.0, 0.01).unwrap();
        let w = DiagonalWeight::exp_eps_u(&p, &[0.25]).unwrap();
        let m = curvature_matrix(&p, &w, &[1.0]).unwrap();
        assert!((m[(0, 0)] - 0.5625).abs() < 1e-14);

        let g1 = Potential::<f64>::gaussian(1).unwrap();
        let w = DiagonalWeight::exp_eps_u(&g1, &[0.25]).unwrap();
        assert!((curvature_matrix(&g1, &w, &[0.0]).unwrap()[(0, 0)] - 0.75).abs() < 1e-15);
        let x: f64 = 1.7;
        let expect = 0.75 * (1.0 + 0.25 * x * x);
        assert!((curvature_matrix(&g1, &w, &[x]).unwrap()[(0, 0)] - expect).abs() < 1e-14);
    }

    #[test]
    fn inf_rho_gaussian_identity() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let r = inf_rho(&v, &DiagonalWeight::<f64>::identity(2), 5.0, 16).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!(r.bounded_below());
        assert!(inf_rho(&v, &DiagonalWeight::<f64>::identity(2), 5.0, 4).is_err());
    }

    #[test]
    fn inf_rho_power_one_dim() {
        let v = Potential::<f64>::power_product(1, 1.5, 0.0, 0.01).unwrap();
        let w = DiagonalWeight::exp_eps_u(&v, &[0.25]).unwrap();
        let r = inf_rho(&v, &w, 8.0, 401).unwrap();
        assert!((r.value - 0.5625).abs() < 1e-12, "{}", r.value);
        assert!((r.argmin[0].abs() - 1.0).abs() < 1e-4);
        assert!(r.interior());
    }

    #[test]
    fn intertwining_gaussian_square() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let f = FnField::new(1, |x: &[f64]| x[0] * x[0]);
        let r =
            check_intertwining(&v, &DiagonalWeight::<f64>::identity(1), &f, &[0.3], 1e-3).unwrap();
        assert!(r[0].abs() < 1e-7, "{r:?}");
        let c = FnField::<f64>::constant(1, 2.0);
        let w = DiagonalWeight::exp_eps_u(&v, &[0.2]).unwrap();
        let r = check_intertwining(&v, &w, &c, &[0.3], 1e-3).unwrap();
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn symmetry_rotation_fixture_fails() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let rot = MatrixField::new(2, |x: &[f64]| {
            let t = x[0];
            DenseMatrix::<f64>::from_row_slice(2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
        });
        let r = symmetry_report(&v, &rot, 2.0, 10, 7).unwrap();
        assert!(!r.all_hold());
        let id = MatrixField::from_weight(&DiagonalWeight::<f64>::identity(2));
        assert!(symmetry_report(&v, &id, 2.0, 10, 7).unwrap().all_hold());
    }

    #[test]
    fn symmetry_singular_weight() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let zero = MatrixField::new(1, |_x: &[f64]| DenseMatrix::zeros(1));
        assert!(matches!(
            symmetry_report(&v, &zero, 1.0, 3, 1),
            Err(Error::SingularWeight { .. })
        ));
    }
}
