use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::Scalar;

/// A point of the state space ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Point<T>(Vec<T>);

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("point", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("point", "coordinates must be finite"));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for Point<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Central-difference step for first derivatives, ≈ ε^{1/3}.
pub fn first_step<T: Scalar>() -> T {
    T::epsilon().cbrt()
}

/// Step for nested second differences, ≈ ε^{1/4} (1.2e-4 in double precision).
pub fn second_step<T: Scalar>() -> T {
    T::epsilon().sqrt().sqrt()
}

pub fn fd_gradient<T: Scalar>(f: impl Fn(&[T]) -> T, x: &[T], step: T) -> Vec<T> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step * T::one().max(x[i].abs());
            y[i] = x[i] + h;
            let fp = f(&y);
            y[i] = x[i] - h;
            let fm = f(&y);
            y[i] = x[i];
            (fp - fm) / (h + h)
        })
        .collect()
}

pub fn fd_hessian<T: Scalar>(f: impl Fn(&[T]) -> T, x: &[T], step: T) -> DenseMatrix<T> {
    let d = x.len();
    let mut m = DenseMatrix::zeros(d);
    let mut y = x.to_vec();
    let f0 = f(x);
    let hs: Vec<T> = x.iter().map(|v| step * T::one().max(v.abs())).collect();
    for i in 0..d {
        let h = hs[i];
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        m[(i, i)] = (fp - f0 - f0 + fm) / (h * h);
        for j in 0..i {
            let k = hs[j];
            let mut eval = |si: T, sj: T| {
                y[i] = x[i] + si * h;
                y[j] = x[j] + sj * k;
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let one = T::one();
            let v = (eval(one, one) - eval(one, -one) - eval(-one, one) + eval(-one, -one))
                / (T::c(4.0) * h * k);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// A scalar field on ℝ^d with first and second derivatives.
///
/// The default derivative implementations are central differences; analytic
/// fields override them.
pub trait ScalarField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[T]) -> T;

    fn gradient(&self, x: &[T]) -> Vec<T> {
        fd_gradient(|y| self.value(y), x, first_step())
    }

    fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        fd_hessian(|y| self.value(y), x, second_step())
    }

    fn laplacian(&self, x: &[T]) -> T {
        let h = self.hessian(x);
        (0..self.dim()).map(|i| h[(i, i)]).sum()
    }

    /// Whether the derivatives are exact rather than finite differences.
    fn analytic_derivatives(&self) -> bool {
        false
    }
}

type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
type HessFn<T> = Arc<dyn Fn(&[T]) -> DenseMatrix<T> + Send + Sync>;

/// Closure-backed scalar field; missing derivatives fall back to differences.
#[derive(Clone)]
pub struct FnField<T> {
    dim: usize,
    value: ValueFn<T>,
    gradient: Option<GradFn<T>>,
    hessian: Option<HessFn<T>>,
}

impl<T: Scalar> FnField<T> {
    pub fn new(dim: usize, value: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: None,
            hessian: None,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(
        mut self,
        h: impl Fn(&[T]) -> DenseMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    /// The constant field.
    pub fn constant(dim: usize, c: T) -> Self {
        Self::new(dim, move |_| c)
            .with_gradient(move |x| vec![T::zero(); x.len()])
            .with_hessian(move |x| DenseMatrix::zeros(x.len()))
    }

    /// The coordinate projection `x ↦ x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::new(dim, move |x| x[i])
            .with_gradient(move |x| {
                let mut g = vec![T::zero(); x.len()];
                g[i] = T::one();
                g
            })
            .with_hessian(move |x| DenseMatrix::zeros(x.len()))
    }
}

impl<T: Scalar> ScalarField<T> for FnField<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> T {
        (self.value)(x)
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        match &self.gradient {
            Some(g) => g(x),
            None => fd_gradient(|y| (self.value)(y), x, first_step()),
        }
    }

    fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        match &self.hessian {
            Some(h) => h(x),
            None => fd_hessian(|y| (self.value)(y), x, second_step()),
        }
    }

    fn analytic_derivatives(&self) -> bool {
        self.gradient.is_some() && self.hessian.is_some()
    }
}

impl<T> fmt::Debug for FnField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}
