use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::Scalar;

/// Smoothed nearest-neighbour coupling
/// `φ_τ(x) = c Σ_i √(τ² + (x_{i+1} − x_i)²)` with cyclic `x_{d+1} = x_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTerm<T> {
    smoothing: T,
    coupling: T,
}

impl<T: Scalar> InteractionTerm<T> {
    pub fn new(coupling: T, smoothing: T) -> Result<Self> {
        if !(smoothing > T::zero()) || !smoothing.is_finite() {
            return Err(invalid(
                "tau",
                format!("smoothing must be positive, got {smoothing}"),
            ));
        }
        if !(coupling >= T::zero()) || !coupling.is_finite() {
            return Err(invalid(
                "c",
                format!("coupling must be non-negative, got {coupling}"),
            ));
        }
        Ok(Self {
            smoothing,
            coupling,
        })
    }

    pub fn smoothing(&self) -> T {
        self.smoothing
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    /// Bonds `(i, i+1 mod d)`; a bond joining a coordinate to itself is constant.
    fn bonds(d: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..d).map(move |i| (i, (i + 1) % d))
    }

    pub fn value(&self, x: &[T]) -> T {
        let tau2 = self.smoothing * self.smoothing;
        self.coupling
            * Self::bonds(x.len())
                .map(|(i, j)| {
                    let t = x[j] - x[i];
                    (tau2 + t * t).sqrt()
                })
                .sum::<T>()
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let tau2 = self.smoothing * self.smoothing;
        let mut g = vec![T::zero(); x.len()];
        for (i, j) in Self::bonds(x.len()) {
            if i == j {
                continue;
            }
            let t = x[j] - x[i];
            let s = self.coupling * t / (tau2 + t * t).sqrt();
            g[j] += s;
            g[i] -= s;
        }
        g
    }

    pub fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        let tau2 = self.smoothing * self.smoothing;
        let d = x.len();
        let mut h = DenseMatrix::zeros(d);
        for (i, j) in Self::bonds(d) {
            if i == j {
                continue;
            }
            let t = x[j] - x[i];
            let r2 = tau2 + t * t;
            let w = self.coupling * tau2 / (r2 * r2.sqrt());
            h[(i, i)] += w;
            h[(j, j)] += w;
            h[(i, j)] -= w;
            h[(j, i)] -= w;
        }
        h
    }

    /// `inf ρ(∇²φ_τ)`: the Hessian is a sum of PSD rank-one terms that all
    /// annihilate the constant vector, so the infimum is exactly 0.
    pub fn hessian_lower_bound(&self) -> T {
        T::zero()
    }

    /// `max_i sup |∂_i φ_τ|`: each coordinate sits in two bonds, each of
    /// slope at most `c`.
    pub fn gradient_bound(&self, d: usize) -> T {
        if d < 2 {
            T::zero()
        } else {
            T::c(2.0) * self.coupling
        }
    }

    /// The nonsmooth limit `c Σ |x_{i+1} − x_i|`.
    pub fn limit_value(&self, x: &[T]) -> T {
        self.coupling
            * Self::bonds(x.len())
                .map(|(i, j)| (x[j] - x[i]).abs())
                .sum::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::{fd_gradient, fd_hessian};

    #[test]
    fn rejects_bad_parameters() {
        assert!(InteractionTerm::<f64>::new(0.1, 0.0).is_err());
        assert!(InteractionTerm::<f64>::new(-0.1, 0.01).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let phi = InteractionTerm::<f64>::new(0.3, 0.2).unwrap();
        let x = [0.4, -0.7, 1.1];
        let g = phi.gradient(&x);
        let gf = fd_gradient(|y| phi.value(y), &x, 1e-6);
        let h = phi.hessian(&x);
        let hf = fd_hessian(|y| phi.value(y), &x, 1e-4);
        for i in 0..3 {
            assert!((g[i] - gf[i]).abs() < 1e-8);
            for j in 0..3 {
                assert!((h[(i, j)] - hf[(i, j)]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn one_dimensional_bond_is_constant() {
        let phi = InteractionTerm::<f64>::new(0.5, 0.1).unwrap();
        assert!((phi.value(&[3.0]) - 0.05).abs() < 1e-15);
        assert_eq!(phi.gradient(&[3.0]), vec![0.0]);
        assert_eq!(phi.gradient_bound(1), 0.0);
    }

    #[test]
    fn converges_to_nonsmooth_limit() {
        let x = [0.3, -0.2, 1.4, 0.0];
        let mut prev = f64::INFINITY;
        for tau in [1e-1, 1e-2, 1e-3, 1e-4] {
            let phi = InteractionTerm::<f64>::new(0.2, tau).unwrap();
            let gap = phi.value(&x) - phi.limit_value(&x);
            assert!(gap >= 0.0 && gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
    }
}
