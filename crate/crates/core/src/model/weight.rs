use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::component::OneDimComponent;
use crate::model::potential::Potential;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    Identity,
    ExpEpsU,
    Custom,
}

type Fn1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum CoordWeight<T> {
    Identity,
    /// `g = e^{ε U}`.
    ExpEpsU {
        eps: T,
        component: OneDimComponent<T>,
    },
    Custom {
        g: Fn1<T>,
        g1: Option<Fn1<T>>,
        g2: Option<Fn1<T>>,
    },
}

/// Diagonal diffeomorphism weight `H_i(x) = h_i(x_i)`, stored through
/// `g_i = h_i′ > 0`. Induces `A = diag(1/g_i)` and `S = diag(g_i²)`.
#[derive(Clone)]
pub struct DiagonalWeight<T> {
    family: WeightFamily,
    coords: Vec<CoordWeight<T>>,
}

/// Step for differencing custom weight functions.
const CUSTOM_STEP: f64 = 1e-4;

impl<T: Scalar> DiagonalWeight<T> {
    pub fn identity(d: usize) -> Self {
        Self {
            family: WeightFamily::Identity,
            coords: vec![CoordWeight::Identity; d],
        }
    }

    /// `h_i′ = e^{ε_i U_i}`; requires product structure and `ε_i ∈ (0, 1/2)`.
    pub fn exp_eps_u(potential: &Potential<T>, eps: &[T]) -> Result<Self> {
        let s = potential.require_structure()?;
        if eps.len() != potential.dim() {
            return Err(Error::DimensionMismatch {
                expected: potential.dim(),
                got: eps.len(),
            });
        }
        for &e in eps {
            if !(e > T::zero() && e < T::c(0.5)) {
                return Err(invalid(
                    "eps",
                    format!("every ε_i must lie in (0, 1/2), got {e}"),
                ));
            }
        }
        Ok(Self {
            family: WeightFamily::ExpEpsU,
            coords: s
                .components
                .iter()
                .zip(eps)
                .map(|(u, &e)| CoordWeight::ExpEpsU {
                    eps: e,
                    component: u.clone(),
                })
                .collect(),
        })
    }

    /// Custom per-coordinate `g_i`; missing derivatives are differenced.
    pub fn custom(coords: Vec<CustomCoord<T>>) -> Self {
        Self {
            family: WeightFamily::Custom,
            coords: coords
                .into_iter()
                .map(|c| CoordWeight::Custom {
                    g: c.g,
                    g1: c.g1,
                    g2: c.g2,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    /// The ε parameters of an `exp_eps_U` weight.
    pub fn eps(&self) -> Option<Vec<T>> {
        self.coords
            .iter()
            .map(|c| match c {
                CoordWeight::ExpEpsU { eps, .. } => Some(*eps),
                _ => None,
            })
            .collect()
    }

    /// Whether the third derivative `h‴` is exact.
    pub fn analytic(&self, i: usize) -> bool {
        !matches!(&self.coords[i], CoordWeight::Custom { g2: None, .. })
    }

    /// `g_i(y) = h_i′(y)`.
    pub fn g(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => T::one(),
            CoordWeight::ExpEpsU { eps, component } => (*eps * component.value(y)).exp(),
            CoordWeight::Custom { g, .. } => g(y),
        }
    }

    /// `g_i′(y) = h_i″(y)`.
    pub fn g1(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => T::zero(),
            CoordWeight::ExpEpsU { eps, component } => *eps * component.d1(y) * self.g(i, y),
            CoordWeight::Custom { g, g1, .. } => match g1 {
                Some(f) => f(y),
                None => {
                    let h = T::c(CUSTOM_STEP) * T::one().max(y.abs());
                    (g(y + h) - g(y - h)) / (h + h)
                }
            },
        }
    }

    /// `g_i″(y) = h_i‴(y)`.
    pub fn g2(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => T::zero(),
            CoordWeight::ExpEpsU { eps, component } => {
                let u1 = component.d1(y);
                (*eps * component.d2(y) + *eps * *eps * u1 * u1) * self.g(i, y)
            }
            CoordWeight::Custom { g, g1, g2 } => match (g2, g1) {
                (Some(f), _) => f(y),
                (None, Some(f1)) => {
                    let h = T::c(CUSTOM_STEP) * T::one().max(y.abs());
                    (f1(y + h) - f1(y - h)) / (h + h)
                }
                (None, None) => {
                    let h = T::c(CUSTOM_STEP) * T::one().max(y.abs());
                    (g(y + h) - g(y) - g(y) + g(y - h)) / (h * h)
                }
            },
        }
    }

    /// `g_i′/g_i`, computed without forming `g_i` for the exponential family.
    pub fn log_derivative(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => T::zero(),
            CoordWeight::ExpEpsU { eps, component } => *eps * component.d1(y),
            CoordWeight::Custom { .. } => self.g1(i, y) / self.g(i, y),
        }
    }

    /// `g_i″/g_i`.
    pub fn second_log_ratio(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => T::zero(),
            CoordWeight::ExpEpsU { eps, component } => {
                let u1 = component.d1(y);
                *eps * component.d2(y) + *eps * *eps * u1 * u1
            }
            CoordWeight::Custom { .. } => self.g2(i, y) / self.g(i, y),
        }
    }

    /// `h_i(y) = ∫₀^y g_i(t) dt` by adaptive Simpson quadrature.
    pub fn antiderivative(&self, i: usize, y: T) -> T {
        match &self.coords[i] {
            CoordWeight::Identity => y,
            _ => adaptive_simpson(&|t| self.g(i, t), T::zero(), y, T::c(1e-12), 40),
        }
    }

    /// Checks `g_i(x_i) > 0` on every coordinate.
    pub fn check_positive(&self, x: &[T]) -> Result<()> {
        for (i, &y) in x.iter().enumerate() {
            let g = self.g(i, y);
            if !(g > T::zero()) || !g.is_finite() {
                return Err(Error::WeightVanished {
                    coord: i,
                    value: g.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// `A(x) = diag(1/g_i(x_i))`.
    pub fn a_matrix(&self, x: &[T]) -> DenseMatrix<T> {
        let diag: Vec<T> = x
            .iter()
            .enumerate()
            .map(|(i, &y)| T::one() / self.g(i, y))
            .collect();
        DenseMatrix::from_diagonal(&diag)
    }

    /// Diagonal of `S(x) = diag(g_i(x_i)²)`.
    pub fn s_diagonal(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .enumerate()
            .map(|(i, &y)| {
                let g = self.g(i, y);
                g * g
            })
            .collect()
    }

    /// `log S_ii` as a one-dimensional function of `x_i`, with derivatives.
    pub fn log_s_component(&self, i: usize) -> OneDimComponent<T> {
        let w = self.clone();
        let w1 = self.clone();
        let w2 = self.clone();
        let two = T::c(2.0);
        OneDimComponent::custom(
            move |y| two * w.g(i, y).ln(),
            move |y| two * w1.log_derivative(i, y),
            move |y| {
                let l = w2.log_derivative(i, y);
                two * (w2.second_log_ratio(i, y) - l * l)
            },
        )
    }
}

/// A user-supplied `g_i` with optional derivatives.
#[derive(Clone)]
pub struct CustomCoord<T> {
    pub g: Fn1<T>,
    pub g1: Option<Fn1<T>>,
    pub g2: Option<Fn1<T>>,
}

impl<T: Scalar> CustomCoord<T> {
    pub fn new(g: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            g: Arc::new(g),
            g1: None,
            g2: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        g1: impl Fn(T) -> T + Send + Sync + 'static,
        g2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        self.g1 = Some(Arc::new(g1));
        self.g2 = Some(Arc::new(g2));
        self
    }
}

impl<T: Scalar> fmt::Debug for DiagonalWeight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiagonalWeight")
            .field("family", &self.family)
            .field("dim", &self.dim())
            .field("eps", &self.eps())
            .finish()
    }
}

pub(crate) fn adaptive_simpson<T: Scalar>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T, depth: u32) -> T {
    let half = T::c(0.5);
    let six = T::c(6.0);
    let fa = f(a);
    let fb = f(b);
    let m = half * (a + b);
    let fm = f(m);
    let whole = (b - a) / six * (fa + T::c(4.0) * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<T: Scalar>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::c(0.5);
    let six = T::c(6.0);
    let four = T::c(4.0);
    let m = half * (a + b);
    let lm = half * (a + m);
    let rm = half * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / six * (fa + four * flm + fm);
    let right = (b - m) / six * (fm + four * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::c(15.0) * tol {
        left + right + delta / T::c(15.0)
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, half * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, half * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_exp_weight() {
        let v = Potential::<f64>::gaussian(1).unwrap();
        let w = DiagonalWeight::exp_eps_u(&v, &[0.25]).unwrap();
        assert!((w.g(0, 2.0) - 0.5f64.exp()).abs() < 1e-14);
        assert!((w.g(0, 2.0) - 1.6487212707).abs() < 1e-9);
    }

    #[test]
    fn power_exp_weight_log_derivative() {
        let v = Potential::<f64>::power_product(1, 1.5, 0.0, 0.01).unwrap();
        let w = DiagonalWeight::exp_eps_u(&v, &[0.25]).unwrap();
        assert!((w.g1(0, 1.0) / w.g(0, 1.0) - 0.25).abs() < 1e-14);
        assert!((w.log_derivative(0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_weight() {
        let w = DiagonalWeight::<f64>::identity(2);
        assert_eq!(w.g(0, 3.0), 1.0);
        assert_eq!(w.g1(1, 3.0), 0.0);
        assert_eq!(w.antiderivative(0, -2.5), -2.5);
    }

    #[test]
    fn rejects_bad_eps_and_missing_structure() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        assert!(DiagonalWeight::exp_eps_u(&v, &[0.25, 0.5]).is_err());
        assert!(DiagonalWeight::exp_eps_u(&v, &[0.0, 0.2]).is_err());
        assert!(DiagonalWeight::exp_eps_u(&v, &[0.2]).is_err());
        let c = Potential::<f64>::from_expression(2, "x1^2 + x2^2").unwrap();
        assert_eq!(
            DiagonalWeight::exp_eps_u(&c, &[0.2, 0.2]).unwrap_err(),
            Error::MissingStructure
        );
    }

    #[test]
    fn exp_family_derivative_identities() {
        let v = Potential::<f64>::power_product(1, 1.5, 0.0, 0.01).unwrap();
        let w = DiagonalWeight::exp_eps_u(&v, &[0.3]).unwrap();
        let u = v.structure().unwrap().components[0].clone();
        for y in [-2.0, -0.3, 0.4, 1.7] {
            let g = w.g(0, y);
            assert!((w.g1(0, y) - 0.3 * u.d1(y) * g).abs() < 1e-13 * g);
            let expect = (0.3 * u.d2(y) + 0.09 * u.d1(y).powi(2)) * g;
            assert!((w.g2(0, y) - expect).abs() < 1e-13 * g.max(1.0));
        }
    }

    #[test]
    fn antiderivative_of_custom() {
        let w = DiagonalWeight::custom(vec![CustomCoord::new(|y: f64| 1.0 + y * y)]);
        assert!((w.antiderivative(0, 2.0) - (2.0 + 8.0 / 3.0)).abs() < 1e-10);
        assert!((w.g1(0, 0.5) - 1.0).abs() < 1e-7);
        assert!((w.g2(0, 0.5) - 2.0).abs() < 1e-5);
        assert!(!w.analytic(0));
    }
}
