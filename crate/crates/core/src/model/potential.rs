use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::model::component::OneDimComponent;
use crate::model::expr::ExprField;
use crate::model::field::ScalarField;
use crate::model::interaction::InteractionTerm;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialFamily {
    Gaussian,
    ProductPerturbed,
    Custom,
}

/// `V(x) = Σ_i U_i(x_i) + φ(x)`.
#[derive(Clone)]
pub struct ProductStructure<T> {
    pub components: Vec<OneDimComponent<T>>,
    pub interaction: Option<InteractionTerm<T>>,
}

impl<T: Scalar> fmt::Debug for ProductStructure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductStructure")
            .field("components", &self.components)
            .field("interaction", &self.interaction)
            .finish()
    }
}

impl<T: Scalar> ProductStructure<T> {
    pub fn interaction_value(&self, x: &[T]) -> T {
        self.interaction
            .as_ref()
            .map_or(T::zero(), |phi| phi.value(x))
    }

    pub fn interaction_gradient(&self, x: &[T]) -> Vec<T> {
        self.interaction
            .as_ref()
            .map_or_else(|| vec![T::zero(); x.len()], |phi| phi.gradient(x))
    }

    pub fn interaction_hessian(&self, x: &[T]) -> DenseMatrix<T> {
        self.interaction
            .as_ref()
            .map_or_else(|| DenseMatrix::zeros(x.len()), |phi| phi.hessian(x))
    }

    /// `(c₁, c₂)`: `inf ρ(∇²φ)` and `max_i ‖∂_i φ‖_∞`.
    pub fn interaction_constants(&self) -> (T, T) {
        let d = self.components.len();
        self.interaction
            .as_ref()
            .map_or((T::zero(), T::zero()), |phi| {
                (phi.hessian_lower_bound(), phi.gradient_bound(d))
            })
    }
}

#[derive(Clone)]
enum Body<T> {
    Structured(ProductStructure<T>),
    Field(Arc<dyn ScalarField<T>>),
}

/// A smooth potential `V` on ℝ^d defining `μ ∝ e^{−V}`.
#[derive(Clone)]
pub struct Potential<T> {
    dim: usize,
    family: PotentialFamily,
    body: Body<T>,
    label: String,
}

impl<T: Scalar> Potential<T> {
    /// `V(x) = |x|²/2`.
    pub fn gaussian(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            dim: d,
            family: PotentialFamily::Gaussian,
            body: Body::Structured(ProductStructure {
                components: vec![OneDimComponent::quadratic(); d],
                interaction: None,
            }),
            label: format!("gaussian(d={d})"),
        })
    }

    /// `V(x) = Σ |x_i|^a/a + φ_τ(x)` with `a ∈ (1, 2)`.
    pub fn power_product(d: usize, a: T, c: T, tau: T) -> Result<Self> {
        check_dim(d)?;
        if !(a > T::one() && a < T::c(2.0)) {
            return Err(invalid(
                "a",
                format!("exponent must lie in (1, 2), got {a}"),
            ));
        }
        let interaction = InteractionTerm::new(c, tau)?;
        let component = OneDimComponent::power(a)?;
        Ok(Self {
            dim: d,
            family: PotentialFamily::ProductPerturbed,
            body: Body::Structured(ProductStructure {
                components: vec![component; d],
                interaction: Some(interaction),
            }),
            label: format!("power_product(d={d}, a={a}, c={c}, tau={tau})"),
        })
    }

    /// A general perturbed product potential.
    pub fn product(
        components: Vec<OneDimComponent<T>>,
        interaction: Option<InteractionTerm<T>>,
    ) -> Result<Self> {
        let d = components.len();
        check_dim(d)?;
        Ok(Self {
            dim: d,
            family: PotentialFamily::ProductPerturbed,
            body: Body::Structured(ProductStructure {
                components,
                interaction,
            }),
            label: format!("product(d={d})"),
        })
    }

    /// Potential given by an arbitrary scalar field.
    pub fn from_field(field: Arc<dyn ScalarField<T>>, label: impl Into<String>) -> Result<Self> {
        let d = field.dim();
        check_dim(d)?;
        Ok(Self {
            dim: d,
            family: PotentialFamily::Custom,
            body: Body::Field(field),
            label: label.into(),
        })
    }

    /// Potential given by a closed-form expression in `x1..xd`.
    pub fn from_expression(d: usize, src: &str) -> Result<Self> {
        check_dim(d)?;
        let field = ExprField::parse(src, d)?;
        Self::from_field(Arc::new(field), format!("custom({src})"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> PotentialFamily {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn structure(&self) -> Option<&ProductStructure<T>> {
        match &self.body {
            Body::Structured(s) => Some(s),
            Body::Field(_) => None,
        }
    }

    pub fn require_structure(&self) -> Result<&ProductStructure<T>> {
        self.structure().ok_or(Error::MissingStructure)
    }

    /// Whether `x` lies in the puncture of a singular one-dimensional component.
    pub fn in_puncture(&self, x: &[T]) -> bool {
        self.structure()
            .is_some_and(|s| s.components.iter().zip(x).any(|(u, &y)| u.in_puncture(y)))
    }

    /// Coordinates whose component has a singular curvature at 0.
    pub fn singular_axes(&self) -> Vec<usize> {
        self.structure().map_or_else(Vec::new, |s| {
            s.components
                .iter()
                .enumerate()
                .filter(|(_, u)| u.singular_at_origin())
                .map(|(i, _)| i)
                .collect()
        })
    }

    /// The same potential with component `i` replaced.
    pub fn with_component(&self, i: usize, component: OneDimComponent<T>) -> Result<Self> {
        let s = self.require_structure()?;
        let mut components = s.components.clone();
        components[i] = component;
        let mut p = Self::product(components, s.interaction.clone())?;
        p.label = format!("{}[U_{} replaced]", self.label, i + 1);
        Ok(p)
    }

    /// Adds `extra(x_i)` to the potential, keeping analytic derivatives.
    pub fn plus_axis_term(
        &self,
        i: usize,
        extra: OneDimComponent<T>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: i + 1,
            });
        }
        let base = self.clone();
        let field = AxisShifted {
            base,
            axis: i,
            extra,
        };
        let mut p = Self::from_field(Arc::new(field), label)?;
        p.family = PotentialFamily::Custom;
        Ok(p)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("d", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}

impl<T: Scalar> ScalarField<T> for Potential<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[T]) -> T {
        match &self.body {
            Body::Structured(s) => {
                s.components
                    .iter()
                    .zip(x)
                    .map(|(u, &y)| u.value(y))
                    .sum::<T>()
                    + s.interaction_value(x)
            }
            Body::Field(f) => f.value(x),
        }
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        match &self.body {
            Body::Structured(s) => {
                let mut g = s.interaction_gradient(x);
                for (gi, (u, &y)) in g.iter_mut().zip(s.components.iter().zip(x)) {
                    *gi += u.d1(y);
                }
                g
            }
            Body::Field(f) => f.gradient(x),
        }
    }

    fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        match &self.body {
            Body::Structured(s) => {
                let mut h = s.interaction_hessian(x);
                for (i, (u, &y)) in s.components.iter().zip(x).enumerate() {
                    h[(i, i)] += u.d2(y);
                }
                h
            }
            Body::Field(f) => f.hessian(x),
        }
    }

    fn analytic_derivatives(&self) -> bool {
        match &self.body {
            Body::Structured(_) => true,
            Body::Field(f) => f.analytic_derivatives(),
        }
    }
}

impl<T: Scalar> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("dim", &self.dim)
            .field("family", &self.family)
            .field("label", &self.label)
            .field("structure", &self.structure())
            .finish()
    }
}

/// `V(x) + extra(x_axis)`.
struct AxisShifted<T> {
    base: Potential<T>,
    axis: usize,
    extra: OneDimComponent<T>,
}

impl<T: Scalar> ScalarField<T> for AxisShifted<T> {
    fn dim(&self) -> usize {
        self.base.dim
    }

    fn value(&self, x: &[T]) -> T {
        self.base.value(x) + self.extra.value(x[self.axis])
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = self.base.gradient(x);
        g[self.axis] += self.extra.d1(x[self.axis]);
        g
    }

    fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        let mut h = self.base.hessian(x);
        h[(self.axis, self.axis)] += self.extra.d2(x[self.axis]);
        h
    }

    fn analytic_derivatives(&self) -> bool {
        self.base.analytic_derivatives()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_values() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        assert_eq!(v.value(&[0.0, 0.0]), 0.0);
        assert_eq!(v.hessian(&[0.3, 0.1]), DenseMatrix::identity(2));
        let v3 = Potential::<f64>::gaussian(3).unwrap();
        assert_eq!(v3.value(&[1.0, 2.0, 2.0]), 4.5);
        let v1 = Potential::<f64>::gaussian(1).unwrap();
        assert_eq!(v1.gradient(&[0.7]), vec![0.7]);
    }

    #[test]
    fn power_product_values() {
        let v = Potential::<f64>::power_product(2, 1.5, 0.0, 0.01).unwrap();
        assert!((v.value(&[1.0, 1.0]) - 2.0 / 1.5).abs() < 1e-12);
        let v1 = Potential::<f64>::power_product(1, 1.5, 0.0, 0.01).unwrap();
        assert!((v1.gradient(&[4.0])[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn power_product_rejections() {
        assert!(Potential::<f64>::power_product(2, 2.0, 0.1, 0.01).is_err());
        assert!(Potential::<f64>::power_product(2, 1.0, 0.1, 0.01).is_err());
        assert!(Potential::<f64>::power_product(2, 1.5, 0.1, 0.0).is_err());
        assert!(Potential::<f64>::power_product(0, 1.5, 0.1, 0.01).is_err());
    }

    #[test]
    fn interaction_gradient_bounded() {
        let v = Potential::<f64>::power_product(2, 1.5, 0.1, 0.01).unwrap();
        let phi = v.structure().unwrap().interaction.clone().unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let x = [-5.0 + 10.0 * i as f64 / 49.0, -5.0 + 10.0 * j as f64 / 49.0];
                assert!(phi.gradient(&x)[0].abs() <= 0.2 + 1e-15);
            }
        }
    }

    #[test]
    fn expression_potential() {
        let v = Potential::<f64>::from_expression(2, "x1^2/2 + x2^2/2 + x1^4/4").unwrap();
        assert_eq!(v.family(), PotentialFamily::Custom);
        assert!(v.structure().is_none());
        assert!((v.value(&[1.0, 2.0]) - 2.75).abs() < 1e-15);
        assert!(Potential::<f64>::from_expression(1, "x2").is_err());
    }

    #[test]
    fn axis_term_shift() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let extra = OneDimComponent::quadratic().scaled(0.5).unwrap();
        let w = v.plus_axis_term(1, extra, "shifted").unwrap();
        assert!((w.value(&[1.0, 2.0]) - (2.5 + 1.0)).abs() < 1e-15);
        assert!((w.hessian(&[1.0, 2.0])[(1, 1)] - 1.5).abs() < 1e-15);
    }
}
