use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Scalar;

/// Cap returned by `d2` of a power component inside the puncture.
pub const CURVATURE_CAP: f64 = 1e12;
/// `|y|` below which the power component's `d2` is capped.
pub const CAP_RADIUS: f64 = 1e-12;
/// Radius of the symmetric puncture excluded from every infimum search.
pub const PUNCTURE_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentFamily {
    Power,
    Quadratic,
    Custom,
}

type Fn1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Kind<T> {
    Power {
        a: T,
    },
    Quadratic,
    Custom {
        value: Fn1<T>,
        d1: Fn1<T>,
        d2: Fn1<T>,
    },
}

/// One-dimensional potential `y ↦ s·U(y)` with its first two derivatives.
///
/// `s` is a positive scale factor (1 unless the component was produced by
/// [`OneDimComponent::scaled`]).
#[derive(Clone)]
pub struct OneDimComponent<T> {
    kind: Kind<T>,
    scale: T,
    convex: bool,
}

impl<T: Scalar> OneDimComponent<T> {
    /// `|y|^a / a`.
    pub fn power(a: T) -> Result<Self> {
        if !(a > T::one()) || !a.is_finite() {
            return Err(invalid(
                "a",
                format!("power exponent must exceed 1, got {a}"),
            ));
        }
        Ok(Self::finish(Kind::Power { a }, T::one()))
    }

    /// `y² / 2`.
    pub fn quadratic() -> Self {
        Self::finish(Kind::Quadratic, T::one())
    }

    pub fn custom(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        d1: impl Fn(T) -> T + Send + Sync + 'static,
        d2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::finish(
            Kind::Custom {
                value: Arc::new(value),
                d1: Arc::new(d1),
                d2: Arc::new(d2),
            },
            T::one(),
        )
    }

    /// `y²/2 + y⁴/4`, the quartic perturbation of the Gaussian used across tests.
    pub fn quadratic_plus_quartic() -> Self {
        let quarter = T::c(0.25);
        let half = T::c(0.5);
        let three = T::c(3.0);
        Self::custom(
            move |y| half * y * y + quarter * y.powi(4),
            move |y| y + y.powi(3),
            move |y| T::one() + three * y * y,
        )
    }

    /// The same component multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero()) {
            return Err(invalid("factor", "scale factor must be positive"));
        }
        Ok(Self::finish(self.kind.clone(), self.scale * factor))
    }

    fn finish(kind: Kind<T>, scale: T) -> Self {
        let mut c = Self {
            kind,
            scale,
            convex: true,
        };
        c.convex = c.sampled_convexity();
        c
    }

    fn sampled_convexity(&self) -> bool {
        let n = 2001;
        (0..n).all(|k| {
            let y = T::c(-10.0 + 20.0 * k as f64 / (n - 1) as f64);
            let v = self.d2(y);
            v.is_nan() || v >= T::zero()
        })
    }

    pub fn family(&self) -> ComponentFamily {
        match self.kind {
            Kind::Power { .. } => ComponentFamily::Power,
            Kind::Quadratic => ComponentFamily::Quadratic,
            Kind::Custom { .. } => ComponentFamily::Custom,
        }
    }

    /// Power exponent for the power family.
    pub fn exponent(&self) -> Option<T> {
        match self.kind {
            Kind::Power { a } => Some(a),
            _ => None,
        }
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn convex(&self) -> bool {
        self.convex
    }

    /// Whether `y` lies inside the excluded puncture around a singular point.
    pub fn in_puncture(&self, y: T) -> bool {
        matches!(self.kind, Kind::Power { a } if a < T::c(2.0)) && y.abs() < T::c(PUNCTURE_RADIUS)
    }

    /// Whether `d2` blows up at the origin.
    pub fn singular_at_origin(&self) -> bool {
        matches!(self.kind, Kind::Power { a } if a < T::c(2.0))
    }

    pub fn value(&self, y: T) -> T {
        self.scale
            * match &self.kind {
                Kind::Power { a } => y.abs().powf(*a) / *a,
                Kind::Quadratic => T::c(0.5) * y * y,
                Kind::Custom { value, .. } => value(y),
            }
    }

    pub fn d1(&self, y: T) -> T {
        self.scale
            * match &self.kind {
                Kind::Power { a } => {
                    if y == T::zero() {
                        T::zero()
                    } else {
                        y.signum() * y.abs().powf(*a - T::one())
                    }
                }
                Kind::Quadratic => y,
                Kind::Custom { d1, .. } => d1(y),
            }
    }

    pub fn d2(&self, y: T) -> T {
        self.scale
            * match &self.kind {
                Kind::Power { a } => {
                    let cap = T::c(CURVATURE_CAP);
                    if y.abs() < T::c(CAP_RADIUS) && *a < T::c(2.0) {
                        cap
                    } else {
                        ((*a - T::one()) * y.abs().powf(*a - T::c(2.0))).min(cap)
                    }
                }
                Kind::Quadratic => T::one(),
                Kind::Custom { d2, .. } => d2(y),
            }
    }
}

impl<T: Scalar> fmt::Debug for OneDimComponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneDimComponent")
            .field("family", &self.family())
            .field("exponent", &self.exponent())
            .field("scale", &self.scale)
            .field("convex", &self.convex)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_closed_forms() {
        let u = OneDimComponent::<f64>::power(1.5).unwrap();
        assert!((u.value(1.0) - 1.0 / 1.5).abs() < 1e-15);
        assert!((u.d1(4.0) - 2.0).abs() < 1e-15);
        assert!((u.d1(-4.0) + 2.0).abs() < 1e-15);
        assert!((u.d2(4.0) - 0.25).abs() < 1e-15);
        assert_eq!(u.d2(0.0), CURVATURE_CAP);
        assert!(u.convex());
        assert!(u.in_puncture(1e-10) && !u.in_puncture(1e-8));
    }

    #[test]
    fn power_rejects_small_exponent() {
        assert!(OneDimComponent::<f64>::power(1.0).is_err());
        assert!(OneDimComponent::<f64>::power(0.5).is_err());
    }

    #[test]
    fn scaled_component() {
        let u = OneDimComponent::<f64>::power(1.5)
            .unwrap()
            .scaled(0.5)
            .unwrap();
        assert_eq!(u.family(), ComponentFamily::Power);
        assert!((u.d1(4.0) - 1.0).abs() < 1e-15);
        assert!((u.value(1.0) - 0.5 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_custom_is_flagged() {
        let u = OneDimComponent::custom(|y: f64| y.cos(), |y| -y.sin(), |y| -y.cos());
        assert!(!u.convex());
        assert!(OneDimComponent::<f64>::quadratic_plus_quartic().convex());
    }
}
