//! Derivative-free minimisation helpers for the infimum searches.

use crate::Scalar;

/// Golden-section minimisation of `f` on `[a, b]` down to a bracket of `tol`.
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::c(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Result of a one-dimensional grid-plus-refinement search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min1d<T> {
    pub argmin: T,
    pub value: T,
    pub refined: bool,
}

/// Minimises `f` over `[lo, hi]`: scan `n` equispaced points (skipping those
/// where `excluded` holds), then golden-section refine inside the two cells
/// around the best point. Refinement only ever lowers the value.
pub fn grid_refine_1d<T: Scalar>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    n: usize,
    excluded: impl Fn(T) -> bool,
    tol: T,
) -> Min1d<T> {
    assert!(n >= 2);
    let step = (hi - lo) / T::from_usize_lossy(n - 1);
    let mut best = Min1d {
        argmin: lo,
        value: T::infinity(),
        refined: false,
    };
    for k in 0..n {
        let y = lo + step * T::from_usize_lossy(k);
        if excluded(y) {
            continue;
        }
        let v = f(y);
        if v < best.value {
            best.argmin = y;
            best.value = v;
        }
    }
    let a = (best.argmin - step).max(lo);
    let b = (best.argmin + step).min(hi);
    let guarded = |y: T| {
        if excluded(y) {
            T::infinity()
        } else {
            f(y)
        }
    };
    let (y, v) = golden_section(guarded, a, b, tol);
    if v < best.value {
        best = Min1d {
            argmin: y,
            value: v,
            refined: true,
        };
    }
    best
}

/// Cyclic coordinate descent from `start`, each line search confined to
/// `[x_i − radius, x_i + radius] ∩ [lo, hi]`. Stops when a full sweep moves
/// no coordinate by more than `tol`.
pub fn coordinate_descent<T: Scalar>(
    f: impl Fn(&[T]) -> T,
    start: &[T],
    radius: T,
    lo: T,
    hi: T,
    tol: T,
) -> (Vec<T>, T) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut r = radius;
    for _sweep in 0..200 {
        let mut moved = T::zero();
        for i in 0..x.len() {
            let xi = x[i];
            let a = (xi - r).max(lo);
            let b = (xi + r).min(hi);
            let (best, val) = golden_section(
                |t| {
                    let mut y = x.clone();
                    y[i] = t;
                    f(&y)
                },
                a,
                b,
                tol * T::c(0.1),
            );
            if val < fx {
                moved = moved.max((best - xi).abs());
                x[i] = best;
                fx = val;
            }
        }
        if moved <= tol {
            break;
        }
        // shrink toward the local basin once moves become small
        r = (moved * T::c(4.0)).max(tol * T::c(10.0)).min(radius);
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_min() {
        let (x, v) = golden_section(|y: f64| (y - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_refine_skips_exclusion() {
        let m = grid_refine_1d(|y: f64| y.abs(), -1.0, 1.0, 101, |y| y.abs() < 0.05, 1e-12);
        assert!(m.value >= 0.05 - 1e-12 && m.value < 0.0600001);
    }

    #[test]
    fn coordinate_descent_on_bowl() {
        let f = |x: &[f64]| (x[0] - 0.2).powi(2) + 2.0 * (x[1] + 0.1).powi(2) + 0.5 * x[0] * x[1];
        let (x, _) = coordinate_descent(f, &[0.0, 0.0], 0.5, -1.0, 1.0, 1e-10);
        // stationary point: 2(x0-0.2) + 0.5 x1 = 0, 4(x1+0.1) + 0.5 x0 = 0
        let x1 = -0.5 / 3.875;
        let x0 = 0.2 - 0.25 * x1;
        assert!((x[0] - x0).abs() < 1e-7 && (x[1] - x1).abs() < 1e-7);
    }
}
