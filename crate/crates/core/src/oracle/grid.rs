use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Scalar;

/// Default cap on the total number of nodes.
pub const DEFAULT_NODE_CAP: usize = 4_000_000;

/// Uniform tensor grid on `[−R, R]^d`, `n` points per axis. Nodes are
/// numbered lexicographically with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid<T> {
    pub dim: usize,
    pub radius: T,
    pub n: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, radius: T, n: usize) -> Result<Self> {
        Self::with_cap(dim, radius, n, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(dim: usize, radius: T, n: usize, cap: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be at least 1"));
        }
        if n < 16 {
            return Err(invalid(
                "n",
                format!("need at least 16 points per axis, got {n}"),
            ));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(invalid("radius", "must be positive and finite"));
        }
        let nodes = n
            .checked_pow(dim as u32)
            .filter(|&m| m <= cap)
            .ok_or(Error::GridTooLarge {
                nodes: (n as f64).powi(dim as i32) as usize,
                cap,
            })?;
        debug_assert!(nodes >= 16);
        Ok(Self { dim, radius, n })
    }

    /// Default desk-scale grids: `d=1 → 4001 on [−8,8]`, `d=2 → 161² on
    /// [−7,7]²`, `d=3 → 41³ on [−5,5]³`.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            1 => Self::new(1, T::c(8.0), 4001),
            2 => Self::new(2, T::c(7.0), 161),
            3 => Self::new(3, T::c(5.0), 41),
            _ => Err(invalid("dim", "oracle grids are limited to d ≤ 3")),
        }
    }

    pub fn spacing(&self) -> T {
        T::c(2.0) * self.radius / T::from_usize_lossy(self.n - 1)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of index `j` along any axis.
    pub fn coord(&self, j: usize) -> T {
        -self.radius + self.spacing() * T::from_usize_lossy(j)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.stride(axis)) % self.n
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        (0..self.dim).map(|a| self.axis_index(node, a)).collect()
    }

    pub fn node(&self, node: usize) -> Vec<T> {
        (0..self.dim)
            .map(|a| self.coord(self.axis_index(node, a)))
            .collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn(&[T]) -> T) -> Vec<T> {
        self.nodes().map(|x| f(&x)).collect()
    }

    /// Trapezoid weight of a node: `2^{−(number of boundary axes)}`.
    pub fn trapezoid_weight(&self, node: usize) -> T {
        let half = T::c(0.5);
        (0..self.dim).fold(T::one(), |w, a| {
            let j = self.axis_index(node, a);
            if j == 0 || j == self.n - 1 {
                w * half
            } else {
                w
            }
        })
    }

    /// The grid with every other node removed (spacing doubled). Requires
    /// odd `n`.
    pub fn coarsened(&self) -> Result<Self> {
        if self.n.is_multiple_of(2) {
            return Err(invalid("n", "coarsening needs an odd number of points"));
        }
        Self::new(self.dim, self.radius, self.n.div_ceil(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_spacing() {
        let g = Grid::<f64>::new(2, 1.0, 21).unwrap();
        assert_eq!(g.len(), 441);
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.node(0), vec![-1.0, -1.0]);
        assert_eq!(g.multi_index(22), vec![1, 1]);
        assert_eq!(g.trapezoid_weight(0), 0.25);
        assert_eq!(g.trapezoid_weight(1), 0.5);
        assert_eq!(g.trapezoid_weight(22), 1.0);
        let fine = Grid::<f64>::new(2, 1.0, 41).unwrap();
        assert_eq!(fine.coarsened().unwrap().n, 21);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::<f64>::new(1, 1.0, 8).is_err());
        assert!(matches!(
            Grid::<f64>::new(3, 1.0, 200),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(Grid::<f64>::new(1, -1.0, 100).is_err());
    }
}
