use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::{Potential, ScalarField};
use crate::oracle::grid::Grid;
use crate::Scalar;

/// Raw potential values below this would overflow `e^{−V}`.
pub const OVERFLOW_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// No-flux truncation at the box boundary.
    Neumann,
}

/// Finite-volume discretisation of `−L` as the generalised symmetric
/// problem `K u = λ M u`: conductances `e^{−V(midpoint)} h^{d−2}` on grid
/// edges, masses `e^{−V(node)} h^d` (halved per boundary axis), both divided
/// by the same normalising constant so the masses sum to one.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    grid: Grid<T>,
    stiffness: CsrMatrix<T>,
    mass: Vec<T>,
    boundary: Boundary,
    /// `V − min V` at the nodes.
    node_potential: Vec<T>,
    /// `V − min V` at forward edge midpoints, indexed `node·d + axis`.
    edge_potential: Vec<T>,
    /// Extra multiplicative term `q` in `−L + q`.
    potential_term: Option<Vec<T>>,
}

/// Product of boundary half-factors over the axes transverse to `axis`.
fn face_factor<T: Scalar>(grid: &Grid<T>, idx: &[usize], axis: usize) -> T {
    let half = T::c(0.5);
    idx.iter().enumerate().fold(T::one(), |w, (a, &j)| {
        if a != axis && (j == 0 || j == grid.n - 1) {
            w * half
        } else {
            w
        }
    })
}

/// Assembles the operator for `V` on `grid`.
pub fn discretize<T: Scalar>(v: &Potential<T>, grid: &Grid<T>) -> Result<DiscreteOperator<T>> {
    if v.dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: v.dim(),
        });
    }
    let d = grid.dim;
    let h = grid.spacing();
    let half_h = h * T::c(0.5);
    let floor = T::c(OVERFLOW_FLOOR);

    let raw_nodes: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|k| v.value(&grid.node(k)))
        .collect();
    let raw_edges: Vec<T> = (0..grid.len() * d)
        .into_par_iter()
        .map(|e| {
            let (k, a) = (e / d, e % d);
            if grid.axis_index(k, a) + 1 == grid.n {
                T::nan()
            } else {
                let mut x = grid.node(k);
                x[a] += half_h;
                v.value(&x)
            }
        })
        .collect();

    let mut v_min = T::infinity();
    for (k, &val) in raw_nodes.iter().enumerate() {
        if !(val >= floor) {
            return Err(Error::OverflowGuard {
                node: k,
                value: val.to_f64_lossy(),
            });
        }
        v_min = v_min.min(val);
    }
    for (e, &val) in raw_edges.iter().enumerate() {
        if val.is_nan() {
            continue;
        }
        if !(val >= floor) {
            return Err(Error::OverflowGuard {
                node: e / d,
                value: val.to_f64_lossy(),
            });
        }
        v_min = v_min.min(val);
    }
    let node_potential: Vec<T> = raw_nodes.iter().map(|&x| x - v_min).collect();
    let edge_potential: Vec<T> = raw_edges.iter().map(|&x| x - v_min).collect();

    let hd = h.powi(d as i32);
    let unnormalised: Vec<T> = (0..grid.len())
        .map(|k| grid.trapezoid_weight(k) * (-node_potential[k]).exp() * hd)
        .collect();
    let z: T = unnormalised.iter().copied().sum();
    let mass: Vec<T> = unnormalised.iter().map(|&m| m / z).collect();

    let cond_scale = h.powi(d as i32 - 2) / z;
    let rows: Vec<Vec<(usize, T)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let idx = grid.multi_index(k);
            let mut row = Vec::with_capacity(2 * d + 1);
            let mut diag = T::zero();
            for a in 0..d {
                let s = grid.stride(a);
                let f = face_factor(grid, &idx, a);
                if idx[a] > 0 {
                    let c = (-edge_potential[(k - s) * d + a]).exp() * cond_scale * f;
                    row.push((k - s, -c));
                    diag += c;
                }
                if idx[a] + 1 < grid.n {
                    let c = (-edge_potential[k * d + a]).exp() * cond_scale * f;
                    row.push((k + s, -c));
                    diag += c;
                }
            }
            row.push((k, diag));
            row
        })
        .collect();

    Ok(DiscreteOperator {
        grid: *grid,
        stiffness: CsrMatrix::from_rows(rows),
        mass,
        boundary: Boundary::Neumann,
        node_potential,
        edge_potential,
        potential_term: None,
    })
}

impl<T: Scalar> DiscreteOperator<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Whether constants lie in the kernel (no multiplicative term).
    pub fn annihilates_constants(&self) -> bool {
        self.potential_term.is_none()
    }

    /// `−L + q` with the same Dirichlet form: adds `m_i q(x_i)` to the
    /// stiffness diagonal.
    pub fn with_potential_term(&self, q: &[T]) -> Result<Self> {
        if q.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: q.len(),
            });
        }
        let extra: Vec<T> = self.mass.iter().zip(q).map(|(&m, &qi)| m * qi).collect();
        let mut out = self.clone();
        out.stiffness = self.stiffness.add_diagonal(&extra);
        out.potential_term = Some(q.to_vec());
        Ok(out)
    }

    /// `max_i |(K·1)_i| / max_i K_ii`.
    pub fn kernel_residual(&self) -> T {
        let ones = vec![T::one(); self.len()];
        let r = self.stiffness.mul_vec(&ones);
        let scale = self
            .stiffness
            .diagonal()
            .iter()
            .fold(T::zero(), |m, &x| m.max(x.abs()));
        let worst = r.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if scale > T::zero() {
            worst / scale
        } else {
            worst
        }
    }

    /// `fᵀ K f`.
    pub fn energy(&self, f: &[T]) -> T {
        let kf = self.stiffness.mul_vec(f);
        kf.iter().zip(f).map(|(&a, &b)| a * b).sum()
    }

    /// The mass-normalised symmetric matrix `M^{−1/2} K M^{−1/2}`, assembled
    /// from potential differences so that tail nodes do not underflow.
    pub fn reduced(&self) -> CsrMatrix<T> {
        let grid = &self.grid;
        let d = grid.dim;
        let h = grid.spacing();
        let inv_h2 = T::one() / (h * h);
        let vn = &self.node_potential;
        let ve = &self.edge_potential;
        let half = T::c(0.5);
        let rows: Vec<Vec<(usize, T)>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let idx = grid.multi_index(k);
                let wk = grid.trapezoid_weight(k);
                let mut row = Vec::with_capacity(2 * d + 1);
                let mut diag = T::zero();
                let mut push = |j: usize, e: T, f: T| {
                    let wj = grid.trapezoid_weight(j);
                    let off = (-e + (vn[k] + vn[j]) * half).exp() * f * inv_h2 / (wk * wj).sqrt();
                    row.push((j, -off));
                    diag += (-e + vn[k]).exp() * f * inv_h2 / wk;
                };
                for a in 0..d {
                    let s = grid.stride(a);
                    let f = face_factor(grid, &idx, a);
                    if idx[a] > 0 {
                        push(k - s, ve[(k - s) * d + a], f);
                    }
                    if idx[a] + 1 < grid.n {
                        push(k + s, ve[k * d + a], f);
                    }
                }
                if let Some(q) = &self.potential_term {
                    diag += q[k];
                }
                row.push((k, diag));
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    /// `√m_i`, computed in log space.
    pub fn sqrt_mass(&self) -> Vec<T> {
        self.mass.iter().map(|m| m.sqrt()).collect()
    }

    /// `log m_i` up to a common additive constant, finite even where `m_i`
    /// underflows.
    pub fn relative_log_mass(&self) -> Vec<T> {
        (0..self.len())
            .map(|k| self.grid.trapezoid_weight(k).ln() - self.node_potential[k])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_in_kernel_and_symmetric() {
        let v = Potential::<f64>::gaussian(2).unwrap();
        let g = Grid::new(2, 4.0, 21).unwrap();
        let op = discretize(&v, &g).unwrap();
        assert!(op.kernel_residual() < 1e-12);
        assert!(op.stiffness().max_asymmetry() < 1e-15);
        let total: f64 = op.mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        let f: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        assert!(op.energy(&f) >= 0.0);
    }

    #[test]
    fn reduced_matches_scaled_stiffness() {
        let v = Potential::<f64>::from_expression(2, "x1^2/2 + x2^4/4 + 0.3*x1*x2").unwrap();
        let g = Grid::new(2, 2.0, 17).unwrap();
        let op = discretize(&v, &g).unwrap();
        let inv_sqrt: Vec<f64> = op.mass().iter().map(|m| 1.0 / m.sqrt()).collect();
        let direct = op.stiffness().scale_symmetric(&inv_sqrt);
        let red = op.reduced();
        for (i, j, x) in direct.triplets() {
            assert!(
                (red.get(i, j) - x).abs() < 1e-9 * x.abs().max(1.0),
                "{i} {j}"
            );
        }
    }

    #[test]
    fn overflow_guard() {
        let v = Potential::<f64>::from_expression(1, "x1 - 800").unwrap();
        let g = Grid::new(1, 1.0, 16).unwrap();
        assert!(matches!(
            discretize(&v, &g),
            Err(Error::OverflowGuard { .. })
        ));
    }
}
