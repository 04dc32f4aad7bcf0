//! 1D mesh over the interval plus a truncated exterior collar on each side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric grading ratio of the exterior collar cells, widening away
/// from the domain boundary.
pub const COLLAR_GRADING: f64 = 1.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mesh1D {
    pub omega: (f64, f64),
    pub collar_radius: f64,
    pub n_in: usize,
    pub n_ext: usize,
    /// Strictly increasing node coordinates covering [-R, R], with the
    /// domain endpoints among them.
    pub nodes: Vec<f64>,
}

/// Uniform interior cells on omega; `n_ext` geometrically graded cells per
/// side filling [-R, x_l] and [x_r, R].
pub fn build_mesh(omega: (f64, f64), collar_radius: f64, n_in: usize, n_ext: usize) -> Result<Mesh1D> {
    let (xl, xr) = omega;
    if !(xr > xl) {
        return Err(Error::Domain(format!("empty interval ({xl}, {xr})")));
    }
    if n_in < 2 || n_ext < 1 {
        return Err(Error::Domain(
            "mesh needs n_in >= 2 interior cells and n_ext >= 1 collar cells per side".into(),
        ));
    }
    if collar_radius <= xl.abs().max(xr.abs()) {
        return Err(Error::Domain(format!(
            "collar radius {collar_radius} does not exceed the domain (|x| up to {})",
            xl.abs().max(xr.abs())
        )));
    }

    // collar cell widths: w, w r, w r^2, ... summing to the collar length
    let graded = |len: f64| -> Vec<f64> {
        let r = COLLAR_GRADING;
        let w0 = len * (r - 1.0) / (r.powi(n_ext as i32) - 1.0);
        (0..n_ext).map(|j| w0 * r.powi(j as i32)).collect()
    };

    let mut nodes = Vec::with_capacity(n_in + 2 * n_ext + 1);
    let left_widths = graded(xl - (-collar_radius));
    let mut x = xl;
    let mut left = vec![];
    for w in &left_widths {
        x -= w;
        left.push(x);
    }
    // snap the outermost node exactly onto -R
    *left.last_mut().unwrap() = -collar_radius;
    nodes.extend(left.iter().rev());

    let h = (xr - xl) / n_in as f64;
    for i in 0..=n_in {
        nodes.push(xl + i as f64 * h);
    }

    let mut x = xr;
    for (j, w) in graded(collar_radius - xr).iter().enumerate() {
        x += w;
        nodes.push(if j + 1 == n_ext { collar_radius } else { x });
    }

    debug_assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    Ok(Mesh1D {
        omega,
        collar_radius,
        n_in,
        n_ext,
        nodes,
    })
}

impl Mesh1D {
    pub fn n_dofs(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes lying in the closed interval [x_l, x_r].
    pub fn interior_dofs(&self) -> Vec<usize> {
        let (xl, xr) = self.omega;
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i] >= xl && self.nodes[i] <= xr)
            .collect()
    }

    pub fn exterior_dofs(&self) -> Vec<usize> {
        let (xl, xr) = self.omega;
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i] < xl || self.nodes[i] > xr)
            .collect()
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Cell endpoints (left node index is the cell index).
    pub fn cell(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// A cell is interior when it lies inside omega.
    pub fn cell_is_interior(&self, e: usize) -> bool {
        let (a, b) = self.cell(e);
        let (xl, xr) = self.omega;
        a >= xl - 1e-14 && b <= xr + 1e-14
    }

    /// Cells covering omega, identified by left-node index.
    pub fn interior_cells(&self) -> Vec<usize> {
        (0..self.n_cells()).filter(|&e| self.cell_is_interior(e)).collect()
    }

    /// P1 interpolant of nodal values at x; zero outside [-R, R].
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let n = self.nodes.len();
        if x < self.nodes[0] || x > self.nodes[n - 1] {
            return 0.0;
        }
        let e = match self
            .nodes
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => return u[i],
            Err(i) => i - 1,
        };
        let (a, b) = self.cell(e);
        let t = (x - a) / (b - a);
        u[e] * (1.0 - t) + u[e + 1] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_example() {
        // omega = (-1, 1), R = 5, 4 interior cells, 2 collar cells per side
        let m = build_mesh((-1.0, 1.0), 5.0, 4, 2).unwrap();
        assert_eq!(m.interior_dofs().len(), 5);
        assert_eq!(m.exterior_dofs().len(), 4);
        assert_eq!(m.n_dofs(), 9);
        assert_eq!(m.nodes[0], -5.0);
        assert_eq!(*m.nodes.last().unwrap(), 5.0);
    }

    #[test]
    fn asymmetric_domain() {
        let m = build_mesh((0.0, 1.0), 2.0, 2, 1).unwrap();
        // collar is [-2, 0] and [1, 2]; endpoints of omega are nodes
        assert!(m.nodes.contains(&0.0));
        assert!(m.nodes.contains(&1.0));
        assert_eq!(m.nodes[0], -2.0);
        assert_eq!(*m.nodes.last().unwrap(), 2.0);
    }

    #[test]
    fn degenerate_radius_rejected() {
        assert!(build_mesh((-1.0, 1.0), 1.0, 4, 2).is_err());
    }

    #[test]
    fn nodes_strictly_increasing_and_graded() {
        let m = build_mesh((-1.0, 1.0), 8.0, 16, 8).unwrap();
        assert!(m.nodes.windows(2).all(|w| w[1] > w[0]));
        // first collar cell on the right is the narrowest of that side
        let (xl, xr) = m.omega;
        let right: Vec<f64> = m
            .nodes
            .iter()
            .copied()
            .filter(|&x| x >= xr - 1e-14)
            .collect();
        let widths: Vec<f64> = right.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths.windows(2).all(|w| w[1] > w[0]));
        let _ = xl;
    }

    #[test]
    fn interpolation_reproduces_linears() {
        let m = build_mesh((-1.0, 1.0), 4.0, 8, 3).unwrap();
        let u: Vec<f64> = m.nodes.iter().map(|x| 2.0 * x + 1.0).collect();
        for &x in &[-3.9, -1.0, -0.3, 0.77, 1.0, 2.5] {
            approx::assert_relative_eq!(m.interpolate(&u, x), 2.0 * x + 1.0, epsilon = 1e-12);
        }
        assert_eq!(m.interpolate(&u, 5.0), 0.0);
    }
}
