//! Assembly of the mass, stiffness and mu-superposed Gagliardo matrices.
//!
//! The Gagliardo form is integrated pairwise over mesh cells. For a cell
//! pair A x B with A left of B, the double integral is reduced to a single
//! integral in t = y - x: the x-moments of the P1 basis products are
//! polynomials and are integrated exactly, leaving a 1D kernel integral
//! handled by geometrically graded Gauss panels. Identical cells and the
//! corner piece of touching cells have closed forms.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{cns_constant, SpectralMeasure};
use crate::mesh::Mesh1D;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Minimum number of geometric panels per smooth t-piece near the
    /// kernel singularity.
    pub near_singular_subdivisions: usize,
    /// Base Gauss order per panel.
    pub far_field_order: usize,
    /// Relative convergence target for each cell-pair block.
    pub tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            near_singular_subdivisions: 6,
            far_field_order: 4,
            tol: 1e-9,
        }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        if self.near_singular_subdivisions < 1 {
            return Err(Error::Domain("near_singular_subdivisions must be >= 1".into()));
        }
        if self.far_field_order < 2 {
            return Err(Error::Domain("far_field_order must be >= 2".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(Error::Domain("quadrature tolerance must lie in (0, 1e-2]".into()));
        }
        Ok(())
    }
}

/// Assembled bilinear forms of the operator: L2(Omega) mass, classical
/// stiffness on Omega, and the mu-superposed Gagliardo form over all DOFs.
#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub gagliardo: DMatrix<f64>,
    pub alpha: f64,
}

impl OperatorMatrices {
    pub fn assemble(
        mesh: &Mesh1D,
        measure: &SpectralMeasure,
        alpha: f64,
        quad: &QuadratureOptions,
    ) -> Result<Self> {
        quad.validate()?;
        Ok(OperatorMatrices {
            mass: assemble_mass(mesh),
            stiffness: assemble_stiffness(mesh),
            gagliardo: assemble_gagliardo(mesh, measure, quad)?,
            alpha,
        })
    }

    /// The quadratic form of the norm: M + alpha K + B.
    pub fn norm_matrix(&self) -> DMatrix<f64> {
        &self.mass + &self.stiffness * self.alpha + &self.gagliardo
    }

    pub fn n_dofs(&self) -> usize {
        self.mass.nrows()
    }
}

/// ||u||_{alpha,mu} = sqrt(u' (M + alpha K + B) u).
pub fn anorm(u: &DVector<f64>, matrices: &OperatorMatrices) -> f64 {
    let a = u.dot(&(&matrices.mass * u));
    let k = u.dot(&(&matrices.stiffness * u));
    let b = u.dot(&(&matrices.gagliardo * u));
    (a + matrices.alpha * k + b).max(0.0).sqrt()
}

/// Exact P1 mass matrix over the cells covering Omega; exterior rows and
/// columns are zero.
pub fn assemble_mass(mesh: &Mesh1D) -> DMatrix<f64> {
    let n = mesh.n_dofs();
    let mut m = DMatrix::zeros(n, n);
    for e in mesh.interior_cells() {
        let (a, b) = mesh.cell(e);
        let h = b - a;
        m[(e, e)] += h / 3.0;
        m[(e + 1, e + 1)] += h / 3.0;
        m[(e, e + 1)] += h / 6.0;
        m[(e + 1, e)] += h / 6.0;
    }
    m
}

/// Standard P1 stiffness over the cells covering Omega.
pub fn assemble_stiffness(mesh: &Mesh1D) -> DMatrix<f64> {
    let n = mesh.n_dofs();
    let mut k = DMatrix::zeros(n, n);
    for e in mesh.interior_cells() {
        let (a, b) = mesh.cell(e);
        let h = b - a;
        k[(e, e)] += 1.0 / h;
        k[(e + 1, e + 1)] += 1.0 / h;
        k[(e, e + 1)] -= 1.0 / h;
        k[(e + 1, e)] -= 1.0 / h;
    }
    k
}

/// Kernel atoms reduced to (coefficient, 2s) pairs, with the coefficient
/// carrying the measure weight and c_{N,s}/2 of the weak form.
fn kernel_atoms(measure: &SpectralMeasure) -> Result<Vec<(f64, f64)>> {
    measure
        .atoms()
        .iter()
        .filter(|(_, c)| *c > 0.0)
        .map(|&(s, c)| Ok((c * cns_constant(1, s)? / 2.0, 2.0 * s)))
        .collect()
}

fn kernel_eval(atoms: &[(f64, f64)], t: f64) -> f64 {
    atoms.iter().map(|&(c, two_s)| c * t.powf(-1.0 - two_s)).sum()
}

/// mu-superposed Gagliardo matrix over the truncated cross-domain region:
/// all cell pairs except exterior x exterior.
pub fn assemble_gagliardo(
    mesh: &Mesh1D,
    measure: &SpectralMeasure,
    quad: &QuadratureOptions,
) -> Result<DMatrix<f64>> {
    quad.validate()?;
    let n = mesh.n_dofs();
    let atoms = kernel_atoms(measure)?;
    if atoms.is_empty() {
        return Ok(DMatrix::zeros(n, n));
    }

    let n_cells = mesh.n_cells();
    let interior: Vec<bool> = (0..n_cells).map(|e| mesh.cell_is_interior(e)).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..n_cells {
        for b in a..n_cells {
            if interior[a] || interior[b] {
                pairs.push((a, b));
            }
        }
    }

    // per-pair blocks in deterministic order, parallel over pairs
    let blocks: Vec<Result<PairBlock>> = pairs
        .par_iter()
        .map(|&(a, b)| pair_block(mesh, a, b, &atoms, quad))
        .collect();

    let mut g = DMatrix::zeros(n, n);
    for block in blocks {
        let block = block?;
        // the off-diagonal pair (b, a) contributes the same block by the
        // x <-> y symmetry of the integrand
        let factor = if block.identical { 1.0 } else { 2.0 };
        for (ri, &gi) in block.nodes.iter().enumerate() {
            for (ci, &gj) in block.nodes.iter().enumerate() {
                g[(gi, gj)] += factor * block.values[ri][ci];
            }
        }
    }
    // enforce exact symmetry against rounding in the reduction
    let gt = g.transpose();
    g = (g + gt) * 0.5;
    Ok(g)
}

struct PairBlock {
    nodes: Vec<usize>,
    values: Vec<Vec<f64>>,
    identical: bool,
}

/// Local basis differences d_i(x, y) with y = x + t, written in the shifted
/// coordinate xi = x - a0 as d_i = A_i(t) + B_i xi. The shift keeps every
/// coefficient of the order of the cell separations, which avoids loss of
/// significance for small cells far from the origin. For a node shared by
/// both cells the two linear pieces accumulate.
struct LocalBasis {
    nodes: Vec<usize>,
    /// constant part split as A_i(t) = a0_i + at_i * t
    a0: Vec<f64>,
    at: Vec<f64>,
    b: Vec<f64>,
}

fn local_basis(mesh: &Mesh1D, a: usize, bcell: usize) -> LocalBasis {
    let (a0, a1) = mesh.cell(a);
    let (b0, b1) = mesh.cell(bcell);
    let ha = a1 - a0;
    let hb = b1 - b0;
    let mut lb = LocalBasis {
        nodes: Vec::with_capacity(4),
        a0: Vec::with_capacity(4),
        at: Vec::with_capacity(4),
        b: Vec::with_capacity(4),
    };
    let mut push = |node: usize, c0: f64, ct: f64, cx: f64| {
        if let Some(k) = lb.nodes.iter().position(|&n| n == node) {
            lb.a0[k] += c0;
            lb.at[k] += ct;
            lb.b[k] += cx;
        } else {
            lb.nodes.push(node);
            lb.a0.push(c0);
            lb.at.push(ct);
            lb.b.push(cx);
        }
    };
    // phi on the x-cell: phi_a = (a1 - x)/ha = 1 - xi/ha,
    // phi_{a+1} = (x - a0)/ha = xi/ha
    push(a, 1.0, 0.0, -1.0 / ha);
    push(a + 1, 0.0, 0.0, 1.0 / ha);
    // minus phi on the y-cell, y = x + t = a0 + xi + t:
    // -phi_b(y) = -((b1 - a0) - xi - t)/hb, -phi_{b+1}(y) = -(xi + t - (b0 - a0))/hb
    push(bcell, -(b1 - a0) / hb, 1.0 / hb, 1.0 / hb);
    push(bcell + 1, (b0 - a0) / hb, -1.0 / hb, -1.0 / hb);
    lb
}

/// x-moment block at fixed t: G_ij(t) = int_{x0}^{x1} d_i d_j dxi. Written
/// around the window midpoint, where the odd cross terms drop out:
/// G_ij = L d_i(mid) d_j(mid) + B_i B_j L^3 / 12. The hat differences
/// d_i(mid) are of order one, so the product stays well conditioned even
/// when the slopes B_i are huge (tiny cells far from the origin).
fn moment_block(lb: &LocalBasis, t: f64, x0: f64, x1: f64, out: &mut [[f64; 4]; 4]) {
    let len = x1 - x0;
    let mid = 0.5 * (x0 + x1);
    let cubic = len * len * len / 12.0;
    let m = lb.nodes.len();
    let mut dm = [0.0f64; 4];
    for i in 0..m {
        dm[i] = lb.a0[i] + lb.at[i] * t + lb.b[i] * mid;
    }
    for i in 0..m {
        for j in i..m {
            let v = dm[i] * dm[j] * len + lb.b[i] * lb.b[j] * cubic;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
}

fn pair_block(
    mesh: &Mesh1D,
    a: usize,
    b: usize,
    atoms: &[(f64, f64)],
    quad: &QuadratureOptions,
) -> Result<PairBlock> {
    if a == b {
        return Ok(identical_block(mesh, a, atoms));
    }
    let (a0, a1) = mesh.cell(a);
    let (b0, b1) = mesh.cell(b);
    let lb = local_basis(mesh, a, b);
    let m = lb.nodes.len();

    // t-pieces where the x-limits x0 = max(a0, b0 - t), x1 = min(a1, b1 - t)
    // change expression
    let mut cuts = [b0 - a1, b0 - a0, b1 - a1, b1 - a0];
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let gap = cuts[0].max(0.0);
    let touching = cuts[0] <= 1e-14 * (b1 - a0);

    let mut values = vec![vec![0.0; m]; m];
    let mut scratch = [[0.0f64; 4]; 4];

    if touching {
        // corner piece [0, tm]: every d_i scales linearly in t, so the
        // block is exactly const * t^3 and the kernel integral is closed
        let tm = cuts[1];
        let xi0 = ((b0 - a0) - tm).max(0.0);
        let xi1 = (a1 - a0).min((b1 - a0) - tm);
        moment_block(&lb, tm, xi0, xi1, &mut scratch);
        let kfac: f64 = atoms
            .iter()
            .map(|&(c, two_s)| c * tm.powf(-two_s) / (3.0 - two_s))
            .sum();
        for i in 0..m {
            for j in 0..m {
                values[i][j] += kfac * scratch[i][j];
            }
        }
    }

    // remaining pieces, integrated with geometric Gauss panels and a
    // refinement loop on the Gauss order
    let pieces: Vec<(f64, f64)> = {
        let start = if touching { 1 } else { 0 };
        let mut ps = Vec::new();
        for w in cuts[start..].windows(2) {
            if w[1] > w[0] + 1e-15 * (b1 - a0) {
                ps.push((w[0].max(gap), w[1]));
            }
        }
        ps
    };

    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut order = quad.far_field_order.max(4);
    let mut increment = f64::INFINITY;
    for _ in 0..6 {
        let mut acc = vec![vec![0.0; m]; m];
        for &(t0, t1) in &pieces {
            integrate_piece(
                &lb,
                atoms,
                t0,
                t1,
                a0,
                a1,
                b0,
                b1,
                order,
                quad.near_singular_subdivisions,
                &mut acc,
                &mut scratch,
            );
        }
        if let Some(p) = &prev {
            let scale: f64 = acc
                .iter()
                .flatten()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                .max(1e-300);
            increment = acc
                .iter()
                .flatten()
                .zip(p.iter().flatten())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
                / scale;
            if increment <= quad.tol {
                prev = Some(acc);
                break;
            }
        }
        prev = Some(acc);
        order = order * 2 - order / 2; // 4 -> 6 -> 9 -> 14 -> 21 -> 32
    }
    if increment > quad.tol {
        return Err(Error::Assembly {
            pair_a: a,
            pair_b: b,
            increment,
        });
    }
    let acc = prev.unwrap();
    for i in 0..m {
        for j in 0..m {
            values[i][j] += acc[i][j];
        }
    }
    Ok(PairBlock {
        nodes: lb.nodes,
        values,
        identical: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn integrate_piece(
    lb: &LocalBasis,
    atoms: &[(f64, f64)],
    t0: f64,
    t1: f64,
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
    order: usize,
    min_panels: usize,
    acc: &mut [Vec<f64>],
    scratch: &mut [[f64; 4]; 4],
) {
    // geometric panels from t0 when the kernel varies over decades
    let mut panels = vec![];
    if t1 / t0 > 4.0 {
        let mut lo = t0;
        while lo * 2.0 < t1 {
            panels.push((lo, lo * 2.0));
            lo *= 2.0;
        }
        panels.push((lo, t1));
    } else {
        let k = min_panels.max(1);
        for i in 0..k {
            let lo = t0 + (t1 - t0) * i as f64 / k as f64;
            let hi = t0 + (t1 - t0) * (i + 1) as f64 / k as f64;
            panels.push((lo, hi));
        }
    }
    let (gx, gw) = gauss_legendre(order);
    let m = lb.nodes.len();
    // x-window in the shifted coordinate xi = x - a0
    let (ha, b0r, b1r) = (a1 - a0, b0 - a0, b1 - a0);
    for (lo, hi) in panels {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, w) in gx.iter().zip(&gw) {
            let t = mid + half * x;
            let wt = w * half * kernel_eval(atoms, t);
            let x0 = (b0r - t).max(0.0);
            let x1 = ha.min(b1r - t);
            if x1 <= x0 {
                continue;
            }
            moment_block(lb, t, x0, x1, scratch);
            for i in 0..m {
                for j in 0..m {
                    acc[i][j] += wt * scratch[i][j];
                }
            }
        }
    }
}

/// Identical cell [p, q]: basis differences are slope_i (x - y), so the
/// integral is slope_i slope_j * 2 h^{3-2s} / ((2-2s)(3-2s)).
fn identical_block(mesh: &Mesh1D, e: usize, atoms: &[(f64, f64)]) -> PairBlock {
    let (p, q) = mesh.cell(e);
    let h = q - p;
    let base: f64 = atoms
        .iter()
        .map(|&(c, two_s)| c * 2.0 * h.powf(3.0 - two_s) / ((2.0 - two_s) * (3.0 - two_s)))
        .sum();
    let slopes = [-1.0 / h, 1.0 / h];
    let mut values = vec![vec![0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            values[i][j] = slopes[i] * slopes[j] * base;
        }
    }
    PairBlock {
        nodes: vec![e, e + 1],
        values,
        identical: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;

    fn unit_vec(n: usize) -> DVector<f64> {
        DVector::from_element(n, 1.0)
    }

    #[test]
    fn mass_closed_form_on_uniform_mesh() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 4, 2).unwrap();
        let m = assemble_mass(&mesh);
        let h = 0.5;
        let interior = mesh.interior_dofs();
        // an interior node away from the boundary
        let i = interior[2];
        assert_relative_eq!(m[(i, i)], 2.0 * h / 3.0, epsilon = 1e-14);
        assert_relative_eq!(m[(i, i + 1)], h / 6.0, epsilon = 1e-14);
        // partition of unity: 1' M 1 = |Omega|
        let one = unit_vec(mesh.n_dofs());
        assert_relative_eq!(one.dot(&(&m * &one)), 2.0, epsilon = 1e-14);
        // exterior basis functions carry no mass
        for &e in &mesh.exterior_dofs() {
            assert_eq!(m[(e, e)], 0.0);
        }
    }

    #[test]
    fn stiffness_closed_form() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 4, 2).unwrap();
        let k = assemble_stiffness(&mesh);
        let h = 0.5;
        let i = mesh.interior_dofs()[2];
        assert_relative_eq!(k[(i, i)], 2.0 / h, epsilon = 1e-13);
        assert_relative_eq!(k[(i, i - 1)], -1.0 / h, epsilon = 1e-13);
        // constants in the kernel, exactly
        let one = unit_vec(mesh.n_dofs());
        assert!((&k * &one).amax() < 1e-13);
    }

    #[test]
    fn single_interior_cell_stiffness() {
        let mesh = build_mesh((0.0, 1.0), 2.0, 2, 1).unwrap();
        // two cells of width 1/2: each contributes [[2,-2],[-2,2]] scaled
        let k = assemble_stiffness(&mesh);
        let d = mesh.interior_dofs();
        assert_relative_eq!(k[(d[0], d[0])], 2.0, epsilon = 1e-13);
        assert_relative_eq!(k[(d[0], d[1])], -2.0, epsilon = 1e-13);
    }

    #[test]
    fn gagliardo_zero_measure_is_zero() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 4, 2).unwrap();
        let b = assemble_gagliardo(&mesh, &SpectralMeasure::zero(), &QuadratureOptions::default())
            .unwrap();
        assert_eq!(b.amax(), 0.0);
    }

    #[test]
    fn gagliardo_annihilates_constants() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 8, 3).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let b = assemble_gagliardo(&mesh, &mu, &QuadratureOptions::default()).unwrap();
        let one = unit_vec(mesh.n_dofs());
        assert!((&b * &one).amax() <= 1e-12 * b.amax());
        assert!(one.dot(&(&b * &one)).abs() <= 1e-10 * b.amax());
    }

    #[test]
    fn gagliardo_symmetric_and_psd() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 6, 3).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.3, 1.0), (0.7, 0.5)]).unwrap();
        let b = assemble_gagliardo(&mesh, &mu, &QuadratureOptions::default()).unwrap();
        let asym = (&b - b.transpose()).amax() / b.amax();
        assert!(asym <= 1e-13, "asymmetry {asym}");
        // PSD via eigenvalues of the symmetric matrix
        let eig = b.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        assert!(min >= -1e-10 * b.amax(), "negative eigenvalue {min}");
    }

    #[test]
    fn gagliardo_linear_in_weights() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 4, 2).unwrap();
        let q = QuadratureOptions::default();
        let m1 = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let m3 = SpectralMeasure::from_atoms(&[(0.5, 3.0)]).unwrap();
        let b1 = assemble_gagliardo(&mesh, &m1, &q).unwrap();
        let b3 = assemble_gagliardo(&mesh, &m3, &q).unwrap();
        assert!((&b3 - &b1 * 3.0).amax() <= 1e-13 * b3.amax());
    }

    #[test]
    fn anorm_of_constant_is_sqrt_measure_of_omega() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 8, 3).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let mats = OperatorMatrices::assemble(&mesh, &mu, 1.0, &QuadratureOptions::default())
            .unwrap();
        let one = unit_vec(mesh.n_dofs());
        assert_relative_eq!(anorm(&one, &mats), 2f64.sqrt(), epsilon = 1e-10);
        // homogeneity of the quadratic form
        let u = DVector::from_fn(mesh.n_dofs(), |i, _| (i as f64 * 0.37).sin());
        assert_relative_eq!(anorm(&(&u * 2.0), &mats), 2.0 * anorm(&u, &mats), epsilon = 1e-13);
        // zero vector
        assert_eq!(anorm(&DVector::zeros(mesh.n_dofs()), &mats), 0.0);
    }

    #[test]
    fn refinement_is_cauchy_for_smooth_profile() {
        // u(x) = cos(pi x / 2) on a growing mesh family: successive B-energy
        // differences shrink
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let q = QuadratureOptions::default();
        let mut energies = vec![];
        for &(n_in, n_ext, r) in &[(8usize, 4usize, 4.0), (16, 6, 6.0), (32, 8, 8.0), (64, 10, 10.0)] {
            let mesh = build_mesh((-1.0, 1.0), r, n_in, n_ext).unwrap();
            let b = assemble_gagliardo(&mesh, &mu, &q).unwrap();
            let u = DVector::from_fn(mesh.n_dofs(), |i, _| {
                let x: f64 = mesh.nodes[i];
                if x.abs() <= 1.0 {
                    (std::f64::consts::FRAC_PI_2 * x).cos()
                } else {
                    0.0
                }
            });
            energies.push(u.dot(&(&b * &u)));
        }
        let d1 = (energies[1] - energies[0]).abs();
        let d2 = (energies[2] - energies[1]).abs();
        let d3 = (energies[3] - energies[2]).abs();
        assert!(d2 < d1 && d3 < d2, "increments {d1} {d2} {d3}");
    }
}
