//! Eigenpairs of the operator under homogeneous (alpha, mu)-Neumann
//! conditions, and the induced low/high splitting of the discrete space.
//!
//! The L2 pairing of the weak form lives on Omega only, so exterior collar
//! DOFs are eliminated by a Schur complement of the form matrix: their
//! equations are exactly the discrete nonlocal Neumann conditions, and the
//! elimination slaves the collar values to the interior ones. A regularized
//! full pencil (tiny mass on the collar) is kept as a cross-check.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::OperatorMatrices;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

/// Relative gap below which neighbouring eigenvalues are reported as a
/// cluster.
pub const CLUSTER_REL_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues of the operator itself (first one ~ 0).
    pub lambdas_tilde: Vec<f64>,
    /// Full-DOF eigenvectors, M_Omega-orthonormal, mean over Omega >= 0.
    #[serde(skip)]
    pub vectors: Vec<DVector<f64>>,
}

impl EigenDecomposition {
    /// Shifted sequence lambda_k = lambda~_k + 1 of the operator plus the
    /// identity; lambda_1 = 1.
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas_tilde.iter().map(|l| l + 1.0).collect()
    }

    pub fn len(&self) -> usize {
        self.lambdas_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas_tilde.is_empty()
    }

    /// Indices k (1-based would cut a cluster) such that lambda~_k and
    /// lambda~_{k+1} agree to CLUSTER_REL_GAP relative.
    pub fn clusters(&self) -> Vec<usize> {
        let l = &self.lambdas_tilde;
        (0..l.len().saturating_sub(1))
            .filter(|&k| (l[k + 1] - l[k]).abs() <= CLUSTER_REL_GAP * l[k + 1].abs().max(1.0))
            .collect()
    }
}

/// Generalized symmetric solve A x = lambda M x with M positive definite,
/// via the Cholesky congruence of M. Returns ascending pairs.
fn sym_generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigen("mass pencil is not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let mut c = a.clone();
    l.solve_lower_triangular_mut(&mut c);
    let mut ct = c.transpose();
    l.solve_lower_triangular_mut(&mut ct);
    let c = (&ct + ct.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let lt = l.transpose();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &i in &order {
        values.push(eig.eigenvalues[i]);
        let mut y: DVector<f64> = eig.eigenvectors.column(i).into();
        lt.solve_upper_triangular_mut(&mut y);
        vectors.push(y);
    }
    Ok((values, vectors))
}

fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// k smallest eigenpairs of (alpha K + B) e = lambda~ M_Omega e with the
/// collar DOFs eliminated (mu nontrivial) or dropped (mu = 0).
pub fn solve_eigen(mesh: &Mesh1D, matrices: &OperatorMatrices, k: usize) -> Result<EigenDecomposition> {
    let interior = mesh.interior_dofs();
    let exterior = mesh.exterior_dofs();
    if k > interior.len() {
        return Err(Error::Eigen(format!(
            "requested {k} pairs but only {} interior DOFs",
            interior.len()
        )));
    }
    let a_full = &matrices.stiffness * matrices.alpha + &matrices.gagliardo;
    let m_ii = submatrix(&matrices.mass, &interior, &interior);
    let a_ii = submatrix(&a_full, &interior, &interior);

    let nonlocal = matrices.gagliardo.amax() > 0.0;
    let (s, slave): (DMatrix<f64>, Option<DMatrix<f64>>) = if nonlocal && !exterior.is_empty() {
        let a_ee = submatrix(&a_full, &exterior, &exterior);
        let a_ei = submatrix(&a_full, &exterior, &interior);
        let chol = a_ee
            .cholesky()
            .ok_or_else(|| Error::Eigen("exterior block of the form is singular".into()))?;
        // X = A_EE^{-1} A_EI
        let x = chol.solve(&a_ei);
        let s = &a_ii - a_ei.transpose() * &x;
        (((&s + s.transpose()) * 0.5), Some(x))
    } else {
        (a_ii, None)
    };

    let (values, vecs_int) = sym_generalized_eigen(&s, &m_ii)?;
    let n_dofs = mesh.n_dofs();
    let mut lambdas_tilde = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for idx in 0..k {
        lambdas_tilde.push(values[idx]);
        let ei = &vecs_int[idx];
        let mut full = DVector::zeros(n_dofs);
        for (r, &gi) in interior.iter().enumerate() {
            full[gi] = ei[r];
        }
        if let Some(x) = &slave {
            let ee = -(x * ei);
            for (r, &ge) in exterior.iter().enumerate() {
                full[ge] = ee[r];
            }
        }
        // sign convention: nonnegative mean over Omega, tie broken by the
        // first nonzero interior component
        let mean = (&m_ii * ei).sum();
        let flip = if mean.abs() > 1e-12 * ei.amax() {
            mean < 0.0
        } else {
            ei.iter().find(|v| v.abs() > 0.0).map(|v| *v < 0.0).unwrap_or(false)
        };
        if flip {
            full.neg_mut();
        }
        vectors.push(full);
    }
    Ok(EigenDecomposition {
        lambdas_tilde,
        vectors,
    })
}

/// Cross-check route: full regularized pencil
/// (alpha K + B + eps M_col) e = lambda~ (M_Omega + eps M_col) e,
/// where M_col is the P1 mass of the collar cells. Eigenvectors with
/// negligible Omega mass are truncation artifacts and are filtered out.
pub fn solve_eigen_regularized(
    mesh: &Mesh1D,
    matrices: &OperatorMatrices,
    k: usize,
    eps: f64,
) -> Result<EigenDecomposition> {
    let n = mesh.n_dofs();
    let mut m_col = DMatrix::zeros(n, n);
    for e in 0..mesh.n_cells() {
        if mesh.cell_is_interior(e) {
            continue;
        }
        let (a, b) = mesh.cell(e);
        let h = b - a;
        m_col[(e, e)] += h / 3.0;
        m_col[(e + 1, e + 1)] += h / 3.0;
        m_col[(e, e + 1)] += h / 6.0;
        m_col[(e + 1, e)] += h / 6.0;
    }
    let a_full = &matrices.stiffness * matrices.alpha + &matrices.gagliardo + &m_col * eps;
    let m_full = &matrices.mass + &m_col * eps;
    let (values, vectors) = sym_generalized_eigen(&a_full, &m_full)?;

    let m_omega = &matrices.mass;
    let mut lambdas_tilde = Vec::new();
    let mut kept = Vec::new();
    for (lam, v) in values.iter().zip(vectors) {
        let omega_mass = v.dot(&(m_omega * &v));
        let full_mass = v.dot(&(&m_full * &v));
        if omega_mass <= 1e-6 * full_mass {
            continue; // collar artifact
        }
        let v = &v / omega_mass.sqrt();
        lambdas_tilde.push(*lam);
        kept.push(v);
        if lambdas_tilde.len() == k {
            break;
        }
    }
    if lambdas_tilde.len() < k {
        return Err(Error::Eigen(format!(
            "only {} physical pairs below the collar modes",
            lambdas_tilde.len()
        )));
    }
    Ok(EigenDecomposition {
        lambdas_tilde,
        vectors: kept,
    })
}

/// M_Omega-orthogonal splitting of the computed eigenspace into the span of
/// the first `index` eigenvectors and its complement.
#[derive(Debug, Clone)]
pub struct Splitting<'a> {
    pub index: usize,
    decomp: &'a EigenDecomposition,
    mass: &'a DMatrix<f64>,
}

pub fn split<'a>(
    decomp: &'a EigenDecomposition,
    mass: &'a DMatrix<f64>,
    index: usize,
) -> Result<Splitting<'a>> {
    if index == 0 || index >= decomp.len() {
        return Err(Error::Domain(format!(
            "splitting index {index} out of range 1..{}",
            decomp.len()
        )));
    }
    if decomp.clusters().contains(&(index - 1)) {
        return Err(Error::ClusterCut {
            index,
            gap: CLUSTER_REL_GAP,
        });
    }
    Ok(Splitting {
        index,
        decomp,
        mass,
    })
}

impl Splitting<'_> {
    fn coeff(&self, k: usize, u: &DVector<f64>) -> f64 {
        self.decomp.vectors[k].dot(&(self.mass * u))
    }

    /// Projection onto span(e_1..e_i).
    pub fn project_low(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(u.len());
        for k in 0..self.index {
            out += &self.decomp.vectors[k] * self.coeff(k, u);
        }
        out
    }

    /// Projection onto the computed part of the complement.
    pub fn project_high(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(u.len());
        for k in self.index..self.decomp.len() {
            out += &self.decomp.vectors[k] * self.coeff(k, u);
        }
        out
    }

    pub fn basis_low(&self) -> &[DVector<f64>] {
        &self.decomp.vectors[..self.index]
    }

    pub fn basis_high(&self) -> &[DVector<f64>] {
        &self.decomp.vectors[self.index..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{anorm, QuadratureOptions};
    use crate::measure::SpectralMeasure;
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn fractional_setup() -> (Mesh1D, OperatorMatrices) {
        let mesh = build_mesh((-1.0, 1.0), 6.0, 24, 8).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let mats =
            OperatorMatrices::assemble(&mesh, &mu, 0.0, &QuadratureOptions::default()).unwrap();
        (mesh, mats)
    }

    #[test]
    fn classical_neumann_spectrum() {
        // mu = 0, alpha = 1 on (0,1): eigenvalues ((k-1) pi)^2
        let mesh = build_mesh((0.0, 1.0), 2.0, 128, 2).unwrap();
        let mats = OperatorMatrices::assemble(
            &mesh,
            &SpectralMeasure::zero(),
            1.0,
            &QuadratureOptions::default(),
        )
        .unwrap();
        let d = solve_eigen(&mesh, &mats, 4).unwrap();
        assert!(d.lambdas_tilde[0].abs() < 1e-9);
        for k in 1..4 {
            let exact = (k as f64 * std::f64::consts::PI).powi(2);
            let rel = (d.lambdas_tilde[k] - exact).abs() / exact;
            assert!(rel < 0.01, "k={k}: {} vs {exact}", d.lambdas_tilde[k]);
        }
        assert_relative_eq!(d.lambdas()[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn first_pair_is_constant_with_zero_eigenvalue() {
        let (mesh, mats) = fractional_setup();
        let d = solve_eigen(&mesh, &mats, 6).unwrap();
        assert!(
            d.lambdas_tilde[0].abs() <= 1e-8 * d.lambdas_tilde[1].max(1.0),
            "lambda~_1 = {}",
            d.lambdas_tilde[0]
        );
        // e_1 constant on Omega
        let e1 = &d.vectors[0];
        let vals: Vec<f64> = mesh.interior_dofs().iter().map(|&i| e1[i]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        for v in &vals {
            assert!((v - mean).abs() <= 1e-8 * mean.abs(), "{v} vs {mean}");
        }
        assert!(mean > 0.0);
    }

    #[test]
    fn m_orthonormality_and_form_diagonalization() {
        let (mesh, mats) = fractional_setup();
        let d = solve_eigen(&mesh, &mats, 6).unwrap();
        let a = &mats.stiffness * mats.alpha + &mats.gagliardo;
        for i in 0..6 {
            for j in 0..6 {
                let mij = d.vectors[i].dot(&(&mats.mass * &d.vectors[j]));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((mij - expected).abs() <= 1e-10, "M[{i}{j}] = {mij}");
                let aij = d.vectors[i].dot(&(&a * &d.vectors[j]));
                let target = if i == j { d.lambdas_tilde[i] } else { 0.0 };
                assert!(
                    (aij - target).abs() <= 1e-8 * d.lambdas_tilde[5].max(1.0),
                    "A[{i}{j}] = {aij} vs {target}"
                );
            }
        }
    }

    #[test]
    fn exterior_equations_hold_for_eigenvectors() {
        // the eliminated rows are the discrete nonlocal Neumann conditions
        let (mesh, mats) = fractional_setup();
        let d = solve_eigen(&mesh, &mats, 4).unwrap();
        let a = &mats.gagliardo * 1.0;
        for v in &d.vectors {
            let r = &a * v;
            for &e in &mesh.exterior_dofs() {
                assert!(r[e].abs() <= 1e-9 * a.amax(), "exterior residual {}", r[e]);
            }
        }
    }

    #[test]
    fn regularized_pencil_cross_check() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 12, 4).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let mats =
            OperatorMatrices::assemble(&mesh, &mu, 0.0, &QuadratureOptions::default()).unwrap();
        let schur = solve_eigen(&mesh, &mats, 4).unwrap();
        let reg = solve_eigen_regularized(&mesh, &mats, 4, 1e-10).unwrap();
        for k in 1..4 {
            assert_relative_eq!(
                schur.lambdas_tilde[k],
                reg.lambdas_tilde[k],
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn eigenvalues_monotone_in_measure_weight() {
        let mesh = build_mesh((-1.0, 1.0), 4.0, 12, 4).unwrap();
        let mut prev: Option<Vec<f64>> = None;
        for w in [0.5, 1.0, 2.0] {
            let mu = SpectralMeasure::from_atoms(&[(0.5, w)]).unwrap();
            let mats = OperatorMatrices::assemble(&mesh, &mu, 0.5, &QuadratureOptions::default())
                .unwrap();
            let d = solve_eigen(&mesh, &mats, 5).unwrap();
            if let Some(p) = prev {
                for k in 0..5 {
                    assert!(
                        d.lambdas_tilde[k] >= p[k] - 1e-10,
                        "k={k}: {} < {}",
                        d.lambdas_tilde[k],
                        p[k]
                    );
                }
            }
            prev = Some(d.lambdas_tilde.clone());
        }
    }

    #[test]
    fn second_eigenvalue_cauchy_under_refinement() {
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let mut vals = vec![];
        for n_in in [16usize, 32, 64] {
            let mesh = build_mesh((-1.0, 1.0), 6.0, n_in, 8).unwrap();
            let mats = OperatorMatrices::assemble(&mesh, &mu, 0.0, &QuadratureOptions::default())
                .unwrap();
            let d = solve_eigen(&mesh, &mats, 2).unwrap();
            vals.push(d.lambdas_tilde[1]);
        }
        let d1 = (vals[1] - vals[0]).abs();
        let d2 = (vals[2] - vals[1]).abs();
        assert!(d2 < d1, "increments {d1} {d2}");
    }

    #[test]
    fn splitting_projects_and_rayleigh_bounds() {
        let (mesh, mats) = fractional_setup();
        let d = solve_eigen(&mesh, &mats, 8).unwrap();
        let sp = split(&d, &mats.mass, 1).unwrap();

        // basis vectors project cleanly
        let e1 = d.vectors[0].clone();
        let p = sp.project_low(&e1);
        assert!((p - &e1).amax() < 1e-9);
        assert!(sp.project_high(&e1).amax() < 1e-9);
        let mix = &d.vectors[0] + &d.vectors[1];
        assert!((sp.project_low(&mix) - &d.vectors[0]).amax() < 1e-9);

        // Rayleigh bounds on 100 random draws within the computed span
        let lambdas = d.lambdas();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let mut u = DVector::zeros(mesh.n_dofs());
            for v in &d.vectors {
                u += v * rng.gen_range(-1.0..1.0);
            }
            let hi = sp.project_high(&u);
            let l2 = hi.dot(&(&mats.mass * &hi));
            let an = anorm(&hi, &mats);
            assert!(an * an >= lambdas[1] * l2 - 1e-8, "{} < {}", an * an, lambdas[1] * l2);
            let lo = sp.project_low(&u);
            let l2 = lo.dot(&(&mats.mass * &lo));
            let an = anorm(&lo, &mats);
            assert!(an * an <= lambdas[0] * l2 + 1e-8);
        }
    }

    #[test]
    fn splitting_rejects_bad_index() {
        let (mesh, mats) = fractional_setup();
        let d = solve_eigen(&mesh, &mats, 4).unwrap();
        assert!(split(&d, &mats.mass, 0).is_err());
        assert!(split(&d, &mats.mass, 4).is_err());
    }
}
