//! Discrete energy functional, its first two derivatives, the scaled
//! residual, and a damped Newton iteration for its critical points.

use nalgebra::{DMatrix, DVector};

use crate::assembly::OperatorMatrices;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::nonlinearity::Source;
use crate::quadrature::gauss_legendre;

/// Variational problem: find u with
/// `(M + alpha K + B) u - lambda M u - N_f(u) = 0`,
/// the Euler-Lagrange system of
/// `I(u) = 1/2 |u|^2 - lambda/2 int u^2 - int F(u)`.
pub struct Problem<'a> {
    pub mesh: &'a Mesh1D,
    pub matrices: &'a OperatorMatrices,
    pub lambda: f64,
    pub source: &'a dyn Source,
    norm: DMatrix<f64>,
    active: Vec<usize>,
    quad: Vec<(f64, f64)>,
}

impl<'a> Problem<'a> {
    pub fn new(
        mesh: &'a Mesh1D,
        matrices: &'a OperatorMatrices,
        lambda: f64,
        source: &'a dyn Source,
    ) -> Self {
        let norm = matrices.norm_matrix();
        // DOFs whose basis function carries no energy (collar nodes of a
        // purely local operator) are frozen at zero
        let active = (0..norm.nrows()).filter(|&j| norm[(j, j)] > 0.0).collect();
        let (xs, ws) = gauss_legendre(4);
        Problem {
            mesh,
            matrices,
            lambda,
            source,
            norm,
            active,
            quad: xs.into_iter().zip(ws).collect(),
        }
    }

    pub fn active_dofs(&self) -> &[usize] {
        &self.active
    }

    pub fn norm_matrix(&self) -> &DMatrix<f64> {
        &self.norm
    }

    /// Cellwise Gauss rule applied to a function of (u_h, phi_left, phi_right)
    /// over the interior cells.
    fn for_each_quad_point(&self, u: &DVector<f64>, mut visit: impl FnMut(usize, f64, f64, f64)) {
        for e in self.mesh.interior_cells() {
            let (a, b) = self.mesh.cell(e);
            let h = b - a;
            for &(xi, w) in &self.quad {
                // map from [-1, 1] to the cell
                let t = 0.5 * (xi + 1.0);
                let uh = u[e] * (1.0 - t) + u[e + 1] * t;
                visit(e, uh, 1.0 - t, w * 0.5 * h);
            }
        }
    }

    /// int_Omega F(u_h)
    pub fn potential(&self, u: &DVector<f64>) -> f64 {
        let mut q = 0.0;
        self.for_each_quad_point(u, |_, uh, _, w| q += w * self.source.big_f(uh));
        q
    }

    pub fn energy(&self, u: &DVector<f64>) -> f64 {
        let norm_sq = u.dot(&(&self.norm * u));
        let l2_sq = u.dot(&(&self.matrices.mass * u));
        0.5 * norm_sq - 0.5 * self.lambda * l2_sq - self.potential(u)
    }

    pub fn gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.norm * u - &self.matrices.mass * u * self.lambda;
        self.for_each_quad_point(u, |e, uh, phi_l, w| {
            let fu = self.source.f(uh);
            g[e] -= w * fu * phi_l;
            g[e + 1] -= w * fu * (1.0 - phi_l);
        });
        g
    }

    pub fn hessian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let mut h = &self.norm - &self.matrices.mass * self.lambda;
        self.for_each_quad_point(u, |e, uh, phi_l, w| {
            let dfu = self.source.df(uh);
            let phi_r = 1.0 - phi_l;
            h[(e, e)] -= w * dfu * phi_l * phi_l;
            h[(e, e + 1)] -= w * dfu * phi_l * phi_r;
            h[(e + 1, e)] -= w * dfu * phi_l * phi_r;
            h[(e + 1, e + 1)] -= w * dfu * phi_r * phi_r;
        });
        h
    }

    /// sup_j |I'(u)[phi_j]| / |phi_j|, over DOFs with |phi_j| > 0.
    pub fn residual(&self, u: &DVector<f64>) -> f64 {
        let g = self.gradient(u);
        self.active
            .iter()
            .map(|&j| g[j].abs() / self.norm[(j, j)].sqrt())
            .fold(0.0, f64::max)
    }

    pub(crate) fn restrict(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.active.len(), self.active.iter().map(|&j| v[j]))
    }

    pub(crate) fn prolong(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.norm.nrows());
        for (r, &j) in self.active.iter().enumerate() {
            out[j] = v[r];
        }
        out
    }

    pub(crate) fn restrict_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.active.len(), self.active.len(), |i, j| {
            m[(self.active[i], self.active[j])]
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 60,
            tol: 1e-11,
        }
    }
}

fn solve_linear(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = h.clone().full_piv_lu();
    let diag: Vec<f64> = (0..h.nrows()).map(|i| lu.u()[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if dmin <= 1e-14 * dmax {
        return Err(Error::SingularHessian {
            cond: if dmin > 0.0 { dmax / dmin } else { f64::INFINITY },
        });
    }
    lu.solve(rhs)
        .ok_or(Error::SingularHessian { cond: f64::INFINITY })
}

/// Damped Newton iteration on the gradient system, restricted to the active
/// DOFs. Converges to any critical point (extremum or saddle); the damping
/// only asks for decrease of the gradient norm.
pub fn newton_solve(
    problem: &Problem,
    u0: &DVector<f64>,
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, usize)> {
    let mut u = problem.restrict(u0);
    for it in 0..opts.max_iter {
        let full = problem.prolong(&u);
        if problem.residual(&full) <= opts.tol {
            return Ok((full, it));
        }
        let g = problem.restrict(&problem.gradient(&full));
        let h = problem.restrict_matrix(&problem.hessian(&full));
        let step = solve_linear(&h, &(-&g))?;
        let g0 = g.norm();
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &u + &step * s;
            let gt = problem.restrict(&problem.gradient(&problem.prolong(&trial)));
            if gt.norm() < g0 * (1.0 - 0.25 * s) + 1e-300 {
                u = trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence(format!(
                "line search stalled at iteration {it}, |g| = {g0:.3e}"
            )));
        }
    }
    let full = problem.prolong(&u);
    if problem.residual(&full) <= opts.tol {
        Ok((full, opts.max_iter))
    } else {
        Err(Error::NonConvergence(format!(
            "residual {:.3e} after {} iterations",
            problem.residual(&full),
            opts.max_iter
        )))
    }
}
