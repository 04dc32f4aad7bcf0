//! Two analytic reference examples turned into falsifiable numerical
//! reports: the sign behaviour of the extended identity function (whose
//! positive part violates the nonlocal Neumann condition), and a boundary
//! sequence u_n = x^{1+1/n}(x-1)^2 that converges in H^1 to a limit with
//! nonzero normal derivative.

use serde::Serialize;

use crate::error::Result;
use crate::exterior::{extension, neumann_residual};
use crate::measure::SpectralMeasure;
use crate::mesh::build_mesh;
use crate::quadrature::integrate_adaptive;

#[derive(Debug, Clone, Serialize)]
pub struct Claim {
    pub claim: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub name: String,
    pub claims: Vec<Claim>,
}

impl ExampleReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }

    fn push(&mut self, claim: impl Into<String>, value: f64, tol: f64, pass: bool) {
        self.claims.push(Claim {
            claim: claim.into(),
            value,
            tol,
            pass,
        });
    }
}

/// Exterior sample points: negatives plus their mirror images.
pub const REMARK_SAMPLES: [f64; 3] = [-1.5, -2.0, -4.0];

const TOL: f64 = 1e-8;

/// Extends u(x) = x from Omega = (-1, 1) by the homogeneous mu-Neumann
/// condition and checks: the extension is nonpositive left of Omega (and
/// nonnegative right of it by symmetry), its Neumann residual vanishes, and
/// the residual of the positive part u^+ is strictly negative left of Omega.
/// A constant control run keeps the pipeline honest.
pub fn run_remark_example(
    measure: &SpectralMeasure,
    n_in: usize,
    n_ext: usize,
    collar_radius: f64,
) -> Result<ExampleReport> {
    let mesh = build_mesh((-1.0, 1.0), collar_radius, n_in, n_ext)?;
    let mut report = ExampleReport {
        name: "extension sign".into(),
        claims: Vec::new(),
    };

    // nodal identity on Omega, collar values forced by the extension
    let interior = mesh.interior_dofs();
    let exterior = mesh.exterior_dofs();
    let mut u: Vec<f64> = vec![0.0; mesh.n_dofs()];
    for &j in &interior {
        u[j] = mesh.nodes[j];
    }
    let ext_points: Vec<f64> = exterior.iter().map(|&j| mesh.nodes[j]).collect();
    let ext_vals = extension(&mesh, measure, &u, &ext_points)?;
    for (&j, v) in exterior.iter().zip(&ext_vals) {
        u[j] = *v;
    }

    for &x in &REMARK_SAMPLES {
        let v = extension(&mesh, measure, &u, &[x])?[0];
        report.push(
            format!("extension of the identity at x = {x} is nonpositive"),
            v,
            TOL,
            v <= TOL,
        );
        let v_mirror = extension(&mesh, measure, &u, &[-x])?[0];
        report.push(
            format!("extension of the identity at x = {} is nonnegative", -x),
            v_mirror,
            TOL,
            v_mirror >= -TOL,
        );

        let r = neumann_residual(&mesh, measure, &u, x, Some(v))?;
        report.push(
            format!("Neumann residual of the extended identity at x = {x} vanishes"),
            r,
            TOL,
            r.abs() <= TOL,
        );

        // positive part: clamp the nodes; left of Omega its own value is 0
        let u_plus: Vec<f64> = u.iter().map(|v| v.max(0.0)).collect();
        let r_plus = neumann_residual(&mesh, measure, &u_plus, x, Some(0.0))?;
        report.push(
            format!("Neumann residual of the positive part at x = {x} is strictly negative"),
            r_plus,
            TOL,
            r_plus < -TOL,
        );
    }

    // control: a constant extends to itself with zero residual
    let ones = vec![1.0; mesh.n_dofs()];
    for &x in &REMARK_SAMPLES {
        let v = extension(&mesh, measure, &ones, &[x])?[0];
        report.push(
            format!("constant control extends to 1 at x = {x}"),
            v,
            TOL,
            (v - 1.0).abs() <= TOL,
        );
        let r = neumann_residual(&mesh, measure, &ones, x, Some(1.0))?;
        report.push(
            format!("constant control has zero residual at x = {x}"),
            r,
            TOL,
            r.abs() <= TOL,
        );
    }

    Ok(report)
}

fn u_limit(x: f64) -> f64 {
    x * (x - 1.0) * (x - 1.0)
}

fn u_limit_prime(x: f64) -> f64 {
    (x - 1.0) * (3.0 * x - 1.0)
}

fn u_n(n: f64, x: f64) -> f64 {
    x.powf(1.0 + 1.0 / n) * (x - 1.0) * (x - 1.0)
}

fn u_n_prime(n: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x.powf(1.0 / n) * (x - 1.0) * ((3.0 + 1.0 / n) * x - 1.0 - 1.0 / n)
}

/// Closed-form bound for the squared L2 distance between u_n and its limit.
pub fn appendix_l2_bound(n: f64) -> f64 {
    1.0 / (1.0 + 2.0 / n) - 2.0 / (1.0 + 1.0 / n) + 1.0
}

/// Checks the boundary sequence u_n = x^{1+1/n}(x-1)^2 on (0, 1): the
/// closed-form L2 distance bound dominates the quadrature and both decay
/// to zero, the derivatives converge in L2, yet u_n'(0) = 0 for every n
/// while the limit has u'(0) = 1.
pub fn run_appendix_example(n_list: &[u32]) -> ExampleReport {
    let mut report = ExampleReport {
        name: "boundary sequence".into(),
        claims: Vec::new(),
    };
    let quad_tol = 1e-12;
    let mut prev_bound = f64::INFINITY;
    let mut prev_h1 = f64::INFINITY;
    for &n in n_list {
        let nf = n as f64;
        let bound = appendix_l2_bound(nf);
        let l2 = integrate_adaptive(
            &|x: f64| (u_n(nf, x) - u_limit(x)).powi(2),
            0.0,
            1.0,
            quad_tol,
        );
        report.push(
            format!("n = {n}: quadrature of |u_n - u|^2 stays below the closed form"),
            l2 - bound,
            TOL,
            l2 <= bound + TOL && l2 >= 0.0,
        );
        report.push(
            format!("n = {n}: closed-form bound is positive and decreasing"),
            bound,
            0.0,
            bound > 0.0 && bound < prev_bound,
        );
        prev_bound = bound;

        let h1 = integrate_adaptive(
            &|x: f64| (u_n_prime(nf, x) - u_limit_prime(x)).powi(2),
            0.0,
            1.0,
            quad_tol,
        );
        report.push(
            format!("n = {n}: |u_n' - u'|^2 decreasing towards 0"),
            h1,
            0.0,
            h1 > 0.0 && h1 < prev_h1,
        );
        prev_h1 = h1;

        report.push(
            format!("n = {n}: u_n'(0) = 0"),
            u_n_prime(nf, 0.0),
            TOL,
            u_n_prime(nf, 0.0).abs() <= TOL,
        );
    }
    if let Some(&n_max) = n_list.iter().max() {
        let bound = appendix_l2_bound(n_max as f64);
        report.push(
            format!("bound vanishes along the sequence (value at n = {n_max})"),
            bound,
            0.0,
            bound < 0.5 / n_max as f64,
        );
    }
    let du0 = u_limit_prime(0.0);
    report.push(
        "limit violates the Neumann condition: u'(0) = 1",
        du0,
        TOL,
        (du0 - 1.0).abs() <= TOL,
    );
    report
}
