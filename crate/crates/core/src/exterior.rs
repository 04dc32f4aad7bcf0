//! Pointwise exterior tools: the mu-averaged nonlocal normal derivative and
//! the exterior extension forced by its vanishing.

use crate::error::{Error, Result};
use crate::measure::{cns_constant, SpectralMeasure};
use crate::mesh::Mesh1D;
use crate::quadrature::integrate_adaptive;

const QUAD_TOL: f64 = 1e-12;

fn check_exterior(mesh: &Mesh1D, x: f64) -> Result<()> {
    let (xl, xr) = mesh.omega;
    if x >= xl && x <= xr {
        return Err(Error::Domain(format!(
            "point {x} is not strictly outside the closed domain [{xl}, {xr}]"
        )));
    }
    Ok(())
}

/// Weighted kernel integrals over Omega of the P1 interpolant:
/// sum_k w_k(s) int_Omega u_h(y) |x-y|^{-1-2 s_k} dy, with w_k carrying the
/// atom weight times c_{1,s_k}. Integration is cellwise adaptive.
fn omega_integral(mesh: &Mesh1D, measure: &SpectralMeasure, u: Option<&[f64]>, x: f64) -> Result<f64> {
    let mut total = 0.0;
    for &(s, c) in measure.atoms() {
        if c == 0.0 {
            continue;
        }
        let w = c * cns_constant(1, s)?;
        let expo = 1.0 + 2.0 * s;
        for e in mesh.interior_cells() {
            let (a, b) = mesh.cell(e);
            let (ua, ub) = match u {
                Some(u) => (u[e], u[e + 1]),
                None => (1.0, 1.0),
            };
            let f = |y: f64| {
                let t = (y - a) / (b - a);
                let uy = ua * (1.0 - t) + ub * t;
                uy / (x - y).abs().powf(expo)
            };
            total += w * integrate_adaptive(&f, a, b, QUAD_TOL);
        }
    }
    Ok(total)
}

/// mu-averaged nonlocal normal derivative at an exterior point x:
/// int_(0,1) c_{1,s} int_Omega (u(x) - u(y)) |x-y|^{-1-2s} dy dmu(s).
///
/// The value of u at x is taken from the P1 interpolant when x lies in the
/// meshed collar, and must be supplied otherwise.
pub fn neumann_residual(
    mesh: &Mesh1D,
    measure: &SpectralMeasure,
    u: &[f64],
    x: f64,
    value_at_x: Option<f64>,
) -> Result<f64> {
    check_exterior(mesh, x)?;
    let ux = match value_at_x {
        Some(v) => v,
        None => {
            if x < mesh.nodes[0] || x > *mesh.nodes.last().unwrap() {
                return Err(Error::Domain(format!(
                    "point {x} lies outside the meshed collar; supply the value of u there"
                )));
            }
            mesh.interpolate(u, x)
        }
    };
    let num = omega_integral(mesh, measure, Some(u), x)?;
    let den = omega_integral(mesh, measure, None, x)?;
    Ok(ux * den - num)
}

/// Exterior values forced by the homogeneous mu-Neumann condition: the
/// kernel-weighted mu-average of the interior values,
/// u(x) = (int c_{1,s} int_Omega u(y) K_s dy dmu) / (int c_{1,s} int_Omega K_s dy dmu).
///
/// `u` is read on interior cells only; linear in u.
pub fn extension(
    mesh: &Mesh1D,
    measure: &SpectralMeasure,
    u: &[f64],
    points: &[f64],
) -> Result<Vec<f64>> {
    if measure.is_zero() {
        return Err(Error::UndefinedExtension);
    }
    points
        .iter()
        .map(|&x| {
            check_exterior(mesh, x)?;
            let num = omega_integral(mesh, measure, Some(u), x)?;
            let den = omega_integral(mesh, measure, None, x)?;
            Ok(num / den)
        })
        .collect()
}
