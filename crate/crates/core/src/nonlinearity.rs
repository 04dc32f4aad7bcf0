//! Source nonlinearities f, their primitives F, and numerical certification
//! of the superlinear/subcritical structure conditions (AR1-AR5) and of the
//! small-perturbation envelope used for the geometry estimates.

use serde::Serialize;

use crate::error::{Error, Result};

/// Constants a source term claims to satisfy its structure conditions with.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ARWitness {
    /// Superquadratic exponent theta in the Ambrosetti-Rabinowitz condition.
    pub theta: f64,
    /// Growth exponent theta~ bounding |f| from above.
    pub theta_tilde: f64,
    /// Radius outside which AR holds (0 for globally clean sources).
    pub r: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

pub trait Source: Sync {
    fn f(&self, t: f64) -> f64;
    fn df(&self, t: f64) -> f64;
    /// Primitive F with F(0) = 0.
    fn big_f(&self, t: f64) -> f64;
    fn witness(&self) -> ARWitness;
}

/// f(t) = a |t|^{p-2} t, the model superlinear source.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerNonlinearity {
    pub a: f64,
    pub p: f64,
}

impl PowerNonlinearity {
    pub fn new(a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("coefficient a = {a} must be positive")));
        }
        if !(p > 2.0) {
            return Err(Error::Domain(format!("exponent p = {p} must exceed 2")));
        }
        Ok(Self { a, p })
    }
}

impl Source for PowerNonlinearity {
    fn f(&self, t: f64) -> f64 {
        self.a * t.abs().powf(self.p - 2.0) * t
    }

    fn df(&self, t: f64) -> f64 {
        self.a * (self.p - 1.0) * t.abs().powf(self.p - 2.0)
    }

    fn big_f(&self, t: f64) -> f64 {
        self.a / self.p * t.abs().powf(self.p)
    }

    fn witness(&self) -> ARWitness {
        ARWitness {
            theta: self.p,
            theta_tilde: self.p,
            r: 0.0,
            a1: 0.0,
            a2: self.a,
            a3: self.a / self.p,
            a4: 0.0,
        }
    }
}

/// Control case f(t) = t: linear, fails the superquadratic conditions.
#[derive(Debug, Clone, Copy)]
pub struct LinearSource;

impl Source for LinearSource {
    fn f(&self, t: f64) -> f64 {
        t
    }
    fn df(&self, _t: f64) -> f64 {
        1.0
    }
    fn big_f(&self, t: f64) -> f64 {
        0.5 * t * t
    }
    fn witness(&self) -> ARWitness {
        ARWitness {
            theta: 2.0,
            theta_tilde: 2.0,
            r: 0.0,
            a1: 0.0,
            a2: 1.0,
            a3: 0.5,
            a4: 0.0,
        }
    }
}

/// Control case f = 0.
#[derive(Debug, Clone, Copy)]
pub struct ZeroSource;

impl Source for ZeroSource {
    fn f(&self, _t: f64) -> f64 {
        0.0
    }
    fn df(&self, _t: f64) -> f64 {
        0.0
    }
    fn big_f(&self, _t: f64) -> f64 {
        0.0
    }
    fn witness(&self) -> ARWitness {
        ARWitness {
            theta: 2.0,
            theta_tilde: 2.0,
            r: 0.0,
            a1: 0.0,
            a2: 0.0,
            a3: 0.0,
            a4: 0.0,
        }
    }
}

/// Outcome of the grid certification of the structure conditions.
///
/// - AR1: growth bound |f(t)| <= a1 + a2 |t|^{theta~ - 1}, with
///   theta~ in (2, critical exponent);
/// - AR2: F is a primitive of f (finite-difference consistency);
/// - AR3: 0 < theta F(t) <= t f(t) for |t| > r (superquadraticity);
/// - AR4: F(t) >= a3 |t|^theta - a4 for |t| >= r;
/// - AR5: f(t) = o(t) near 0 with t f(t) >= 0.
#[derive(Debug, Clone, Serialize)]
pub struct ARReport {
    pub witness: ARWitness,
    pub ar: [bool; 5],
    /// sup over |t| <= r of |theta F(t) - t f(t)| (exactly 0 when r = 0).
    pub c_r: f64,
    /// Signed slack of the worst grid point for each condition
    /// (nonnegative iff the condition holds there).
    pub worst_margin: [f64; 5],
    pub grid_points: usize,
}

impl ARReport {
    pub fn certified(&self) -> bool {
        self.ar.iter().all(|&b| b)
    }
}

/// Symmetric certification grid on [-t_max, t_max]: uniform far field plus a
/// logarithmic refinement towards 0.
fn certification_grid(t_max: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let n_far = 400;
    for i in 1..=n_far {
        grid.push(t_max * i as f64 / n_far as f64);
    }
    let mut t = grid[0];
    while t > 1e-8 {
        t *= 0.5;
        grid.push(t);
    }
    let mirrored: Vec<f64> = grid.iter().map(|&t| -t).collect();
    grid.extend(mirrored);
    grid
}

/// Checks AR1-AR5 for `src` against its own witness constants on a grid over
/// [-t_max, t_max], t_max >= 10. `critical_exponent` bounds the admissible
/// growth (pass f64::INFINITY when there is no restriction).
pub fn check_ar(src: &dyn Source, critical_exponent: f64, t_max: f64) -> Result<ARReport> {
    if !(t_max >= 10.0) {
        return Err(Error::Domain(format!("t_max = {t_max} must be at least 10")));
    }
    let w = src.witness();
    if !(w.r >= 0.0) || !w.theta.is_finite() || !w.theta_tilde.is_finite() {
        return Err(Error::Domain("witness constants must be finite, r >= 0".into()));
    }
    let grid = certification_grid(t_max);
    let mut margin = [f64::INFINITY; 5];
    let mut c_r = 0.0f64;
    let tol = 1e-9;

    // AR1 also constrains the exponent itself
    if w.theta_tilde <= 2.0 || w.theta_tilde >= critical_exponent {
        margin[0] = f64::NEG_INFINITY;
    }
    if w.theta <= 2.0 {
        margin[2] = f64::NEG_INFINITY;
    }

    for &t in &grid {
        let ft = src.f(t);
        let cap = src.big_f(t);
        let at = t.abs();

        let m1 = w.a1 + w.a2 * at.powf(w.theta_tilde - 1.0) - ft.abs();
        margin[0] = margin[0].min(m1);

        // primitive consistency by a centered difference, scale-relative
        let h = (1e-5 * at.max(1.0)).max(1e-7);
        let fd = (src.big_f(t + h) - src.big_f(t - h)) / (2.0 * h);
        let scale = ft.abs().max(1.0);
        margin[1] = margin[1].min(1e-4 - (fd - ft).abs() / scale);

        let ar_gap = t * ft - w.theta * cap;
        if at > w.r + tol {
            margin[2] = margin[2].min(ar_gap.min(cap - tol * 0.0));
            // cap > 0 is required strictly away from r; allow a graded zero
            // tolerance proportional to |t|^theta to stay scale-invariant
            if cap <= tol * at.powf(w.theta) {
                margin[2] = f64::NEG_INFINITY;
            }
            let m4 = cap - (w.a3 * at.powf(w.theta) - w.a4);
            margin[3] = margin[3].min(m4);
        } else {
            c_r = c_r.max((w.theta * cap - t * ft).abs());
        }

        if at <= 1e-2 {
            // slope f(t)/t must vanish towards 0: bound it by a vanishing
            // envelope, and the sign condition must hold everywhere
            let m5 = (at.sqrt() - (ft / t).abs()).min(t * ft + tol);
            margin[4] = margin[4].min(m5);
        } else {
            margin[4] = margin[4].min(t * ft + tol);
        }
    }

    let ar = [
        margin[0] >= -tol,
        margin[1] >= 0.0,
        margin[2] >= -tol,
        margin[3] >= -tol,
        margin[4] >= -tol,
    ];
    Ok(ARReport {
        witness: w,
        ar,
        c_r,
        worst_margin: margin,
        grid_points: grid.len(),
    })
}

/// Smallest delta on the certification grid such that
/// |f(t)| <= 2 eps |t| + p delta |t|^{p-1} and |F(t)| <= eps t^2 + delta |t|^p,
/// with p = theta from the witness. Errors out when the envelope keeps
/// growing with the grid radius, i.e. the source outgrows exponent p.
pub fn sv12_delta(src: &dyn Source, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let p = src.witness().theta;
    let sup_on = |t_max: f64| -> f64 {
        let mut sup = 0.0f64;
        for &t in &certification_grid(t_max) {
            let at = t.abs();
            let d1 = (src.f(t).abs() - 2.0 * eps * at).max(0.0) / (p * at.powf(p - 1.0));
            let d2 = (src.big_f(t).abs() - eps * t * t).max(0.0) / at.powf(p);
            sup = sup.max(d1.max(d2));
        }
        sup
    };
    // a source outgrowing |t|^p shows accelerating increments under radius
    // doubling, while an exact-order source saturates
    let s1 = sup_on(10.0);
    let s2 = sup_on(20.0);
    let s3 = sup_on(40.0);
    let (inc1, inc2) = (s2 - s1, s3 - s2);
    if inc2 > inc1 + 1e-12 && inc2 > 1e-6 {
        return Err(Error::Domain(format!(
            "envelope not saturating: delta = {s1:.6e}, {s2:.6e}, {s3:.6e} at radii 10, 20, 40; \
             source grows faster than |t|^{p}"
        )));
    }
    Ok(s3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_primitive_matches_derivatives() {
        let nl = PowerNonlinearity::new(1.3, 3.5).unwrap();
        for &t in &[-2.0, -0.7, 0.3, 1.9] {
            let h = 1e-6;
            let fd_f = (nl.big_f(t + h) - nl.big_f(t - h)) / (2.0 * h);
            assert_relative_eq!(fd_f, nl.f(t), max_relative = 1e-7);
            let fd_df = (nl.f(t + h) - nl.f(t - h)) / (2.0 * h);
            assert_relative_eq!(fd_df, nl.df(t), max_relative = 1e-6);
        }
    }

    #[test]
    fn power_is_odd_and_primitive_even() {
        let nl = PowerNonlinearity::new(2.0, 4.0).unwrap();
        for &t in &[0.1, 1.0, 5.3] {
            assert_eq!(nl.f(-t), -nl.f(t));
            assert_eq!(nl.big_f(-t), nl.big_f(t));
        }
        // p = 4: f is a plain cubic
        assert_relative_eq!(nl.f(1.5), 2.0 * 1.5f64.powi(3), epsilon = 1e-14);
        assert_relative_eq!(nl.big_f(1.5), 0.5 * 1.5f64.powi(4), epsilon = 1e-14);
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(PowerNonlinearity::new(0.0, 4.0).is_err());
        assert!(PowerNonlinearity::new(-1.0, 4.0).is_err());
        assert!(PowerNonlinearity::new(1.0, 2.0).is_err());
    }

    #[test]
    fn power_certifies_all_conditions() {
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let rep = check_ar(&nl, 1e9, 12.0).unwrap();
        assert!(rep.certified(), "margins: {:?}", rep.worst_margin);
        assert_eq!(rep.c_r, 0.0);
        assert_eq!(rep.witness.theta, 4.0);
        assert_eq!(rep.witness.theta_tilde, 4.0);
        assert_eq!(rep.witness.r, 0.0);
    }

    #[test]
    fn linear_control_fails_superquadraticity() {
        let rep = check_ar(&LinearSource, 1e9, 12.0).unwrap();
        assert!(!rep.certified());
        assert!(!rep.ar[0], "theta~ = 2 is not admissible growth");
        assert!(!rep.ar[2], "AR must fail for f(t) = t");
        assert!(!rep.ar[4], "f(t)/t does not vanish at 0");
        assert!(rep.ar[1], "F is still a primitive of f");
    }

    #[test]
    fn supercritical_growth_exponent_rejected() {
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let rep = check_ar(&nl, 3.0, 12.0).unwrap();
        assert!(!rep.ar[0]);
    }

    #[test]
    fn small_grid_radius_rejected() {
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        assert!(check_ar(&nl, 1e9, 5.0).is_err());
    }

    #[test]
    fn sv12_delta_for_model_power() {
        // a = 1, p = 4: delta = a/p = 1/4 works globally and is sharp
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let d = sv12_delta(&nl, 1.0).unwrap();
        assert!(d <= 0.25 + 1e-12, "delta = {d}");
        assert!(d > 0.2, "delta = {d}");
    }

    #[test]
    fn sv12_delta_nonincreasing_in_eps() {
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.1, 1.0, 10.0] {
            let d = sv12_delta(&nl, eps).unwrap();
            assert!(d <= prev + 1e-15, "delta({eps}) = {d} > {prev}");
            prev = d;
        }
    }

    #[test]
    fn sv12_delta_degenerate_cases() {
        assert_eq!(sv12_delta(&ZeroSource, 1.0).unwrap(), 0.0);
        // f(t) = t is swallowed by the eps-term once 2 eps >= 1
        let d = sv12_delta(&LinearSource, 0.6).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn sv12_flags_mismatched_growth() {
        // claims theta = 4 but grows like t^5
        struct TooFast;
        impl Source for TooFast {
            fn f(&self, t: f64) -> f64 {
                t.powi(5)
            }
            fn df(&self, t: f64) -> f64 {
                5.0 * t.powi(4)
            }
            fn big_f(&self, t: f64) -> f64 {
                t.powi(6) / 6.0
            }
            fn witness(&self) -> ARWitness {
                PowerNonlinearity::new(1.0, 4.0).unwrap().witness()
            }
        }
        assert!(sv12_delta(&TooFast, 1.0).is_err());
    }
}
