//! Critical points of the energy in the two regimes: mountain pass for
//! lambda below the first eigenvalue, linking at or above it. Both routes
//! first certify the geometry numerically, then locate a critical point and
//! polish it with Newton.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{newton_solve, NewtonOptions, Problem};
use crate::error::{Error, Result};
use crate::spectra::{EigenDecomposition, Splitting};

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub u: Vec<f64>,
    pub level: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MpOutcome {
    pub solution: Solution,
    /// Final maximum of the energy along the descended path; the critical
    /// level never exceeds it.
    pub path_cap: f64,
    /// Path maximum after each outer descent sweep.
    pub cap_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRecord {
    pub seed_index: usize,
    pub converged: bool,
    pub accepted: bool,
    pub level: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkOutcome {
    pub solution: Solution,
    pub seeds: Vec<SeedRecord>,
}

/// Numerical evidence for the mountain-pass geometry: the energy is
/// positive on the |.|-sphere of radius rho and negative at t_e * u0 beyond
/// it, u0 the normalized constant.
#[derive(Debug, Clone, Serialize)]
pub struct MpCertificate {
    pub rho: f64,
    pub min_on_sphere: f64,
    pub t_e: f64,
    pub energy_at_e: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct MpOptions {
    pub path_points: usize,
    pub max_outer: usize,
    pub newton: NewtonOptions,
}

impl Default for MpOptions {
    fn default() -> Self {
        MpOptions {
            path_points: 40,
            max_outer: 120,
            newton: NewtonOptions::default(),
        }
    }
}

fn anorm_of(problem: &Problem, u: &DVector<f64>) -> f64 {
    u.dot(&(problem.norm_matrix() * u)).max(0.0).sqrt()
}

/// Normalized constant over Omega (zero on inactive collar DOFs): |u0| = 1.
fn normalized_constant(problem: &Problem) -> DVector<f64> {
    let ones = problem.prolong(&DVector::from_element(problem.active_dofs().len(), 1.0));
    let n = anorm_of(problem, &ones);
    ones / n
}

fn random_direction(problem: &Problem, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let k = problem.active_dofs().len();
    let v = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
    let v = problem.prolong(&v);
    let n = anorm_of(problem, &v);
    v / n
}

/// Certifies I > 0 on the rho-sphere (sampled over `n_dirs` random
/// directions plus the constant one) and finds t_e with I(t_e u0) < 0.
pub fn verify_mp_geometry(
    problem: &Problem,
    rho: f64,
    n_dirs: usize,
    seed: u64,
) -> Result<MpCertificate> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = normalized_constant(problem);
    let mut min_on_sphere = f64::INFINITY;
    let mut samples = 0;
    for d in 0..=n_dirs {
        let dir = if d == 0 {
            u0.clone()
        } else {
            random_direction(problem, &mut rng)
        };
        for sign in [1.0, -1.0] {
            let val = problem.energy(&(&dir * (sign * rho)));
            min_on_sphere = min_on_sphere.min(val);
            samples += 1;
        }
    }
    if min_on_sphere <= 0.0 {
        return Err(Error::GeometryNotCertified(format!(
            "energy dips to {min_on_sphere:.3e} on the sphere of radius {rho}"
        )));
    }
    let mut t_e = 2.0 * rho;
    let mut energy_at_e = problem.energy(&(&u0 * t_e));
    let mut ok = energy_at_e < 0.0;
    for _ in 0..60 {
        if ok {
            break;
        }
        t_e *= 2.0;
        energy_at_e = problem.energy(&(&u0 * t_e));
        ok = energy_at_e < 0.0;
    }
    if !ok {
        return Err(Error::DegeneratePath);
    }
    Ok(MpCertificate {
        rho,
        min_on_sphere,
        t_e,
        energy_at_e,
        samples,
    })
}

fn retension(path: &mut Vec<DVector<f64>>) {
    let p = path.len() - 1;
    let mut cum = vec![0.0];
    for k in 1..=p {
        let d = (&path[k] - &path[k - 1]).norm();
        cum.push(cum[k - 1] + d);
    }
    let total = cum[p];
    if total <= 0.0 {
        return;
    }
    let mut out = Vec::with_capacity(p + 1);
    out.push(path[0].clone());
    let mut seg = 1usize;
    for k in 1..p {
        let target = total * k as f64 / p as f64;
        while seg < p && cum[seg] < target {
            seg += 1;
        }
        let w = (target - cum[seg - 1]) / (cum[seg] - cum[seg - 1]).max(1e-300);
        out.push(&path[seg - 1] * (1.0 - w) + &path[seg] * w);
    }
    out.push(path[p].clone());
    *path = out;
}

/// Mountain-pass critical point: descend a piecewise-linear path from 0 to
/// t_e u0 until its maximum stalls, then Newton-polish the maximizer.
pub fn solve_mountain_pass(
    problem: &Problem,
    cert: &MpCertificate,
    opts: &MpOptions,
) -> Result<MpOutcome> {
    let p = opts.path_points.max(4);
    let u0 = normalized_constant(problem);
    let top = &u0 * cert.t_e;
    let mut path: Vec<DVector<f64>> =
        (0..=p).map(|k| &top * (k as f64 / p as f64)).collect();

    let mut cap = f64::INFINITY;
    let mut cap_history = Vec::new();
    let mut stall = 0;
    for _ in 0..opts.max_outer {
        for k in 1..p {
            let g = problem.gradient(&path[k]);
            let e0 = problem.energy(&path[k]);
            let gn = g.norm();
            if gn <= 1e-14 {
                continue;
            }
            let mut tau = 0.5 / gn.max(1.0);
            for _ in 0..30 {
                let trial = &path[k] - &g * tau;
                if problem.energy(&trial) < e0 {
                    path[k] = trial;
                    break;
                }
                tau *= 0.5;
            }
        }
        retension(&mut path);
        let new_cap = path
            .iter()
            .map(|u| problem.energy(u))
            .fold(f64::NEG_INFINITY, f64::max);
        if cap - new_cap <= 1e-12 * cap.abs().max(1.0) {
            stall += 1;
        } else {
            stall = 0;
        }
        cap = new_cap;
        cap_history.push(cap);
        if stall >= 5 {
            break;
        }
    }

    let (k_max, _) = path
        .iter()
        .enumerate()
        .map(|(k, u)| (k, problem.energy(u)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    // the level bound is the maximum over the whole final path, which can
    // peak between nodes; sub-sample each segment and sharpen the best
    // bracket with a ternary search
    let seg_energy =
        |k: usize, s: f64| problem.energy(&(&path[k] * (1.0 - s) + &path[k + 1] * s));
    let mut best = (k_max.min(p - 2), 0.0);
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..p - 1 {
        for q in 0..16 {
            let s = q as f64 / 16.0;
            let v = seg_energy(k, s);
            if v > best_val {
                best_val = v;
                best = (k, s);
            }
        }
    }
    let (kb, sb) = best;
    let (mut lo, mut hi) = ((sb - 1.0 / 16.0).max(0.0), (sb + 1.0 / 16.0).min(1.0));
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if seg_energy(kb, m1) < seg_energy(kb, m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    cap = cap.max(best_val).max(seg_energy(kb, 0.5 * (lo + hi)));
    let (u, iterations) = newton_solve(problem, &path[k_max], &opts.newton)?;
    let level = problem.energy(&u);
    let residual = problem.residual(&u);
    if anorm_of(problem, &u) <= 1e-8 * cert.rho {
        return Err(Error::NonConvergence(
            "mountain-pass polish collapsed to the trivial solution".into(),
        ));
    }
    if !(level > 0.0) || level > cap + 1e-9 * cap.abs().max(1.0) {
        return Err(Error::NonConvergence(format!(
            "mountain-pass level {level} outside (0, {cap}]"
        )));
    }
    Ok(MpOutcome {
        solution: Solution {
            u: u.iter().cloned().collect(),
            level,
            residual,
            iterations,
        },
        path_cap: cap,
        cap_history,
    })
}

/// Numerical evidence for the linking geometry around the splitting
/// H_i + H_i^perp: the energy is at least beta > 0 on the rho-sphere of the
/// complement and nonpositive on the boundary of the linking set of
/// radius `radius`.
#[derive(Debug, Clone, Serialize)]
pub struct LinkCertificate {
    pub index: usize,
    pub rho: f64,
    pub beta: f64,
    pub radius: f64,
    pub max_on_boundary: f64,
    pub max_inside: f64,
    pub samples: usize,
}

/// Random vector in the span of `basis` with |.| = r, using the closed form
/// |sum a_k e_k|^2 = sum a_k^2 lambda_k for the M-orthonormal eigenbasis.
fn random_in_span(
    basis: &[DVector<f64>],
    lambdas: &[f64],
    r: f64,
    rng: &mut ChaCha8Rng,
) -> DVector<f64> {
    let coeff: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm_sq: f64 = coeff
        .iter()
        .zip(lambdas)
        .map(|(a, l)| a * a * l)
        .sum();
    let scale = r / norm_sq.sqrt();
    let mut out = DVector::zeros(basis[0].len());
    for (a, b) in coeff.iter().zip(basis) {
        out += b * (a * scale);
    }
    out
}

pub fn verify_linking_geometry(
    problem: &Problem,
    decomp: &EigenDecomposition,
    splitting: &Splitting,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> Result<LinkCertificate> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let i = splitting.index;
    let lambdas = decomp.lambdas();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let high = splitting.basis_high();
    let low = splitting.basis_low();
    let e = decomp.vectors[i].clone();
    let e_anorm_sq = lambdas[i];
    let mut samples = 0;

    // sphere of radius rho inside the complement
    let mut beta = f64::INFINITY;
    for k in 0..n_samples {
        let v = if k == 0 {
            &e * (rho / e_anorm_sq.sqrt())
        } else {
            random_in_span(high, &lambdas[i..], rho, &mut rng)
        };
        beta = beta.min(problem.energy(&v));
        samples += 1;
    }
    if beta <= 0.0 {
        return Err(Error::GeometryNotCertified(format!(
            "energy dips to {beta:.3e} on the complement sphere of radius {rho}"
        )));
    }

    // grow the linking set until the sampled energy on its boundary is
    // nonpositive; also record the inner maximum as an upper bound for the
    // critical level
    let mut radius = 4.0 * rho;
    let mut ok = false;
    let mut max_on_boundary = f64::INFINITY;
    let mut max_inside = f64::NEG_INFINITY;
    for _ in 0..40 {
        max_on_boundary = f64::NEG_INFINITY;
        max_inside = f64::NEG_INFINITY;
        for k in 0..n_samples {
            // face t = 0: the low subspace itself
            let r = radius * (k + 1) as f64 / n_samples as f64;
            let v = random_in_span(low, &lambdas[..i], r, &mut rng);
            max_on_boundary = max_on_boundary.max(problem.energy(&v));
            samples += 1;

            // face |v + t e| = radius with t >= 0
            let mut coeff: Vec<f64> = (0..=i).map(|_| rng.gen_range(-1.0..1.0)).collect();
            coeff[i] = coeff[i].abs();
            let norm_sq: f64 = coeff.iter().zip(&lambdas[..=i]).map(|(a, l)| a * a * l).sum();
            let scale = radius / norm_sq.sqrt();
            let mut w = DVector::zeros(e.len());
            for (a, b) in coeff.iter().zip(&decomp.vectors[..=i]) {
                w += b * (a * scale);
            }
            max_on_boundary = max_on_boundary.max(problem.energy(&w));
            // interior sample of the set, for the level bound
            max_inside = max_inside.max(problem.energy(&(&w * rng.gen_range(0.0..1.0))));
            samples += 2;
        }
        if max_on_boundary <= 0.0 {
            ok = true;
            break;
        }
        radius *= 2.0;
    }
    if !ok || radius <= rho {
        return Err(Error::GeometryNotCertified(format!(
            "boundary energy still {max_on_boundary:.3e} at radius {radius}"
        )));
    }
    max_inside = max_inside.max(beta);
    Ok(LinkCertificate {
        index: i,
        rho,
        beta,
        radius,
        max_on_boundary,
        max_inside,
        samples,
    })
}

/// Newton on the deflated gradient m(u) g(u), m(u) = prod (1/|u - r_k|^2 + 1),
/// which repels the iteration from already-known roots.
pub fn deflated_newton(
    problem: &Problem,
    u0: &DVector<f64>,
    roots: &[DVector<f64>],
    opts: &NewtonOptions,
) -> Result<(DVector<f64>, usize)> {
    let m = problem.matrices.mass.clone();
    let dist_sq = |u: &DVector<f64>, r: &DVector<f64>| -> f64 {
        let d = u - r;
        d.dot(&(&m * &d))
    };
    let deflator = |u: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut val = 1.0;
        let mut grad = DVector::zeros(u.len());
        for r in roots {
            let d = dist_sq(u, r);
            let q = 1.0 / d.max(1e-300);
            val *= q + 1.0;
            grad += (&m * (u - r)) * (-2.0 * q * q / (q + 1.0));
        }
        (val, grad)
    };

    let mut u = u0.clone();
    for it in 0..opts.max_iter {
        if problem.residual(&u) <= opts.tol
            && roots.iter().all(|r| dist_sq(&u, r) > 1e-12)
        {
            return Ok((u, it));
        }
        let g = problem.gradient(&u);
        let h = problem.hessian(&u);
        let (mv, mg) = deflator(&u);
        let mg = mg * mv;
        // J = m H + g (grad m)^T, restricted to the active DOFs
        let g_a = problem.restrict(&g);
        let mg_a = problem.restrict(&mg);
        let mut j = problem.restrict_matrix(&h) * mv;
        for r in 0..j.nrows() {
            for c in 0..j.ncols() {
                j[(r, c)] += g_a[r] * mg_a[c];
            }
        }
        let big_g = &g_a * mv;
        let lu = j.full_piv_lu();
        let step = lu
            .solve(&(-&big_g))
            .ok_or(Error::SingularHessian { cond: f64::INFINITY })?;
        let g0 = big_g.norm();
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial_a = problem.restrict(&u) + &step * s;
            let trial = problem.prolong(&trial_a);
            let gt = problem.restrict(&problem.gradient(&trial));
            let (mt, _) = deflator(&trial);
            if (gt * mt).norm() < g0 * (1.0 - 0.25 * s) + 1e-300 {
                u = trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence(format!(
                "deflated line search stalled at iteration {it}"
            )));
        }
    }
    Err(Error::NonConvergence(format!(
        "deflated Newton: residual {:.3e} after {} iterations",
        problem.residual(&u),
        opts.max_iter
    )))
}

fn is_nonconstant_on_omega(problem: &Problem, u: &DVector<f64>) -> bool {
    let interior = problem.mesh.interior_dofs();
    let vals: Vec<f64> = interior.iter().map(|&j| u[j]).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let dev = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let amp = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    dev > 1e-6 * amp.max(1e-12)
}

#[derive(Debug, Clone, Copy)]
pub struct LinkOptions {
    pub n_seeds: usize,
    pub newton: NewtonOptions,
}

impl Default for LinkOptions {
    fn default() -> Self {
        LinkOptions {
            n_seeds: 12,
            newton: NewtonOptions::default(),
        }
    }
}

/// Linking critical point: deflated Newton from seeds along e_{i+1} (the ray
/// maximizer first) with small low-subspace perturbations, keeping the
/// lowest positive level attained by a nonconstant solution within the
/// certified range.
pub fn solve_linking(
    problem: &Problem,
    decomp: &EigenDecomposition,
    splitting: &Splitting,
    cert: &LinkCertificate,
    seed: u64,
    opts: &LinkOptions,
) -> Result<LinkOutcome> {
    let i = splitting.index;
    let e = &decomp.vectors[i];
    let lambdas = decomp.lambdas();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // maximizer of I along the ray t -> t e
    let mut t_star = 0.0;
    let mut best = f64::NEG_INFINITY;
    let t_hi = cert.radius / lambdas[i].sqrt();
    for k in 1..400 {
        let t = t_hi * k as f64 / 400.0;
        let v = problem.energy(&(e * t));
        if v > best {
            best = v;
            t_star = t;
        }
    }
    if !(best > 0.0) {
        return Err(Error::GeometryNotCertified(
            "energy nonpositive along the whole seed ray".into(),
        ));
    }

    let zero = DVector::zeros(e.len());
    let mut deflated: Vec<DVector<f64>> = vec![zero];
    let mut found: Option<(DVector<f64>, f64, f64, usize)> = None;
    let mut seeds = Vec::new();
    let low = splitting.basis_low();
    for k in 0..opts.n_seeds {
        let mut u0 = e * (t_star * if k % 2 == 0 { 1.0 } else { -1.0 });
        if k >= 2 {
            for b in low {
                u0 += b * (t_star * rng.gen_range(-0.3..0.3));
            }
        }
        let res = deflated_newton(problem, &u0, &deflated, &opts.newton);
        let (u, iters) = match res {
            Ok(v) => v,
            Err(_) => {
                seeds.push(SeedRecord {
                    seed_index: k,
                    converged: false,
                    accepted: false,
                    level: f64::NAN,
                    residual: f64::NAN,
                    iterations: 0,
                });
                continue;
            }
        };
        let level = problem.energy(&u);
        let residual = problem.residual(&u);
        let acceptable = residual <= opts.newton.tol.max(1e-9)
            && level > 0.0
            && level <= cert.max_inside * 10.0 + 1.0
            && is_nonconstant_on_omega(problem, &u);
        seeds.push(SeedRecord {
            seed_index: k,
            converged: true,
            accepted: acceptable,
            level,
            residual,
            iterations: iters,
        });
        if acceptable {
            let better = match &found {
                Some((_, l, _, _)) => level < *l,
                None => true,
            };
            if better {
                found = Some((u.clone(), level, residual, iters));
            }
        }
        deflated.push(u);
    }
    match found {
        Some((u, level, residual, iterations)) => Ok(LinkOutcome {
            solution: Solution {
                u: u.iter().cloned().collect(),
                level,
                residual,
                iterations,
            },
            seeds,
        }),
        None => Err(Error::NonConvergence(
            "no admissible nonconstant critical point found from the linking seeds".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{OperatorMatrices, QuadratureOptions};
    use crate::measure::SpectralMeasure;
    use crate::mesh::{build_mesh, Mesh1D};
    use crate::nonlinearity::{PowerNonlinearity, ZeroSource};
    use crate::spectra::{solve_eigen, split};
    use approx::assert_relative_eq;

    fn setup(alpha: f64) -> (Mesh1D, OperatorMatrices) {
        let mesh = build_mesh((-1.0, 1.0), 5.0, 24, 8).unwrap();
        let mu = SpectralMeasure::from_atoms(&[(0.5, 1.0)]).unwrap();
        let mats =
            OperatorMatrices::assemble(&mesh, &mu, alpha, &QuadratureOptions::default()).unwrap();
        (mesh, mats)
    }

    #[test]
    fn mountain_pass_finds_the_constant_branch() {
        let (mesh, mats) = setup(0.5);
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let lambda = 0.25;
        let p = Problem::new(&mesh, &mats, lambda, &nl);
        let cert = verify_mp_geometry(&p, 0.1, 20, 1).unwrap();
        assert!(cert.min_on_sphere > 0.0);
        assert!(cert.energy_at_e < 0.0);
        let out = solve_mountain_pass(&p, &cert, &MpOptions::default()).unwrap();
        let (sol, cap) = (out.solution, out.path_cap);
        assert!(sol.residual <= 1e-10);
        assert!(sol.level > 0.0 && sol.level <= cap + 1e-9);
        assert!(!out.cap_history.is_empty());
        // the mountain-pass point here is the constant sqrt(1 - lambda)
        let c = (1.0 - lambda).sqrt();
        let exact_level = 2.0 * (1.0 - lambda).powi(2) / 4.0;
        assert_relative_eq!(sol.level, exact_level, max_relative = 1e-8);
        for &j in &mesh.interior_dofs() {
            assert_relative_eq!(sol.u[j], c, epsilon = 1e-7);
        }
    }

    #[test]
    fn degenerate_source_is_rejected_by_the_geometry_check() {
        let (mesh, mats) = setup(0.5);
        let p = Problem::new(&mesh, &mats, 0.25, &ZeroSource);
        match verify_mp_geometry(&p, 0.1, 10, 1) {
            Err(Error::DegeneratePath) => {}
            other => panic!("expected DegeneratePath, got {other:?}"),
        }
    }

    #[test]
    fn mp_geometry_fails_when_lambda_too_large() {
        // lambda >= 1: the constant direction is already nonpositive at rho
        let (mesh, mats) = setup(0.5);
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let p = Problem::new(&mesh, &mats, 1.5, &nl);
        match verify_mp_geometry(&p, 0.1, 10, 1) {
            Err(Error::GeometryNotCertified(_)) => {}
            other => panic!("expected GeometryNotCertified, got {other:?}"),
        }
    }

    #[test]
    fn linking_at_the_first_eigenvalue() {
        let (mesh, mats) = setup(0.0);
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let p = Problem::new(&mesh, &mats, 1.0, &nl);
        let decomp = solve_eigen(&mesh, &mats, 8).unwrap();
        let sp = split(&decomp, &mats.mass, 1).unwrap();
        let cert = verify_linking_geometry(&p, &decomp, &sp, 0.1, 40, 2).unwrap();
        assert!(cert.beta > 0.0);
        assert!(cert.max_on_boundary <= 0.0);
        let out = solve_linking(&p, &decomp, &sp, &cert, 3, &LinkOptions::default()).unwrap();
        let sol = out.solution;
        assert!(out.seeds.iter().any(|s| s.accepted));
        assert!(sol.residual <= 1e-9, "residual {}", sol.residual);
        assert!(sol.level > 0.0);
        let u = DVector::from_vec(sol.u.clone());
        assert!(is_nonconstant_on_omega(&p, &u));
        // at lambda = lambda_1 the only constant critical point is 0
        let vals: Vec<f64> = mesh.interior_dofs().iter().map(|&j| u[j]).collect();
        let amp = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(amp > 1e-3);
    }

    #[test]
    fn deflation_avoids_known_roots() {
        let (mesh, mats) = setup(0.5);
        let nl = PowerNonlinearity::new(1.0, 4.0).unwrap();
        let lambda = 0.25;
        let p = Problem::new(&mesh, &mats, lambda, &nl);
        let c = (1.0 - lambda).sqrt();
        let n = mesh.n_dofs();
        let plus = DVector::from_element(n, c);
        let zero = DVector::zeros(n);
        // starting right at the known root, deflation must push elsewhere
        let u0 = DVector::from_element(n, c * 1.05);
        let (u, _) = deflated_newton(&p, &u0, &[zero, plus], &NewtonOptions::default()).unwrap();
        assert!(p.residual(&u) <= 1e-11);
        let d = (&u - DVector::from_element(n, c)).amax();
        assert!(d > 1e-3, "converged back to the deflated root");
    }
}
