//! Orchestration of assemble -> eigs -> certify -> solve, and the run
//! report emitted as JSON.

use std::collections::BTreeMap;
use std::time::Instant;

use mixnl::energy::Problem;
use mixnl::solvers::{LinkOptions, MpOptions};
use mixnl::{
    anorm, check_ar, solve_eigen, solve_linking, solve_mountain_pass, split, sv12_delta,
    verify_linking_geometry, verify_mp_geometry, ARReport, EigenDecomposition, Error,
    LinkCertificate, LinkOutcome, Mesh1D, MpCertificate, MpOutcome, NewtonOptions,
    OperatorMatrices, PowerNonlinearity, SpectralMeasure,
};
use nalgebra::DVector;
use serde::Serialize;

use crate::config::RunConfig;

/// Branch selection is a pure function of lambda with the analytic first
/// eigenvalue lambda_1 = 1 as the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    MountainPass,
    Linking,
}

pub fn branch_for(lambda: f64) -> Branch {
    if lambda < 1.0 {
        Branch::MountainPass
    } else {
        Branch::Linking
    }
}

/// Index i of the splitting H_i + H_i^perp: lambda lies in
/// [lambda_i, lambda_{i+1}). The comparison carries a scale-relative slack
/// so that the discrete lambda_1 = 1 + O(eps) still counts at lambda = 1.
pub fn splitting_index(decomp: &EigenDecomposition, lambda: f64) -> usize {
    let tol = 1e-9 * lambda.abs().max(1.0);
    decomp.lambdas().iter().filter(|&&l| l <= lambda + tol).count()
}

pub struct Assembled {
    pub config: RunConfig,
    pub mesh: Mesh1D,
    pub measure: SpectralMeasure,
    pub matrices: OperatorMatrices,
    pub nonlinearity: PowerNonlinearity,
}

pub fn assemble(config: &RunConfig) -> mixnl::Result<Assembled> {
    config
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    let [a, b] = config.mesh.omega;
    let mesh = mixnl::build_mesh(
        (a, b),
        config.mesh.collar_radius,
        config.mesh.n_in,
        config.mesh.n_ext,
    )?;
    let measure = config.spectral_measure()?;
    let matrices = OperatorMatrices::assemble(
        &mesh,
        &measure,
        config.alpha,
        &config.quadrature_options(),
    )?;
    Ok(Assembled {
        config: config.clone(),
        mesh,
        measure,
        matrices,
        nonlinearity: config.power_nonlinearity()?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionMeta {
    pub level: f64,
    pub residual: f64,
    pub iterations: usize,
    pub anorm: f64,
    pub l2_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub s_sharp: f64,
    pub critical_exponent: f64,
    pub branch: Branch,
    pub n_dofs: usize,
    pub lambda_tilde: Vec<f64>,
    pub ar_report: Option<ARReport>,
    pub sv12_deltas: Vec<(f64, f64)>,
    pub mp_certificate: Option<MpCertificate>,
    pub link_certificate: Option<LinkCertificate>,
    pub splitting_index: Option<usize>,
    pub solution: Option<SolutionMeta>,
    /// Wall-clock stage timings; excluded from determinism guarantees.
    pub timings_ms: BTreeMap<String, u128>,
}

pub struct RunOutput {
    pub report: RunReport,
    pub assembled: Assembled,
    pub eigen: Option<EigenDecomposition>,
    pub mp: Option<MpOutcome>,
    pub link: Option<LinkOutcome>,
}

/// How far down the pipeline a subcommand goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Assemble,
    Eigs,
    Certify,
    Solve,
}

pub fn run(config: &RunConfig, stage: Stage, command: &str) -> mixnl::Result<RunOutput> {
    let mut timings = BTreeMap::new();
    let t0 = Instant::now();
    let assembled = assemble(config)?;
    timings.insert("assemble".to_string(), t0.elapsed().as_millis());
    let bookkeeping = config.bookkeeping()?;
    let branch = branch_for(config.lambda);

    let mut report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config: config.clone(),
        s_sharp: bookkeeping.s_sharp,
        critical_exponent: bookkeeping.critical_exponent,
        branch,
        n_dofs: assembled.mesh.n_dofs(),
        lambda_tilde: Vec::new(),
        ar_report: None,
        sv12_deltas: Vec::new(),
        mp_certificate: None,
        link_certificate: None,
        splitting_index: None,
        solution: None,
        timings_ms: timings,
    };
    if stage == Stage::Assemble {
        return Ok(RunOutput {
            report,
            assembled,
            eigen: None,
            mp: None,
            link: None,
        });
    }

    let t = Instant::now();
    let decomp = solve_eigen(&assembled.mesh, &assembled.matrices, config.n_eigs)?;
    report
        .timings_ms
        .insert("eigs".to_string(), t.elapsed().as_millis());
    report.lambda_tilde = decomp.lambdas_tilde.clone();
    if stage == Stage::Eigs {
        return Ok(RunOutput {
            report,
            assembled,
            eigen: Some(decomp),
            mp: None,
            link: None,
        });
    }

    // structure conditions for the source term
    let ar = check_ar(&assembled.nonlinearity, bookkeeping.critical_exponent, 12.0)?;
    if !ar.certified() {
        return Err(Error::Domain(format!(
            "source term fails its structure conditions: margins {:?}",
            ar.worst_margin
        )));
    }
    let sv12: Vec<(f64, f64)> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&eps| Ok((eps, sv12_delta(&assembled.nonlinearity, eps)?)))
        .collect::<mixnl::Result<_>>()?;
    report.ar_report = Some(ar);
    report.sv12_deltas = sv12;

    let problem = Problem::new(
        &assembled.mesh,
        &assembled.matrices,
        config.lambda,
        &assembled.nonlinearity,
    );
    let t = Instant::now();
    let newton = NewtonOptions {
        max_iter: config.solver.max_iter,
        tol: config.solver.tol,
    };
    let mut mp_out = None;
    let mut link_out = None;
    match branch {
        Branch::MountainPass => {
            let cert = verify_mp_geometry(
                &problem,
                config.solver.rho,
                config.solver.n_dirs,
                config.seed,
            )?;
            report.mp_certificate = Some(cert.clone());
            report
                .timings_ms
                .insert("certify".to_string(), t.elapsed().as_millis());
            if stage != Stage::Certify {
                let t = Instant::now();
                let mp = solve_mountain_pass(
                    &problem,
                    &cert,
                    &MpOptions {
                        path_points: config.solver.path_points,
                        max_outer: 120,
                        newton,
                    },
                )?;
                report
                    .timings_ms
                    .insert("solve".to_string(), t.elapsed().as_millis());
                report.solution = Some(solution_meta(&assembled, &mp.solution.u, &mp.solution));
                mp_out = Some(mp);
            }
        }
        Branch::Linking => {
            let i = splitting_index(&decomp, config.lambda);
            if i == 0 || i >= decomp.len() {
                return Err(Error::Eigen(format!(
                    "lambda = {} needs eigenvalue index {i}, have {} pairs",
                    config.lambda,
                    decomp.len()
                )));
            }
            let splitting = split(&decomp, &assembled.matrices.mass, i)?;
            report.splitting_index = Some(i);
            let cert = verify_linking_geometry(
                &problem,
                &decomp,
                &splitting,
                config.solver.rho,
                config.solver.n_dirs,
                config.seed,
            )?;
            report.link_certificate = Some(cert.clone());
            report
                .timings_ms
                .insert("certify".to_string(), t.elapsed().as_millis());
            if stage != Stage::Certify {
                let t = Instant::now();
                let link = solve_linking(
                    &problem,
                    &decomp,
                    &splitting,
                    &cert,
                    config.seed,
                    &LinkOptions {
                        n_seeds: config.solver.seeds,
                        newton,
                    },
                )?;
                report
                    .timings_ms
                    .insert("solve".to_string(), t.elapsed().as_millis());
                report.solution =
                    Some(solution_meta(&assembled, &link.solution.u, &link.solution));
                link_out = Some(link);
            }
        }
    }
    drop(problem);
    Ok(RunOutput {
        report,
        assembled,
        eigen: Some(decomp),
        mp: mp_out,
        link: link_out,
    })
}

fn solution_meta(assembled: &Assembled, u: &[f64], sol: &mixnl::Solution) -> SolutionMeta {
    let v = DVector::from_column_slice(u);
    let l2 = v.dot(&(&assembled.matrices.mass * &v)).max(0.0).sqrt();
    SolutionMeta {
        level: sol.level,
        residual: sol.residual,
        iterations: sol.iterations,
        anorm: anorm(&v, &assembled.matrices),
        l2_norm: l2,
    }
}

/// Caps the global thread pool from MIXNL_THREADS when set; first caller
/// wins, later calls are no-ops.
pub fn init_threads() {
    if let Ok(v) = std::env::var("MIXNL_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
