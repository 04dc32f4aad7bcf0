use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixnl::worked_examples::{run_appendix_example, run_remark_example, ExampleReport};
use mixnl_cli::pipeline::{self, Stage};
use mixnl_cli::{config::RunConfig, output, presets};

#[derive(Parser)]
#[command(name = "mixnl", version, about = "Mixed-order nonlocal operator toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-key overrides, e.g. --set lambda=0.5 --set mesh.n_in=64.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides config `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the assembled matrices as COO files under DIR/matrices.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
    /// Newton tolerance (overrides config `solver.tol`).
    #[arg(long)]
    tol: Option<f64>,
    /// Newton iteration cap (overrides config `solver.max_iter`).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Linking seed count (overrides config `solver.seeds`).
    #[arg(long)]
    seeds: Option<usize>,
    /// Mountain-pass path resolution (overrides config `solver.path_points`).
    #[arg(long)]
    path_points: Option<usize>,
}

#[derive(Args, Clone)]
struct PresetArgs {
    /// One of cor1 | cor2 | cor3 | cor4.
    name: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Fractional order; repeatable for multi-atom presets.
    #[arg(long = "s")]
    s: Vec<f64>,
    /// Number of geometric terms (cor3).
    #[arg(long)]
    terms: Option<usize>,
    /// Density kind for cor4: constant | power.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    exponent: Option<f64>,
    /// Quadrature nodes reducing the density (cor4).
    #[arg(long)]
    nodes: Option<usize>,
    /// Write the TOML config here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the mesh and the operator matrices.
    Assemble(RunArgs),
    /// Assemble, then solve the eigenproblem.
    Eigs(RunArgs),
    /// Assemble, solve eigenpairs, and certify the variational geometry.
    VerifyGeometry(RunArgs),
    /// Full mountain-pass pipeline (lambda < 1).
    SolveMp(RunArgs),
    /// Full linking pipeline (lambda >= 1).
    SolveLink(RunArgs),
    /// Re-check the analytic reference examples; nonzero exit on failure.
    VerifyPaper(RunArgs),
    /// Emit a ready-made configuration for the reference operators.
    Preset(PresetArgs),
}

fn load_config(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let mut set = args.set.clone();
    if let Some(t) = args.tol {
        set.push(format!("solver.tol={t}"));
    }
    if let Some(m) = args.max_iter {
        set.push(format!("solver.max_iter={m}"));
    }
    if let Some(s) = args.seeds {
        set.push(format!("solver.seeds={s}"));
    }
    if let Some(p) = args.path_points {
        set.push(format!("solver.path_points={p}"));
    }
    if let Some(out) = &args.out {
        set.push(format!("output_dir=\"{}\"", out.display()));
    }
    Ok(RunConfig::load(args.config.as_deref(), &set)?)
}

fn execute(args: &RunArgs, stage: Stage, command: &str) -> anyhow::Result<()> {
    let config = load_config(args)?;
    match (command, pipeline::branch_for(config.lambda)) {
        ("solve-mp", mixnl_cli::Branch::Linking) => {
            anyhow::bail!("lambda = {} is not below 1; use solve-link", config.lambda)
        }
        ("solve-link", mixnl_cli::Branch::MountainPass) => {
            anyhow::bail!("lambda = {} is below 1; use solve-mp", config.lambda)
        }
        _ => {}
    }
    let out_dir = PathBuf::from(&config.output_dir);
    let output = pipeline::run(&config, stage, command)?;
    output::write_report(&out_dir, &output.report)?;
    if let Some(decomp) = &output.eigen {
        output::write_eigs_csv(&out_dir, decomp)?;
    }
    if let Some(dir) = &args.dump_matrices {
        output::write_matrices(dir, &output.assembled.matrices)?;
    }
    let u = output
        .mp
        .as_ref()
        .map(|m| m.solution.u.clone())
        .or_else(|| output.link.as_ref().map(|l| l.solution.u.clone()));
    if let Some(u) = u {
        output::write_solution_csv(&out_dir, &output.assembled.mesh, &u)?;
        output::write_trace_csv(&out_dir, &output)?;
    }
    if let Some(meta) = &output.report.solution {
        println!(
            "level = {:.12e}, residual = {:.3e}, iterations = {}",
            meta.level, meta.residual, meta.iterations
        );
    } else {
        println!(
            "done: {} DOFs, lambda_tilde = {:?}",
            output.report.n_dofs,
            &output.report.lambda_tilde
        );
    }
    Ok(())
}

fn print_example_report(rep: &ExampleReport) {
    for c in &rep.claims {
        println!(
            "[{}] {}: value {:.6e} (tol {:.1e})",
            if c.pass { "pass" } else { "FAIL" },
            c.claim,
            c.value,
            c.tol
        );
    }
}

fn verify_paper(args: &RunArgs) -> anyhow::Result<bool> {
    let config = load_config(args)?;
    let measure = {
        let mu = config.spectral_measure()?;
        if mu.is_zero() {
            mixnl::SpectralMeasure::from_atoms(&[(0.5, 1.0)])?
        } else {
            mu
        }
    };
    let remark = run_remark_example(&measure, 48, 12, 6.0)?;
    print_example_report(&remark);
    let appendix = run_appendix_example(&[1, 2, 5, 10, 100]);
    print_example_report(&appendix);
    Ok(remark.passed() && appendix.passed())
}

fn main() -> ExitCode {
    pipeline::init_threads();
    let cli = Cli::parse();
    let result: anyhow::Result<bool> = match &cli.command {
        Command::Assemble(args) => execute(args, Stage::Assemble, "assemble").map(|_| true),
        Command::Eigs(args) => execute(args, Stage::Eigs, "eigs").map(|_| true),
        Command::VerifyGeometry(args) => {
            execute(args, Stage::Certify, "verify-geometry").map(|_| true)
        }
        Command::SolveMp(args) => execute(args, Stage::Solve, "solve-mp").map(|_| true),
        Command::SolveLink(args) => execute(args, Stage::Solve, "solve-link").map(|_| true),
        Command::VerifyPaper(args) => verify_paper(args),
        Command::Preset(args) => (|| {
            let params = presets::PresetParams {
                alpha: args.alpha,
                beta: args.beta,
                s: args.s.clone(),
                terms: args.terms,
                omega: args.omega.clone(),
                weight: args.weight,
                exponent: args.exponent,
                nodes: args.nodes,
            };
            let config = presets::preset(&args.name, &params)?;
            let text = toml::to_string_pretty(&config)?;
            match &args.out {
                Some(p) => std::fs::write(p, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
