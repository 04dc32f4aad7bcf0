//! Result emission: report.json, eigs.csv, solution.csv, trace.csv, and the
//! optional COO matrix dumps. CSV bodies are deterministic for a fixed
//! (config, seed); timings live only in the JSON report.

use std::fs;
use std::path::Path;

use mixnl::{EigenDecomposition, Mesh1D, OperatorMatrices};
use nalgebra::DMatrix;

use crate::pipeline::{RunOutput, RunReport};

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_report(dir: &Path, report: &RunReport) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(dir.join("report.json"), json + "\n")?;
    Ok(())
}

pub fn write_eigs_csv(dir: &Path, decomp: &EigenDecomposition) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("k,lambda_tilde,lambda\n");
    for (k, lt) in decomp.lambdas_tilde.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", k + 1, fmt(*lt), fmt(lt + 1.0)));
    }
    fs::write(dir.join("eigs.csv"), csv)?;
    Ok(())
}

pub fn write_solution_csv(dir: &Path, mesh: &Mesh1D, u: &[f64]) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("node,x,u,interior\n");
    for (j, &x) in mesh.nodes.iter().enumerate() {
        let interior = x >= mesh.omega.0 && x <= mesh.omega.1;
        csv.push_str(&format!("{},{},{},{}\n", j, fmt(x), fmt(u[j]), interior as u8));
    }
    fs::write(dir.join("solution.csv"), csv)?;
    Ok(())
}

pub fn write_trace_csv(dir: &Path, output: &RunOutput) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = String::from("stage,index,value\n");
    if let Some(mp) = &output.mp {
        for (i, cap) in mp.cap_history.iter().enumerate() {
            csv.push_str(&format!("path_cap,{},{}\n", i, fmt(*cap)));
        }
        csv.push_str(&format!("level,0,{}\n", fmt(mp.solution.level)));
        csv.push_str(&format!("residual,0,{}\n", fmt(mp.solution.residual)));
    }
    if let Some(link) = &output.link {
        for s in &link.seeds {
            csv.push_str(&format!(
                "seed_level,{},{}\n",
                s.seed_index,
                fmt(if s.converged { s.level } else { f64::NAN })
            ));
        }
        csv.push_str(&format!("level,0,{}\n", fmt(link.solution.level)));
        csv.push_str(&format!("residual,0,{}\n", fmt(link.solution.residual)));
    }
    fs::write(dir.join("trace.csv"), csv)?;
    Ok(())
}

fn write_coo(path: &Path, m: &DMatrix<f64>) -> anyhow::Result<()> {
    let mut body = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                body.push_str(&format!("{} {} {}\n", i, j, fmt(v)));
            }
        }
    }
    fs::write(path, body)?;
    Ok(())
}

pub fn write_matrices(dir: &Path, matrices: &OperatorMatrices) -> anyhow::Result<()> {
    let mdir = dir.join("matrices");
    fs::create_dir_all(&mdir)?;
    write_coo(&mdir.join("mass.coo"), &matrices.mass)?;
    write_coo(&mdir.join("stiffness.coo"), &matrices.stiffness)?;
    write_coo(&mdir.join("gagliardo.coo"), &matrices.gagliardo)?;
    Ok(())
}
