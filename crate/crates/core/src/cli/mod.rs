//! Configuration loading, the built-in benchmark suite and artifact output.

mod bench;
mod config;
mod svg;

use std::path::{Path, PathBuf};

use serde_json::json;

pub use bench::{
    builtin_system, run_benchmark, run_one, system_a, system_b, system_c, system_d, to_csv,
    write_artifacts, BenchFilter, BenchRow, BenchRun, BenchmarkSuite, CSV_HEADER,
};
pub use config::{load_config, parse_config, ConfigFile, Emission, RunSpec};
pub use svg::{emit_svg, render_svg};

use crate::cert::{
    assemble_slack_lp, compute_beta, verify_certificate, CertificateReport, CpaCandidate,
};
use crate::mesh::Triangulation;
use crate::synth::{run_method, SynthError, SynthesisReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{}: {1}", .0.display())]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Unsupported(String),
}

/// Iteration log and verdict as JSON.
pub fn report_json(spec: &RunSpec, r: &SynthesisReport) -> serde_json::Value {
    let records: Vec<_> = r
        .records
        .iter()
        .map(|it| {
            json!({
                "iteration": it.iteration,
                "N": it.vertices,
                "m_T": it.simplices,
                "max_slack": it.max_slack,
                "refined": it.refined,
                "score": it.score,
                "wall_ms": it.wall_ms,
            })
        })
        .collect();
    json!({
        "system": spec.model.name(),
        "method": spec.config.method.as_str(),
        "init": spec.init,
        "verdict": r.verdict.to_string(),
        "viable": r.verdict.is_viable(),
        "N": r.mesh.num_vertices(),
        "m_T": r.mesh.num_simplices(),
        "iterations": r.iterations(),
        "delta_m_T": r.delta_simplices(),
        "records": records,
    })
}

/// Runs a configuration and writes the requested artifacts.
pub fn execute(spec: &RunSpec) -> Result<(SynthesisReport, BenchRow), CliError> {
    let start = std::time::Instant::now();
    let report = run_method(&spec.model, &spec.config)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let row = BenchRow {
        system: spec.model.name().to_string(),
        method: spec.config.method,
        init: spec.init.clone(),
        vertices: report.mesh.num_vertices(),
        simplices: report.mesh.num_simplices(),
        viable: report.verdict.is_viable(),
        iterations: report.iterations(),
        delta_m_t: report.delta_simplices(),
        wall_ms,
        error: None,
    };
    if let Some(dir) = &spec.out_dir {
        let stem = spec
            .model
            .name()
            .replace(|c: char| !c.is_ascii_alphanumeric(), "_");
        let write = |name: String, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
        if spec.emit.mesh_json {
            write_artifacts(dir, &stem, &report)?;
        }
        if spec.emit.report {
            let text = serde_json::to_string_pretty(&report_json(spec, &report))
                .expect("report serializes");
            write(format!("{stem}_report.json"), text)?;
            write(
                format!("{stem}_report.csv"),
                to_csv(std::slice::from_ref(&row)),
            )?;
        }
        if spec.emit.svg {
            emit_svg(
                &report.mesh,
                &spec.model,
                report.candidate.as_ref(),
                &dir.join(format!("{stem}.svg")),
            )?;
        }
        if spec.emit.dump_lp {
            let beta = compute_beta(&spec.model, &report.mesh).map_err(SynthError::from)?;
            let (lp, _) = assemble_slack_lp(&spec.model, &report.mesh, &beta, spec.config.alpha)
                .map_err(SynthError::from)?;
            write(format!("{stem}.mps"), lp.to_mps(&stem))?;
        }
    }
    Ok((report, row))
}

/// Re-verifies a stored mesh and candidate against a configuration's model.
pub fn verify_files(
    mesh: &Path,
    candidate: &Path,
    config: &Path,
) -> Result<CertificateReport, CliError> {
    let spec = load_config(config)?;
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Io(p.to_path_buf(), e));
    let t = Triangulation::from_json(&read(mesh)?).map_err(SynthError::from)?;
    let c = CpaCandidate::from_json(&read(candidate)?).map_err(SynthError::from)?;
    Ok(verify_certificate(&spec.model, &t, &c))
}
