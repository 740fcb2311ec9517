use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use super::CliError;
use crate::expr::{Interval, SystemModel};
use crate::synth::{run_method, Method, SynthesisConfig, SynthesisReport};

pub const CSV_HEADER: &str = "system,method,init,N,m_T,viable,iterations,delta_m_T,wall_ms";

/// One benchmark configuration.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub system: String,
    pub init: String,
    pub model: SystemModel,
    pub config: SynthesisConfig,
}

#[derive(Debug, Clone)]
pub struct BenchmarkSuite {
    pub name: String,
    pub runs: Vec<BenchRun>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchFilter {
    pub system: Option<String>,
    pub method: Option<Method>,
}

impl BenchFilter {
    pub fn accepts(&self, run: &BenchRun) -> bool {
        self.system
            .as_ref()
            .is_none_or(|s| s.eq_ignore_ascii_case(&run.system))
            && self.method.is_none_or(|m| m == run.config.method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub system: String,
    pub method: Method,
    pub init: String,
    pub vertices: usize,
    pub simplices: usize,
    pub viable: bool,
    pub iterations: usize,
    pub delta_m_t: isize,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        let viable = match (&self.error, self.viable) {
            (Some(_), _) => "error",
            (None, true) => "Yes",
            (None, false) => "No",
        };
        format!(
            "{},{},{},{},{},{},{},{},{:.0}",
            self.system,
            self.method,
            self.init,
            self.vertices,
            self.simplices,
            viable,
            self.iterations,
            self.delta_m_t,
            self.wall_ms
        )
    }

    fn from_report(run: &BenchRun, r: &SynthesisReport, wall_ms: f64) -> Self {
        BenchRow {
            system: run.system.clone(),
            method: run.config.method,
            init: run.init.clone(),
            vertices: r.mesh.num_vertices(),
            simplices: r.mesh.num_simplices(),
            viable: r.verdict.is_viable(),
            iterations: r.iterations(),
            delta_m_t: r.delta_simplices(),
            wall_ms,
            error: None,
        }
    }
}

pub fn system_a() -> SystemModel {
    let d = Interval::new(-PI / 2.0, PI / 2.0);
    SystemModel::new("A", &["x2", "-sin(x1) - x2"], vec![d; 2]).expect("built-in model")
}

pub fn system_b() -> SystemModel {
    let d = Interval::new(-0.75, 0.75);
    SystemModel::new(
        "B",
        &["0.3*x1^5 - 0.5*x2^4 - 0.5*x1", "-0.5*x1^6 - 0.1*x2"],
        vec![d; 2],
    )
    .expect("built-in model")
}

pub fn system_c() -> SystemModel {
    let d = Interval::new(-1.0, 1.0);
    SystemModel::new(
        "C",
        &["0.5*x1^4*sin(x2) + 0.3*x2", "-0.5*x1 - 1.25*x2 - x2^3*x1"],
        vec![d; 2],
    )
    .expect("built-in model")
}

pub fn system_d() -> SystemModel {
    let d = Interval::new(-1.0, 1.0);
    SystemModel::new(
        "D",
        &[
            "-3*x1 + 0.5*x1 - x3*x2^4",
            "-x2*x3^4 - 2.5*x2 + 0.5*x3",
            "-0.5*x2 - 5*x3 + x1*x2^2",
        ],
        vec![d; 3],
    )
    .expect("built-in model")
}

pub fn builtin_system(name: &str) -> Option<SystemModel> {
    match name.to_ascii_uppercase().as_str() {
        "A" => Some(system_a()),
        "B" => Some(system_b()),
        "C" => Some(system_c()),
        "D" => Some(system_d()),
        _ => None,
    }
}

/// Uniform spacings, linear-axis fallbacks and point counts of the
/// published experiment tables.
struct Plan {
    system: &'static str,
    model: SystemModel,
    grids: Vec<(String, f64)>,
    /// Number of leading grid rows that also seed adaptive refinement.
    adaptive_grids: usize,
    points: Vec<usize>,
    linear_axis: Vec<(usize, f64)>,
}

fn plans() -> Vec<Plan> {
    let pi = |k: u32| (format!("pi/{k}"), PI / k as f64);
    let num = |h: f64| (format!("{h}"), h);
    vec![
        Plan {
            system: "A",
            model: system_a(),
            grids: vec![pi(2), pi(4), pi(6), pi(8), pi(10), pi(12)],
            adaptive_grids: 6,
            points: (2..=5).collect(),
            linear_axis: vec![(2, PI / 6.0)],
        },
        Plan {
            system: "B",
            model: system_b(),
            grids: vec![num(0.375), num(0.25), num(0.125), num(0.0625)],
            adaptive_grids: 3,
            points: (2..=10).collect(),
            linear_axis: vec![],
        },
        Plan {
            system: "C",
            model: system_c(),
            grids: vec![num(0.5), ("1/3".into(), 1.0 / 3.0), num(0.25), num(0.125)],
            adaptive_grids: 3,
            points: (2..=8).collect(),
            linear_axis: vec![],
        },
        Plan {
            system: "D",
            model: system_d(),
            grids: vec![num(1.0), num(0.5), num(0.25), num(0.125)],
            adaptive_grids: 3,
            points: (3..=5).collect(),
            linear_axis: vec![(1, 0.25)],
        },
    ]
}

impl BenchmarkSuite {
    /// Every grid, Method 1, Method 2 and Method 3 row for Systems A to D.
    pub fn builtin() -> Self {
        let mut runs = Vec::new();
        for p in plans() {
            let n = p.model.dim();
            let base = SynthesisConfig {
                linear_axis_spacing: p.linear_axis.iter().copied().collect(),
                ..Default::default()
            };
            for method in [Method::Grid, Method::Method1] {
                let count = if method == Method::Grid {
                    p.grids.len()
                } else {
                    p.adaptive_grids
                };
                for (label, h) in &p.grids[..count] {
                    runs.push(BenchRun {
                        system: p.system.into(),
                        init: label.clone(),
                        model: p.model.clone(),
                        config: SynthesisConfig {
                            method,
                            grid_spacing: vec![*h; n],
                            ..base.clone()
                        },
                    });
                }
            }
            for method in [Method::Method2, Method::Method3] {
                for &k in &p.points {
                    runs.push(BenchRun {
                        system: p.system.into(),
                        init: format!("n{k}"),
                        model: p.model.clone(),
                        config: SynthesisConfig {
                            method,
                            points_per_segment: k,
                            ..base.clone()
                        },
                    });
                }
            }
        }
        BenchmarkSuite {
            name: "builtin".into(),
            runs,
        }
    }

    pub fn filtered(&self, filter: &BenchFilter) -> Vec<&BenchRun> {
        self.runs.iter().filter(|r| filter.accepts(r)).collect()
    }
}

fn artifact_stem(run: &BenchRun) -> String {
    let init: String = run
        .init
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{}_{}_{}", run.system, run.config.method, init)
}

/// Runs one configuration; failures are recorded in the row.
pub fn run_one(run: &BenchRun, out_dir: Option<&Path>) -> BenchRow {
    let start = Instant::now();
    let outcome = run_method(&run.model, &run.config);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(report) => {
            let mut row = BenchRow::from_report(run, &report, wall_ms);
            if let Some(dir) = out_dir {
                if let Err(e) = write_artifacts(dir, &artifact_stem(run), &report) {
                    row.error = Some(e.to_string());
                }
            }
            row
        }
        Err(e) => BenchRow {
            system: run.system.clone(),
            method: run.config.method,
            init: run.init.clone(),
            vertices: 0,
            simplices: 0,
            viable: false,
            iterations: 0,
            delta_m_t: 0,
            wall_ms,
            error: Some(e.to_string()),
        },
    }
}

/// Writes the mesh and, when present, the candidate of a report.
pub fn write_artifacts(dir: &Path, stem: &str, report: &SynthesisReport) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let write = |name: String, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))
    };
    write(format!("{stem}_mesh.json"), report.mesh.to_json())?;
    if let Some(c) = &report.candidate {
        write(format!("{stem}_candidate.json"), c.to_json())?;
    }
    Ok(())
}

/// Runs every accepted configuration in order, writing the CSV report to
/// `out_dir` when given.
pub fn run_benchmark(
    suite: &BenchmarkSuite,
    filter: &BenchFilter,
    out_dir: Option<&Path>,
    mut progress: impl FnMut(&BenchRow),
) -> Result<Vec<BenchRow>, CliError> {
    let mut rows = Vec::new();
    for run in suite.filtered(filter) {
        let row = run_one(run, out_dir);
        progress(&row);
        rows.push(row);
    }
    if let Some(dir) = out_dir {
        let path = dir.join("bench.csv");
        std::fs::write(&path, to_csv(&rows)).map_err(|e| CliError::Io(path, e))?;
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}
