use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cpa_lyap::cli::{
    execute, load_config, run_benchmark, verify_files, BenchFilter, BenchmarkSuite, Emission,
    CSV_HEADER,
};
use cpa_lyap::synth::Method;

#[derive(Parser)]
#[command(
    name = "cpa-lyap",
    version,
    about = "CPA Lyapunov function synthesis on simplicial meshes"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a phase-plot SVG of the final mesh (planar systems only).
        #[arg(long)]
        svg: bool,
        /// Write the final slack LP in free MPS format.
        #[arg(long)]
        dump_lp: bool,
    },
    /// Run the built-in benchmark tables.
    Bench {
        #[arg(long)]
        system: Option<String>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck a stored mesh and candidate.
    Verify {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
        .map_err(|e: cpa_lyap::synth::SynthError| e.to_string())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match args.command {
        Command::Run {
            config,
            out,
            svg,
            dump_lp,
        } => {
            let mut spec = load_config(&config)?;
            spec.out_dir = out;
            spec.emit = Emission {
                mesh_json: true,
                report: true,
                svg,
                dump_lp,
            };
            let (report, row) = execute(&spec)?;
            println!("{CSV_HEADER}");
            println!("{}", row.csv());
            eprintln!("verdict: {}", report.verdict);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            system,
            method,
            out,
        } => {
            let suite = BenchmarkSuite::builtin();
            let filter = BenchFilter { system, method };
            println!("{CSV_HEADER}");
            let rows = run_benchmark(&suite, &filter, out.as_deref(), |row| {
                println!("{}", row.csv());
                if let Some(e) = &row.error {
                    eprintln!("{} {} {}: {e}", row.system, row.method, row.init);
                }
            })?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Verify {
            mesh,
            candidate,
            config,
        } => {
            let r = verify_files(&mesh, &candidate, &config)?;
            println!("valid: {}", r.valid);
            if let Some(p) = &r.problem {
                println!("problem: {p}");
            } else {
                println!("positivity margin: {:e}", r.positivity_margin);
                println!("gradient margin: {:e}", r.gradient_margin);
                println!("decrease margin: {:e}", r.decrease_margin);
                println!(
                    "sampled decrease: min margin {:e}, {} of {} points violate",
                    r.sample_margin, r.sample_violations, r.samples
                );
            }
            Ok(if r.valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
