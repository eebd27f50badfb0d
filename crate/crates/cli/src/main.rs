use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graph_max_shift::experiments::{self, ExperimentConfig, SweepConfig};
use graph_max_shift::Error;
use serde_json::json;

/// Graph Max Shift experiments on Gaussian-mixture samples.
#[derive(Parser)]
#[command(name = "gms", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample, cluster and compare against the gradient-flow reference.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write every node's climb path to paths.txt.
        #[arg(long)]
        dump_paths: bool,
    },
    /// Run a parameter grid and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph path and density Max Shift path from one data point.
    Paths {
        #[arg(long)]
        config: PathBuf,
        /// 1-based id of the starting data point.
        #[arg(long)]
        start: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<serde_json::Value, Error> {
    match cmd {
        Command::Run {
            config,
            out,
            dump_paths,
        } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let result = experiments::run(&cfg)?;
            result.write_to(&out, dump_paths)?;
            let r = &result.report;
            Ok(json!({
                "out": out,
                "k": r.k,
                "eps": r.eps,
                "agreement": r.agreement,
                "error": r.error,
            }))
        }
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::from_json(&read(&config)?)?;
            let rows = experiments::sweep(&cfg)?;
            fs::create_dir_all(&out)?;
            let path = out.join("sweep.csv");
            experiments::write_sweep_csv(&rows, BufWriter::new(fs::File::create(&path)?))?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            Ok(json!({ "out": path, "rows": rows.len(), "failed": failed }))
        }
        Command::Paths { config, start, out } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            if start == 0 {
                return Err(Error::Input("start ids are 1-based".into()));
            }
            let pair = experiments::paths(&cfg, start - 1)?;
            pair.write_to(&out)?;
            Ok(json!({
                "out": out,
                "graph_steps": pair.graph_path.steps(),
                "density_steps": pair.density_path.len() - 1,
                "deviation": experiments::path_deviation(&pair.graph_points, &pair.density_path),
            }))
        }
    }
}
