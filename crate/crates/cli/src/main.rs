use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfim_cli::{golden, resolve_tolerances, CliError, SceneFile};

#[derive(Parser)]
#[command(name = "qfim", version, about = "Quantum Fisher information for point-source imaging scenes")]
struct Cli {
    /// Relative singular-value cutoff for basis independence.
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
    /// Smallest accepted reciprocal condition number of C and D.
    #[arg(long, global = true)]
    solve_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute H, Gamma and diagnostics for one scene.
    Compute {
        scene: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in reference checks.
    Verify,
    /// Evaluate the scene at every value of options.sweep.
    Sweep {
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Compute { scene, output } => {
            let file = SceneFile::load(&scene)?;
            let opts = resolve_tolerances(&file.options, cli.rank_tol, cli.solve_tol)?;
            let report = qfim_cli::compute(&file, opts)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match output {
                Some(path) => std::fs::write(&path, report.to_json()).map_err(|e| CliError::Io {
                    context: format!("writing {}", path.display()),
                    source: e,
                })?,
                None => print!("{}", report.to_json()),
            }
            Ok(true)
        }
        Command::Verify => {
            let checks = golden::golden_suite();
            print!("{}", golden::render_table(&checks));
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::Sweep { scene, out } => {
            let file = SceneFile::load(&scene)?;
            let opts = resolve_tolerances(&file.options, cli.rank_tol, cli.solve_tol)?;
            let res = qfim_cli::write_sweep(&file, opts, &out)?;
            eprintln!(
                "wrote {} reports and {}",
                res.report_paths.len(),
                res.csv_path.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
