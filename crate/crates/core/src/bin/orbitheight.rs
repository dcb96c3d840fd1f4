use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orbitheight::catalog::{catalog_job, list_catalog};
use orbitheight::jobs::{parse_job, run_job_file, JobError, RunOptions};
use orbitheight::schanuel::DEFAULT_BUDGET;

#[derive(Parser)]
#[command(name = "orbitheight", version, about = "Height growth diagnostics for orbits of rational maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a job file and write <job>.report.csv and <job>.report.json.
    Run {
        job: PathBuf,
        /// Directory for the reports (default: next to the job file).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Maximum number of worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Enumeration budget for point counting.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// List the bundled example jobs, or write them into a directory.
    Catalog {
        #[arg(long)]
        write: Option<PathBuf>,
    },
    /// Check a job file without running it.
    Validate { job: PathBuf },
}

fn fail(e: &JobError) -> ExitCode {
    eprintln!("orbitheight: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run { job, out, threads, budget } => {
            if threads == Some(0) {
                return fail(&JobError::Validation("--threads must be positive".into()));
            }
            let opts = RunOptions { budget, threads };
            match run_job_file(&job, out.as_deref(), &opts) {
                Ok((files, warning)) => {
                    for f in &files {
                        println!("{}", f.display());
                    }
                    match warning {
                        Some(w) => fail(&JobError::Runtime(w)),
                        None => ExitCode::SUCCESS,
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Catalog { write } => {
            for name in list_catalog() {
                if let Some(dir) = &write {
                    let text = catalog_job(name).expect("listed entry");
                    let path = dir.join(format!("{name}.json"));
                    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, text)) {
                        return fail(&JobError::Io(format!("{}: {e}", path.display())));
                    }
                }
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { job } => {
            let text = match std::fs::read_to_string(&job) {
                Ok(t) => t,
                Err(e) => {
                    return fail(&JobError::Validation(format!("cannot read {}: {e}", job.display())))
                }
            };
            match parse_job(&text) {
                Ok(_) => {
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
