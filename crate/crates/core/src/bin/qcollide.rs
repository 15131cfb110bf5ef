use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcollide::config::load_config;
use qcollide::experiments::{demo_config, run_scenario, DEMO_NAMES};
use qcollide::Error;

#[derive(Parser)]
#[command(
    name = "qcollide",
    version,
    about = "Stochastic vs periodic quantum collision model simulator"
)]
struct Cli {
    /// Directory for output files (overrides the config's output_path)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for ensemble engines (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config
    Run { config: PathBuf },
    /// Parse and validate a config without running it
    Validate { config: PathBuf },
    /// Run a built-in scenario
    Demo { name: String },
}

fn exit_code(err: &Error) -> ExitCode {
    if err.is_config() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn read_config(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        field: "config".into(),
        reason: format!("cannot read {}: {e}", path.display()),
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn execute(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Validate { config } => {
            let cfg = load_config(&read_config(config)?)?;
            let engines: Vec<_> = cfg.engines.iter().map(|e| e.name()).collect();
            println!(
                "{}: ok (d_s={}, d_a={}, engines=[{}], {} grid points, {} initial state(s))",
                config.display(),
                cfg.spec.d_s(),
                cfg.spec.d_a(),
                engines.join(", "),
                cfg.grid_points,
                cfg.initial_states.len()
            );
        }
        Command::Run { config } => {
            let text = read_config(config)?;
            report(run_scenario(&text, &stem(config), cli.out_dir.as_deref())?);
        }
        Command::Demo { name } => {
            let text = demo_config(name).ok_or_else(|| Error::Config {
                field: "name".into(),
                reason: format!(
                    "unknown demo `{name}`; available: {}",
                    DEMO_NAMES.join(", ")
                ),
            })?;
            report(run_scenario(text, name, cli.out_dir.as_deref())?);
        }
    }
    Ok(())
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
