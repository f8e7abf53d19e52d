use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use micromaser_cli::{load, recipes, run};

#[derive(Parser)]
#[command(name = "micromaser", version, about = "Outgoing-atom statistics of the micromaser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep from a config file, a built-in recipe, or both
    Run {
        /// TOML configuration
        config: Option<PathBuf>,
        /// Built-in recipe to start from (fig1 … fig15)
        #[arg(long)]
        recipe: Option<String>,
        /// Override a key, e.g. `--set nbar=0.1` or `--set sweep.steps=20`
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Monte Carlo seed
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the built-in recipes
    ListRecipes,
    /// Print a built-in recipe as TOML
    ShowRecipe { name: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> micromaser_cli::Result<()> {
    match command {
        Command::Run {
            config,
            recipe,
            mut sets,
            out,
            seed,
            jobs,
        } => {
            if config.is_none() && recipe.is_none() {
                return Err(micromaser_cli::CliError::Missing("a config file or --recipe".into()));
            }
            if let Some(s) = seed {
                sets.push(format!("seed={s}"));
            }
            if let Some(j) = jobs {
                sets.push(format!("jobs={j}"));
            }
            let cfg = load(config.as_deref(), recipe.as_deref(), &sets)?;
            let result = run(&cfg, &out)?;
            let failed = result.rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "{}: {} rows -> {} ({} flagged), plot script {}",
                cfg.name,
                result.rows.len(),
                result.csv.display(),
                failed,
                result.script.display()
            );
            Ok(())
        }
        Command::ListRecipes => {
            for (name, _) in recipes::RECIPES {
                println!("{name:6} {}", recipes::title(name)?);
            }
            Ok(())
        }
        Command::ShowRecipe { name } => {
            print!("{}", recipes::source(&name)?);
            Ok(())
        }
    }
}
