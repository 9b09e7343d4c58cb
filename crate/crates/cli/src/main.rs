use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_betti::pipeline::{self, RunOptions};
use dirac_betti::{CliError, Scenario};

#[derive(Parser)]
#[command(name = "dirac-betti", version, about = "Recover Betti numbers of a simulated body from boundary measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate, recover and compare with the homology oracle.
    Run {
        scenario: PathBuf,
        /// Also write inner-product grids of the first source pair.
        #[arg(long)]
        dump_grids: bool,
    },
    /// Run the invariant checks only.
    Verify { scenario: PathBuf },
    /// Simulate the scenario's sources and save the boundary dataset.
    Simulate { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(w) = pipeline::write_error(&cli.out, &e) {
                eprintln!("could not write {}: {w}", pipeline::ERROR_FILE);
            }
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Run { scenario, dump_grids } => {
            let s = Scenario::load(scenario)?;
            let r = pipeline::run(&s, &RunOptions { out: cli.out.clone(), dump_grids: *dump_grids })?;
            let fmt = |b: &[Option<usize>; 4]| b.map(|x| x.map_or("-".to_string(), |v| v.to_string())).join(",");
            println!("recovered ({}) oracle ({}) horizon {} sources {}", fmt(&r.recovery.absolute), r.oracle_absolute.map(|v| v.to_string()).join(","), r.recovery.horizon, r.recovery.n_sources);
            for d in &r.comparison {
                println!("b{}: {} (recovered {}, oracle {})", d.degree, if d.pass { "PASS" } else { "FAIL" }, d.recovered, d.oracle);
            }
            Ok(r.pass)
        }
        Command::Verify { scenario } => {
            let s = Scenario::load(scenario)?;
            let list = pipeline::verify(&s, &cli.out)?;
            for c in &list.checks {
                println!("{:<32} {} {:e} (limit {:e}) {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.value, c.threshold, c.detail);
            }
            Ok(list.pass)
        }
        Command::Simulate { scenario } => {
            let s = Scenario::load(scenario)?;
            let path = pipeline::simulate(&s, &cli.out)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}
