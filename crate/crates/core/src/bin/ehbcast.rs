use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ehbcast::bench::{
    reports_to_csv, run_table1, run_table2, solve_one, sweep_bits, sweep_to_csv, with_threads, SolveAllocation,
};
use ehbcast::generator::{GenParams, GeneratedScenario};
use ehbcast::model::Scenario;
use ehbcast::Error;

#[derive(Parser)]
#[command(name = "ehbcast", version, about = "Broadcast scheduling for groups of energy harvesting transmitters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random scenario and write it as JSON.
    Gen {
        /// Generator parameters (JSON); the built-in preset if omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run index within the seed.
        #[arg(long, default_value_t = 0)]
        run: u64,
        /// Harvests are drawn up to this time (s).
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one scenario and write the schedule, allocation and switch log.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        /// proposed, optimal, ep, dr or rdr.
        #[arg(long, default_value = "proposed")]
        alloc: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Monte Carlo comparison of allocation (table 1) or switching (table 2) policies.
    Bench {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        table: u8,
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; all available cores if omitted.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Relative deviation of the proposed allocation as demands grow.
    SweepBits {
        /// Inclusive range `a..b` or a comma-separated list.
        #[arg(long, default_value = "1..10")]
        multiples: String,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load_params(path: Option<&Path>) -> ehbcast::Result<GenParams> {
    match path {
        Some(p) => GenParams::read_json(p),
        None => Ok(GenParams::baseline()),
    }
}

fn parse_multiples(text: &str) -> ehbcast::Result<Vec<u32>> {
    let bad = || Error::Parameter(format!("cannot read multiples from {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
    }
}

fn write(path: &Path, text: &str) -> ehbcast::Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn run(cli: Cli) -> ehbcast::Result<()> {
    match cli.command {
        Command::Gen { params, seed, run, horizon, out } => {
            let params = load_params(params.as_deref())?.with_seed(seed);
            let generated = GeneratedScenario::new(params, run, horizon)?;
            write(&out, &generated.scenario.to_json_string()?)
        }
        Command::Solve { scenario, alloc, out_dir } => {
            let which: SolveAllocation = alloc.parse()?;
            let text = fs::read_to_string(&scenario)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", scenario.display()))))?;
            let scenario = Scenario::from_json_str(&text)?;
            let out = solve_one(&scenario, which)?;
            fs::create_dir_all(&out_dir)?;
            write(&out_dir.join("staircase.csv"), &out.staircase_csv())?;
            write(&out_dir.join("allocation.csv"), &out.allocation.to_csv())?;
            write(&out_dir.join("switching.csv"), &out.switching.to_csv())?;
            write(&out_dir.join("summary.json"), &serde_json::to_string_pretty(&out.summary)?)?;
            println!(
                "optimal {:.9} s, {} {:.9} s, {} switches",
                out.summary.optimal_completion_s,
                out.summary.allocation,
                out.summary.completion_s,
                out.summary.switch_count
            );
            Ok(())
        }
        Command::Bench { table, runs, seed, params, out, threads } => {
            let params = load_params(params.as_deref())?;
            let reports = with_threads(threads, || match table {
                1 => run_table1(&params, runs, seed),
                _ => run_table2(&params, runs, seed),
            })?;
            write(&out, &reports_to_csv(&reports))
        }
        Command::SweepBits { multiples, runs, seed, params, out, threads } => {
            let multiples = parse_multiples(&multiples)?;
            let params = load_params(params.as_deref())?;
            let rows = with_threads(threads, || sweep_bits(&params, &multiples, runs, seed))?;
            write(&out, &sweep_to_csv(&rows))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Run { source, .. } => exit_code(source),
        Error::Io(_) => 1,
        e if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
