use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sqslab::domain::Domain;
use sqslab::fourier::{wht, TruthTable};
use sqslab::harness::verify::{verify_lemmas, VerifyScale};
use sqslab::harness::{run_experiment, run_single_sample, ExperimentConfig};

/// Statistical-query sampling laboratory.
#[derive(Parser)]
#[command(name = "sqslab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite and print one JSON line per check.
    Verify {
        /// Suite name, or "all".
        selector: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a batch experiment from a JSON config; writes <out>.csv and
    /// <out>.summary.json.
    Experiment {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output path prefix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform a truth-table CSV (columns x_hex,value over a full cube)
    /// into its spectrum CSV (columns s_hex,coefficient).
    Fourier {
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single sampling trial from a JSON config and print the outcome.
    Sample {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

fn load_config(path: &Path, seed: Option<u64>, out: Option<&Path>) -> sqslab::Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.output = out.to_string_lossy().into_owned();
    }
    Ok(config)
}

fn read_table_csv(path: &Path) -> sqslab::Result<TruthTable> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for row in reader.records() {
        let row = row?;
        let value: f64 = row
            .get(1)
            .ok_or_else(|| sqslab::Error::Config("missing value column".into()))?
            .trim()
            .parse()
            .map_err(|e| sqslab::Error::Config(format!("bad value: {e}")))?;
        values.push(value);
    }
    let len = values.len() as u64;
    if len == 0 || len & (len - 1) != 0 {
        return Err(sqslab::Error::Config(format!(
            "table has {len} rows; a full cube needs a power of two"
        )));
    }
    let n = len.trailing_zeros() as usize;
    TruthTable::from_values(Domain::full_cube(n)?, values)
}

fn run(cli: Cli) -> sqslab::Result<bool> {
    match cli.command {
        Command::Verify { selector, n, p, xi, trials, seed } => {
            let scale = VerifyScale { n, p, xi, trials, seed };
            let report = verify_lemmas(&selector, &scale)?;
            println!("{}", report.to_json_lines());
            Ok(report.all_pass())
        }
        Command::Experiment { config, seed, out } => {
            let config = load_config(&config, seed, out.as_deref())?;
            let output = run_experiment(&config)?;
            let csv_path = format!("{}.csv", config.output);
            let summary_path = format!("{}.summary.json", config.output);
            fs::write(&csv_path, output.csv()?)?;
            fs::write(&summary_path, output.summary_json()?)?;
            println!("{}", output.summary_json()?);
            eprintln!("wrote {csv_path} and {summary_path}");
            Ok(output.summary.bound_satisfied)
        }
        Command::Fourier { table, out } => {
            let table = read_table_csv(&table)?;
            let spectrum = wht(&table)?;
            let mut buf = Vec::new();
            spectrum.write_csv(&mut buf)?;
            fs::write(&out, buf)?;
            Ok(true)
        }
        Command::Sample { config, seed, trial } => {
            let config = load_config(&config, seed, None)?;
            let outcome = run_single_sample(&config, trial)?;
            println!("{}", serde_json::to_string_pretty(&outcome)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SQSLAB_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                sqslab::Error::Config(_) | sqslab::Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
