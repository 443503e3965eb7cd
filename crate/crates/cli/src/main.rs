use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use ssfc::params::PhysicalParams;
use ssfc_cli::{parse_bounds, parse_power_range, parse_segments, profile, render_csv, run_sweep, SweepConfig};

/// Evaluate capacity bounds for the split-step fiber channel over a
/// (power, segment-count) grid and write the results as CSV.
#[derive(Parser, Debug)]
#[command(name = "ssfc", version, about)]
struct Args {
    /// JSON file with the eight physical link parameters
    #[arg(long)]
    config: PathBuf,

    /// Comma list of bounds: l1, l2, l3, l2-asym, l3-asym, awgn, lp
    #[arg(long, default_value = "l1")]
    bounds: String,

    /// Power grid in dBm: "start:stop:step" or a single value
    #[arg(long = "power-dbm", default_value = "0", allow_hyphen_values = true)]
    power_dbm: String,

    /// Comma list of segment counts K
    #[arg(long, default_value = "64")]
    segments: String,

    /// Block length L (overrides the profile)
    #[arg(long)]
    samples: Option<usize>,

    /// Monte Carlo preset: desk | paper
    #[arg(long, default_value = "desk")]
    profile: String,

    /// Outer (input) realizations (overrides the profile)
    #[arg(long)]
    outer: Option<usize>,

    /// Inner (noise) realizations (overrides the profile)
    #[arg(long)]
    inner: Option<usize>,

    /// Root seed for all random streams
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,

    /// Output CSV path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Subtract the inner-mean variance bias in the moment estimator
    #[arg(long)]
    bias_correction: bool,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprintln!("{e}");
            return 1;
        }
    };

    match execute(&args) {
        Ok(failures) => {
            if failures > 0 {
                eprintln!("ssfc: {failures} row(s) flagged; see NaN entries");
                2
            } else {
                0
            }
        }
        Err(message) => {
            eprintln!("ssfc: {message}");
            1
        }
    }
}

fn execute(args: &Args) -> Result<usize, String> {
    let params = PhysicalParams::from_json_file(&args.config).map_err(|e| e.to_string())?;
    let preset = profile(&args.profile)?;
    let cfg = SweepConfig {
        params,
        bounds: parse_bounds(&args.bounds)?,
        powers_dbm: parse_power_range(&args.power_dbm)?,
        segments: parse_segments(&args.segments)?,
        block_len: args.samples.unwrap_or(preset.block_len),
        n_outer: args.outer.unwrap_or(preset.n_outer),
        n_inner: args.inner.unwrap_or(preset.n_inner),
        seed: args.seed,
        bias_correction: args.bias_correction,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| e.to_string())?;
    let output = pool.install(|| run_sweep(&cfg))?;
    let csv = render_csv(&output);

    match &args.out {
        Some(path) => fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(csv.as_bytes())
                .map_err(|e| e.to_string())?;
        }
    }
    Ok(output.failures)
}
