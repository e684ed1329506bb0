//! Command-line front end: `exactlp solve` and `exactlp bench`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use exactlp::general::solve_general;
use exactlp::io::bench::run_benchmark;
use exactlp::io::json::ResultDocument;
use exactlp::io::parse_mps;
use exactlp::rational::{format_rational, parse_rational};
use exactlp::{Mode, Outcome, Rational, SolveConfig};
use num_traits::One;

const EXIT_CERTIFIED: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "exactlp", version, about = "Exact rational LP solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one MPS file and print the certified result.
    Solve(SolveArgs),
    /// Solve every MPS file in a directory under several modes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Limits {
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 7200.0)]
    time_limit: f64,
    /// Cap on the growth of the refinement scaling factors.
    #[arg(long, value_parser = parse_alpha)]
    alpha: Option<Rational>,
    /// Highest floating-point precision in bits.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(64..))]
    max_precision: u32,
}

impl Limits {
    fn config(&self, mode: Mode) -> SolveConfig {
        let mut config = SolveConfig::with_mode(mode);
        config.time_limit = Some(Duration::from_secs_f64(self.time_limit.max(0.0)));
        config.max_precision_bits = self.max_precision;
        if let Some(alpha) = &self.alpha {
            config.alpha = alpha.clone();
        }
        config
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "ir-boosting")]
    mode: Mode,
    #[command(flatten)]
    limits: Limits,
    /// Write the full result document to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Print solver statistics after the result line.
    #[arg(long)]
    stats: bool,
    file: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated list of modes.
    #[arg(long, value_delimiter = ',', default_value = "ir-double,boosting-pure,ir-boosting")]
    modes: Vec<Mode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    limits: Limits,
    /// Directory for records.csv, aggregates.csv and report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    dir: PathBuf,
}

fn parse_alpha(text: &str) -> Result<Rational, String> {
    let alpha = parse_rational(text).map_err(|e| e.to_string())?;
    if alpha <= Rational::one() {
        return Err("alpha must exceed 1".into());
    }
    Ok(alpha)
}

fn solve(args: SolveArgs) -> u8 {
    let text = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return EXIT_USAGE;
        }
    };
    let lp = match parse_mps(&text) {
        Ok(lp) => lp,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return EXIT_USAGE;
        }
    };
    let (result, map) = match solve_general(&lp, &args.limits.config(args.mode)) {
        Ok(solved) => solved,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    match &result.outcome {
        Outcome::Certified(cert) => match cert.objective() {
            Some(obj) => println!("{} {}", cert.status(), format_rational(&map.objective(obj))),
            None => println!("{}", cert.status()),
        },
        Outcome::Failure(reason) => println!("{}: {}", result.status(), reason.name()),
    }
    if args.stats {
        let s = &result.stats;
        println!("boosts {}", s.boosts);
        println!("precision_final {}", s.precision_final);
        println!("refinement_rounds {}", s.refinement_rounds);
        println!("exact_checks {}", s.exact_checks);
        println!("pivots_initial {}", s.pivots_initial);
        println!("pivots_boosted {}", s.pivots_boosted);
        println!("first_solve_seconds {:.6}", s.first_solve_seconds);
        println!("total_seconds {:.6}", s.total_seconds);
    }
    if let Some(path) = &args.json {
        let doc = ResultDocument::new(&result, Some(&map));
        if let Err(e) = std::fs::write(path, doc.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    match result.outcome {
        Outcome::Certified(_) => EXIT_CERTIFIED,
        Outcome::Failure(_) => EXIT_FAILURE,
    }
}

fn bench(args: BenchArgs) -> u8 {
    let base = args.limits.config(Mode::IrBoosting);
    let report = match run_benchmark(&args.dir, &args.modes, args.seed, &base) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match report.records_csv() {
        Ok(csv) => print!("{csv}"),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    for row in &report.aggregates {
        eprintln!(
            "{:<14} solved {}/{}  time {:.4}s  pivots initial {:.1} boosted {:.1}",
            row.mode, row.solved, row.instances, row.time_sgm, row.pivots_initial_sgm, row.pivots_boosted_sgm
        );
    }
    if let Some(out) = &args.out {
        if let Err(e) = report.write(out) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    EXIT_CERTIFIED
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_CERTIFIED };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
    })
}
