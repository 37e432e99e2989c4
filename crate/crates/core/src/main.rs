use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ineq::check::check_trace;
use ineq::corpus::run_corpus;
use ineq::parse::parse_problem;
use ineq::solver::{solve, stats_line, Config, Modules, Verdict};
use ineq::trace::write_trace;

#[derive(Parser)]
#[command(
    name = "ineq",
    version,
    about = "Heuristic prover for real inequalities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Try to prove the problem in FILE.
    Prove {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Write the proof trace here when the problem is proved.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Re-verify the proof trace with the independent checker.
        #[arg(long)]
        check_trace: bool,
    },
    /// Run every .poly file in DIR and print a CSV report.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 0)]
    split_depth: u32,
    #[arg(long, default_value_t = 20)]
    max_rounds: usize,
    /// Seconds per problem.
    #[arg(long, default_value_t = 5.0)]
    timeout: f64,
    /// Comma-separated subset of congruence,additive,multiplicative,axioms,functions.
    #[arg(long)]
    modules: Option<Modules>,
}

impl Opts {
    fn config(&self) -> Result<Config, String> {
        let timeout =
            Duration::try_from_secs_f64(self.timeout).map_err(|e| format!("bad timeout: {e}"))?;
        Ok(Config {
            split_depth: self.split_depth,
            max_rounds: self.max_rounds,
            timeout,
            modules: self.modules.unwrap_or_default(),
            ..Config::default()
        })
    }
}

fn code(v: Verdict) -> ExitCode {
    ExitCode::from(v.exit_code() as u8)
}

fn input_error(msg: &str) -> ExitCode {
    println!("{}", Verdict::InputError);
    eprintln!("error: {msg}");
    code(Verdict::InputError)
}

fn prove(file: &PathBuf, cfg: &Config, trace: Option<&PathBuf>, check: bool) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return input_error(&format!("{}: {e}", file.display())),
    };
    let p = match parse_problem(&text) {
        Ok(p) => p,
        Err(e) => return input_error(&format!("{}: {e}", file.display())),
    };
    let r = solve(&p, cfg);
    println!("{}", r.verdict);
    println!("{}", stats_line(&r));
    if let Some(e) = &r.error {
        eprintln!("error: {e}");
    }
    if let Some(t) = write_trace(&r) {
        if let Some(path) = trace {
            if let Err(e) = std::fs::write(path, &t) {
                eprintln!("error: cannot write {}: {e}", path.display());
            }
        }
        if check {
            match check_trace(&p, &t) {
                Ok(()) => println!("trace accepted"),
                Err(e) => println!("trace rejected: {e}"),
            }
        }
    }
    code(r.verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Prove {
            file,
            opts,
            trace,
            check_trace,
        } => match opts.config() {
            Ok(cfg) => prove(file, &cfg, trace.as_ref(), *check_trace),
            Err(e) => input_error(&e),
        },
        Cmd::Corpus { dir, opts } => {
            let cfg = match opts.config() {
                Ok(c) => c,
                Err(e) => return input_error(&e),
            };
            match run_corpus(dir, &cfg) {
                Ok(rep) => {
                    print!("{}", rep.csv());
                    eprintln!("{}", rep.summary());
                    ExitCode::from(u8::from(!rep.mismatches().is_empty()))
                }
                Err(e) => input_error(&format!("{}: {e}", dir.display())),
            }
        }
    }
}
