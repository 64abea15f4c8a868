//! `datavec`: decision procedures for permutation sums of data vectors.
//!
//! Exit codes: 0 for YES, 1 for NO, 2 for errors, 3 for inconclusive
//! results (a search budget or cap was reached).

mod commands;
mod report;

use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use datavec::bca::DEFAULT_SKELETON_CAP;
use datavec::oracle::InstanceShape;

use commands::{ExpressibleArgs, ReachArgs};
use report::RunReport;

#[derive(Parser)]
#[command(
    name = "datavec",
    version,
    about = "Permutation sums of data vectors and their applications"
)]
struct Cli {
    /// Add wall-clock time to the report (reports are otherwise deterministic).
    #[arg(long, global = true)]
    timing: bool,
    /// Worker threads for parallel search; 1 keeps everything sequential.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is the target of a JSON instance a permutation sum of its base set?
    Expressible {
        instance: String,
        /// Use the polynomial procedure; the base set must be reversible.
        #[arg(long)]
        fast: bool,
        /// Include a witness in the report.
        #[arg(long)]
        witness: bool,
        /// Cross-check against brute force with at most this many terms.
        #[arg(long, value_name = "DEPTH")]
        oracle: Option<usize>,
    },
    /// Which members of a base set (`{"d": .., "V": [..]}`) are reversible?
    Reversible {
        set: String,
        /// Include a reversal witness for every reversible member.
        #[arg(long)]
        witness: bool,
    },
    /// Histogram operations.
    Hist {
        #[command(subcommand)]
        command: HistCommand,
    },
    /// Does a witness sum exactly to the target of an instance?
    Verify { instance: String, witness: String },
    /// Unordered data Petri nets.
    Updn {
        #[command(subcommand)]
        command: UpdnCommand,
    },
    /// Blind counter automata with data.
    Bca {
        #[command(subcommand)]
        command: BcaCommand,
    },
    /// Brute-force search for a permutation sum with a bounded number of terms.
    Oracle {
        instance: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Search nodes before giving up with an error.
        #[arg(long)]
        node_cap: Option<u64>,
    },
    /// Print a seeded random instance as JSON.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        max_base: usize,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
        #[arg(long, default_value_t = 2)]
        entry_bound: i64,
        #[arg(long, default_value_t = 6)]
        data_range: u64,
        /// Build the target from at most this many renamed base vectors.
        #[arg(long, value_name = "TERMS")]
        planted: Option<usize>,
        /// Close the base set off so that it is reversible; odd seeds then
        /// get a planted target of at most `--planted` (default 3) terms.
        #[arg(long)]
        reversible: bool,
    },
    /// Print the integer system an instance reduces to.
    DumpIlp { instance: String },
}

#[derive(Subcommand)]
enum HistCommand {
    /// Split a histogram into degree-many simple histograms.
    Decompose { histogram: String },
}

#[derive(Subcommand)]
enum UpdnCommand {
    /// Does the state equation hold between two markings?
    ///
    /// Markings are given inline, as in `'p: {a:2}; q: {}'`, or as `@file`.
    Check {
        net: String,
        from: String,
        to: String,
        /// Use the polynomial procedure; displacements must be reversible.
        #[arg(long)]
        fast: bool,
        #[arg(long)]
        witness: bool,
    },
}

#[derive(Subcommand)]
enum BcaCommand {
    /// Is one configuration reachable from another?
    ///
    /// Vectors are given inline, as in `'{a: [1, 0]}'`, or as `@file`.
    Reach {
        automaton: String,
        from_state: String,
        from_vec: String,
        to_state: String,
        to_vec: String,
        #[arg(long, default_value_t = DEFAULT_SKELETON_CAP)]
        skeleton_cap: usize,
        #[arg(long)]
        witness: bool,
    },
}

enum Output {
    Report(RunReport),
    Text(String),
}

fn run(cli: &Cli) -> Result<Output> {
    let parallel = cli.threads > 1;
    let report = match &cli.command {
        Command::Expressible {
            instance,
            fast,
            witness,
            oracle,
        } => commands::expressible(ExpressibleArgs {
            instance,
            fast: *fast,
            witness: *witness,
            oracle_depth: *oracle,
        })?,
        Command::Reversible { set, witness } => commands::reversible(set, *witness)?,
        Command::Hist {
            command: HistCommand::Decompose { histogram },
        } => commands::hist_decompose(histogram)?,
        Command::Verify { instance, witness } => commands::verify(instance, witness)?,
        Command::Updn {
            command:
                UpdnCommand::Check {
                    net,
                    from,
                    to,
                    fast,
                    witness,
                },
        } => commands::updn_check(net, from, to, *fast, *witness)?,
        Command::Bca {
            command:
                BcaCommand::Reach {
                    automaton,
                    from_state,
                    from_vec,
                    to_state,
                    to_vec,
                    skeleton_cap,
                    witness,
                },
        } => commands::bca_reach(ReachArgs {
            automaton,
            from_state,
            from_vec,
            to_state,
            to_vec,
            skeleton_cap: *skeleton_cap,
            parallel,
            witness: *witness,
        })?,
        Command::Oracle {
            instance,
            depth,
            node_cap,
        } => commands::oracle(instance, *depth, *node_cap)?,
        Command::Generate {
            seed,
            dim,
            max_base,
            max_support,
            entry_bound,
            data_range,
            planted,
            reversible,
        } => {
            anyhow::ensure!(
                *dim >= 1 && *max_base >= 1,
                "--dim and --max-base must be at least 1"
            );
            let shape = InstanceShape {
                dim: *dim,
                max_base: *max_base,
                max_support: *max_support,
                entry_bound: *entry_bound,
                data_range: *data_range,
            };
            anyhow::ensure!(
                shape.entry_bound >= 1 && shape.data_range >= 1,
                "--entry-bound and --data-range must be at least 1"
            );
            return Ok(Output::Text(serde_json::to_string_pretty(
                &commands::generate(*seed, &shape, *planted, *reversible),
            )?));
        }
        Command::DumpIlp { instance } => return Ok(Output::Text(commands::dump_ilp(instance)?)),
    };
    Ok(Output::Report(report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("DATAVEC_LOG")).init();
    let cli = Cli::parse();
    if cli.threads > 1 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads.into())
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    match run(&cli) {
        Ok(Output::Report(mut report)) => {
            if cli.timing {
                report.timing = Some(start.elapsed());
            }
            let text = serde_json::to_string_pretty(&report.to_json()).expect("values serialize");
            if writeln!(std::io::stdout(), "{text}").is_err() {
                return ExitCode::from(2);
            }
            report.decision.exit_code()
        }
        Ok(Output::Text(text)) => {
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            match write!(std::io::stdout(), "{text}{newline}") {
                Ok(()) => ExitCode::SUCCESS,
                Err(_) => ExitCode::from(2),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
