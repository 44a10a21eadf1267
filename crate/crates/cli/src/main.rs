use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgGroup, Parser, Subcommand};

use skcomm_cli::commands::{self, PinSource};
use skcomm_cli::{RunReport, Suite};

#[derive(Parser)]
#[command(name = "skcomm", version, about = "Secret-key capacity and communication for multiterminal sources")]
struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Secret-key capacity of a PIN model or an explicit pmf.
    #[command(group(ArgGroup::new("source").required(true).args(["complete", "pin", "model"])))]
    Capacity {
        /// Complete graph on M terminals.
        #[arg(long, value_name = "M")]
        complete: Option<usize>,
        /// Graph as JSON or edge list.
        #[arg(long, value_name = "FILE")]
        pin: Option<String>,
        /// Joint pmf JSON.
        #[arg(long, value_name = "FILE")]
        model: Option<String>,
        /// Replication count for PIN models.
        #[arg(short, long)]
        n: Option<usize>,
    },
    /// Compile and check the tree-packing key protocol, or check a transcript.
    #[command(group(ArgGroup::new("source").required(true).args(["complete", "pin", "check"])))]
    Protocol {
        /// Complete graph on M terminals.
        #[arg(long, value_name = "M")]
        complete: Option<usize>,
        /// Graph as JSON or edge list.
        #[arg(long, value_name = "FILE")]
        pin: Option<String>,
        /// Replication count.
        #[arg(short, long)]
        n: Option<usize>,
        /// Write the transcript JSON here.
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
        /// Verify an existing transcript JSON instead of compiling one.
        #[arg(long, value_name = "FILE")]
        check: Option<String>,
    },
    /// Run a randomized invariant suite.
    Verify {
        /// rank-lemma, lemma1, cmi-formula, comm-ineq, lci-bound or incidence.
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Conditional multipartite information of a linear function given as a
    /// matrix file.
    #[command(group(ArgGroup::new("source").required(true).args(["complete", "pin"])))]
    Cmi {
        /// Matrix JSON with column labels and hex rows.
        #[arg(long, value_name = "FILE")]
        matrix: String,
        /// Complete graph on M terminals.
        #[arg(long, value_name = "M")]
        complete: Option<usize>,
        /// Graph as JSON or edge list.
        #[arg(long, value_name = "FILE")]
        pin: Option<String>,
        /// Replication count.
        #[arg(short, long)]
        n: Option<usize>,
    },
}

fn source(complete: Option<usize>, pin: Option<String>) -> PinSource {
    match (complete, pin) {
        (Some(m), _) => PinSource::Complete(m),
        (None, Some(p)) => PinSource::File(p),
        (None, None) => unreachable!("clap enforces a source"),
    }
}

fn dispatch(cmd: Command, echo: Vec<String>) -> Result<(RunReport, Vec<String>)> {
    Ok(match cmd {
        Command::Capacity {
            complete,
            pin,
            model,
            n,
        } => match model {
            Some(path) => (commands::capacity_model(echo, &path)?, vec![]),
            None => (commands::capacity_pin(echo, &source(complete, pin), n)?, vec![]),
        },
        Command::Protocol {
            complete,
            pin,
            n,
            out,
            check,
        } => match check {
            Some(path) => (commands::protocol_check(echo, &path)?, vec![]),
            None => commands::protocol(echo, &source(complete, pin), n, out.as_deref())?,
        },
        Command::Verify {
            suite,
            trials,
            seed,
        } => (commands::verify(echo, suite, trials, seed)?, vec![]),
        Command::Cmi {
            matrix,
            complete,
            pin,
            n,
        } => (commands::cmi(echo, &matrix, &source(complete, pin), n)?, vec![]),
    })
}

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match dispatch(cli.command, echo) {
        Ok((report, warnings)) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
