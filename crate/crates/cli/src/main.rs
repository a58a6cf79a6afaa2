// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use peer_eval::{MechanismKind, ScoreWeights};
use peer_eval_cli::{
    cmd_compute, cmd_simulate, parse_score_weights, CliError, OutputFormat, RunConfig,
};

#[derive(Parser, Debug)]
#[command(
    name = "peer-eval",
    version,
    about = "Peer evaluation scores for team projects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a team from evaluations, report grades and a roster
    Compute {
        /// pie-to-all, pie-to-others or auxiliary
        #[arg(long, default_value = "auxiliary")]
        mechanism: MechanismKind,
        /// Long-form evaluations CSV (evaluator,evaluatee,score)
        #[arg(long)]
        evals: PathBuf,
        /// Instructor report grades CSV (id,grade)
        #[arg(long)]
        grades: PathBuf,
        /// Roster CSV (id,name); its order fixes the report order
        #[arg(long)]
        roster: PathBuf,
        /// Mechanism, report and consistency weights
        #[arg(long, default_value = "0.9,0.05,0.05", value_parser = parse_score_weights)]
        weights: ScoreWeights,
        /// Grade corresponding to a perfect report (default: highest grade given)
        #[arg(long)]
        max_grade: Option<f64>,
        /// Treat students absent from the grades file as graded 0
        #[arg(long)]
        missing_grades_zero: bool,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// json, csv or text
        #[arg(long, default_value = "json")]
        format: OutputFormat,
    },
    /// Run accuracy trials and manipulation searches from a TOML scenario
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Score weights used by final-score objectives
        #[arg(long, default_value = "0.9,0.05,0.05", value_parser = parse_score_weights)]
        weights: ScoreWeights,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: OutputFormat,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute {
            mechanism,
            evals,
            grades,
            roster,
            weights,
            max_grade,
            missing_grades_zero,
            out,
            format,
        } => {
            let config = RunConfig {
                mechanism,
                score_weights: weights,
                max_report_grade: max_grade,
                output_format: format,
                missing_grades_zero,
                ..RunConfig::default()
            };
            let report = cmd_compute(&config, &evals, &grades, &roster)?;
            emit(out.as_deref(), &report.render(config.output_format)?)
        }
        Command::Simulate {
            scenario,
            weights,
            out,
            format,
        } => {
            let report = cmd_simulate(&scenario, weights)?;
            emit(out.as_deref(), &report.render(format)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
