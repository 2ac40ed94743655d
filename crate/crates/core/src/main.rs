use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diffgerm::cli::{cmd_certify, cmd_forms, cmd_linearize, FormCommand, FormOpts, GroupOpts, Output, Source};
use diffgerm::group_cert::DEFAULT_MAX_WORD_LEN;

#[derive(Parser)]
#[command(name = "diffgerm", version, about = "Exact checks for groups of germs and polynomial foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Presentation or form file (JSON).
    file: Option<PathBuf>,
    /// Built-in example id instead of a file.
    #[arg(long)]
    example: Option<String>,
    /// Compact JSON output (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the product relation, multipliers and pairwise conjugacy.
    Certify {
        #[command(flatten)]
        input: Input,
        /// Truncation order N (defaults to the file's order, else 32).
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_WORD_LEN)]
        max_word_len: usize,
        /// Parameter p of the ex4.3 family.
        #[arg(long)]
        p: Option<u32>,
    },
    /// Run the order-by-order linearization (flat check when the multiplier is 1).
    Linearize {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        p: Option<u32>,
    },
    /// Checks on a polynomial 1-form.
    Forms {
        #[arg(value_enum)]
        check: FormCheck,
        #[command(flatten)]
        input: Input,
        /// Degree parameter k of the ex6.1 family.
        #[arg(long)]
        k: Option<u32>,
        /// ex6.1 coefficients a,b,c,alpha,beta,gamma.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        /// Comma-separated point for the kupka check.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Blow-up chart variable for pullback.
        #[arg(long, default_value = "x")]
        chart: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormCheck {
    Integrable,
    Cone,
    Kupka,
    FirstIntegral,
    Pullback,
}

fn source(input: &Input) -> Result<Source, Output> {
    Source::from_args(input.example.clone(), input.file.clone()).map_err(|e| Output {
        json: serde_json::json!({ "error": e.to_string() }).to_string(),
        code: 2,
    })
}

fn run(cli: Cli) -> Output {
    match cli.command {
        Command::Certify {
            input,
            order,
            max_word_len,
            p,
        } => match source(&input) {
            Ok(source) => cmd_certify(&GroupOpts {
                source,
                order,
                max_word_len,
                p,
                pretty: input.pretty,
            }),
            Err(o) => o,
        },
        Command::Linearize { input, order, p } => match source(&input) {
            Ok(source) => cmd_linearize(&GroupOpts {
                source,
                order,
                max_word_len: DEFAULT_MAX_WORD_LEN,
                p,
                pretty: input.pretty,
            }),
            Err(o) => o,
        },
        Command::Forms {
            check,
            input,
            k,
            params,
            point,
            chart,
        } => match source(&input) {
            Ok(source) => {
                let cmd = match check {
                    FormCheck::Integrable => FormCommand::Integrable,
                    FormCheck::Cone => FormCommand::Cone,
                    FormCheck::Kupka => FormCommand::Kupka,
                    FormCheck::FirstIntegral => FormCommand::FirstIntegral,
                    FormCheck::Pullback => FormCommand::Pullback,
                };
                cmd_forms(
                    cmd,
                    &FormOpts {
                        source,
                        k,
                        params,
                        point,
                        chart,
                        pretty: input.pretty,
                    },
                )
            }
            Err(o) => o,
        },
    }
}

fn main() -> ExitCode {
    let out = run(Cli::parse());
    println!("{}", out.json);
    if out.code == 2 {
        if let Ok(v) = serde_json::from_str::<serde_json::Value>(&out.json) {
            if let Some(msg) = v.get("error").and_then(|m| m.as_str()) {
                eprintln!("diffgerm: {msg}");
            }
        }
    }
    ExitCode::from(out.code as u8)
}
