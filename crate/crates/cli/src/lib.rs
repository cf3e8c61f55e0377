//! Command-line front end: `analyze`, `zeros` and `verify`.
//!
//! [`run`] does everything except touching the process: it returns the text
//! for stdout and stderr and the exit status, so it can be tested in-process.

pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use phasepair::pipeline::{analyze, analyze_zeros, RunConfig};
use phasepair::verify::{self, Suite, VerifyOptions};
use phasepair::Error;

pub use report::{AnalyzeReport, VerifyReport, ZerosReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "phasepair",
    version,
    about = "Principal pairs, amplitudes and phases of y'' + q(x) y = 0"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the principal pair and classify the amplitude.
    Analyze(RunArgs),
    /// Gap table between critical points of y1 and zeros of y2.
    Zeros(RunArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Fast,
    All,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Catalog name (constant, gen-airy, inverse-x, cauchy-euler) or an
    /// expression in x.
    #[arg(long = "eq", allow_hyphen_values = true)]
    pub equation: String,
    /// Parameter binding, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Fraction of the span used as the fitting window, in (0, 0.5].
    #[arg(long)]
    pub window: Option<f64>,
    /// Defaults to json for analyze and csv for zeros.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Force this relative tolerance on every integration.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Plain text when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(format!("empty parameter name in `{s}`"));
    }
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", v.trim()))?;
    Ok((k.to_string(), v))
}

impl RunArgs {
    pub fn config(&self) -> RunConfig<f64> {
        let params: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut c = RunConfig::new(&self.equation, &params);
        c.x0 = self.x0;
        if let Some(x) = self.xmax {
            c.xmax = x;
        }
        if let Some(r) = self.rtol {
            c.rtol = r;
        }
        if let Some(a) = self.atol {
            c.atol = a;
        }
        if let Some(w) = self.window {
            c.window_fraction = w;
        }
        c.seed = self.seed;
        c
    }
}

/// Result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

fn failure(kind: &str, message: String, code: i32) -> Outcome {
    let doc = ErrorDoc {
        error: ErrorBody {
            kind,
            message,
            exit_code: code,
        },
    };
    Outcome {
        stdout: String::new(),
        stderr: serde_json::to_string(&doc).expect("error document serializes") + "\n",
        code,
    }
}

/// Maps a library error to its exit status and error document.
pub fn error_outcome(e: &Error) -> Outcome {
    let code = if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC };
    failure(e.kind(), e.to_string(), code)
}

fn json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("report serializes") + "\n"
}

fn emit(text: String, out: &Option<PathBuf>, code: i32) -> Outcome {
    match out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome {
                code,
                ..Outcome::default()
            },
            Err(e) => failure("io", format!("{}: {e}", path.display()), EXIT_CONFIG),
        },
        None => Outcome {
            stdout: text,
            code,
            ..Outcome::default()
        },
    }
}

pub fn cmd_analyze(args: &RunArgs) -> Result<AnalyzeReport, Error> {
    analyze(&args.config()).map(|a| AnalyzeReport::new(&a))
}

pub fn cmd_zeros(args: &RunArgs) -> Result<ZerosReport, Error> {
    let mut config = args.config();
    if args.xmax.is_none() {
        config = config.widen_for_zeros();
    }
    analyze_zeros(&config).map(|(a, t)| ZerosReport::new(&a, &t))
}

pub fn cmd_verify(args: &VerifyArgs) -> VerifyReport {
    let (suite, name) = match args.suite {
        SuiteArg::Fast => (Suite::Fast, "fast"),
        SuiteArg::All => (Suite::All, "all"),
    };
    let opts = VerifyOptions {
        suite,
        seed: args.seed,
        rtol: args.rtol,
    };
    VerifyReport::new(name, args.seed, args.rtol, &verify::run(&opts))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Outcome {
                    stdout: e.to_string(),
                    ..Outcome::default()
                },
                _ => failure("usage", e.to_string().trim_end().to_string(), EXIT_CONFIG),
            };
        }
    };
    match &cli.command {
        Command::Analyze(a) => match cmd_analyze(a) {
            Ok(r) => {
                let text = match a.format.unwrap_or(Format::Json) {
                    Format::Json => json(&r),
                    Format::Csv => r.to_csv(),
                };
                emit(text, &a.out, EXIT_OK)
            }
            Err(e) => error_outcome(&e),
        },
        Command::Zeros(a) => match cmd_zeros(a) {
            Ok(r) => {
                let text = match a.format.unwrap_or(Format::Csv) {
                    Format::Json => json(&r),
                    Format::Csv => r.to_csv(),
                };
                emit(text, &a.out, EXIT_OK)
            }
            Err(e) => error_outcome(&e),
        },
        Command::Verify(v) => {
            if let Some(r) = v.rtol {
                if !(r > 0.0 && r.is_finite()) {
                    return failure("tolerance", format!("rtol {r} must be positive"), EXIT_CONFIG);
                }
            }
            let r = cmd_verify(v);
            let text = match v.format {
                None => r.to_text(),
                Some(Format::Json) => json(&r),
                Some(Format::Csv) => r.to_csv(),
            };
            emit(text, &v.out, if r.all_pass() { EXIT_OK } else { EXIT_VERIFY })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_syntax() {
        assert_eq!(parse_param("nu=0.25").unwrap(), ("nu".to_string(), 0.25));
        assert_eq!(parse_param(" c = 2 ").unwrap(), ("c".to_string(), 2.0));
        assert!(parse_param("nu").is_err());
        assert!(parse_param("=1").is_err());
        assert!(parse_param("nu=abc").is_err());
    }

    #[test]
    fn usage_errors_are_config_errors() {
        let o = run(["phasepair", "analyze"]);
        assert_eq!(o.code, EXIT_CONFIG);
        let v: serde_json::Value = serde_json::from_str(&o.stderr).unwrap();
        assert_eq!(v["error"]["kind"], "usage");
    }

    #[test]
    fn flags_fill_the_config() {
        let cli = Cli::try_parse_from([
            "phasepair",
            "analyze",
            "--eq",
            "gen-airy",
            "--param",
            "nu=0.4",
            "--xmax",
            "80",
            "--window",
            "0.3",
        ])
        .unwrap();
        let Command::Analyze(a) = cli.command else { panic!() };
        let c = a.config();
        assert_eq!(c.equation, "gen-airy");
        assert_eq!(c.params, vec![("nu".to_string(), 0.4)]);
        assert_eq!(c.xmax, 80.0);
        assert_eq!(c.window_fraction, 0.3);
    }
}
