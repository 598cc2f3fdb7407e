//! Command-line front end: builds fixtures, runs the checks, and writes JSON
//! reports or CSV tables.
//!
//! Every report carries the [`RunConfig`] it came from, so
//! `schwartz-lab --replay report.json` can re-run it and confirm the output is
//! byte-identical apart from the timestamp.

mod commands;
pub mod json;
pub mod table;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use table::Table;

/// Directory for reports when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "SCHWARTZ_LAB_OUT";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_FAILURE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{file}:{line}:{column}: {message}\n  | {snippet}")]
    Input { file: String, line: usize, column: usize, message: String, snippet: String },
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Failure(e.to_string())
            }
        }
    )*};
}
failure_from!(
    crate::geometry::GeometryError,
    crate::maps::MapError,
    crate::schwartz::SchwartzError,
    crate::verify::VerifyError,
    std::io::Error
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Outcome class of a run; the exit status depends on nothing else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Supported,
    Refuted,
    Violation,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::Supported => EXIT_PASS,
            Verdict::Refuted | Verdict::Violation => EXIT_REFUTED,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "schwartz-lab", version, about = "Numerical checks of Schwartz-space equivalence between domains")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Re-run a saved JSON report and check that it reproduces byte for byte.
    #[arg(long, value_name = "REPORT")]
    replay: Option<PathBuf>,
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GlobalArgs {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; defaults to $SCHWARTZ_LAB_OUT/<command>.<format>, else stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum Command {
    /// Three-point (Ahlfors) constant of a polyline.
    Quasicircle(commands::QuasicircleArgs),
    /// Box-counting dimension of a fixture or curve.
    Dimension(commands::DimensionArgs),
    /// Evaluate a map, its derivatives and its inverse at points.
    Map(commands::MapArgs),
    /// Boundary-distance distortion and derivative blow-up of a map between two domains.
    PullbackCheck(commands::PullbackArgs),
    /// Seminorm and decay trends of pulled-back test functions, both directions.
    Transfer(commands::TransferArgs),
    /// Obstruction certificates for the two non-equivalence constructions.
    #[command(subcommand)]
    Counterexample(commands::CounterexampleCommand),
    /// Build the curve, interval and domain fixtures.
    #[command(subcommand)]
    Fixtures(commands::FixtureCommand),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Quasicircle(_) => "quasicircle".into(),
            Command::Dimension(_) => "dimension".into(),
            Command::Map(_) => "map".into(),
            Command::PullbackCheck(_) => "pullback-check".into(),
            Command::Transfer(_) => "transfer".into(),
            Command::Counterexample(c) => format!("counterexample {}", c.name()),
            Command::Fixtures(c) => format!("fixtures {}", c.name()),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub output: Option<String>,
    pub format: Format,
}

/// The JSON document every command writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// UTC wall-clock time of the run; the only field allowed to change on replay.
    pub timestamp: String,
    pub config: RunConfig,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub result: serde_json::Value,
}

/// What a command produced, before it is wrapped in a [`Report`].
pub(crate) struct Outcome {
    pub verdict: Verdict,
    pub result: serde_json::Value,
    pub table: Table,
    pub inputs: Vec<String>,
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let args: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, args, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, argv: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    if let Some(path) = cli.replay {
        if cli.command.is_some() {
            return Err(CliError::Usage("--replay takes no subcommand".into()));
        }
        return replay(&path, cli.global.output, out, err);
    }
    let command = cli.command.ok_or_else(|| CliError::Usage("no subcommand given".into()))?;
    let (report, table) = execute(command, &cli.global, argv, None)?;
    let (text, ext) = match cli.global.format {
        Format::Json => (json::to_string(&report)?, "json"),
        Format::Csv => (table.to_csv()?, "csv"),
    };
    let target = cli.global.output.clone().or_else(|| {
        std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{ext}", report.config.command.replace(' ', "-"))))
    });
    emit(&text, target.as_deref(), out, err)?;
    Ok(report.exit_code)
}

fn emit(text: &str, target: Option<&std::path::Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match target {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
            writeln!(err, "wrote {}", path.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one parsed command and wraps its outcome; `timestamp` overrides the clock.
fn execute(
    command: Command,
    global: &GlobalArgs,
    argv: Vec<String>,
    timestamp: Option<String>,
) -> Result<(Report, Table), CliError> {
    let name = command.name();
    let parameters = parameters_of(&command)?;
    let outcome = commands::execute(&command, global.seed)?;
    let config = RunConfig {
        command: name,
        argv,
        inputs: outcome.inputs,
        parameters,
        seed: global.seed,
        output: global.output.as_ref().map(|p| p.display().to_string()),
        format: global.format,
    };
    let report = Report {
        tool: "schwartz-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: timestamp.unwrap_or_else(now_utc),
        config,
        verdict: outcome.verdict,
        exit_code: outcome.verdict.exit_code(),
        result: outcome.result,
    };
    Ok((report, outcome.table))
}

/// The parsed arguments of the innermost subcommand, as a flat map.
fn parameters_of(command: &Command) -> Result<BTreeMap<String, serde_json::Value>, CliError> {
    let mut v = serde_json::to_value(command).map_err(|e| CliError::Failure(e.to_string()))?;
    // unwrap the enum layers down to the argument struct
    while let serde_json::Value::Object(m) = &v {
        match m.iter().next() {
            Some((_, inner @ serde_json::Value::Object(_))) if m.len() == 1 => v = inner.clone(),
            _ => break,
        }
    }
    Ok(match v {
        serde_json::Value::Object(m) => m.into_iter().filter(|(_, x)| !x.is_null()).collect(),
        _ => BTreeMap::new(),
    })
}

fn replay(
    path: &std::path::Path,
    output: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let source = path.display().to_string();
    let original = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {source}: {e}")))?;
    let saved: Report = json::parse(&original, &source)?;
    if saved.config.format != Format::Json {
        return Err(CliError::Usage("only JSON reports can be replayed".into()));
    }
    let argv: Vec<String> = std::iter::once("schwartz-lab".to_string()).chain(saved.config.argv.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(format!("stored arguments no longer parse: {e}")))?;
    let command = cli.command.ok_or_else(|| CliError::Usage("stored report has no subcommand".into()))?;
    let (report, _) = execute(command, &cli.global, saved.config.argv.clone(), Some(saved.timestamp.clone()))?;
    let text = json::to_string(&report)?;
    emit(&text, output.as_deref(), out, err)?;
    if text != original {
        let line = text.lines().zip(original.lines()).position(|(a, b)| a != b).map_or(0, |i| i + 1);
        return Err(CliError::Failure(format!("replay differs from {source} near line {line}")));
    }
    writeln!(err, "replay matches {source}")?;
    Ok(report.exit_code)
}

/// `YYYY-MM-DDTHH:MM:SSZ` for the current time.
fn now_utc() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format_utc(secs)
}

fn format_utc(secs: u64) -> String {
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    // civil date from days since 1970-01-01
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = yoe + era * 400 + i64::from(month <= 2);
    format!("{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z", rem / 3600, rem % 3600 / 60, rem % 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("schwartz-lab").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn utc_formatting() {
        assert_eq!(format_utc(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_utc(951_782_400), "2000-02-29T00:00:00Z");
        assert_eq!(format_utc(1_792_108_800 + 3_723), "2026-10-16T01:02:03Z");
    }

    #[test]
    fn usage_errors_exit_above_two() {
        let (code, _, err) = run_capture(&["transfer", "--suite", "nope"]);
        assert_eq!(code, EXIT_USAGE, "{err}");
        let (code, _, _) = run_capture(&["fixtures", "cantor", "--depth", "0"]);
        assert_eq!(code, EXIT_FAILURE);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_PASS);
        assert!(out.contains("quasicircle"));
    }

    #[test]
    fn cantor_fixture_report() {
        let (code, out, _) = run_capture(&["fixtures", "cantor", "--depth", "2", "--seed", "17"]);
        assert_eq!(code, 0);
        let report: Report = serde_json::from_str(&out).unwrap();
        assert_eq!(report.config.seed, 17);
        assert_eq!(report.config.command, "fixtures cantor");
        assert_eq!(report.config.parameters["depth"], 2);
        let gaps = report.result["intervals"].as_array().unwrap();
        let ends: Vec<(u64, u64)> = gaps
            .iter()
            .map(|g| (g["numerator"].as_u64().unwrap(), g["denominator"].as_u64().unwrap()))
            .collect();
        assert_eq!(ends, vec![(1, 3), (1, 9), (7, 9)]);
    }

    #[test]
    fn malformed_input_reports_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.json");
        std::fs::write(&path, "{\n  \"closed\": true,\n  \"points\": [[0, 0], [1, 0]],,\n}\n").unwrap();
        let (code, _, err) = run_capture(&["quasicircle", "--curve", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("curve.json:3:"), "{err}");
    }

    #[test]
    fn csv_export_creates_parent_directories() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nested");
        let (code, out, err) = run_capture(&[
            "fixtures",
            "koch",
            "--iterations",
            "1",
            "--format",
            "csv",
            "--output",
            target.join("koch.csv").to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(out.is_empty());
        let csv = std::fs::read_to_string(target.join("koch.csv")).unwrap();
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.starts_with("index,x,y\n"));
    }

    #[test]
    fn replay_reproduces_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nazarov.json");
        let p = path.to_str().unwrap();
        let (code, _, err) = run_capture(&["counterexample", "nazarov", "--C", "1000", "--n-max", "10", "-o", p]);
        assert_eq!(code, 0, "{err}");
        let (code, out, err) = run_capture(&["--replay", p]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out, std::fs::read_to_string(&path).unwrap());
        // tampering is detected
        let text = std::fs::read_to_string(&path).unwrap().replace("\"monotone\": true", "\"monotone\": false");
        std::fs::write(&path, text).unwrap();
        let (code, _, err) = run_capture(&["--replay", p]);
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.contains("replay differs"), "{err}");
    }
}
