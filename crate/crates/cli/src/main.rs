//! `randworlds`: degrees of belief from statistical knowledge bases, and
//! the copyright scenario analyzers, as reproducible batch runs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 parse error, 3 validation
//! error, 4 unsatisfiable knowledge base, 5 counterexample under `--check`.

mod manifest;
mod scenario;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::{RunManifest, SchedulePoint};
use randworlds::dsl::{parse_kb_with_spans, parse_query, DslError, SourceMap};
use randworlds::engine::{
    belief_with, converge_with, default_schedule, sample_belief, BeliefEstimate, BeliefValue,
    ConvergenceSchedule, EngineConfig, EngineError, SampleConfig,
};
use randworlds::inference::{direct_inference, DirectInferenceResult, InferenceError};
use randworlds::kb::{KbError, KnowledgeBase, Query, ToleranceSpec};
use randworlds::scalar::{format_rational, parse_rational};
use randworlds::Rational;

const BUDGET_VAR: &str = "RANDWORLDS_BUDGET";

#[derive(Parser)]
#[command(
    name = "randworlds",
    version,
    about = "Random-worlds degrees of belief and copyright scenario analysis"
)]
struct Cli {
    /// Leave the timestamp out of the run manifest, for byte-identical reruns.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a knowledge base.
    Validate { kb: PathBuf },
    /// Degree of belief in a query, e.g. `Murderer(Jane)`.
    Belief {
        kb: PathBuf,
        query: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Domain size for the exact and Monte Carlo paths.
        #[arg(short = 'N', long = "n", visible_alias = "N", default_value_t = 40)]
        n: usize,
        /// Tolerance, or comma-separated tolerances by index; defaults to max(1/50, 2/N).
        #[arg(long)]
        tau: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exact beliefs along a schedule of (N, tau) points.
    Converge {
        kb: PathBuf,
        query: String,
        /// `default`, or comma-separated `N:tau` points such as `10:1/10,20:1/20`.
        #[arg(long, default_value = "default")]
        schedule: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build a scenario's knowledge bases and run its analyzer.
    Scenario {
        #[arg(value_enum)]
        kind: ScenarioKind,
        /// JSON config (irr, naf, naf-audit).
        config: Option<PathBuf>,
        /// Exit with status 5 when the analyzer finds a counterexample.
        #[arg(long)]
        check: bool,
        /// Use Gamma(eps) = 1 + slope * eps instead of exp(eps) (naf-audit).
        #[arg(long)]
        affine_slope: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    out: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Mc,
    Direct,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum ScenarioKind {
    Mistress,
    Irr,
    Naf,
    NafAudit,
}

/// A failed run: message for stderr plus exit status.
#[derive(Debug)]
pub(crate) struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const RUNTIME: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const VALIDATION: u8 = 3;
    pub const UNSATISFIABLE: u8 = 4;
    pub const COUNTEREXAMPLE: u8 = 5;

    pub fn new(code: u8, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<DslError> for Failure {
    fn from(e: DslError) -> Self {
        let code = match e {
            DslError::Validation(_) => Failure::VALIDATION,
            DslError::Syntax(_) | DslError::UnknownSymbol { .. } => Failure::PARSE,
        };
        Failure::new(code, e)
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::Kb(_) => Failure::VALIDATION,
            EngineError::Unsatisfiable { .. } => Failure::UNSATISFIABLE,
            _ => Failure::RUNTIME,
        };
        Failure::new(code, e)
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        let code = if matches!(e, InferenceError::Kb(_)) {
            Failure::VALIDATION
        } else {
            Failure::RUNTIME
        };
        Failure::new(code, e)
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        Failure::new(Failure::VALIDATION, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        // Data errors include config invariant violations raised while deserializing.
        let code = if e.is_data() {
            Failure::VALIDATION
        } else {
            Failure::PARSE
        };
        Failure::new(code, e)
    }
}

pub(crate) type Outcome = Result<Report, Failure>;

/// Rendered output plus the exit status to report after writing it.
pub(crate) struct Report {
    pub text: String,
    pub code: u8,
}

impl Report {
    pub fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

#[derive(Serialize)]
pub(crate) struct Envelope<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    #[serde(flatten)]
    pub body: T,
}

pub(crate) fn to_json<T: Serialize>(manifest: &RunManifest, body: T) -> String {
    let mut s =
        serde_json::to_string_pretty(&Envelope { manifest, body }).expect("report serializes");
    s.push('\n');
    s
}

pub(crate) fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<String, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::new(Failure::RUNTIME, format!("{}: {e}", path.display())))?;
    manifest.record(path, &bytes);
    String::from_utf8(bytes)
        .map_err(|e| Failure::new(Failure::PARSE, format!("{}: {e}", path.display())))
}

fn load_kb(path: &Path, manifest: &mut RunManifest) -> Result<(KnowledgeBase, SourceMap), Failure> {
    let text = read_input(path, manifest)?;
    parse_kb_with_spans(&text).map_err(|e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    })
}

fn engine_config() -> Result<EngineConfig, Failure> {
    let mut config = EngineConfig::default();
    if let Ok(v) = std::env::var(BUDGET_VAR) {
        config.budget = v.trim().parse().map_err(|_| {
            Failure::new(
                Failure::RUNTIME,
                format!("{BUDGET_VAR} must be a non-negative integer, got {v:?}"),
            )
        })?;
    }
    Ok(config)
}

fn parse_taus(text: &str) -> Result<ToleranceSpec, Failure> {
    let taus = text
        .split(',')
        .map(|t| {
            parse_rational(t.trim())
                .map_err(|e| Failure::new(Failure::PARSE, format!("tau {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ToleranceSpec::new(taus))
}

fn default_tau(n: usize) -> Rational {
    let floor = Rational::new(1.into(), 50.into());
    Rational::new(2.into(), n.max(1).into()).max(floor)
}

fn parse_schedule(text: &str) -> Result<ConvergenceSchedule, Failure> {
    if text == "default" {
        return Ok(default_schedule());
    }
    let bad = |why: String| Failure::new(Failure::PARSE, format!("schedule {text:?}: {why}"));
    let points = text
        .split(',')
        .map(|p| {
            let (n, tau) = p
                .split_once(':')
                .ok_or_else(|| bad(format!("point {p:?} is not N:tau")))?;
            let n = n
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad N in {p:?}")))?;
            let tau = parse_rational(tau.trim()).map_err(|e| bad(e.to_string()))?;
            Ok((n, ToleranceSpec::uniform(tau, 1)))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    ConvergenceSchedule::new(points).map_err(|e| bad(e.to_string()))
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum BeliefPath {
    Direct,
    Exact,
    MonteCarlo,
}

#[derive(Serialize)]
struct BeliefBody<'a> {
    query: String,
    /// Which computation produced the answer.
    path: BeliefPath,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<&'a DirectInferenceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<&'a BeliefEstimate>,
    /// Why `auto` moved past direct inference.
    #[serde(skip_serializing_if = "Option::is_none")]
    direct_declined: Option<String>,
}

fn cmd_validate(path: &Path, manifest: &mut RunManifest) -> Outcome {
    let (kb, _) = load_kb(path, manifest)?;
    Ok(Report::ok(format!(
        "{}: ok ({} predicates, {} constants, {} rules, {} statistics, {} facts)\n",
        path.display(),
        kb.predicates.len(),
        kb.constants.len(),
        kb.rules.len(),
        kb.constraints.len(),
        kb.facts.len()
    )))
}

#[allow(clippy::too_many_arguments)]
fn cmd_belief(
    path: &Path,
    query_text: &str,
    method: MethodArg,
    n: usize,
    tau: Option<&str>,
    samples: u64,
    seed: u64,
    format: Format,
    manifest: &mut RunManifest,
) -> Outcome {
    let (kb, spans) = load_kb(path, manifest)?;
    let query = parse_query(query_text, &kb)?;
    let taus = match tau {
        Some(t) => parse_taus(t)?,
        None => ToleranceSpec::uniform(default_tau(n), kb.tolerance_slots()),
    };
    let config = engine_config()?;

    let mut direct = None;
    let mut estimate = None;
    let mut declined = None;
    let path_taken = match method {
        MethodArg::Direct => {
            direct = Some(direct_inference(&kb, &query)?.with_spans(&spans));
            BeliefPath::Direct
        }
        MethodArg::Exact => {
            estimate = Some(belief_with(&kb, &query, n, &taus, &config)?);
            BeliefPath::Exact
        }
        MethodArg::Mc => {
            estimate = Some(sample_belief(
                &kb,
                &query,
                n,
                &taus,
                SampleConfig { samples, seed },
            )?);
            BeliefPath::MonteCarlo
        }
        // Direct inference first, then exact counting; never sampling.
        MethodArg::Auto => match direct_inference(&kb, &query) {
            Ok(r) => {
                direct = Some(r.with_spans(&spans));
                BeliefPath::Direct
            }
            Err(e @ InferenceError::Kb(_)) => return Err(e.into()),
            Err(e) => {
                declined = Some(e.to_string());
                estimate = Some(belief_with(&kb, &query, n, &taus, &config).map_err(
                    |e| match e {
                        EngineError::BudgetExceeded { .. } => Failure::new(
                            Failure::RUNTIME,
                            format!(
                                "{e}; auto does not fall back to sampling, rerun with --method mc"
                            ),
                        ),
                        other => other.into(),
                    },
                )?);
                BeliefPath::Exact
            }
        },
    };

    let body = BeliefBody {
        query: query_text.to_string(),
        path: path_taken,
        direct: direct.as_ref(),
        estimate: estimate.as_ref(),
        direct_declined: declined,
    };
    Ok(Report::ok(match format {
        Format::Json => to_json(manifest, body),
        Format::Csv => manifest.csv_preamble() + &belief_csv(&body),
    }))
}

/// Columns: `path, n, tau, lo, hi, decimal, half_width, samples, accepted,
/// model_count, query_count`; a point value has `lo == hi`.
fn belief_csv(body: &BeliefBody) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "path",
        "n",
        "tau",
        "lo",
        "hi",
        "decimal",
        "half_width",
        "samples",
        "accepted",
        "model_count",
        "query_count",
    ];
    w.write_record(header).expect("in-memory write");
    let path = serde_json::to_value(&body.path)
        .expect("path")
        .as_str()
        .unwrap_or_default()
        .to_string();
    let mut row = vec![path];
    if let Some(d) = body.direct {
        let (lo, hi) = d.value.bounds();
        let mid = num_traits::ToPrimitive::to_f64(&((lo + hi) / Rational::from_integer(2.into())))
            .unwrap_or(f64::NAN);
        row.extend([
            String::new(),
            String::new(),
            format_rational(lo),
            format_rational(hi),
            mid.to_string(),
        ]);
        row.extend(std::iter::repeat_n(String::new(), 5));
    } else if let Some(e) = body.estimate {
        row.extend([e.n.to_string(), e.taus.to_string()]);
        match &e.value {
            BeliefValue::Exact { value } => {
                let v = format_rational(value);
                row.extend([
                    v.clone(),
                    v,
                    e.value.as_f64().to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            BeliefValue::Sampled {
                mean,
                half_width,
                samples,
                accepted,
            } => row.extend([
                String::new(),
                String::new(),
                mean.to_string(),
                half_width.to_string(),
                samples.to_string(),
                accepted.to_string(),
            ]),
        }
        let count = |c: &Option<randworlds::engine::WorldCount>| {
            c.as_ref().map(|c| c.to_string()).unwrap_or_default()
        };
        row.extend([count(&e.model_count), count(&e.query_count)]);
    }
    w.write_record(&row).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn cmd_converge(
    path: &Path,
    query_text: &str,
    schedule: &str,
    format: Format,
    manifest: &mut RunManifest,
) -> Outcome {
    let (kb, _) = load_kb(path, manifest)?;
    let query: Query = parse_query(query_text, &kb)?;
    let schedule = parse_schedule(schedule)?;
    manifest.schedule = Some(
        schedule
            .points()
            .iter()
            .map(|(n, taus)| SchedulePoint {
                n: *n,
                tau: taus.to_string(),
            })
            .collect(),
    );
    let report = converge_with(&kb, &query, &schedule, &engine_config()?);

    #[derive(Serialize)]
    struct Body<'a> {
        query: &'a str,
        report: &'a randworlds::engine::ConvergenceReport,
    }
    Ok(Report::ok(match format {
        Format::Json => to_json(
            manifest,
            Body {
                query: query_text,
                report: &report,
            },
        ),
        Format::Csv => manifest.csv_preamble() + &report.to_csv(),
    }))
}

fn run(cli: &Cli) -> Outcome {
    let with_timestamp = !cli.no_timestamp;
    match &cli.command {
        Command::Validate { kb } => cmd_validate(kb, &mut RunManifest::new(0, with_timestamp)),
        Command::Belief {
            kb,
            query,
            method,
            n,
            tau,
            samples,
            seed,
            out,
        } => cmd_belief(
            kb,
            query,
            *method,
            *n,
            tau.as_deref(),
            *samples,
            *seed,
            out.out,
            &mut RunManifest::new(*seed, with_timestamp),
        ),
        Command::Converge {
            kb,
            query,
            schedule,
            out,
        } => cmd_converge(
            kb,
            query,
            schedule,
            out.out,
            &mut RunManifest::new(0, with_timestamp),
        ),
        Command::Scenario {
            kind,
            config,
            check,
            affine_slope,
            out,
        } => scenario::run(
            *kind,
            config.as_deref(),
            *check,
            affine_slope.as_deref(),
            out.out == Format::Csv,
            &mut RunManifest::new(0, with_timestamp),
        ),
    }
}

fn output_target(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Validate { .. } => None,
        Command::Belief { out, .. }
        | Command::Converge { out, .. }
        | Command::Scenario { out, .. } => out.output.as_deref(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let written = match output_target(&cli) {
                Some(p) => fs::write(p, &report.text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", report.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(Failure::RUNTIME);
            }
            if report.code == Failure::COUNTEREXAMPLE {
                eprintln!("check failed: counterexample found");
            }
            ExitCode::from(report.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
