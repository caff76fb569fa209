//! Argument handling and dispatch for the `fairworld` binary.
//!
//! Exit codes: 0 success, 1 refutation found, 2 input error, 3 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fairworld::audit::tau::{RerankingReport, RerankingVerdict, ScoredDataset};
use fairworld::audit::{audit_assumptions, falsify_assumption, Assumption, AuditOptions, FalsifyOptions};
use fairworld::io::report::verdict_line;
use fairworld::io::scenario::scenario_to_json;
use fairworld::io::{
    ingest_scores_csv, load_scenario, plot_simplex, render_report, PlotSource, ReportFile, ReportFormat,
};
use fairworld::oracle::is_unbiased_with;
use fairworld::scheme::Association;
use fairworld::{
    apply_bias, builtin_scenario, infer_bias_table, is_associated, pareto_maximal_oracle_with, restrict,
    scheme_decision, BiasSpec, Decision, OracleError, OracleLimits, Scenario, Scope, TiePolicy, WeightScheme,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::Solver(_) => CliError::Internal(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "fairworld", version, about = "Fair-world decision analysis and assumption audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WorldArg {
    Fair,
    Unfair,
}

impl From<WorldArg> for fairworld::World {
    fn from(w: WorldArg) -> Self {
        match w {
            WorldArg::Fair => fairworld::World::Fair,
            WorldArg::Unfair => fairworld::World::Unfair,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TieArg {
    LowestIndex,
    Uniform,
}

impl From<TieArg> for TiePolicy {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::LowestIndex => TiePolicy::LowestIndex,
            TieArg::Uniform => TiePolicy::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and summarize it.
    Validate {
        /// Scenario file, or a built-in name (phd_example, simplex_grid:<n>).
        scenario: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Audit the five group fairness assumptions; exits 1 on any refutation.
    Audit {
        scenario: String,
        /// Also run the randomized counterexample search.
        #[arg(long)]
        falsify: bool,
        #[command(flatten)]
        search: SearchArgs,
        /// Maximum witnesses kept per check.
        #[arg(long, default_value_t = 16)]
        witness_cap: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Materialize the decision associated with a weight scheme.
    Decide {
        scenario: String,
        /// Tiers separated by `>`, labels by `,`, e.g. "a:1 > b:3, c:6".
        #[arg(long)]
        scheme: String,
        #[arg(long, value_enum, default_value = "fair")]
        world: WorldArg,
        #[arg(long, value_enum, default_value = "lowest-index")]
        tie: TieArg,
        /// Restrict to one group.
        #[arg(long)]
        group: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check Pareto maximality (and unbiasedness) of a named decision.
    Pareto {
        scenario: String,
        #[arg(long)]
        decision: String,
        #[arg(long, value_enum, default_value = "fair")]
        world: WorldArg,
        #[arg(long)]
        group: Option<String>,
        /// Lift the oracle's instance size guard.
        #[arg(long)]
        no_guard: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Apply a bias spec (JSON) to the fair side, or infer the table an instance implies.
    Bias {
        scenario: String,
        /// Bias spec file: a map from group to transform.
        #[arg(long, conflicts_with = "infer", required_unless_present = "infer")]
        spec: Option<PathBuf>,
        /// Print the per-group fair-to-unfair table instead.
        #[arg(long)]
        infer: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Per-group Kendall tau between fair and unfair scores (CSV or scenario).
    Tau {
        /// Scores CSV (id, group, score_a, score_b[, weight]) or a scenario.
        input: String,
        /// Print only this group's tau (as a bare value in JSON mode).
        #[arg(long)]
        group: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Randomized counterexample search for one assumption; exits 1 when found.
    Falsify {
        scenario: String,
        /// NHNF, FaO, RM (or AA, DS, which use the exact checks).
        #[arg(long)]
        assumption: String,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Barycentric SVG of a three-label scheme or grid decision.
    Plot {
        /// Scenario supplying labels (and decisions, with --decision).
        scenario: String,
        #[arg(long, conflicts_with = "decision", required_unless_present = "decision")]
        scheme: Option<String>,
        #[arg(long, value_enum, default_value = "lowest-index")]
        tie: TieArg,
        /// Named decision on a simplex_grid:<resolution> scenario.
        #[arg(long)]
        decision: Option<String>,
        #[arg(long, default_value_t = 64)]
        resolution: u32,
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Built-in name or file path.
fn resolve_scenario(arg: &str) -> Result<Scenario, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return load_scenario(path).map_err(input);
    }
    builtin_scenario(arg).map_err(|_| CliError::Input(format!("no such scenario file or built-in: {arg}")))
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ValidateSummary<'a> {
    labels: &'a [String],
    groups: &'a [String],
    individuals: usize,
    decisions: Vec<&'a String>,
}

#[derive(Serialize)]
struct DecideOutput {
    scheme: String,
    association: Association,
    decision: Decision,
}

#[derive(Serialize)]
struct TauOutput<'a> {
    group: Option<&'a str>,
    report: &'a RerankingReport,
}

fn markdown_tau(report: &RerankingReport, only: Option<&str>) -> String {
    let mut s = String::from("| group | size | tau |\n|---|---|---|\n");
    for g in &report.groups {
        if only.is_some_and(|o| o != g.group) {
            continue;
        }
        let tau = g.summary.as_ref().map(|t| fairworld::rational::format(&t.tau)).unwrap_or_else(|| "-".into());
        s.push_str(&format!("| {} | {} | {tau} |\n", g.group, g.size));
    }
    s
}

fn run_command(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate { scenario, out } => {
            let s = resolve_scenario(&scenario)?;
            let summary = ValidateSummary {
                labels: s.instance.labels().names(),
                groups: s.instance.groups(),
                individuals: s.instance.individuals().len(),
                decisions: s.decisions.keys().collect(),
            };
            let text = match out.format {
                FormatArg::Json => json(&summary),
                FormatArg::Markdown => format!(
                    "valid: {} individuals, labels [{}], groups [{}], decisions [{}]\n",
                    summary.individuals,
                    summary.labels.join(", "),
                    summary.groups.join(", "),
                    summary.decisions.iter().map(|d| d.as_str()).collect::<Vec<_>>().join(", ")
                ),
            };
            emit(&text, out.output.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Audit {
            scenario,
            falsify,
            search,
            witness_cap,
            out,
        } => {
            let s = resolve_scenario(&scenario)?;
            let options = AuditOptions {
                witness_cap,
                falsify: falsify.then_some(FalsifyOptions {
                    trials: search.trials,
                    seed: search.seed,
                }),
            };
            let report = audit_assumptions(&s.instance, options);
            let _ = writeln!(stderr, "{}", verdict_line(&report));
            let refuted = report.any_refuted();
            let file = ReportFile::new(&s.instance, options, report);
            emit(&render_report(&file, out.format.into()), out.output.as_deref(), stdout)?;
            Ok(if refuted { EXIT_REFUTED } else { EXIT_OK })
        }
        Command::Decide {
            scenario,
            scheme,
            world,
            tie,
            group,
            out,
        } => {
            let s = resolve_scenario(&scenario)?;
            let parsed = WeightScheme::parse(s.instance.labels(), &scheme).map_err(input)?;
            let scope = group.map(Scope::group).unwrap_or(Scope::All);
            let d = scheme_decision(&s.instance, &parsed, world.into(), &scope, tie.into()).map_err(input)?;
            let association = is_associated(&d, &parsed, &s.instance, world.into(), &scope).map_err(input)?;
            if !association.associated {
                return Err(CliError::Internal("scheme decision is not associated with its scheme".into()));
            }
            let output = DecideOutput {
                scheme: parsed.display(s.instance.labels()),
                association,
                decision: d,
            };
            emit(&json(&output), out.output.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Pareto {
            scenario,
            decision,
            world,
            group,
            no_guard,
            out,
        } => {
            let s = resolve_scenario(&scenario)?;
            let d = s
                .decisions
                .get(&decision)
                .ok_or_else(|| CliError::Input(format!("scenario has no decision {decision:?}")))?;
            let limits = if no_guard { OracleLimits::unlimited() } else { OracleLimits::default() };
            let (scope, d) = match &group {
                Some(g) => (Scope::group(g.clone()), restrict(d, &s.instance, g).map_err(input)?),
                None => (Scope::All, d.clone()),
            };
            let certificate =
                pareto_maximal_oracle_with(&d, &s.instance, world.into(), &scope, limits).map_err(oracle_error)?;
            let unbiased = match group {
                None => Some(is_unbiased_with(&d, &s.instance, limits).map_err(oracle_error)?),
                Some(_) => None,
            };
            let value = serde_json::json!({
                "decision": decision,
                "maximality": certificate,
                "unbiased": unbiased,
            });
            emit(&json(&value), out.output.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Bias {
            scenario,
            spec,
            infer,
            out,
        } => {
            let s = resolve_scenario(&scenario)?;
            if infer {
                emit(&json(&infer_bias_table(&s.instance)), out.output.as_deref(), stdout)?;
                return Ok(EXIT_OK);
            }
            let path = spec.expect("clap requires --spec without --infer");
            let text = std::fs::read_to_string(&path)
                .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
            let spec: BiasSpec =
                serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let instance = apply_bias(&s.instance, &spec).map_err(input)?;
            let biased = Scenario {
                instance,
                decisions: s.decisions,
            };
            emit(&scenario_to_json(&biased), out.output.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Tau { input: source, group, out } => {
            let data = if source.ends_with(".csv") {
                ingest_scores_csv(&source).map_err(input)?
            } else {
                ScoredDataset::from_instance(&resolve_scenario(&source)?.instance).map_err(input)?
            };
            let report = fairworld::reranking_report(&data).map_err(input)?;
            let text = match (&group, out.format) {
                (Some(g), FormatArg::Json) if out.output.is_none() => {
                    let t = data.tau(g).map_err(input)?;
                    format!("{}\n", fairworld::rational::format(&t.tau))
                }
                (_, FormatArg::Json) => json(&TauOutput {
                    group: group.as_deref(),
                    report: &report,
                }),
                (_, FormatArg::Markdown) => {
                    if let Some(g) = &group {
                        data.tau(g).map_err(input)?;
                    }
                    markdown_tau(&report, group.as_deref())
                }
            };
            emit(&text, out.output.as_deref(), stdout)?;
            Ok(match report.verdict {
                RerankingVerdict::AllAssumptionsRefuted => EXIT_REFUTED,
                RerankingVerdict::ConsistentWithMonotoneBias => EXIT_OK,
            })
        }
        Command::Falsify {
            scenario,
            assumption,
            search,
            out,
        } => {
            let s = resolve_scenario(&scenario)?;
            let a: Assumption = assumption.parse().map_err(input)?;
            let found = falsify_assumption(
                &s.instance,
                a,
                FalsifyOptions {
                    trials: search.trials,
                    seed: search.seed,
                },
            );
            let value = serde_json::json!({
                "assumption": a,
                "seed": search.seed,
                "trials": search.trials,
                "counterexample": found,
            });
            let text = match out.format {
                FormatArg::Json => json(&value),
                FormatArg::Markdown => match &found {
                    Some(c) => format!("{a}: counterexample at trial {}\n", c.trial),
                    None => format!("{a}: no counterexample in {} trials (seed {})\n", search.trials, search.seed),
                },
            };
            emit(&text, out.output.as_deref(), stdout)?;
            Ok(if found.is_some() { EXIT_REFUTED } else { EXIT_OK })
        }
        Command::Plot {
            scenario,
            scheme,
            tie,
            decision,
            resolution,
            output,
        } => {
            let s = resolve_scenario(&scenario)?;
            let labels = s.instance.labels().names().to_vec();
            let raster = match (&scheme, &decision) {
                (Some(text), _) => {
                    let parsed = WeightScheme::parse(s.instance.labels(), text).map_err(input)?;
                    plot_simplex(&PlotSource::Scheme(&parsed, tie.into()), &labels, resolution, &output)
                }
                (None, Some(name)) => {
                    let d = s
                        .decisions
                        .get(name)
                        .ok_or_else(|| CliError::Input(format!("scenario has no decision {name:?}")))?;
                    plot_simplex(&PlotSource::Decision(d), &labels, resolution, &output)
                }
                (None, None) => unreachable!("clap requires --scheme or --decision"),
            }
            .map_err(input)?;
            let _ = writeln!(
                stdout,
                "wrote {} ({} cells, {} boundary edges, {} markers)",
                output.display(),
                raster.cells.len(),
                raster.boundaries.len(),
                raster.markers.len()
            );
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match run_command(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code()
        }
    }
}
