//! Audit report files in JSON or Markdown. Output is a pure function of
//! the instance, the options and the tool version.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::scenario::{scenario_to_json, SCHEMA_VERSION};
use crate::audit::{Assumption, AuditOptions, AuditReport, Witness};
use crate::instance::Instance;
use crate::scenarios::Scenario;

pub const TOOL_NAME: &str = "fairworld";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format {other:?} (expected json or markdown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// SHA-256 of the instance's canonical scenario JSON.
    pub instance_digest: String,
    pub labels: Vec<String>,
    pub options: AuditOptions,
    pub report: AuditReport,
}

/// Hex SHA-256 of the canonical JSON form of `instance`.
pub fn instance_digest(instance: &Instance) -> String {
    let canonical = scenario_to_json(&Scenario {
        instance: instance.clone(),
        decisions: Default::default(),
    });
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl ReportFile {
    pub fn new(instance: &Instance, options: AuditOptions, report: AuditReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo {
                name: TOOL_NAME.into(),
                version: TOOL_VERSION.into(),
            },
            instance_digest: instance_digest(instance),
            labels: instance.labels().names().to_vec(),
            options,
            report,
        }
    }
}

pub fn render_report(file: &ReportFile, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(file).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(file),
    }
}

/// Writes to `path`, or returns the text when `path` is `None`.
pub fn emit_report(file: &ReportFile, format: ReportFormat, path: Option<&Path>) -> Result<String, ReportError> {
    let text = render_report(file, format);
    if let Some(path) = path {
        std::fs::write(path, &text).map_err(|source| ReportError::Write {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(text)
}

fn label_names(w: &Witness, labels: &[String]) -> String {
    w.labels
        .iter()
        .map(|&l| labels.get(l).cloned().unwrap_or_else(|| l.to_string()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn markdown(file: &ReportFile) -> String {
    let r = &file.report;
    let mut out = String::new();
    let _ = writeln!(out, "# Assumption audit\n");
    let _ = writeln!(out, "- tool: {} {}", file.tool.name, file.tool.version);
    let _ = writeln!(out, "- instance digest: `{}`", file.instance_digest);
    let _ = writeln!(out, "- witness cap: {}", file.options.witness_cap);
    match file.options.falsify {
        Some(f) => {
            let _ = writeln!(out, "- falsification: {} trials, seed {}", f.trials, f.seed);
        }
        None => {
            let _ = writeln!(out, "- falsification: off");
        }
    }
    let _ = writeln!(out, "\n## Verdicts\n\n| assumption | verdict | basis | witnesses |\n|---|---|---|---|");
    for f in &r.findings {
        let ws: Vec<String> = f.witnesses.iter().map(|k| format!("#{k}")).collect();
        let _ = writeln!(
            out,
            "| {} ({}) | {} | {} | {} |",
            f.assumption.name(),
            f.assumption,
            f.verdict,
            f.basis,
            ws.join(" ")
        );
    }
    let _ = writeln!(out, "\n## Conditions\n\n| direction | condition | holds | violations |\n|---|---|---|---|");
    for c in &r.conditions {
        let _ = writeln!(out, "| {} | {} | {} | {} |", c.direction, c.condition, c.holds, c.violations);
    }
    if let Some(tau) = &r.tau {
        let _ = writeln!(out, "\n## Kendall tau\n\n| group | tau |\n|---|---|");
        for (g, t) in tau {
            let _ = writeln!(out, "| {g} | {t} |");
        }
        if let Some(rr) = &r.reranking {
            let _ = writeln!(out, "\nReranking verdict: {:?}. Ties: {}.", rr.verdict, r.tie_handling);
        }
    }
    let _ = writeln!(out, "\n## Witnesses\n");
    if r.witnesses.is_empty() {
        let _ = writeln!(out, "None.");
    }
    for (k, w) in r.witnesses.iter().enumerate() {
        let dir = w.direction.map(|d| format!(" ({d})")).unwrap_or_default();
        let _ = writeln!(out, "### #{k}: {}{dir}\n", w.kind);
        if let Some(g) = &w.group {
            let _ = writeln!(out, "- group: {g}");
        }
        let _ = writeln!(out, "- individuals: {}", w.individuals.join("; "));
        let _ = writeln!(out, "- labels: {}", label_names(w, &file.labels));
        for (name, value) in &w.values {
            let _ = writeln!(out, "- {name}: {value}");
        }
        if let Some(ds) = &w.decisions {
            for (role, d) in ds {
                let cells: Vec<String> = d.iter().map(|(id, v)| format!("{id} -> {v}")).collect();
                let _ = writeln!(out, "- decision {role}: {}", cells.join("; "));
            }
        }
        let _ = writeln!(out);
    }
    out
}

/// Verdict summary line, e.g. `AA=refuted DS=holds ...`.
pub fn verdict_line(report: &AuditReport) -> String {
    Assumption::ALL
        .iter()
        .map(|a| format!("{a}={}", report.verdict(*a)))
        .collect::<Vec<_>>()
        .join(" ")
}
