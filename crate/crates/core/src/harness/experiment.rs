//! Experiment matrices: operators × properties × dimensions, each cell with
//! an optional expected verdict.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::corpus::CorpusSpec;
use crate::check::{paper_bound, run_check, CheckConfig, CheckReport, PropertyKind, Verdict, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::operators::{ApplyContext, BallResolution, OperatorSpec};

pub const BUNDLE_SCHEMA: &str = "convexop.bundle.v1";

/// Constant for ratio checks: a number, or `"paper"` for the known sharp one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundSpec {
    Value(f64),
    Named(String),
}

/// Expected verdicts: one for the whole group, or one per property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expectation {
    All(Verdict),
    PerProperty(BTreeMap<String, Verdict>),
}

/// Operator reference: compact syntax (`"wannerer:1,2,3,4"`) or a JSON
/// document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorRef {
    Compact(String),
    Document(Value),
}

impl OperatorRef {
    pub fn resolve(&self) -> Result<OperatorSpec> {
        match self {
            OperatorRef::Compact(s) => s.parse(),
            OperatorRef::Document(v) => OperatorSpec::from_json(v),
        }
    }
}

/// A block of cells sharing settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// What the block demonstrates; shown in the markdown table.
    #[serde(default)]
    pub label: String,
    pub operators: Vec<OperatorRef>,
    pub properties: Vec<PropertyKind>,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub corpus: Option<CorpusSpec>,
    #[serde(default)]
    pub bound: Option<BoundSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

fn default_trials() -> usize {
    100
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// A full experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Dimensions for groups that do not list their own.
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub ball: BallResolution,
    #[serde(default)]
    pub groups: Vec<Group>,
}

/// One fully resolved cell of the matrix.
#[derive(Clone, Debug)]
pub struct Cell {
    pub label: String,
    pub operator: OperatorSpec,
    pub property: PropertyKind,
    pub n: usize,
    pub config: CheckConfig,
    pub expected: Option<Verdict>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::BadSpec(format!("config: {e}")))
    }

    /// Reads a `.toml` or JSON config.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => ExperimentConfig::from_toml(&text),
            _ => ExperimentConfig::from_json(&text),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Expands and validates every cell without running anything.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::BadSpec(format!("bad tolerance {}", self.tolerance)));
        }
        let ctx = ApplyContext {
            ball: self.ball,
            ..ApplyContext::default()
        };
        let mut cells = Vec::new();
        for (gi, g) in self.groups.iter().enumerate() {
            let dims = g.dims.clone().unwrap_or_else(|| self.dims.clone());
            for &n in &dims {
                if !(2..=4).contains(&n) {
                    return Err(Error::UnsupportedDimension(n));
                }
            }
            let ops = g.operators.iter().map(OperatorRef::resolve).collect::<Result<Vec<_>>>()?;
            if let Some(c) = &g.corpus {
                for &n in &dims {
                    c.validate(n)?;
                }
            }
            let tol = g.tolerance.unwrap_or(self.tolerance);
            for op in &ops {
                op.validate()?;
                for &prop in &g.properties {
                    let expected = match &g.expect {
                        None => None,
                        Some(Expectation::All(v)) => Some(*v),
                        Some(Expectation::PerProperty(m)) => m
                            .iter()
                            .find(|(k, _)| k.parse::<PropertyKind>().ok() == Some(prop))
                            .map(|(_, v)| *v),
                    };
                    for &n in &dims {
                        prop.validate(n)?;
                        let bound = match &g.bound {
                            None => None,
                            Some(BoundSpec::Value(b)) => Some(*b),
                            Some(BoundSpec::Named(s)) if s == "paper" => paper_bound(op, prop, n),
                            Some(BoundSpec::Named(s)) => {
                                return Err(Error::BadSpec(format!("unknown bound '{s}'")));
                            }
                        };
                        let config = CheckConfig {
                            n,
                            trials: g.trials.unwrap_or(self.trials),
                            seed: crate::rng::derive_seed(self.seed, gi as u64),
                            tolerance: tol,
                            corpus: g.corpus.clone(),
                            bound,
                            ctx,
                        };
                        if config.trials == 0 {
                            return Err(Error::BadSpec("trials must be at least 1".into()));
                        }
                        cells.push(Cell {
                            label: g.label.clone(),
                            operator: op.clone(),
                            property: prop,
                            n,
                            config,
                            expected,
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// Result of one cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub report: Option<CheckReport>,
    pub error: Option<String>,
    /// Path of the witness file, relative to the bundle directory.
    pub witness_path: Option<String>,
    pub report_path: Option<String>,
}

impl CellResult {
    pub fn verdict_label(&self) -> &'static str {
        match &self.report {
            Some(r) => r.verdict.as_str(),
            None => "error",
        }
    }

    /// `None` when the cell has no expectation.
    pub fn matches(&self) -> Option<bool> {
        let want = self.cell.expected?;
        Some(self.report.as_ref().is_some_and(|r| r.verdict == want))
    }
}

/// All cells of one experiment run.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub name: String,
    pub results: Vec<CellResult>,
}

impl Bundle {
    /// Whether every cell with an expectation got the expected verdict.
    pub fn all_expected(&self) -> bool {
        self.results.iter().all(|r| r.matches() != Some(false))
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_expected() {
            0
        } else {
            1
        }
    }

    /// Summary with columns operator, property, n, trials, verdict,
    /// empirical_constant, witness_path.
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["operator", "property", "n", "trials", "verdict", "empirical_constant", "witness_path"])?;
        for r in &self.results {
            let trials = r.report.as_ref().map_or(0, |x| x.trials_run);
            let constant = r
                .report
                .as_ref()
                .and_then(|x| x.empirical_constant)
                .map(|c| c.to_string())
                .unwrap_or_default();
            w.write_record([
                r.cell.operator.to_string(),
                r.cell.property.to_string(),
                r.cell.n.to_string(),
                trials.to_string(),
                r.verdict_label().to_string(),
                constant,
                r.witness_path.clone().unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn summary_markdown(&self) -> String {
        let mut s = String::new();
        if !self.name.is_empty() {
            s.push_str(&format!("# {}\n\n", self.name));
        }
        s.push_str("| claim | operator | property | n | expected | verdict | empirical constant | match |\n");
        s.push_str("|---|---|---|---|---|---|---|---|\n");
        for r in &self.results {
            let constant = r
                .report
                .as_ref()
                .and_then(|x| x.empirical_constant)
                .map(|c| format!("{c:.6}"))
                .unwrap_or_else(|| "-".into());
            let expected = r.cell.expected.map_or("-", |v| v.as_str());
            let ok = match r.matches() {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "-",
            };
            s.push_str(&format!(
                "| {} | `{}` | {} | {} | {} | {} | {} | {} |\n",
                r.cell.label.replace('|', "/"),
                r.cell.operator,
                r.cell.property,
                r.cell.n,
                expected,
                r.verdict_label(),
                constant,
                ok
            ));
        }
        let mism = self.results.iter().filter(|r| r.matches() == Some(false)).count();
        s.push_str(&format!("\n{} cells, {} mismatches\n", self.results.len(), mism));
        s
    }

    pub fn to_value(&self) -> Value {
        let cells: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "label": r.cell.label,
                    "operator": r.cell.operator.to_string(),
                    "property": r.cell.property.to_string(),
                    "n": r.cell.n,
                    "expected": r.cell.expected.map(|v| v.as_str()),
                    "verdict": r.verdict_label(),
                    "matches": r.matches(),
                    "error": r.error,
                    "report": r.report_path,
                    "witness": r.witness_path,
                })
            })
            .collect();
        json!({
            "schema": BUNDLE_SCHEMA,
            "name": self.name,
            "all_expected": self.all_expected(),
            "cells": cells,
        })
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').chars().take(60).collect()
}

/// Runs every cell. Cells run concurrently; results keep config order.
pub fn run_cells(config: &ExperimentConfig) -> Result<Bundle> {
    let cells = config.cells()?;
    let results = cells
        .into_par_iter()
        .map(|cell| match run_check(&cell.operator, cell.property, &cell.config) {
            Ok(report) => CellResult {
                cell,
                report: Some(report),
                error: None,
                witness_path: None,
                report_path: None,
            },
            Err(e) => CellResult {
                cell,
                report: None,
                error: Some(e.to_string()),
                witness_path: None,
                report_path: None,
            },
        })
        .collect();
    Ok(Bundle {
        name: config.name.clone(),
        results,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Runs the experiment and writes `reports/`, `witnesses/`, `summary.csv`,
/// `summary.md` and `bundle.json` under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Bundle> {
    let mut bundle = run_cells(config)?;
    fs::create_dir_all(out)?;
    for (i, r) in bundle.results.iter_mut().enumerate() {
        let stem = format!(
            "{:03}_{}_{}_n{}",
            i,
            slug(r.cell.operator.kind()),
            slug(&r.cell.property.to_string()),
            r.cell.n
        );
        if let Some(report) = &r.report {
            let rel = format!("reports/{stem}.json");
            write(&out.join(&rel), &report.to_json())?;
            r.report_path = Some(rel);
            if let Some(doc) = report.witness_document() {
                let rel = format!("witnesses/{stem}.json");
                let mut text = serde_json::to_string_pretty(&doc)?;
                text.push('\n');
                write(&out.join(&rel), &text)?;
                r.witness_path = Some(rel);
            }
        }
    }
    write(&out.join("summary.csv"), &bundle.summary_csv()?)?;
    write(&out.join("summary.md"), &bundle.summary_markdown())?;
    let mut text = serde_json::to_string_pretty(&bundle.to_value())?;
    text.push('\n');
    write(&out.join("bundle.json"), &text)?;
    write(&out.join("config.json"), &config.to_json())?;
    Ok(bundle)
}

/// Paths written by [`run_experiment`].
pub fn bundle_paths(out: &Path) -> [PathBuf; 3] {
    [out.join("summary.csv"), out.join("summary.md"), out.join("bundle.json")]
}

fn group(label: &str, ops: &[&str], props: &[PropertyKind], dims: &[usize], trials: usize, expect: Verdict) -> Group {
    Group {
        label: label.into(),
        operators: ops.iter().map(|s| OperatorRef::Compact((*s).into())).collect(),
        properties: props.to_vec(),
        dims: Some(dims.to_vec()),
        trials: Some(trials),
        corpus: None,
        bound: None,
        tolerance: None,
        expect: Some(Expectation::All(expect)),
    }
}

/// The built-in verdict matrix: the property checks behind the acceptance
/// suite, with the verdicts the theory predicts.
pub fn default_suite() -> ExperimentConfig {
    use PropertyKind::*;
    let pass = Verdict::Pass;
    let fail = Verdict::Fail;
    let mut sharp = group(
        "difference body volume ratio within the sharp constants",
        &["difference"],
        &[RS, BM],
        &[2, 3],
        1000,
        pass,
    );
    sharp.bound = Some(BoundSpec::Named("paper".into()));
    let groups = vec![
        sharp,
        group(
            "M-sum operators are Minkowski valuations",
            &["difference", "linear:2,0.5", "wannerer:1,2,3,4"],
            &[Valuation],
            &[2, 3],
            500,
            pass,
        ),
        group(
            "ball-based operators are not valuations",
            &["volume-ball", "clip-by-ball"],
            &[Valuation],
            &[2],
            50,
            fail,
        ),
        group(
            "volume-scaled difference body is SL but not GL covariant",
            &["volume-scaled-d"],
            &[SLCovariance],
            &[2, 3],
            200,
            pass,
        ),
        group("volume-scaled difference body is SL but not GL covariant", &["volume-scaled-d"], &[GLCovariance], &[2, 3], 50, fail),
        group(
            "difference body is covariant and projection covariant",
            &["difference"],
            &[GLCovariance, SLCovariance, ProjectionCovariance, TranslationInvariance],
            &[2, 3],
            200,
            pass,
        ),
        group("zero associated body gives the origin operator", &["msum:0,0"], &[TrivialityFromM], &[2, 3], 100, pass),
        group("linear combinations are Minkowski additive", &["linear:1,2", "difference"], &[Additivity], &[2, 3], 200, pass),
        group(
            "hull with the origin is not additive (skew width > 0)",
            &["wannerer:0,0,1,0"],
            &[Additivity],
            &[2, 3],
            100,
            fail,
        ),
        group("difference body is a homothety on symmetric bodies", &["difference"], &[Homothety, Homogeneity(1.0), OSymmetrization, Monotonicity], &[2, 3], 200, pass),
        group("volume ball is 1-homogeneous", &["volume-ball"], &[Homogeneity(1.0)], &[2, 3], 100, pass),
        group("volume-scaled difference body has degree n+1", &["volume-scaled-d"], &[Homogeneity(3.0)], &[2], 100, pass),
        group("volume-scaled difference body has degree n+1", &["volume-scaled-d"], &[Homogeneity(4.0)], &[3], 100, pass),
        group("volume-scaled difference body violates RS", &["volume-scaled-d"], &[RS], &[2, 3], 100, fail),
        group("dimension-gated difference body is discontinuous", &["dim-gated-d"], &[LipschitzSample], &[2, 3], 100, fail),
        group("difference body passes the Lipschitz sample", &["difference"], &[LipschitzSample], &[2, 3], 100, pass),
        group("difference body satisfies RS for W_1", &["linear:1,1"], &[RSQuermass(1)], &[3], 200, pass),
        group("hull with the origin jumps dimension", &["hull-origin"], &[RSQuermass(2), DimensionPreservation(0)], &[3], 100, fail),
        group("difference body preserves dimension", &["difference"], &[DimensionPreservation(1), DimensionPreservation(2)], &[3], 100, pass),
        group("hull with the origin is not an o-symmetrization", &["hull-origin"], &[OSymmetrization], &[2], 50, fail),
    ];
    ExperimentConfig {
        name: "default verdict matrix".into(),
        seed: 2024,
        tolerance: DEFAULT_TOLERANCE,
        trials: 100,
        dims: vec![2, 3],
        ball: BallResolution::default(),
        groups,
    }
}
