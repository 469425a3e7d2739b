//! Statistical property checks for operators.
//!
//! A pass means "no violation in N trials", never a proof. Every failing
//! report carries a witness that can be re-run on its own.

mod eval;
mod property;
mod sweep;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub use eval::{
    perturb, size, Outcome, TrialInput, TrialStatus, HOMOTHETY_DIRECTIONS, INCLUSION_DIRECTIONS, LIPSCHITZ_EPS,
    LIPSCHITZ_JUMP, SWEEP_SLOPE, SWEEP_TRIALS,
};
pub use property::PropertyKind;
pub use sweep::{
    bm_floor, empirical_constant_sweep, homogeneity_degree, paper_bound, rs_quermass_check, SweepRow,
};

use crate::error::{Error, Result};
use crate::geometry::{Body, Point};
use crate::harness::io::{body_from_value, body_to_value};
use crate::harness::{CorpusKind, CorpusSpec};
use crate::operators::{ball_gap, msum_support, ApplyContext, BallResolution, OperatorSpec};
use eval::Evaluator;

pub const REPORT_SCHEMA: &str = "convexop.report.v1";
pub const WITNESS_SCHEMA: &str = "convexop.witness.v1";

/// Default relative tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

/// Parameters of one check run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub n: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Body corpus; a property-specific default seeded with `seed` when absent.
    #[serde(default)]
    pub corpus: Option<CorpusSpec>,
    /// Constant to test ratio properties against.
    #[serde(default)]
    pub bound: Option<f64>,
    #[serde(default)]
    pub ctx: ApplyContext,
}

impl CheckConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> CheckConfig {
        CheckConfig {
            n,
            trials,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            corpus: None,
            bound: None,
            ctx: ApplyContext::default(),
        }
    }

    pub fn with_corpus(mut self, corpus: CorpusSpec) -> CheckConfig {
        self.corpus = Some(corpus);
        self
    }

    pub fn with_bound(mut self, bound: f64) -> CheckConfig {
        self.bound = Some(bound);
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> CheckConfig {
        self.tolerance = tol;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;
    fn from_str(s: &str) -> Result<Verdict> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pass" => Ok(Verdict::Pass),
            "fail" => Ok(Verdict::Fail),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(Error::BadSpec(format!("unknown verdict '{other}'"))),
        }
    }
}

/// One evaluated trial input.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub trial: usize,
    pub tag: String,
    pub status: TrialStatus,
    pub value: Option<f64>,
    pub margin: f64,
    pub note: Option<String>,
}

/// A violating trial, with everything needed to re-run it.
#[derive(Clone, Debug)]
pub struct Witness {
    pub trial: usize,
    pub input: TrialInput,
    pub values: Vec<(String, f64)>,
    pub margin: f64,
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn matrix_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| num(m[(r, c)])).collect()))
            .collect(),
    )
}

fn bad(what: &str) -> Error {
    Error::BadSpec(format!("malformed witness: {what}"))
}

fn floats(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| bad(what))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| bad(what)))
        .collect()
}

impl Witness {
    pub fn to_value(&self) -> Value {
        let mut values = Map::new();
        for (k, v) in &self.values {
            values.insert(k.clone(), num(*v));
        }
        json!({
            "trial": self.trial,
            "tag": self.input.tag,
            "bodies": self.input.bodies.iter().map(body_to_value).collect::<Vec<_>>(),
            "transform": {
                "matrix": self.input.matrix.as_ref().map(matrix_rows).unwrap_or(Value::Null),
                "vector": self.input.vector.as_ref().map(|v| Value::Array(v.iter().map(|x| num(*x)).collect())).unwrap_or(Value::Null),
            },
            "scalars": self.input.scalars.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "values": Value::Object(values),
            "margin": num(self.margin),
        })
    }

    pub fn from_value(v: &Value) -> Result<Witness> {
        let tag = v["tag"].as_str().ok_or_else(|| bad("tag"))?.to_string();
        let bodies = v["bodies"]
            .as_array()
            .ok_or_else(|| bad("bodies"))?
            .iter()
            .map(body_from_value)
            .collect::<Result<Vec<_>>>()?;
        let matrix = match &v["transform"]["matrix"] {
            Value::Null => None,
            m => {
                let rows = m.as_array().ok_or_else(|| bad("matrix"))?;
                let rows: Vec<Vec<f64>> = rows.iter().map(|r| floats(r, "matrix")).collect::<Result<_>>()?;
                let ncols = rows.first().map_or(0, |r| r.len());
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(bad("ragged matrix"));
                }
                Some(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
            }
        };
        let vector = match &v["transform"]["vector"] {
            Value::Null => None,
            x => Some(Point::from_vec(floats(x, "vector")?)),
        };
        let scalars = floats(&v["scalars"], "scalars")?;
        let values = v["values"]
            .as_object()
            .map(|m| m.iter().filter_map(|(k, x)| x.as_f64().map(|f| (k.clone(), f))).collect())
            .unwrap_or_default();
        Ok(Witness {
            trial: v["trial"].as_u64().unwrap_or(0) as usize,
            input: TrialInput {
                tag,
                bodies,
                matrix,
                vector,
                scalars,
            },
            values,
            margin: v["margin"].as_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Outcome of a full check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub operator: OperatorSpec,
    pub property: PropertyKind,
    pub n: usize,
    pub verdict: Verdict,
    /// Max ratio (RS), min ratio (BM), fitted factor or degree, or the
    /// largest Lipschitz ratio, depending on the property.
    pub empirical_constant: Option<f64>,
    pub bound: Option<f64>,
    pub max_margin: f64,
    pub tolerance: f64,
    /// Tolerance plus the ball approximation gap for ball-based operators.
    pub effective_tolerance: f64,
    pub seed: u64,
    pub corpus: CorpusSpec,
    pub ball: BallResolution,
    pub ball_gap: Option<f64>,
    pub ctx: ApplyContext,
    pub trials_requested: usize,
    pub trials_run: usize,
    pub violations: usize,
    pub lowdim_inputs: usize,
    pub skipped: usize,
    pub witness: Option<Witness>,
    /// Input achieving the empirical constant in ratio checks.
    pub extremal: Option<Body>,
    pub notes: Vec<String>,
    pub records: Vec<TrialRecord>,
}

impl CheckReport {
    /// "consistent" or "violated" for continuity samples; continuity is never
    /// reported as satisfied.
    pub fn continuity_label(&self) -> Option<&'static str> {
        if !self.property.is_continuity() {
            return None;
        }
        Some(match self.verdict {
            Verdict::Fail => "violated",
            Verdict::Pass => "consistent",
            Verdict::Inconclusive => "inconclusive",
        })
    }

    pub fn to_value(&self) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                json!({
                    "trial": r.trial,
                    "tag": r.tag,
                    "status": r.status.as_str(),
                    "value": opt_num(r.value),
                    "margin": num(r.margin),
                })
            })
            .collect();
        json!({
            "schema": REPORT_SCHEMA,
            "operator": self.operator.to_string(),
            "operator_spec": self.operator.to_json(),
            "property": self.property.to_string(),
            "n": self.n,
            "verdict": self.verdict.as_str(),
            "continuity": self.continuity_label(),
            "empirical_constant": opt_num(self.empirical_constant),
            "bound": opt_num(self.bound),
            "max_margin": num(self.max_margin),
            "tolerance": num(self.tolerance),
            "effective_tolerance": num(self.effective_tolerance),
            "seed": self.seed,
            "corpus": serde_json::to_value(&self.corpus).expect("corpus serializes"),
            "ball_resolution": serde_json::to_value(self.ball).expect("resolution serializes"),
            "ball_gap": opt_num(self.ball_gap),
            "apply_context": serde_json::to_value(self.ctx).expect("context serializes"),
            "trials_requested": self.trials_requested,
            "trials_run": self.trials_run,
            "violations": self.violations,
            "lowdim_inputs": self.lowdim_inputs,
            "skipped": self.skipped,
            "witness": self.witness.as_ref().map(Witness::to_value),
            "extremal_body": self.extremal.as_ref().map(body_to_value),
            "notes": self.notes,
            "trials": records,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Self-contained document from which the witness can be re-run.
    pub fn witness_document(&self) -> Option<Value> {
        let w = self.witness.as_ref()?;
        Some(json!({
            "schema": WITNESS_SCHEMA,
            "operator": self.operator.to_json(),
            "property": self.property.to_string(),
            "n": self.n,
            "tolerance": num(self.tolerance),
            "bound": opt_num(self.bound),
            "apply_context": serde_json::to_value(self.ctx).expect("context serializes"),
            "witness": w.to_value(),
        }))
    }

    /// One CSV row per evaluated trial input.
    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "tag", "status", "value", "margin", "note"])?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.tag.clone(),
                r.status.as_str().to_string(),
                r.value.map(|v| v.to_string()).unwrap_or_default(),
                r.margin.to_string(),
                r.note.clone().unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

/// Corpus used when the configuration does not name one.
pub fn default_corpus(prop: PropertyKind, n: usize, seed: u64) -> CorpusSpec {
    let gauss = CorpusKind::RandomGaussHull { m: n + 4 };
    let sym = CorpusKind::SymmetricRandom { m: n + 2 };
    let lowdim = |k: usize| CorpusKind::LowdimEmbed {
        k,
        inner: Box::new(CorpusKind::RandomGaussHull { m: k + 2 }),
    };
    let kind = match prop {
        PropertyKind::RS | PropertyKind::BM => CorpusKind::Mixed {
            parts: vec![
                gauss,
                CorpusKind::NearSimplex { jitter: 0.02 },
                sym,
                CorpusKind::Simplex,
                lowdim(n - 1),
            ],
        },
        PropertyKind::RSQuermass(l) | PropertyKind::BMQuermass(l) => CorpusKind::Mixed {
            parts: vec![gauss, sym, lowdim(n.saturating_sub(l + 1))],
        },
        PropertyKind::Valuation => CorpusKind::SplitPairs {
            parent: Box::new(CorpusKind::Mixed {
                parts: vec![gauss, CorpusKind::Cube, CorpusKind::CrossPolytope],
            }),
        },
        PropertyKind::Homothety => sym,
        PropertyKind::DimensionPreservation(k) => lowdim(k),
        PropertyKind::LipschitzSample => CorpusKind::Mixed {
            parts: vec![gauss, lowdim(n - 1)],
        },
        _ => CorpusKind::Mixed {
            parts: vec![gauss, sym, CorpusKind::Simplex],
        },
    };
    CorpusSpec::new(kind).with_seed(seed)
}

fn not_applicable(spec: &OperatorSpec, prop: PropertyKind, reason: impl Into<String>) -> Error {
    Error::SpecNotApplicable {
        op: spec.to_string(),
        property: prop.to_string(),
        reason: reason.into(),
    }
}

fn precheck(spec: &OperatorSpec, prop: PropertyKind, cfg: &CheckConfig) -> Result<()> {
    let n = cfg.n;
    if !(1..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if cfg.trials == 0 {
        return Err(Error::BadSpec("trials must be at least 1".into()));
    }
    if !(cfg.tolerance >= 0.0 && cfg.tolerance.is_finite()) {
        return Err(Error::BadSpec(format!("bad tolerance {}", cfg.tolerance)));
    }
    spec.validate()?;
    prop.validate(n)?;
    if n == 4 && (spec.uses_ball() || matches!(spec, OperatorSpec::EdgeZonotopePlusD)) {
        return Err(not_applicable(spec, prop, "operator is implemented for n <= 3"));
    }
    match prop {
        PropertyKind::RSQuermass(_) | PropertyKind::BMQuermass(_) if !(2..=3).contains(&n) => {
            Err(not_applicable(spec, prop, "exact quermassintegrals need n in {2, 3}"))
        }
        PropertyKind::Valuation if n > 3 => Err(not_applicable(spec, prop, "split pairs need n <= 3")),
        PropertyKind::ProjectionCovariance if n < 2 => {
            Err(not_applicable(spec, prop, "no proper subspaces in dimension 1"))
        }
        _ => Ok(()),
    }
}

fn effective_tolerance(spec: &OperatorSpec, cfg: &CheckConfig) -> Result<(f64, Option<f64>)> {
    if spec.uses_ball() {
        let gap = ball_gap(cfg.n, cfg.ctx.ball)?;
        Ok((cfg.tolerance + gap, Some(gap)))
    } else {
        Ok((cfg.tolerance, None))
    }
}

/// Runs `prop` for `spec` over `cfg.trials` corpus draws.
pub fn run_check(spec: &OperatorSpec, prop: PropertyKind, cfg: &CheckConfig) -> Result<CheckReport> {
    precheck(spec, prop, cfg)?;
    let n = cfg.n;
    let corpus = cfg.corpus.clone().unwrap_or_else(|| default_corpus(prop, n, cfg.seed));
    corpus.validate(n)?;
    let needed = if prop == PropertyKind::Additivity {
        2 * cfg.trials
    } else {
        cfg.trials
    };
    if let Some(c) = corpus.count {
        if c < needed {
            return Err(Error::CorpusExhausted(c));
        }
    }
    let (tol, gap) = effective_tolerance(spec, cfg)?;
    let mut report = CheckReport {
        operator: spec.clone(),
        property: prop,
        n,
        verdict: Verdict::Inconclusive,
        empirical_constant: None,
        bound: cfg.bound,
        max_margin: 0.0,
        tolerance: cfg.tolerance,
        effective_tolerance: tol,
        seed: cfg.seed,
        corpus: corpus.clone(),
        ball: cfg.ctx.ball,
        ball_gap: gap,
        ctx: cfg.ctx,
        trials_requested: cfg.trials,
        trials_run: 0,
        violations: 0,
        lowdim_inputs: 0,
        skipped: 0,
        witness: None,
        extremal: None,
        notes: Vec::new(),
        records: Vec::new(),
    };
    if prop == PropertyKind::TrivialityFromM {
        let m = spec
            .associated_m()
            .ok_or_else(|| not_applicable(spec, prop, "no associated planar body is known"))?;
        let h = msum_support(&m, 1.0, 1.0);
        if h > cfg.tolerance * m.body().scale().max(1.0) {
            report.notes.push(format!("premise h_M(1,1) = 0 does not hold (h_M(1,1) = {h})"));
            return Ok(report);
        }
    }
    let ev = Evaluator {
        spec,
        prop,
        n,
        tol,
        bound: cfg.bound,
        ctx: cfg.ctx,
    };
    let results: Vec<Result<Vec<(TrialInput, Outcome)>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let inputs = ev.draw(&corpus, cfg.seed, t)?;
            inputs
                .into_iter()
                .map(|input| ev.evaluate(&input).map(|o| (input, o)))
                .collect()
        })
        .collect();
    fold(&mut report, results)?;
    Ok(report)
}

fn classify_error(e: Error, spec: &OperatorSpec, prop: PropertyKind) -> Result<String> {
    match e {
        Error::UnsupportedForDimension { .. } | Error::UnsupportedDimension(_) => {
            Err(not_applicable(spec, prop, e.to_string()))
        }
        Error::BadSpec(_)
        | Error::DimensionMismatch { .. }
        | Error::NegativeCoefficientRegime(..)
        | Error::CorpusExhausted(_) => Err(e),
        other => Ok(other.to_string()),
    }
}

fn fold(report: &mut CheckReport, results: Vec<Result<Vec<(TrialInput, Outcome)>>>) -> Result<()> {
    let prop = report.property;
    let mut best: Option<(f64, Body)> = None;
    let mut values = Vec::new();
    let mut evaluated = 0usize;
    let mut disagreements = 0usize;
    for (t, res) in results.into_iter().enumerate() {
        let items = match res {
            Ok(items) => items,
            Err(e) => {
                let note = classify_error(e, &report.operator, prop)?;
                report.skipped += 1;
                report.records.push(TrialRecord {
                    trial: t,
                    tag: "error".into(),
                    status: TrialStatus::Skipped,
                    value: None,
                    margin: 0.0,
                    note: Some(note),
                });
                continue;
            }
        };
        report.trials_run += 1;
        for (input, out) in items {
            match out.status {
                TrialStatus::Skipped => report.skipped += 1,
                TrialStatus::Lowdim => report.lowdim_inputs += 1,
                TrialStatus::Ok | TrialStatus::Violation => evaluated += 1,
            }
            if out.values.iter().any(|(k, v)| k == "tests_agree" && *v == 0.0) {
                disagreements += 1;
            }
            if out.status == TrialStatus::Violation {
                report.violations += 1;
                let worse = report.witness.as_ref().is_none_or(|w| out.margin > w.margin);
                if worse {
                    report.witness = Some(Witness {
                        trial: t,
                        input: input.clone(),
                        values: out.values.clone(),
                        margin: out.margin,
                    });
                }
            }
            if out.margin.is_finite() {
                report.max_margin = report.max_margin.max(out.margin);
            }
            if input.tag == "ratio" {
                if let Some(r) = out.value {
                    let upper = matches!(prop, PropertyKind::RS | PropertyKind::RSQuermass(_));
                    let better = best.as_ref().is_none_or(|(b, _)| if upper { r > *b } else { r < *b });
                    if better {
                        best = Some((r, input.bodies[0].clone()));
                    }
                }
            } else if !input.tag.starts_with("sweep") {
                if let Some(v) = out.value {
                    values.push(v);
                }
            }
            report.records.push(TrialRecord {
                trial: t,
                tag: input.tag,
                status: out.status,
                value: out.value,
                margin: out.margin,
                note: out.note,
            });
        }
    }
    match prop {
        PropertyKind::RS | PropertyKind::BM | PropertyKind::RSQuermass(_) | PropertyKind::BMQuermass(_) => {
            if let Some((r, body)) = best {
                report.empirical_constant = Some(r);
                report.extremal = Some(body);
            }
            report.notes.push(format!(
                "{} lower-dimensional inputs excluded from ratio statistics",
                report.lowdim_inputs
            ));
        }
        PropertyKind::Homothety | PropertyKind::Homogeneity(_) if !values.is_empty() => {
            report.empirical_constant = Some(values.iter().sum::<f64>() / values.len() as f64);
        }
        PropertyKind::LipschitzSample => {
            report.empirical_constant = values.iter().copied().reduce(f64::max);
            report
                .notes
                .push("continuity is sampled as a necessary condition only".into());
        }
        _ => {}
    }
    if disagreements > 0 {
        report.notes.push(format!(
            "support dominance and vertex membership disagreed on {disagreements} trials"
        ));
    }
    report.verdict = if report.violations > 0 {
        Verdict::Fail
    } else if evaluated == 0 && report.lowdim_inputs == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(())
}

/// Result of re-running a witness on its own.
#[derive(Clone, Debug)]
pub struct Revalidation {
    pub violated: bool,
    pub margin: f64,
    pub tolerance: f64,
}

/// Re-runs the single trial stored in `witness`.
pub fn revalidate(
    spec: &OperatorSpec,
    prop: PropertyKind,
    witness: &Witness,
    n: usize,
    tolerance: f64,
    bound: Option<f64>,
    ctx: ApplyContext,
) -> Result<Revalidation> {
    let cfg = CheckConfig {
        n,
        trials: 1,
        seed: 0,
        tolerance,
        corpus: None,
        bound,
        ctx,
    };
    precheck(spec, prop, &cfg)?;
    let (tol, _) = effective_tolerance(spec, &cfg)?;
    let ev = Evaluator {
        spec,
        prop,
        n,
        tol,
        bound,
        ctx,
    };
    let out = ev.evaluate(&witness.input)?;
    Ok(Revalidation {
        violated: out.status == TrialStatus::Violation,
        margin: out.margin,
        tolerance: tol,
    })
}

/// Re-runs the witness in a document produced by
/// [`CheckReport::witness_document`] (a full report JSON also works).
pub fn revalidate_document(doc: &Value) -> Result<Revalidation> {
    let spec_value = if doc["operator_spec"].is_object() {
        &doc["operator_spec"]
    } else {
        &doc["operator"]
    };
    let spec = OperatorSpec::from_json(spec_value)?;
    let prop: PropertyKind = doc["property"].as_str().ok_or_else(|| bad("property"))?.parse()?;
    let n = doc["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
    let tolerance = doc["tolerance"].as_f64().ok_or_else(|| bad("tolerance"))?;
    let bound = doc["bound"].as_f64();
    let ctx = match doc.get("apply_context") {
        Some(v) => serde_json::from_value(v.clone())?,
        None => ApplyContext {
            ball: serde_json::from_value(doc["ball_resolution"].clone())?,
            ..ApplyContext::default()
        },
    };
    if doc["witness"].is_null() {
        return Err(bad("document has no witness"));
    }
    let w = Witness::from_value(&doc["witness"])?;
    revalidate(&spec, prop, &w, n, tolerance, bound, ctx)
}

#[cfg(test)]
mod tests;
