//! Drawing and evaluating single trials.

use nalgebra::DMatrix;
use rand::Rng;

use super::PropertyKind;
use crate::error::{Error, Result};
use crate::geometry::{
    distance_to_body, hausdorff_distance, linear_image, minkowski_sum, project, reflect, scale, translate, Body,
    LinearMap, Point, Subspace,
};
use crate::harness::CorpusSpec;
use crate::measures::{quermassintegral, volume};
use crate::operators::{apply, ApplyContext, OperatorSpec};
use crate::rng::{derive_seed, gaussian_vector, haar_frame, stream, unit_vector};

/// Trials (from index 0) that also run the scale sweep in ratio checks.
pub const SWEEP_TRIALS: usize = 16;
/// Growth per decade of `λ` that counts as unbounded in the scale sweep.
pub const SWEEP_SLOPE: f64 = 0.5;
/// Directions used for support dominance in inclusion checks.
pub const INCLUSION_DIRECTIONS: usize = 500;
/// Directions used to fit the homothety factor.
pub const HOMOTHETY_DIRECTIONS: usize = 64;
/// Perturbation sizes, relative to the body scale, in the Lipschitz sample.
pub const LIPSCHITZ_EPS: [f64; 2] = [1e-3, 1e-4];
/// Minimum relative jump for a Lipschitz-sample violation.
pub const LIPSCHITZ_JUMP: f64 = 1e-3;

const TRIAL_SALT: u64 = 0x7121_A15E;

/// Everything needed to re-run one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialInput {
    pub tag: String,
    pub bodies: Vec<Body>,
    pub matrix: Option<DMatrix<f64>>,
    pub vector: Option<Point>,
    pub scalars: Vec<f64>,
}

impl TrialInput {
    fn new(tag: &str, bodies: Vec<Body>) -> TrialInput {
        TrialInput {
            tag: tag.into(),
            bodies,
            matrix: None,
            vector: None,
            scalars: Vec::new(),
        }
    }

    fn scalars(mut self, s: Vec<f64>) -> TrialInput {
        self.scalars = s;
        self
    }

    fn body(&self, i: usize) -> Result<&Body> {
        self.bodies
            .get(i)
            .ok_or_else(|| Error::BadSpec(format!("trial '{}' needs at least {} bodies", self.tag, i + 1)))
    }

    fn scalar(&self, i: usize) -> Result<f64> {
        self.scalars
            .get(i)
            .copied()
            .ok_or_else(|| Error::BadSpec(format!("trial '{}' needs at least {} scalars", self.tag, i + 1)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    Violation,
    /// Lower-dimensional input excluded from ratio statistics.
    Lowdim,
    Skipped,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Violation => "violation",
            TrialStatus::Lowdim => "lowdim",
            TrialStatus::Skipped => "skipped",
        }
    }
}

/// Result of evaluating one trial input.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: TrialStatus,
    /// The measured quantity (ratio, fitted factor, ...), when there is one.
    pub value: Option<f64>,
    /// Relative discrepancy; a violation always has `margin > tolerance`.
    pub margin: f64,
    pub values: Vec<(String, f64)>,
    pub note: Option<String>,
}

impl Outcome {
    fn ok(value: Option<f64>) -> Outcome {
        Outcome {
            status: TrialStatus::Ok,
            value,
            margin: 0.0,
            values: Vec::new(),
            note: None,
        }
    }

    fn with(mut self, name: &str, v: f64) -> Outcome {
        self.values.push((name.into(), v));
        self
    }

    fn status(mut self, s: TrialStatus) -> Outcome {
        self.status = s;
        self
    }

    pub fn skipped(reason: &str) -> Outcome {
        Outcome {
            status: TrialStatus::Skipped,
            value: None,
            margin: 0.0,
            values: Vec::new(),
            note: Some(reason.into()),
        }
    }
}

/// Fixed parameters of one check run.
pub struct Evaluator<'a> {
    pub spec: &'a OperatorSpec,
    pub prop: PropertyKind,
    pub n: usize,
    pub tol: f64,
    pub bound: Option<f64>,
    pub ctx: ApplyContext,
}

fn rel(d: f64, s: f64) -> f64 {
    if s > 0.0 {
        d / s
    } else {
        0.0
    }
}

/// Sum of widths along the axes and the main diagonal: a translation
/// invariant, 1-homogeneous size.
pub fn size(b: &Body) -> f64 {
    let n = b.ambient_dim();
    let mut s = 0.0;
    for i in 0..n {
        let mut e = Point::zeros(n);
        e[i] = 1.0;
        s += b.width(&e);
    }
    s + b.width(&Point::from_element(n, 1.0 / (n as f64).sqrt()))
}

fn directions(seed: f64, n: usize, count: usize) -> Vec<Point> {
    let mut rng = stream(0xD12E_C7, seed as u64);
    (0..count).map(|_| unit_vector(&mut rng, n)).collect()
}

fn body_scale(k: &Body) -> f64 {
    let r = k.scale();
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

/// `conv` of perturbed vertices plus `n` perturbed copies of the first
/// vertex, so lower-dimensional inputs become full-dimensional.
pub fn perturb(k: &Body, eps: f64, seed: f64) -> Result<Body> {
    let n = k.ambient_dim();
    let r = body_scale(k) * eps;
    let mut rng = stream(0x9E27_0B, seed as u64);
    let mut pts: Vec<Point> = k.vertices().iter().map(|v| v + unit_vector(&mut rng, n) * r).collect();
    for _ in 0..n {
        pts.push(&k.vertices()[0] + unit_vector(&mut rng, n) * r);
    }
    Body::canonicalize(&pts)
}

impl Evaluator<'_> {
    fn image(&self, k: &Body) -> Result<Body> {
        apply(self.spec, k, &self.ctx)
    }

    fn identity(&self, lhs: &Body, rhs: &Body) -> Result<Outcome> {
        let d = hausdorff_distance(lhs, rhs)?;
        let s = lhs.scale().max(rhs.scale());
        let margin = rel(d, s);
        let mut out = Outcome::ok(None).with("hausdorff", d).with("scale", s);
        out.margin = margin;
        if margin > self.tol {
            out.status = TrialStatus::Violation;
        }
        Ok(out)
    }

    fn is_upper(&self) -> bool {
        matches!(self.prop, PropertyKind::RS | PropertyKind::RSQuermass(_))
    }

    /// The functional compared by ratio checks and the smallest body
    /// dimension at which it is positive.
    fn functional(&self, b: &Body) -> Result<f64> {
        match self.prop {
            PropertyKind::RSQuermass(l) | PropertyKind::BMQuermass(l) => quermassintegral(b, l),
            _ => Ok(volume(b)),
        }
    }

    fn critical_dim(&self) -> usize {
        match self.prop {
            PropertyKind::RSQuermass(l) | PropertyKind::BMQuermass(l) => self.n - l,
            _ => self.n,
        }
    }

    /// Inputs for trial `t`.
    pub fn draw(&self, corpus: &CorpusSpec, seed: u64, t: usize) -> Result<Vec<TrialInput>> {
        let n = self.n;
        let mut rng = stream(derive_seed(seed, TRIAL_SALT), t as u64);
        let one = |tag: &str| -> Result<Vec<TrialInput>> { Ok(vec![TrialInput::new(tag, vec![corpus.body(n, t)?])]) };
        match self.prop {
            PropertyKind::RS | PropertyKind::BM | PropertyKind::RSQuermass(_) | PropertyKind::BMQuermass(_) => {
                let k = corpus.body(n, t)?;
                let mut out = vec![TrialInput::new("ratio", vec![k.clone()])];
                if t < SWEEP_TRIALS && k.dimension() >= self.critical_dim() {
                    let r = body_scale(&k);
                    out.push(TrialInput::new("sweep_large", vec![k.clone()]).scalars(vec![1e2 / r, 1e3 / r]));
                    out.push(TrialInput::new("sweep_small", vec![k]).scalars(vec![1e-2 / r, 1e-3 / r]));
                }
                Ok(out)
            }
            PropertyKind::Valuation => {
                let p = corpus.pair(n, t)?;
                let mut input = TrialInput::new("split", vec![p.parent, p.k, p.l]).scalars(vec![p.c]);
                input.vector = Some(p.u);
                Ok(vec![input])
            }
            PropertyKind::GLCovariance | PropertyKind::SLCovariance => {
                let k = corpus.body(n, t)?;
                let a = if self.prop == PropertyKind::GLCovariance {
                    LinearMap::random_gl(&mut rng, n)
                } else {
                    LinearMap::random_sl(&mut rng, n)
                };
                let mut input = TrialInput::new("linear", vec![k]);
                input.matrix = Some(a.matrix().clone());
                Ok(vec![input])
            }
            PropertyKind::TranslationInvariance => {
                let k = corpus.body(n, t)?;
                let len = body_scale(&k) * rng.random_range(0.5..2.0);
                let mut input = TrialInput::new("translate", vec![k]);
                input.vector = Some(unit_vector(&mut rng, n) * len);
                Ok(vec![input])
            }
            PropertyKind::ProjectionCovariance => {
                let k = corpus.body(n, t)?;
                let dim = 1 + t % (n - 1);
                let mut input = TrialInput::new("project", vec![k]);
                input.matrix = Some(haar_frame(&mut rng, n, dim));
                Ok(vec![input])
            }
            PropertyKind::Additivity => {
                let mut pair = Vec::new();
                for i in [2 * t, 2 * t + 1] {
                    let k = corpus.body(n, i)?;
                    let shift = unit_vector(&mut rng, n) * body_scale(&k) * 1.5;
                    pair.push(translate(&k, &shift)?);
                }
                Ok(vec![TrialInput::new("sum", pair)])
            }
            PropertyKind::Monotonicity => {
                let k = corpus.body(n, t)?;
                let c = k.vertices().iter().fold(Point::zeros(n), |a, v| a + v) / k.vertices().len() as f64;
                let r = body_scale(&k) * 1.5;
                let mut pts = k.vertices().to_vec();
                for _ in 0..2 {
                    pts.push(&c + gaussian_vector(&mut rng, n) * r);
                }
                let l = Body::canonicalize(&pts)?;
                Ok(vec![TrialInput::new("inclusion", vec![k, l]).scalars(vec![t as f64])])
            }
            PropertyKind::Homogeneity(_) => {
                let k = corpus.body(n, t)?;
                let lambda = rng.random_range(0.25f64.ln()..4f64.ln()).exp();
                Ok(vec![TrialInput::new("scale", vec![k]).scalars(vec![lambda])])
            }
            PropertyKind::OSymmetrization => one("reflect"),
            PropertyKind::Homothety => {
                let k = corpus.body(n, t)?;
                let reference = corpus.body(n, 0)?;
                Ok(vec![TrialInput::new("homothety", vec![k, reference]).scalars(vec![t as f64])])
            }
            PropertyKind::DimensionPreservation(_) => one("dimension"),
            PropertyKind::TrivialityFromM => one("trivial"),
            PropertyKind::LipschitzSample => {
                let k = corpus.body(n, t)?;
                Ok(vec![TrialInput::new("perturb", vec![k]).scalars(vec![t as f64])])
            }
        }
    }

    /// Evaluates one input; `EmptyImage` becomes a skipped outcome.
    pub fn evaluate(&self, input: &TrialInput) -> Result<Outcome> {
        match self.evaluate_inner(input) {
            Err(Error::EmptyImage) => Ok(Outcome::skipped("empty image")),
            other => other,
        }
    }

    fn evaluate_inner(&self, input: &TrialInput) -> Result<Outcome> {
        match input.tag.as_str() {
            "ratio" => self.ratio(input.body(0)?),
            "sweep_large" | "sweep_small" => self.sweep(input.body(0)?, input.scalar(0)?, input.scalar(1)?),
            "split" => {
                let (p, k, l) = (input.body(0)?, input.body(1)?, input.body(2)?);
                let u = input.vector.as_ref().ok_or_else(|| Error::BadSpec("split trial needs u".into()))?;
                let meet = crate::geometry::clip_halfspace(k, &-u, -input.scalar(0)?)?;
                let lhs = minkowski_sum(&self.image(p)?, &self.image(&meet)?)?;
                let rhs = minkowski_sum(&self.image(k)?, &self.image(l)?)?;
                self.identity(&lhs, &rhs)
            }
            "linear" => {
                let k = input.body(0)?;
                let m = input.matrix.clone().ok_or_else(|| Error::BadSpec("linear trial needs a matrix".into()))?;
                let a = LinearMap::new(m)?;
                let lhs = self.image(&linear_image(k, &a)?)?;
                let rhs = linear_image(&self.image(k)?, &a)?;
                Ok(self.identity(&lhs, &rhs)?.with("det", a.det()))
            }
            "translate" => {
                let k = input.body(0)?;
                let t = input.vector.as_ref().ok_or_else(|| Error::BadSpec("translate trial needs t".into()))?;
                self.identity(&self.image(&translate(k, t)?)?, &self.image(k)?)
            }
            "project" => {
                let k = input.body(0)?;
                let basis = input.matrix.clone().ok_or_else(|| Error::BadSpec("project trial needs E".into()))?;
                let e = Subspace::new(basis)?;
                let inner = self.spec.restrict(&e)?;
                let lhs = apply(&inner, &project(k, &e)?, &self.ctx)?;
                let rhs = project(&self.image(k)?, &e)?;
                Ok(self.identity(&lhs, &rhs)?.with("subspace_dim", e.dim() as f64))
            }
            "sum" => {
                let (k, l) = (input.body(0)?, input.body(1)?);
                let lhs = self.image(&minkowski_sum(k, l)?)?;
                let rhs = minkowski_sum(&self.image(k)?, &self.image(l)?)?;
                self.identity(&lhs, &rhs)
            }
            "inclusion" => self.inclusion(input.body(0)?, input.body(1)?, input.scalar(0)?),
            "scale" => {
                let k = input.body(0)?;
                let lambda = input.scalar(0)?;
                let degree = match self.prop {
                    PropertyKind::Homogeneity(d) => d,
                    _ => 1.0,
                };
                let img = self.image(k)?;
                let lhs = self.image(&scale(k, lambda)?)?;
                let rhs = scale(&img, lambda.powf(degree))?;
                let mut out = self.identity(&lhs, &rhs)?.with("lambda", lambda);
                let (s0, s1) = (size(&img), size(&lhs));
                if s0 > 0.0 && s1 > 0.0 {
                    out.value = Some((s1 / s0).ln() / lambda.ln());
                }
                Ok(out)
            }
            "reflect" => {
                let img = self.image(input.body(0)?)?;
                self.identity(&reflect(&img), &img)
            }
            "homothety" => self.homothety(input.body(0)?, input.body(1)?, input.scalar(0)?),
            "dimension" => {
                let k = input.body(0)?;
                let img = self.image(k)?;
                let (dk, di) = (k.dimension(), img.dimension());
                let mut out = Outcome::ok(Some(di as f64))
                    .with("dim_input", dk as f64)
                    .with("dim_image", di as f64);
                if dk != di {
                    out.margin = (dk as f64 - di as f64).abs();
                    out.status = TrialStatus::Violation;
                }
                Ok(out)
            }
            "trivial" => {
                let k = input.body(0)?;
                let img = self.image(k)?;
                let margin = img.scale() / body_scale(k);
                let mut out = Outcome::ok(Some(img.scale())).with("image_radius", img.scale());
                out.margin = margin;
                if margin > self.tol {
                    out.status = TrialStatus::Violation;
                }
                Ok(out)
            }
            "perturb" => self.lipschitz(input.body(0)?, input.scalar(0)?),
            other => Err(Error::BadSpec(format!("unknown trial tag '{other}'"))),
        }
    }

    fn ratio(&self, k: &Body) -> Result<Outcome> {
        let img = self.image(k)?;
        let c = self.critical_dim();
        let (dk, di) = (k.dimension(), img.dimension());
        let dims = |o: Outcome| o.with("dim_input", dk as f64).with("dim_image", di as f64);
        if dk < c {
            if self.is_upper() && di >= c {
                let mut out = dims(Outcome::ok(None).status(TrialStatus::Violation));
                out.margin = 1.0;
                return Ok(out.with("image_measure", self.functional(&img)?));
            }
            return Ok(dims(Outcome::ok(None).status(TrialStatus::Lowdim)));
        }
        let fk = self.functional(k)?;
        let fi = if di < c { 0.0 } else { self.functional(&img)? };
        let ratio = fi / fk;
        let mut out = dims(Outcome::ok(Some(ratio)))
            .with("input_measure", fk)
            .with("image_measure", fi);
        if di < c && !self.is_upper() {
            out.margin = 1.0;
            out.status = TrialStatus::Violation;
            return Ok(out);
        }
        if let Some(b) = self.bound {
            out.margin = if self.is_upper() { ratio / b - 1.0 } else { 1.0 - ratio / b };
            if out.margin > self.tol {
                out.status = TrialStatus::Violation;
            }
        }
        Ok(out)
    }

    /// Compares the ratio at `lambda_near K` and `lambda_end K`, where the end
    /// point lies one decade further out.
    fn sweep(&self, k: &Body, near: f64, end: f64) -> Result<Outcome> {
        let r = |lambda: f64| -> Result<f64> {
            let kl = scale(k, lambda)?;
            let img = self.image(&kl)?;
            let fi = if img.dimension() < self.critical_dim() {
                0.0
            } else {
                self.functional(&img)?
            };
            Ok(fi / self.functional(&kl)?)
        };
        let (rn, re) = (r(near)?, r(end)?);
        let mut out = Outcome::ok(None)
            .with("lambda_near", near)
            .with("lambda_end", end)
            .with("ratio_near", rn)
            .with("ratio_end", re);
        let top = rn.max(re);
        if top == 0.0 {
            return Ok(out);
        }
        let growth = if rn == 0.0 {
            f64::INFINITY
        } else if re == 0.0 {
            f64::NEG_INFINITY
        } else {
            (re / rn).log10()
        };
        if growth.is_finite() {
            out.value = Some(growth);
        }
        out.margin = (re - rn).abs() / top;
        let unbounded = if self.is_upper() {
            growth > SWEEP_SLOPE
        } else {
            growth < -SWEEP_SLOPE
        };
        if unbounded {
            out.status = TrialStatus::Violation;
        }
        Ok(out)
    }

    fn inclusion(&self, k: &Body, l: &Body, seed: f64) -> Result<Outcome> {
        let (ik, il) = (self.image(k)?, self.image(l)?);
        let s = ik.scale().max(il.scale());
        let gap_support = directions(seed, self.n, INCLUSION_DIRECTIONS)
            .iter()
            .map(|u| ik.support(u) - il.support(u))
            .fold(0.0, f64::max);
        let gap_vertex = ik
            .vertices()
            .iter()
            .map(|v| distance_to_body(&il, v))
            .fold(0.0, f64::max);
        let (ms, mv) = (rel(gap_support, s), rel(gap_vertex, s));
        let agree = (ms > self.tol) == (mv > self.tol);
        let mut out = Outcome::ok(None)
            .with("support_gap", gap_support)
            .with("vertex_gap", gap_vertex)
            .with("scale", s)
            .with("tests_agree", if agree { 1.0 } else { 0.0 });
        out.margin = ms.max(mv);
        if out.margin > self.tol {
            out.status = TrialStatus::Violation;
        }
        Ok(out)
    }

    fn homothety_factor(&self, k: &Body, dirs: &[Point]) -> Result<Option<Vec<f64>>> {
        let img = self.image(k)?;
        let mut out = Vec::with_capacity(dirs.len());
        for u in dirs {
            let h = k.support(u);
            if h <= 1e-12 * body_scale(k) {
                return Ok(None);
            }
            out.push(img.support(u) / h);
        }
        Ok(Some(out))
    }

    fn homothety(&self, k: &Body, reference: &Body, seed: f64) -> Result<Outcome> {
        let dirs = directions(seed, self.n, HOMOTHETY_DIRECTIONS);
        let (Some(f), Some(f0)) = (self.homothety_factor(k, &dirs)?, self.homothety_factor(reference, &dirs)?) else {
            return Ok(Outcome::skipped("origin not interior"));
        };
        let lref = f0.iter().sum::<f64>() / f0.len() as f64;
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        let worst = f.iter().map(|x| (x - lref).abs()).fold(0.0, f64::max);
        let spread = f0.iter().map(|x| (x - lref).abs()).fold(0.0, f64::max);
        let mut out = Outcome::ok(Some(mean))
            .with("lambda_reference", lref)
            .with("lambda_mean", mean);
        out.margin = rel(worst.max(spread), lref.abs());
        if out.margin > self.tol {
            out.status = TrialStatus::Violation;
        }
        Ok(out)
    }

    fn lipschitz(&self, k: &Body, seed: f64) -> Result<Outcome> {
        let img = self.image(k)?;
        let mut ratios = [0.0; 2];
        let mut jumps = [0.0; 2];
        let mut s = img.scale();
        for (i, eps) in LIPSCHITZ_EPS.iter().enumerate() {
            let kp = perturb(k, *eps, seed)?;
            let ip = self.image(&kp)?;
            s = s.max(ip.scale());
            jumps[i] = hausdorff_distance(&ip, &img)?;
            ratios[i] = jumps[i] / hausdorff_distance(&kp, k)?;
        }
        let growth = if ratios[0] > 0.0 {
            ratios[1] / ratios[0]
        } else if ratios[1] > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        let mut out = Outcome::ok(Some(ratios[0]))
            .with("ratio_eps_1e-3", ratios[0])
            .with("ratio_eps_1e-4", ratios[1])
            .with("jump_eps_1e-4", jumps[1]);
        out.margin = rel(jumps[1], s);
        if growth >= 8.0 && out.margin > LIPSCHITZ_JUMP.max(self.tol) {
            out.status = TrialStatus::Violation;
        }
        Ok(out)
    }
}
