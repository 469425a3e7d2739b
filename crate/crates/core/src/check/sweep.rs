//! Constant sweeps and derived checks built on [`run_check`].

use super::{eval::size, run_check, CheckConfig, CheckReport, PropertyKind, Verdict};
use crate::error::{Error, Result};
use crate::geometry::{scale, Body};
use crate::measures::binomial;
use crate::operators::{apply, msum_support, ApplyContext, OperatorSpec};

/// One dimension of an empirical-constant sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: usize,
    pub empirical_constant: Option<f64>,
    pub paper_bound: Option<f64>,
    pub verdict: Verdict,
    /// Input achieving the empirical constant.
    pub witness: Option<Body>,
    pub report: CheckReport,
}

/// Known sharp constants: `λ^n C(2n,n)` and `λ^n 2^n` for scaled difference
/// bodies, and `c^n` for `K -> cK` or `K -> c(-K)`.
pub fn paper_bound(spec: &OperatorSpec, prop: PropertyKind, n: usize) -> Option<f64> {
    let nf = n as i32;
    let difference = |lambda: f64| match prop {
        PropertyKind::RS => Some(lambda.powi(nf) * binomial(2 * n, n)),
        PropertyKind::BM => Some(lambda.powi(nf) * 2f64.powi(nf)),
        _ => None,
    };
    match *spec {
        OperatorSpec::DifferenceBody { lambda } => difference(lambda),
        OperatorSpec::LinearComb { a, b } if a == b => difference(a),
        OperatorSpec::LinearComb { a, b } if a == 0.0 || b == 0.0 => match prop {
            PropertyKind::RS | PropertyKind::BM => Some(a.max(b).powi(nf)),
            _ => None,
        },
        _ => None,
    }
}

/// Lower bound `h_M(1,1)^n 2^n / C(2n,n)` on the BM constant of an M-sum
/// operator.
pub fn bm_floor(spec: &OperatorSpec, n: usize) -> Option<f64> {
    let m = spec.associated_m()?;
    let h = msum_support(&m, 1.0, 1.0);
    Some(h.powi(n as i32) * 2f64.powi(n as i32) / binomial(2 * n, n))
}

/// Extremal RS or BM ratios per dimension, tested against the known sharp
/// constant when there is one.
pub fn empirical_constant_sweep(
    spec: &OperatorSpec,
    prop: PropertyKind,
    dims: &[usize],
    cfg: &CheckConfig,
) -> Result<Vec<SweepRow>> {
    if !matches!(prop, PropertyKind::RS | PropertyKind::BM) {
        return Err(Error::BadSpec(format!("sweeps cover RS and BM, not {prop}")));
    }
    dims.iter()
        .map(|&n| {
            if !(2..=4).contains(&n) {
                return Err(Error::UnsupportedDimension(n));
            }
            let bound = cfg.bound.or_else(|| paper_bound(spec, prop, n));
            let mut c = cfg.clone();
            c.n = n;
            c.bound = bound;
            let report = run_check(spec, prop, &c)?;
            Ok(SweepRow {
                n,
                empirical_constant: report.empirical_constant,
                paper_bound: bound,
                verdict: report.verdict,
                witness: report.extremal.clone(),
                report,
            })
        })
        .collect()
}

/// Degree `q` with `size(◇(2K)) = 2^q size(◇K)`, where `size` is a fixed
/// sum of widths. `None` when the image is a point.
pub fn homogeneity_degree(spec: &OperatorSpec, k: &Body, ctx: &ApplyContext) -> Result<Option<f64>> {
    let s1 = size(&apply(spec, k, ctx)?);
    let s2 = size(&apply(spec, &scale(k, 2.0)?, ctx)?);
    if s1 <= 0.0 || s2 <= 0.0 {
        return Ok(None);
    }
    Ok(Some((s2 / s1).log2()))
}

/// RS check for the quermassintegral `W_l` in `R^3`, over a corpus that
/// includes `(2-l)`-dimensional bodies so that dimension jumps are seen.
pub fn rs_quermass_check(spec: &OperatorSpec, l: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    if cfg.n != 3 {
        return Err(Error::UnsupportedDimension(cfg.n));
    }
    if !(1..=2).contains(&l) {
        return Err(Error::BadIndex { index: l, dim: 3 });
    }
    let mut report = run_check(spec, PropertyKind::RSQuermass(l), cfg)?;
    if let Some(m) = spec.associated_m() {
        let skew = m.skew_width();
        if skew > 0.0 {
            let jump = report
                .witness
                .as_ref()
                .and_then(|w| {
                    let din = w.values.iter().find(|(k, _)| k == "dim_input")?.1;
                    let dout = w.values.iter().find(|(k, _)| k == "dim_image")?.1;
                    (dout > din).then_some((din, dout))
                });
            report.notes.push(match jump {
                Some((a, b)) => format!("skew width {skew} > 0; dimension jump {a} -> {b} located"),
                None => format!("skew width {skew} > 0 but no dimension jump was found"),
            });
        }
    }
    Ok(report)
}
