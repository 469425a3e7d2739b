//! Body-to-body operators: the difference body, M-sums, the Wannerer family
//! and a catalog of examples separating the convex-geometric properties.

mod ball;
mod msum;
mod syntax;

use serde::{Deserialize, Serialize};

pub use ball::{ball_gap, unit_ball, BallResolution};
pub use msum::{apply_msum, msum_support, validate_msum_support, PlanarBody, SupportValidation};
pub(crate) use ball::symmetric_hull;

use crate::error::{Error, Result};
use crate::geometry::{
    hull_with_origin, intersect, minkowski_sum, minkowski_sum_all, project, reflect, scale, translate, Body, Point,
    Subspace,
};
use crate::measures::{mean_width_exact, relative_centroid, steiner_point, volume};

/// Selection point used to center a body.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    Steiner,
    Centroid,
}

/// Translation applied by [`OperatorSpec::TranslateBy`]: `K - p`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shift {
    Fixed(Point),
    Steiner,
}

/// A body-to-body operator.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `lambda (K + (-K))`.
    DifferenceBody { lambda: f64 },
    /// `aK + b(-K)`.
    LinearComb { a: f64, b: f64 },
    /// `conv({0} ∪ K)`.
    HullOrigin,
    /// `a K + b(-K) + c conv({0} ∪ K) + d conv({0} ∪ -K)`.
    Wannerer { a: f64, b: f64, c: f64, d: f64 },
    /// M-sum of `K` and `-K` for a planar body `M`.
    MSum { m: PlanarBody },
    /// `K -> L`.
    ConstantBody { body: Body },
    /// `conv((K - a(K)) ∪ (-K + a(K)))`.
    CentroidSymm { center: Center },
    /// `K - p`.
    TranslateBy { shift: Shift },
    /// `vol(K) DK`.
    VolumeScaledD,
    /// `DK ∩ B`; the unit ball when `ball` is absent.
    ClipByBall { ball: Option<Body> },
    /// `DK` for full-dimensional `K`, otherwise `fallback` (the origin when
    /// absent).
    DimGatedD { fallback: Option<Body> },
    /// Origin-centered ball whose radius is the mean width of `K`.
    MeanWidthBall,
    /// `K ∩ B_n`.
    IntersectUnitBall,
    /// `vol(K)^{1/n} B_n`.
    VolumeBall,
    /// `L + vol(K) S`.
    SegmentVolume { base: Body, segment: Body },
    /// `DK` plus the sum of the boundary edges of `K`, each centered at the
    /// origin.
    EdgeZonotopePlusD,
}

/// Fixed parameters that make every operator a deterministic function of `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApplyContext {
    pub ball: BallResolution,
    pub steiner_samples: usize,
    pub steiner_seed: u64,
}

impl Default for ApplyContext {
    fn default() -> Self {
        ApplyContext {
            ball: BallResolution::default(),
            steiner_samples: 20_000,
            steiner_seed: 0x5EED_57E1,
        }
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::BadSpec(format!("{name} must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `K + (-K)`.
pub fn difference_body(k: &Body) -> Result<Body> {
    let sum = minkowski_sum(k, &reflect(k))?;
    // DK is symmetric; rebuild the vertex set so that reflection fixes it exactly
    symmetric_hull(sum.vertices())
}

impl OperatorSpec {
    /// Short kind name used in reports and tables.
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorSpec::DifferenceBody { .. } => "DifferenceBody",
            OperatorSpec::LinearComb { .. } => "LinearComb",
            OperatorSpec::HullOrigin => "HullOrigin",
            OperatorSpec::Wannerer { .. } => "Wannerer",
            OperatorSpec::MSum { .. } => "MSum",
            OperatorSpec::ConstantBody { .. } => "ConstantBody",
            OperatorSpec::CentroidSymm { .. } => "CentroidSymm",
            OperatorSpec::TranslateBy { .. } => "TranslateBy",
            OperatorSpec::VolumeScaledD => "VolumeScaledD",
            OperatorSpec::ClipByBall { .. } => "ClipByBall",
            OperatorSpec::DimGatedD { .. } => "DimGatedD",
            OperatorSpec::MeanWidthBall => "MeanWidthBall",
            OperatorSpec::IntersectUnitBall => "IntersectUnitBall",
            OperatorSpec::VolumeBall => "VolumeBall",
            OperatorSpec::SegmentVolume { .. } => "SegmentVolume",
            OperatorSpec::EdgeZonotopePlusD => "EdgeZonotopePlusD",
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::DifferenceBody { lambda } => nonnegative("lambda", *lambda),
            OperatorSpec::LinearComb { a, b } => {
                nonnegative("a", *a)?;
                nonnegative("b", *b)
            }
            OperatorSpec::Wannerer { a, b, c, d } => {
                for (name, x) in [("a", a), ("b", b), ("c", c), ("d", d)] {
                    nonnegative(name, *x)?;
                }
                Ok(())
            }
            OperatorSpec::TranslateBy { shift: Shift::Fixed(p) } if p.iter().any(|x| !x.is_finite()) => {
                Err(Error::NonFinitePoint)
            }
            OperatorSpec::SegmentVolume { base, segment } if base.ambient_dim() != segment.ambient_dim() => {
                Err(Error::DimensionMismatch {
                    expected: base.ambient_dim(),
                    got: segment.ambient_dim(),
                })
            }
            _ => Ok(()),
        }
    }

    /// Whether the operator needs a ball approximation.
    pub fn uses_ball(&self) -> bool {
        matches!(
            self,
            OperatorSpec::ClipByBall { ball: None }
                | OperatorSpec::MeanWidthBall
                | OperatorSpec::IntersectUnitBall
                | OperatorSpec::VolumeBall
        )
    }

    /// The planar body `M` with `h(◇K,x) = h_M(h_K(x), h_K(-x))`, for the
    /// operators whose representation is known in closed form.
    pub fn associated_m(&self) -> Option<PlanarBody> {
        let pts: Vec<(f64, f64)> = match self {
            OperatorSpec::DifferenceBody { lambda } => vec![(*lambda, *lambda)],
            OperatorSpec::LinearComb { a, b } => vec![(*a, *b)],
            OperatorSpec::HullOrigin => vec![(0.0, 0.0), (1.0, 0.0)],
            OperatorSpec::Wannerer { a, b, c, d } => wannerer_vertices(*a, *b, *c, *d),
            OperatorSpec::MSum { m } => return Some(m.clone()),
            _ => return None,
        };
        Some(PlanarBody::from_points(&pts).expect("finite planar points"))
    }

    /// The same operator acting on bodies inside `E`, expressed in the
    /// coordinates of `E`. Parameter bodies and points are projected to `E`.
    pub fn restrict(&self, e: &Subspace) -> Result<OperatorSpec> {
        let proj = |b: &Body| project(b, e);
        Ok(match self {
            OperatorSpec::ConstantBody { body } => OperatorSpec::ConstantBody { body: proj(body)? },
            OperatorSpec::TranslateBy { shift: Shift::Fixed(p) } => OperatorSpec::TranslateBy {
                shift: Shift::Fixed(e.coords(p)),
            },
            OperatorSpec::ClipByBall { ball: Some(b) } => OperatorSpec::ClipByBall { ball: Some(proj(b)?) },
            OperatorSpec::DimGatedD { fallback: Some(b) } => OperatorSpec::DimGatedD {
                fallback: Some(proj(b)?),
            },
            OperatorSpec::SegmentVolume { base, segment } => OperatorSpec::SegmentVolume {
                base: proj(base)?,
                segment: proj(segment)?,
            },
            other => other.clone(),
        })
    }
}

/// Vertices of `{(a,0)} + {(0,b)} + c[(0,0),(1,0)] + d[(0,0),(0,1)]`.
fn wannerer_vertices(a: f64, b: f64, c: f64, d: f64) -> Vec<(f64, f64)> {
    vec![(a, b), (a + c, b), (a, b + d), (a + c, b + d)]
}

fn check_param(k: &Body, p: &Body) -> Result<()> {
    if p.ambient_dim() != k.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: k.ambient_dim(),
            got: p.ambient_dim(),
        });
    }
    Ok(())
}

fn ball_for(spec: &OperatorSpec, n: usize, ctx: &ApplyContext) -> Result<Body> {
    unit_ball(n, ctx.ball).map_err(|_| Error::UnsupportedForDimension {
        op: spec.kind().into(),
        dim: n,
    })
}

/// Applies `spec` to `K`.
pub fn apply(spec: &OperatorSpec, k: &Body, ctx: &ApplyContext) -> Result<Body> {
    spec.validate()?;
    let n = k.ambient_dim();
    match spec {
        OperatorSpec::DifferenceBody { lambda } => scale(&difference_body(k)?, *lambda),
        OperatorSpec::LinearComb { a, b } => minkowski_sum(&scale(k, *a)?, &scale(&reflect(k), *b)?),
        OperatorSpec::HullOrigin => Ok(hull_with_origin(k)),
        OperatorSpec::Wannerer { a, b, c, d } => {
            let m = PlanarBody::from_points(&wannerer_vertices(*a, *b, *c, *d))?;
            apply_msum(&m, k)
        }
        OperatorSpec::MSum { m } => apply_msum(m, k),
        OperatorSpec::ConstantBody { body } => {
            check_param(k, body)?;
            Ok(body.clone())
        }
        OperatorSpec::CentroidSymm { center } => {
            let a = match center {
                Center::Steiner => steiner_point(k, ctx.steiner_samples, ctx.steiner_seed)?.0,
                Center::Centroid => relative_centroid(k),
            };
            let moved = translate(k, &-a)?;
            symmetric_hull(moved.vertices())
        }
        OperatorSpec::TranslateBy { shift } => {
            let p = match shift {
                Shift::Fixed(p) => p.clone(),
                Shift::Steiner => steiner_point(k, ctx.steiner_samples, ctx.steiner_seed)?.0,
            };
            translate(k, &-p)
        }
        OperatorSpec::VolumeScaledD => scale(&difference_body(k)?, volume(k)),
        OperatorSpec::ClipByBall { ball } => {
            let b = match ball {
                Some(b) => {
                    check_param(k, b)?;
                    b.clone()
                }
                None => ball_for(spec, n, ctx)?,
            };
            intersect(&difference_body(k)?, &b).map_err(|e| match e {
                Error::EmptyResult => Error::EmptyImage,
                other => other,
            })
        }
        OperatorSpec::DimGatedD { fallback } => {
            if k.is_full_dimensional() {
                difference_body(k)
            } else {
                match fallback {
                    Some(l) => {
                        check_param(k, l)?;
                        Ok(l.clone())
                    }
                    None => Ok(Body::origin(n)),
                }
            }
        }
        OperatorSpec::MeanWidthBall => {
            let b = ball_for(spec, n, ctx)?;
            scale(&b, mean_width_exact(k)?)
        }
        OperatorSpec::IntersectUnitBall => {
            let b = ball_for(spec, n, ctx)?;
            intersect(k, &b).map_err(|e| match e {
                Error::EmptyResult => Error::EmptyImage,
                other => other,
            })
        }
        OperatorSpec::VolumeBall => {
            let b = ball_for(spec, n, ctx)?;
            scale(&b, volume(k).powf(1.0 / n as f64))
        }
        OperatorSpec::SegmentVolume { base, segment } => {
            check_param(k, base)?;
            check_param(k, segment)?;
            minkowski_sum(base, &scale(segment, volume(k))?)
        }
        OperatorSpec::EdgeZonotopePlusD => {
            if n > 3 {
                return Err(Error::UnsupportedForDimension {
                    op: spec.kind().into(),
                    dim: n,
                });
            }
            let d = difference_body(k)?;
            let segments = edge_segments(k);
            if segments.is_empty() {
                return Ok(d);
            }
            let mut parts = vec![d];
            parts.extend(segments);
            minkowski_sum_all(&parts)
        }
    }
}

/// Boundary edges of `K` as centered segments, parallel edges merged.
fn edge_segments(k: &Body) -> Vec<Body> {
    let verts = k.vertices();
    let tol = 1e-12 * k.scale().max(f64::MIN_POSITIVE);
    let mut dirs: Vec<Point> = Vec::new();
    for &(a, b) in k.hull().edges() {
        let mut e = &verts[b] - &verts[a];
        // fix the sign so parallel edges share a representative
        if let Some(first) = e.iter().find(|x| x.abs() > tol) {
            if *first < 0.0 {
                e = -e;
            }
        }
        let len = e.norm();
        if len <= tol {
            continue;
        }
        match dirs.iter_mut().find(|d| (d.normalize() - &e / len).norm() <= 1e-12) {
            Some(d) => *d += e,
            None => dirs.push(e),
        }
    }
    dirs.into_iter()
        .map(|e| {
            let half = e * 0.5;
            Body::from_extreme_points(vec![-&half, half]).expect("finite segment")
        })
        .collect()
}
