//! Operators of the form `h(◇K, x) = h_M(h_K(x), h_{-K}(x))` for a planar
//! body `M`.

use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum, reflect, scale, Body, Point};
use crate::rng::{gaussian_vector, stream};

/// A convex body in the `(a, b)`-plane parametrizing an M-sum operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarBody(Body);

impl PlanarBody {
    pub fn new(body: Body) -> Result<PlanarBody> {
        if body.ambient_dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: body.ambient_dim(),
            });
        }
        Ok(PlanarBody(body))
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<PlanarBody> {
        let rows: Vec<Vec<f64>> = points.iter().map(|&(a, b)| vec![a, b]).collect();
        PlanarBody::new(Body::from_rows(&rows)?)
    }

    pub fn body(&self) -> &Body {
        &self.0
    }

    /// Vertices as `(a, b)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.0.vertices().iter().map(|v| (v[0], v[1]))
    }

    /// Whether every vertex has both coordinates nonnegative.
    pub fn in_nonnegative_quadrant(&self) -> bool {
        self.pairs().all(|(a, b)| a >= 0.0 && b >= 0.0)
    }

    /// The width of `M` in direction `(1, -1)`.
    pub fn skew_width(&self) -> f64 {
        self.0.width(&Point::from_row_slice(&[1.0, -1.0]))
    }
}

/// `h_M(s, t)`.
pub fn msum_support(m: &PlanarBody, s: f64, t: f64) -> f64 {
    m.pairs().map(|(a, b)| a * s + b * t).fold(f64::NEG_INFINITY, f64::max)
}

/// Builds the image `conv ⋃ (a_i K + b_i (-K))` over the vertices of `M`.
pub fn apply_msum(m: &PlanarBody, k: &Body) -> Result<Body> {
    if let Some((a, b)) = m.pairs().find(|&(a, b)| a < 0.0 || b < 0.0) {
        return Err(Error::NegativeCoefficientRegime(a, b));
    }
    let neg = reflect(k);
    let mut points = Vec::new();
    for (a, b) in m.pairs() {
        let piece = minkowski_sum(&scale(k, a)?, &scale(&neg, b)?)?;
        points.extend(piece.vertices().iter().cloned());
    }
    Body::canonicalize(&points)
}

/// Outcome of the sampled sublinearity test.
#[derive(Clone, Debug)]
pub struct SupportValidation {
    pub is_support_function: bool,
    /// First direction pair `(u, v)` with `f(u+v) > f(u) + f(v)`.
    pub witness: Option<(Point, Point)>,
    /// Largest observed `f(u+v) - f(u) - f(v)`.
    pub worst_excess: f64,
}

/// Tests whether `x -> h_M(h_K(x), h_K(-x))` is sublinear on sampled
/// direction pairs. Works for any `M`, including ones outside the quadrant.
pub fn validate_msum_support(m: &PlanarBody, k: &Body, samples: usize, seed: u64) -> Result<SupportValidation> {
    if samples < 1000 {
        return Err(Error::BadSpec(format!("need at least 1000 direction pairs, got {samples}")));
    }
    let n = k.ambient_dim();
    let f = |x: &Point| msum_support(m, k.support(x), k.support(&-x));
    let tol = 1e-9 * k.scale().max(1.0) * m.body().scale().max(1.0);
    let mut rng = stream(seed, 0);
    let mut out = SupportValidation {
        is_support_function: true,
        witness: None,
        worst_excess: f64::NEG_INFINITY,
    };
    for _ in 0..samples {
        let u = gaussian_vector(&mut rng, n);
        let v = gaussian_vector(&mut rng, n);
        let excess = f(&(&u + &v)) - f(&u) - f(&v);
        out.worst_excess = out.worst_excess.max(excess);
        if excess > tol * (u.norm() + v.norm()) && out.witness.is_none() {
            out.is_support_function = false;
            out.witness = Some((u, v));
        }
    }
    Ok(out)
}
