//! V-polytope primitives for ambient dimension 1 to 4.

mod body;
mod distance;
pub(crate) mod hull;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub use body::{Body, HullCache, MAX_DIM, REL_TOL};
pub use distance::{distance_to_body, nearest_point};

use crate::error::{Error, Result};

/// A point or direction of R^n.
pub type Point = DVector<f64>;

/// Plane tolerance used by clipping, relative to `|u| * scale`.
const CLIP_EPS: f64 = 1e-11;

/// Linear subspace of R^n with an orthonormal basis (columns of `basis`).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Validates orthonormality (within 1e-12) and `1 <= k <= n-1`.
    pub fn new(basis: DMatrix<f64>) -> Result<Subspace> {
        let (n, k) = basis.shape();
        if k == 0 || k >= n {
            return Err(Error::BadSubspace(format!("dimension {k} not in 1..{n}")));
        }
        let gram = basis.transpose() * &basis;
        for i in 0..k {
            for j in 0..k {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > 1e-12 {
                    return Err(Error::BadSubspace("basis is not orthonormal".into()));
                }
            }
        }
        Ok(Subspace { basis })
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Subspace> {
        let basis = DMatrix::from_fn(n, axes.len(), |r, c| if axes[c] == r { 1.0 } else { 0.0 });
        Subspace::new(basis)
    }

    /// Haar-random element of the Grassmannian Gr(k, n).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<Subspace> {
        Subspace::new(crate::rng::haar_frame(rng, n, k))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Coordinates of the orthogonal projection of `x` in the subspace frame.
    pub fn coords(&self, x: &Point) -> Point {
        self.basis.tr_mul(x)
    }

    /// Ambient vector for frame coordinates `w`.
    pub fn embed(&self, w: &Point) -> Point {
        &self.basis * w
    }
}

/// Invertible n x n matrix with cached determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    det: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<LinearMap> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let det = matrix.determinant();
        if !(det.abs() > 1e-10) {
            return Err(Error::SingularMatrix { det });
        }
        Ok(LinearMap { matrix, det })
    }

    pub fn identity(n: usize) -> LinearMap {
        LinearMap {
            matrix: DMatrix::identity(n, n),
            det: 1.0,
        }
    }

    pub fn scaling(n: usize, lambda: f64) -> Result<LinearMap> {
        LinearMap::new(DMatrix::identity(n, n) * lambda)
    }

    /// Gaussian matrix conditioned to `cond <= 100`.
    pub fn random_gl<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearMap {
        loop {
            let cols: Vec<Point> = (0..n).map(|_| crate::rng::gaussian_vector(rng, n)).collect();
            let m = DMatrix::from_columns(&cols);
            let sv = m.singular_values();
            let (smax, smin) = (sv.max(), sv.min());
            if smin > 0.0 && smax / smin <= 100.0 {
                if let Ok(map) = LinearMap::new(m) {
                    return map;
                }
            }
        }
    }

    /// Random element of SL(n): a GL sample normalized to determinant one.
    pub fn random_sl<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearMap {
        let g = LinearMap::random_gl(rng, n);
        let mut m = g.matrix / g.det.abs().powf(1.0 / n as f64);
        if g.det < 0.0 {
            m.column_mut(0).neg_mut();
        }
        LinearMap::new(m).expect("unit determinant")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &Point) -> Point {
        &self.matrix * x
    }
}

fn check_same_dim(k: &Body, l: &Body) -> Result<usize> {
    if k.ambient_dim() != l.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: k.ambient_dim(),
            got: l.ambient_dim(),
        });
    }
    Ok(k.ambient_dim())
}

/// `-K`.
pub fn reflect(k: &Body) -> Body {
    Body::from_extreme_points(k.vertices().iter().map(|v| -v).collect()).expect("reflection of a valid body")
}

/// `K + t`.
pub fn translate(k: &Body, t: &Point) -> Result<Body> {
    if t.len() != k.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: k.ambient_dim(),
            got: t.len(),
        });
    }
    Body::from_extreme_points(k.vertices().iter().map(|v| v + t).collect())
}

/// `lambda K` for `lambda >= 0`.
pub fn scale(k: &Body, lambda: f64) -> Result<Body> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::BadSpec(format!("scale factor {lambda} must be finite and >= 0")));
    }
    if lambda > 0.0 {
        return Ok(k.scaled(lambda));
    }
    Body::from_extreme_points(k.vertices().iter().map(|v| v * lambda).collect())
}

/// `A K`.
pub fn linear_image(k: &Body, a: &LinearMap) -> Result<Body> {
    if a.dim() != k.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: k.ambient_dim(),
            got: a.dim(),
        });
    }
    Body::from_extreme_points(k.vertices().iter().map(|v| a.apply(v)).collect())
}

/// Minkowski sum `K + L`.
pub fn minkowski_sum(k: &Body, l: &Body) -> Result<Body> {
    check_same_dim(k, l)?;
    if k.vertices().len() == 1 {
        return translate(l, &k.vertices()[0]);
    }
    if l.vertices().len() == 1 {
        return translate(k, &l.vertices()[0]);
    }
    if let Some(mu) = homothety_ratio(k, l) {
        return scale(k, 1.0 + mu);
    }
    let mut pts = Vec::with_capacity(k.vertices().len() * l.vertices().len());
    for a in k.vertices() {
        for b in l.vertices() {
            pts.push(a + b);
        }
    }
    Body::canonicalize(&pts)
}

/// `mu` with `L = mu K` (vertex by vertex), if any.
fn homothety_ratio(k: &Body, l: &Body) -> Option<f64> {
    if k.vertices().len() != l.vertices().len() {
        return None;
    }
    let (ks, ls) = (k.scale(), l.scale());
    if ks == 0.0 || ls == 0.0 {
        return None;
    }
    let mu = ls / ks;
    let tol = 1e-13 * ls;
    k.vertices()
        .iter()
        .zip(l.vertices())
        .all(|(a, b)| (a * mu - b).amax() <= tol)
        .then_some(mu)
}

/// Sum of several bodies, folded left to right.
pub fn minkowski_sum_all(bodies: &[Body]) -> Result<Body> {
    let (first, rest) = bodies.split_first().ok_or(Error::EmptyInput)?;
    rest.iter().try_fold(first.clone(), |acc, b| minkowski_sum(&acc, b))
}

/// Orthogonal projection onto `E`, expressed in the frame of `E`.
pub fn project(k: &Body, e: &Subspace) -> Result<Body> {
    if e.ambient_dim() != k.ambient_dim() {
        return Err(Error::BadSubspace(format!(
            "subspace lives in R^{}, body in R^{}",
            e.ambient_dim(),
            k.ambient_dim()
        )));
    }
    let pts: Vec<Point> = k.vertices().iter().map(|v| e.coords(v)).collect();
    Body::canonicalize(&pts)
}

/// `conv({0} ∪ K)`.
pub fn hull_with_origin(k: &Body) -> Body {
    let mut pts = k.vertices().to_vec();
    pts.push(Point::zeros(k.ambient_dim()));
    Body::canonicalize(&pts).expect("valid input")
}

/// `K ∩ {x : <u,x> <= c}` for ambient dimension at most 3.
pub fn clip_halfspace(k: &Body, u: &Point, c: f64) -> Result<Body> {
    let n = k.ambient_dim();
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u.len() });
    }
    if u.norm() == 0.0 {
        return Err(Error::BadSpec("clip direction must be nonzero".into()));
    }
    let eps = CLIP_EPS * u.norm() * k.scale().max(c.abs() / u.norm());
    let values: Vec<f64> = k.vertices().iter().map(|v| v.dot(u) - c).collect();
    if values.iter().all(|&s| s <= eps) {
        return Ok(k.clone());
    }
    let mut pts: Vec<Point> = k
        .vertices()
        .iter()
        .zip(&values)
        .filter(|(_, &s)| s <= eps)
        .map(|(v, _)| v.clone())
        .collect();
    for &(a, b) in k.hull().edges() {
        let (sa, sb) = (values[a], values[b]);
        if (sa < -eps && sb > eps) || (sb < -eps && sa > eps) {
            let t = sa / (sa - sb);
            let (va, vb) = (&k.vertices()[a], &k.vertices()[b]);
            pts.push(va + (vb - va) * t);
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyResult);
    }
    Body::canonicalize(&pts)
}

/// Intersection of two bodies. Uses polarity about a common interior point
/// when both are full-dimensional; falls back to clipping by the facets of
/// `l` (ambient dimension at most 3).
pub fn intersect(k: &Body, l: &Body) -> Result<Body> {
    let n = check_same_dim(k, l)?;
    let (hk, hl) = (k.hull(), l.hull());
    if !hl.is_full() {
        return Err(Error::BadSpec("intersection with a lower-dimensional body".into()));
    }
    if hk.is_full() {
        // a facet plane of one body is redundant when the other lies inside
        // it; only the larger side is pruned, which leaves K ∩ L unchanged
        let cutting = |planes: &[(Point, f64)], other: &Body| -> Vec<(Point, f64)> {
            planes.iter().filter(|(nv, c)| other.support(nv) > *c).cloned().collect()
        };
        let (ck, cl) = (cutting(hk.ambient_planes(), l), cutting(hl.ambient_planes(), k));
        if cl.is_empty() {
            return Ok(k.clone());
        }
        if ck.is_empty() {
            return Ok(l.clone());
        }
        let (pk, pl) = if hl.ambient_planes().len() >= hk.ambient_planes().len() {
            (hk.ambient_planes().to_vec(), cl)
        } else {
            (ck, hl.ambient_planes().to_vec())
        };
        let scale = k.scale().max(l.scale());
        let slack = |planes: &[(Point, f64)], p: &Point| {
            planes.iter().map(|(nv, c)| c - nv.dot(p)).fold(f64::INFINITY, f64::min)
        };
        let mk = mean(k.vertices());
        let ml = mean(l.vertices());
        let mut candidates = vec![Point::zeros(n), mk.clone(), ml.clone(), (&mk + &ml) * 0.5];
        // points of each body nearest the other's mean, pulled inward
        for (a, inner, target) in [(k, &mk, &ml), (l, &ml, &mk)] {
            let q = nearest_point(a.vertices(), target).0;
            for t in [0.05, 0.25, 0.5] {
                candidates.push(&q + (inner - &q) * t);
            }
        }
        let inner = candidates.into_iter().find(|p| {
            slack(hk.ambient_planes(), p) > 1e-6 * scale && slack(hl.ambient_planes(), p) > 1e-6 * scale
        });
        if let Some(p) = inner {
            let polar: Vec<Point> = pk
                .iter()
                .chain(&pl)
                .map(|(nv, c)| nv / (c - nv.dot(&p)))
                .collect();
            let dual = Body::canonicalize(&polar)?;
            let pts: Vec<Point> = dual
                .hull()
                .ambient_planes()
                .iter()
                .map(|(a, b)| &p + a / *b)
                .collect();
            return Body::canonicalize(&pts);
        }
    }
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut acc = k.clone();
    for (nv, c) in hl.ambient_planes() {
        if acc.support(nv) > c + CLIP_EPS * acc.scale().max(1.0) {
            acc = clip_halfspace(&acc, nv, *c)?;
        }
    }
    Ok(acc)
}

fn mean(points: &[Point]) -> Point {
    let mut m = Point::zeros(points[0].len());
    for p in points {
        m += p;
    }
    m / points.len() as f64
}

/// Hausdorff distance via the vertex formula; each point-to-body distance is
/// a minimum-norm-point solve.
///
/// Bodies whose sorted vertex lists agree to within `1e-12 * R` return the
/// matching bound `max |a_i - b_i|` instead, which is within that much of the
/// exact value.
pub fn hausdorff_distance(k: &Body, l: &Body) -> Result<f64> {
    check_same_dim(k, l)?;
    if k.vertices().len() == l.vertices().len() {
        let matched = k
            .vertices()
            .iter()
            .zip(l.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if matched <= 1e-12 * k.scale().max(l.scale()) {
            return Ok(matched);
        }
    }
    let one_sided = |a: &Body, b: &Body| {
        a.vertices()
            .iter()
            .map(|v| distance_to_body(b, v))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(k, l).max(one_sided(l, k)))
}


/// `max_u |h_K(u) - h_L(u)|` over the given unit directions; a lower bound
/// for the Hausdorff distance.
pub fn support_gap(k: &Body, l: &Body, directions: &[Point]) -> f64 {
    directions
        .iter()
        .map(|u| (k.support(u) - l.support(u)).abs())
        .fold(0.0, f64::max)
}

/// Whether `x` lies in `K` up to `tol`.
pub fn contains(k: &Body, x: &Point, tol: f64) -> bool {
    distance_to_body(k, x) <= tol
}
