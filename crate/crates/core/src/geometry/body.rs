use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::hull::{self, facet_plane, normal_rank, scale_of, Coord, Frame, RANK_EPS};
use super::Point;
use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Relative tolerance used by identity checks on bodies.
pub const REL_TOL: f64 = 1e-9;

/// Dihedral angle below which two boundary simplices count as coplanar.
const COPLANAR_ANGLE: f64 = 1e-9;

/// A convex polytope given by its extreme points.
///
/// Vertices are kept in lexicographic order so that equality and serialized
/// output are deterministic. Lower-dimensional bodies are allowed.
#[derive(Clone)]
pub struct Body {
    dim: usize,
    vertices: Vec<Point>,
    hull: OnceLock<Arc<HullCache>>,
}

/// Face structure of a body, expressed in an orthonormal frame of its affine
/// hull. For full-dimensional bodies the frame axes are the ambient axes.
#[derive(Debug)]
pub struct HullCache {
    pub(crate) frame: Frame,
    /// Intrinsic coordinates of every body vertex (same order as the body).
    pub(crate) coords: Vec<Coord>,
    /// Boundary simplices of the intrinsic hull, `dim` vertex indices each.
    pub(crate) facets: Vec<[usize; 4]>,
    /// Outward unit normal (intrinsic) and offset for each facet.
    pub(crate) planes: Vec<(Coord, f64)>,
    /// One-dimensional faces of the polytope.
    pub(crate) edges: Vec<(usize, usize)>,
    /// Facet hyperplanes in ambient coordinates (full-dimensional bodies only).
    pub(crate) ambient: Vec<(Point, f64)>,
    /// Mean of the hull vertices; an interior point of the relative interior.
    pub(crate) interior: Coord,
}

impl HullCache {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn facets(&self) -> &[[usize; 4]] {
        &self.facets
    }

    /// Facet hyperplanes in ambient coordinates, `(unit normal, offset)`.
    /// Empty unless the body is full-dimensional.
    pub fn ambient_planes(&self) -> &[(Point, f64)] {
        &self.ambient
    }

    fn scaled(&self, lambda: f64) -> HullCache {
        let scale_coord = |c: &Coord| c.map(|x| x * lambda);
        HullCache {
            frame: Frame {
                origin: &self.frame.origin * lambda,
                basis: self.frame.basis.clone(),
            },
            coords: self.coords.iter().map(scale_coord).collect(),
            facets: self.facets.clone(),
            planes: self.planes.iter().map(|(n, c)| (*n, c * lambda)).collect(),
            edges: self.edges.clone(),
            ambient: self.ambient.iter().map(|(n, c)| (n.clone(), c * lambda)).collect(),
            interior: scale_coord(&self.interior),
        }
    }

    /// Whether the hull spans the ambient space.
    pub fn is_full(&self) -> bool {
        self.frame.dim() == self.frame.origin.len()
    }
}

fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn validate(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let n = first.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
    }
    Ok(n)
}

/// Replaces `-0.0` by `0.0` so that equal bodies compare equal.
fn positive_zero(p: &Point) -> Point {
    p.map(|x| x + 0.0)
}

/// Drops points within `tol` (max-norm) of an earlier kept point. `order` must
/// be lexicographically sorted. Returns the kept indices and, for every input
/// index, the position of its representative among the kept ones.
fn dedup_sorted(order: &[usize], points: &[Point], tol: f64) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut kept: Vec<usize> = Vec::with_capacity(order.len());
    let mut rep = Vec::with_capacity(order.len());
    for &i in order {
        let p = &points[i];
        let mut found = None;
        for (slot, &j) in kept.iter().enumerate().rev() {
            if points[j][0] < p[0] - tol {
                break;
            }
            if (p - &points[j]).amax() <= tol {
                found = Some(slot);
                break;
            }
        }
        match found {
            Some(slot) => rep.push((i, slot)),
            None => {
                rep.push((i, kept.len()));
                kept.push(i);
            }
        }
    }
    (kept, rep)
}

impl Body {
    /// Convex hull of `points`, reduced to its extreme points.
    pub fn canonicalize(points: &[Point]) -> Result<Body> {
        validate(points)?;
        let points: Vec<Point> = points.iter().map(positive_zero).collect();
        let points = &points[..];
        let dim = points[0].len();
        let raw = hull::hull(points);
        let mut order: Vec<usize> = raw.vertices.clone();
        order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
        let tol = 1e-12 * scale_of(points);
        let (kept, rep) = dedup_sorted(&order, points, tol);
        let vertices: Vec<Point> = kept.iter().map(|&i| points[i].clone()).collect();
        let remap: HashMap<usize, usize> = rep.into_iter().collect();
        let facets: Vec<[usize; 4]> = raw
            .facets
            .iter()
            .map(|f| {
                let mut g = [usize::MAX; 4];
                for (slot, &v) in g.iter_mut().zip(f.iter()) {
                    if v != usize::MAX {
                        // pruned hulls only reference extreme points
                        *slot = remap.get(&v).copied().unwrap_or(usize::MAX);
                    }
                }
                g
            })
            .collect();
        let cache = build_cache(&vertices, raw.frame, facets);
        let body = Body {
            dim,
            vertices,
            hull: OnceLock::new(),
        };
        let _ = body.hull.set(Arc::new(cache));
        Ok(body)
    }

    /// Builds a body from points already known to be extreme (images of
    /// extreme points under injective affine maps, symmetric closures).
    /// Only sorts and removes duplicates.
    pub(crate) fn from_extreme_points(mut points: Vec<Point>) -> Result<Body> {
        let dim = validate(&points)?;
        for p in points.iter_mut() {
            *p = positive_zero(p);
        }
        points.sort_by(lex_cmp);
        let tol = 1e-12 * scale_of(&points);
        let order: Vec<usize> = (0..points.len()).collect();
        let (kept, _) = dedup_sorted(&order, &points, tol);
        let points: Vec<Point> = kept.into_iter().map(|i| points[i].clone()).collect();
        Ok(Body {
            dim,
            vertices: points,
            hull: OnceLock::new(),
        })
    }

    /// `lambda K` for `lambda > 0`. Positive scaling keeps the vertex order
    /// and the face structure, so a computed hull is carried over.
    pub(crate) fn scaled(&self, lambda: f64) -> Body {
        let vertices = self.vertices.iter().map(|v| positive_zero(&(v * lambda))).collect();
        let body = Body {
            dim: self.dim,
            vertices,
            hull: OnceLock::new(),
        };
        if let Some(h) = self.hull.get() {
            let _ = body.hull.set(Arc::new(h.scaled(lambda)));
        }
        body
    }

    pub fn point(p: Point) -> Result<Body> {
        Body::canonicalize(&[p])
    }

    /// The origin of R^n.
    pub fn origin(n: usize) -> Body {
        Body::from_extreme_points(vec![Point::zeros(n)]).expect("origin is valid")
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Body> {
        let pts: Vec<Point> = rows.iter().map(|r| Point::from_row_slice(r)).collect();
        Body::canonicalize(&pts)
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_rows(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().copied().collect()).collect()
    }

    pub fn hull(&self) -> &HullCache {
        self.hull.get_or_init(|| {
            let raw = hull::hull(&self.vertices);
            let cache_vertices = &self.vertices;
            Arc::new(build_cache(cache_vertices, raw.frame, raw.facets))
        })
    }

    /// Largest vertex norm; the reference length for relative tolerances.
    pub fn scale(&self) -> f64 {
        scale_of(&self.vertices)
    }

    /// Affine dimension: rank of `{v_i - v_0}` by singular values, with values
    /// below `1e-9 * scale` treated as zero.
    pub fn dimension(&self) -> usize {
        if self.vertices.len() < 2 {
            return 0;
        }
        let v0 = &self.vertices[0];
        let m = DMatrix::from_fn(self.dim, self.vertices.len() - 1, |i, j| self.vertices[j + 1][i] - v0[i]);
        let tol = RANK_EPS * self.scale();
        m.singular_values().iter().filter(|&&s| s > tol).count()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dimension() == self.dim
    }

    /// Support function `max <u, v>` over the vertices.
    pub fn support(&self, u: &Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Width `h(K,u) + h(K,-u)`.
    pub fn width(&self, u: &Point) -> f64 {
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for v in &self.vertices {
            let s = v.dot(u);
            hi = hi.max(s);
            lo = lo.min(s);
        }
        (hi - lo).max(0.0)
    }

    /// Whether all vertices are pairwise within `tol` of the first one.
    pub fn is_point(&self, tol: f64) -> bool {
        self.vertices.iter().all(|v| (v - &self.vertices[0]).norm() <= tol)
    }
}

fn build_cache(vertices: &[Point], frame: Frame, facets: Vec<[usize; 4]>) -> HullCache {
    let d = frame.dim();
    let coords: Vec<Coord> = vertices.iter().map(|p| frame.coords(p)).collect();
    let used: Vec<usize> = {
        let mut u: Vec<usize> = facets.iter().flat_map(|f| f[..d.max(1)].to_vec()).collect();
        u.sort_unstable();
        u.dedup();
        if u.is_empty() {
            vec![0]
        } else {
            u
        }
    };
    let mut interior = [0.0; 4];
    for &i in &used {
        for k in 0..d {
            interior[k] += coords[i][k] / used.len() as f64;
        }
    }
    let facets: Vec<[usize; 4]> = if d == 0 { Vec::new() } else { facets };
    let planes: Vec<(Coord, f64)> = facets.iter().map(|f| facet_plane(&coords, f, d, &interior)).collect();
    let edges = match d {
        0 => Vec::new(),
        1 => vec![(facets[0][0].min(facets[1][0]), facets[0][0].max(facets[1][0]))],
        2 => facets.iter().map(|f| (f[0].min(f[1]), f[0].max(f[1]))).collect(),
        _ => true_edges(&facets, &planes, d),
    };
    let ambient = if d == frame.origin.len() {
        planes
            .iter()
            .map(|(n, c)| {
                let normal = frame.lift_direction(n);
                let offset = c + normal.dot(&frame.origin);
                (normal, offset)
            })
            .collect()
    } else {
        Vec::new()
    };
    HullCache {
        frame,
        coords,
        facets,
        planes,
        edges,
        ambient,
        interior,
    }
}

/// Edges of the triangulated boundary that are genuine 1-faces: their incident
/// facet normals span a (d-1)-dimensional space.
fn true_edges(facets: &[[usize; 4]], planes: &[(Coord, f64)], d: usize) -> Vec<(usize, usize)> {
    let mut incident: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in facets.iter().enumerate() {
        for a in 0..d {
            for b in a + 1..d {
                let key = (f[a].min(f[b]), f[a].max(f[b]));
                incident.entry(key).or_default().push(fi);
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = incident
        .into_iter()
        .filter(|(_, fs)| {
            let normals: Vec<Coord> = fs.iter().map(|&i| planes[i].0).collect();
            if d == 3 {
                let (a, b) = (normals[0], normals[normals.len() - 1]);
                let cos = hull::cdot(&a, &b, 3).clamp(-1.0, 1.0);
                cos.acos() > COPLANAR_ANGLE
            } else {
                normal_rank(&normals, d) >= d - 1
            }
        })
        .map(|(k, _)| k)
        .collect();
    edges.sort_unstable();
    edges
}

impl PartialEq for Body {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Body")
            .field("dim", &self.dim)
            .field("vertices", &self.vertex_rows())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(rows: &[&[f64]]) -> Body {
        Body::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn interior_point_removed() {
        let k = body(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.25, 0.25]]);
        assert_eq!(k.vertex_rows(), vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn single_point_is_zero_dimensional() {
        let k = body(&[&[0.0, 0.0]]);
        assert_eq!(k.vertices().len(), 1);
        assert_eq!(k.dimension(), 0);
    }

    #[test]
    fn errors() {
        assert!(matches!(Body::canonicalize(&[]), Err(Error::EmptyInput)));
        let bad = vec![Point::from_row_slice(&[f64::NAN, 0.0])];
        assert!(matches!(Body::canonicalize(&bad), Err(Error::NonFinitePoint)));
        let mixed = vec![Point::from_row_slice(&[0.0, 0.0]), Point::from_row_slice(&[0.0])];
        assert!(matches!(Body::canonicalize(&mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn circle_points_all_retained() {
        // every point on a circle is extreme; the oracle is the count itself
        let mut rng = crate::rng::stream(11, 0);
        let pts: Vec<Point> = (0..100).map(|_| crate::rng::unit_vector(&mut rng, 2)).collect();
        let k = Body::canonicalize(&pts).unwrap();
        assert_eq!(k.vertices().len(), 100);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let mut rng = crate::rng::stream(5, 1);
        let pts: Vec<Point> = (0..40).map(|_| crate::rng::gaussian_vector(&mut rng, 3)).collect();
        let k = Body::canonicalize(&pts).unwrap();
        let again = Body::canonicalize(k.vertices()).unwrap();
        assert_eq!(k, again);
    }

    #[test]
    fn dimensions() {
        assert_eq!(body(&[&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]]).dimension(), 1);
        assert_eq!(body(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).dimension(), 2);
    }

    #[test]
    fn support_examples() {
        let cube = body(&[&[-1.0, -1.0], &[1.0, -1.0], &[1.0, 1.0], &[-1.0, 1.0]]);
        assert_eq!(cube.support(&Point::from_row_slice(&[1.0, 0.0])), 1.0);
        let t = body(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(t.support(&Point::from_row_slice(&[1.0, 1.0])), 1.0);
        assert_eq!(t.support(&Point::zeros(2)), 0.0);
        let w = t.width(&Point::from_row_slice(&[1.0, 1.0]).normalize());
        assert!((w - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cube_has_twelve_edges() {
        let mut rows = Vec::new();
        for m in 0..8 {
            rows.push(vec![(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64]);
        }
        let k = Body::from_rows(&rows).unwrap();
        assert_eq!(k.hull().edges().len(), 12);
    }
}
