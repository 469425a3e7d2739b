//! Convex hulls of small point sets in dimension <= 4.
//!
//! Points are first reduced to their affine hull (pivoted Gram-Schmidt), then
//! hulled in intrinsic coordinates: monotone chain in 2D, an incremental
//! beneath-beyond construction with conflict lists in 3D and 4D. Facets of the
//! 3D/4D hull are simplices; coplanar simplices are allowed and vertices that
//! sit inside a flat region or on a straight ridge are pruned afterwards by a
//! normal-cone rank test.

use std::collections::HashMap;

use super::Point;

/// Coordinates in an intrinsic frame; only the first `dim` entries are used.
pub(crate) type Coord = [f64; 4];

/// Plane tolerance, relative to the point-set scale.
pub(crate) const HULL_EPS: f64 = 1e-11;
/// Rank tolerance for affine dimension, relative to the point-set scale.
pub(crate) const RANK_EPS: f64 = 1e-9;
/// Residual below which unit normals count as linearly dependent.
const NORMAL_RANK_EPS: f64 = 1e-9;

const NONE: usize = usize::MAX;

#[inline]
pub(crate) fn cdot(a: &Coord, b: &Coord, d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn csub(a: &Coord, b: &Coord) -> Coord {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
fn cnorm(a: &Coord, d: usize) -> f64 {
    cdot(a, a, d).sqrt()
}

/// Orthonormal frame of an affine subspace.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub origin: Point,
    pub basis: Vec<Point>,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, p: &Point) -> Coord {
        let mut c = [0.0; 4];
        let diff = p - &self.origin;
        for (i, b) in self.basis.iter().enumerate() {
            c[i] = b.dot(&diff);
        }
        c
    }

    pub fn lift_direction(&self, c: &Coord) -> Point {
        let mut v = Point::zeros(self.origin.len());
        for (i, b) in self.basis.iter().enumerate() {
            v.axpy(c[i], b, 1.0);
        }
        v
    }
}

/// Largest vertex norm; the reference length for all relative tolerances.
pub(crate) fn scale_of(points: &[Point]) -> f64 {
    points.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

/// Affine frame via pivoted Gram-Schmidt. A direction enters the basis only if
/// some point lies farther than `tol` from the current affine span.
pub(crate) fn affine_frame(points: &[Point], tol: f64) -> Frame {
    let n = points[0].len();
    let origin = points[0].clone();
    let mut basis: Vec<Point> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut best = (0.0, None);
        for p in points {
            let mut r = p - &origin;
            for b in &basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
            let d = r.norm();
            if d > best.0 {
                best = (d, Some(r));
            }
        }
        match best {
            (d, Some(mut r)) if d > tol => {
                // second pass restores orthogonality lost to cancellation
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
                let norm = r.norm();
                basis.push(r / norm);
            }
            _ => break,
        }
    }
    if basis.len() == n {
        // full-dimensional: keep the ambient axes so intrinsic = ambient
        basis = (0..n).map(|i| Point::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    Frame { origin, basis }
}

/// Hull of a point set, indices referring to the input slice.
#[derive(Clone, Debug)]
pub(crate) struct RawHull {
    pub frame: Frame,
    /// Extreme points, as indices into the input.
    pub vertices: Vec<usize>,
    /// Boundary simplices of the intrinsic hull (`dim` indices each).
    pub facets: Vec<[usize; 4]>,
}

pub(crate) fn hull(points: &[Point]) -> RawHull {
    let scale = scale_of(points);
    let frame = affine_frame(points, RANK_EPS * scale);
    let d = frame.dim();
    let coords: Vec<Coord> = points.iter().map(|p| frame.coords(p)).collect();
    let eps = HULL_EPS * scale;
    let (vertices, facets) = match d {
        0 => (vec![0], Vec::new()),
        1 => {
            let (mut lo, mut hi) = (0, 0);
            for (i, c) in coords.iter().enumerate() {
                if c[0] < coords[lo][0] {
                    lo = i;
                }
                if c[0] > coords[hi][0] {
                    hi = i;
                }
            }
            (vec![lo, hi], vec![[lo, NONE, NONE, NONE], [hi, NONE, NONE, NONE]])
        }
        2 => {
            let ring = monotone_chain(&coords, eps);
            let m = ring.len();
            let facets = (0..m).map(|i| [ring[i], ring[(i + 1) % m], NONE, NONE]).collect();
            (ring, facets)
        }
        _ => pruned_incremental(&coords, d, eps),
    };
    RawHull { frame, vertices, facets }
}

/// Counter-clockwise extreme points of a planar set; collinear points dropped.
fn monotone_chain(pts: &[Coord], eps: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
    });
    idx.dedup_by(|a, b| pts[*a][0] == pts[*b][0] && pts[*a][1] == pts[*b][1]);
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| -> bool {
        // true when `a` is strictly left of o->b by more than eps
        let (ox, oy) = (pts[o][0], pts[o][1]);
        let (ax, ay) = (pts[a][0] - ox, pts[a][1] - oy);
        let (bx, by) = (pts[b][0] - ox, pts[b][1] - oy);
        let cross = ax * by - ay * bx;
        let len = (bx * bx + by * by).sqrt();
        -cross > eps * len
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && !turn(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && !turn(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // the turn test above is for clockwise chains; reverse for CCW
    lower.reverse();
    lower
}

struct Facet {
    v: [usize; 4],
    normal: Coord,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

type RidgeKey = [usize; 3];

fn ridge_key(v: &[usize; 4], d: usize, skip: usize) -> RidgeKey {
    let mut k = [NONE; 3];
    let mut j = 0;
    for (i, &x) in v.iter().take(d).enumerate() {
        if i != skip {
            k[j] = x;
            j += 1;
        }
    }
    k[..d - 1].sort_unstable();
    k
}

/// Unit normal of the hyperplane through `d` points in R^d (d = 3 or 4).
fn simplex_normal(p: &[Coord], d: usize) -> Option<Coord> {
    let mut n = [0.0; 4];
    if d == 3 {
        let a = csub(&p[1], &p[0]);
        let b = csub(&p[2], &p[0]);
        n[0] = a[1] * b[2] - a[2] * b[1];
        n[1] = a[2] * b[0] - a[0] * b[2];
        n[2] = a[0] * b[1] - a[1] * b[0];
    } else {
        let a = csub(&p[1], &p[0]);
        let b = csub(&p[2], &p[0]);
        let c = csub(&p[3], &p[0]);
        let m = [a, b, c];
        for (col, slot) in n.iter_mut().enumerate() {
            let cols: Vec<usize> = (0..4).filter(|&j| j != col).collect();
            let det = det3(
                [m[0][cols[0]], m[0][cols[1]], m[0][cols[2]]],
                [m[1][cols[0]], m[1][cols[1]], m[1][cols[2]]],
                [m[2][cols[0]], m[2][cols[1]], m[2][cols[2]]],
            );
            *slot = if col % 2 == 0 { det } else { -det };
        }
    }
    let len = cnorm(&n, d);
    if !(len > 0.0) || !len.is_finite() {
        return None;
    }
    for x in n.iter_mut() {
        *x /= len;
    }
    Some(n)
}

#[inline]
fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Initial simplex by repeated farthest-point pivoting.
fn initial_simplex(pts: &[Coord], d: usize) -> Vec<usize> {
    let mut chosen = vec![0usize];
    for (i, p) in pts.iter().enumerate() {
        if p[0] < pts[chosen[0]][0] {
            chosen[0] = i;
        }
    }
    let mut basis: Vec<Coord> = Vec::new();
    while chosen.len() < d + 1 {
        let o = pts[chosen[0]];
        let mut best = (-1.0, 0, [0.0; 4]);
        for (i, p) in pts.iter().enumerate() {
            let mut r = csub(p, &o);
            for b in &basis {
                let c = cdot(b, &r, d);
                for k in 0..d {
                    r[k] -= c * b[k];
                }
            }
            let len = cnorm(&r, d);
            if len > best.0 {
                best = (len, i, r);
            }
        }
        let (len, i, mut r) = best;
        for x in r.iter_mut() {
            *x /= len;
        }
        basis.push(r);
        chosen.push(i);
    }
    chosen
}

fn incremental(pts: &[Coord], d: usize, eps: f64) -> Vec<[usize; 4]> {
    let init = initial_simplex(pts, d);
    let mut interior = [0.0; 4];
    for &i in &init {
        for k in 0..d {
            interior[k] += pts[i][k] / (d + 1) as f64;
        }
    }

    let mut facets: Vec<Facet> = Vec::new();
    let mut ridges: HashMap<RidgeKey, [usize; 2]> = HashMap::new();

    let make_facet = |v: [usize; 4]| -> Facet {
        let corners: Vec<Coord> = (0..d).map(|i| pts[v[i]]).collect();
        let mut normal = simplex_normal(&corners, d).unwrap_or([0.0; 4]);
        let mut offset = cdot(&normal, &corners[0], d);
        if cdot(&normal, &interior, d) > offset {
            for x in normal.iter_mut() {
                *x = -*x;
            }
            offset = -offset;
        }
        Facet {
            v,
            normal,
            offset,
            outside: Vec::new(),
            alive: true,
        }
    };

    let link = |ridges: &mut HashMap<RidgeKey, [usize; 2]>, f: &Facet, id: usize| {
        for skip in 0..d {
            let slot = ridges.entry(ridge_key(&f.v, d, skip)).or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = id;
            } else {
                slot[1] = id;
            }
        }
    };

    for skip in 0..=d {
        let mut v = [NONE; 4];
        let mut j = 0;
        for (i, &x) in init.iter().enumerate() {
            if i != skip {
                v[j] = x;
                j += 1;
            }
        }
        let f = make_facet(v);
        link(&mut ridges, &f, facets.len());
        facets.push(f);
    }

    let in_init = |i: usize| init.contains(&i);
    for (i, p) in pts.iter().enumerate() {
        if in_init(i) {
            continue;
        }
        for f in facets.iter_mut() {
            if cdot(&f.normal, p, d) - f.offset > eps {
                f.outside.push(i);
                break;
            }
        }
    }

    let mut cursor = 0;
    let mut visible: Vec<usize> = Vec::new();
    let mut is_visible: Vec<bool> = Vec::new();
    while cursor < facets.len() {
        if !facets[cursor].alive || facets[cursor].outside.is_empty() {
            cursor += 1;
            continue;
        }
        let seed = cursor;
        let apex = {
            let f = &facets[seed];
            *f.outside
                .iter()
                .max_by(|&&a, &&b| {
                    let da = cdot(&f.normal, &pts[a], d);
                    let db = cdot(&f.normal, &pts[b], d);
                    da.total_cmp(&db)
                })
                .unwrap()
        };
        let p = pts[apex];

        // visible region: connected component of the seed facet
        is_visible.clear();
        is_visible.resize(facets.len(), false);
        visible.clear();
        visible.push(seed);
        is_visible[seed] = true;
        let mut head = 0;
        let mut horizon: Vec<(RidgeKey, usize)> = Vec::new();
        while head < visible.len() {
            let fid = visible[head];
            head += 1;
            for skip in 0..d {
                let key = ridge_key(&facets[fid].v, d, skip);
                let pair = ridges[&key];
                let other = if pair[0] == fid { pair[1] } else { pair[0] };
                if other == NONE || is_visible[other] {
                    continue;
                }
                let g = &facets[other];
                if cdot(&g.normal, &p, d) - g.offset > eps {
                    is_visible[other] = true;
                    visible.push(other);
                } else {
                    horizon.push((key, fid));
                }
            }
        }
        // a ridge can be pushed twice if it was queued before its neighbour turned visible
        horizon.retain(|(key, _)| {
            let pair = ridges[key];
            !(is_visible[pair[0]] && pair[1] != NONE && is_visible[pair[1]])
        });

        let mut orphans: Vec<usize> = Vec::new();
        for &fid in &visible {
            facets[fid].alive = false;
            orphans.append(&mut facets[fid].outside);
            for skip in 0..d {
                let key = ridge_key(&facets[fid].v, d, skip);
                if let Some(slot) = ridges.get_mut(&key) {
                    if slot[0] == fid {
                        slot[0] = slot[1];
                    }
                    slot[1] = NONE;
                    if slot[0] == NONE {
                        ridges.remove(&key);
                    }
                }
            }
        }

        let first_new = facets.len();
        for (key, _) in &horizon {
            let mut v = [NONE; 4];
            v[..d - 1].copy_from_slice(&key[..d - 1]);
            v[d - 1] = apex;
            let f = make_facet(v);
            let id = facets.len();
            link(&mut ridges, &f, id);
            facets.push(f);
        }

        for q in orphans {
            if q == apex {
                continue;
            }
            let pq = pts[q];
            for f in facets[first_new..].iter_mut() {
                if cdot(&f.normal, &pq, d) - f.offset > eps {
                    f.outside.push(q);
                    break;
                }
            }
        }
    }

    facets.into_iter().filter(|f| f.alive).map(|f| f.v).collect()
}

/// Incremental hull followed by pruning of vertices whose normal cone is not
/// full-dimensional; repeats on the reduced set until stable.
fn pruned_incremental(coords: &[Coord], d: usize, eps: f64) -> (Vec<usize>, Vec<[usize; 4]>) {
    let mut active: Vec<usize> = (0..coords.len()).collect();
    loop {
        let sub: Vec<Coord> = active.iter().map(|&i| coords[i]).collect();
        let facets = incremental(&sub, d, eps);
        let mut incident: HashMap<usize, Vec<Coord>> = HashMap::new();
        for f in &facets {
            let corners: Vec<Coord> = (0..d).map(|i| sub[f[i]]).collect();
            let n = simplex_normal(&corners, d).unwrap_or([0.0; 4]);
            for &v in &f[..d] {
                incident.entry(v).or_default().push(n);
            }
        }
        let mut keep: Vec<usize> = incident
            .iter()
            .filter(|(_, normals)| normal_rank(normals, d) == d)
            .map(|(&v, _)| v)
            .collect();
        keep.sort_unstable();
        if keep.len() == incident.len() {
            let map = |i: usize| if i == NONE { NONE } else { active[i] };
            let facets = facets
                .iter()
                .map(|f| [map(f[0]), map(f[1]), map(f[2]), map(f[3])])
                .collect();
            let vertices = keep.iter().map(|&i| active[i]).collect();
            return (vertices, facets);
        }
        active = keep.iter().map(|&i| active[i]).collect();
    }
}

/// Numerical rank of a set of unit vectors (greedy Gram-Schmidt).
pub(crate) fn normal_rank(normals: &[Coord], d: usize) -> usize {
    let mut basis: Vec<Coord> = Vec::new();
    let mut remaining: Vec<Coord> = normals.to_vec();
    while basis.len() < d {
        let mut best = (NORMAL_RANK_EPS, None);
        for r in &remaining {
            let len = cnorm(r, d);
            if len > best.0 {
                best = (len, Some(*r));
            }
        }
        let Some(mut b) = best.1 else { break };
        let len = best.0;
        for x in b.iter_mut() {
            *x /= len;
        }
        for r in remaining.iter_mut() {
            let c = cdot(&b, r, d);
            for k in 0..d {
                r[k] -= c * b[k];
            }
        }
        basis.push(b);
    }
    basis.len()
}

/// Outward unit normal and offset of an intrinsic boundary facet.
pub(crate) fn facet_plane(coords: &[Coord], facet: &[usize; 4], d: usize, interior: &Coord) -> (Coord, f64) {
    let mut normal = match d {
        1 => [1.0, 0.0, 0.0, 0.0],
        2 => {
            let a = coords[facet[0]];
            let b = coords[facet[1]];
            let t = csub(&b, &a);
            let len = cnorm(&t, 2);
            [t[1] / len, -t[0] / len, 0.0, 0.0]
        }
        _ => {
            let corners: Vec<Coord> = (0..d).map(|i| coords[facet[i]]).collect();
            simplex_normal(&corners, d).unwrap_or([0.0; 4])
        }
    };
    let mut offset = cdot(&normal, &coords[facet[0]], d);
    if cdot(&normal, interior, d) > offset {
        for x in normal.iter_mut() {
            *x = -*x;
        }
        offset = -offset;
    }
    (normal, offset)
}
