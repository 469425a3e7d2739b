//! Seeded Monte-Carlo estimators over the sphere and the Grassmannian.
//!
//! Work is split into fixed-size chunks; chunk `j` draws from stream
//! `(seed, j)` and partial sums are folded in chunk order, so estimates are
//! identical however rayon schedules the chunks.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{unit_ball_volume, volume, Estimate};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_body, Body, Point};
use crate::rng::{haar_frame, stream, unit_vector, StreamRng};

const CHUNK: usize = 2048;

#[derive(Clone, Copy, Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn estimate(&self, factor: f64) -> Estimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
        Estimate {
            value: factor * mean,
            stderr: factor * (var / n).sqrt(),
        }
    }
}

fn chunked<F>(samples: usize, seed: u64, f: F) -> Moments
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, j as u64);
            let len = CHUNK.min(samples - j * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Constant `c(l,n)` with `W_{n-l}(K) = c(l,n) E[vol_l(K|E)]` for Haar-random
/// `E` in Gr(l,n). Fixed by the unit ball: every quermassintegral of `B_n`
/// equals `kappa_n` and every l-dimensional projection has volume `kappa_l`.
pub fn kubota_constant(l: usize, n: usize) -> f64 {
    unit_ball_volume(n) / unit_ball_volume(l)
}

/// l-volume of the projection of `vertices` onto the column span of `frame`.
fn projected_volume(vertices: &[Point], frame: &DMatrix<f64>) -> f64 {
    match frame.ncols() {
        1 => {
            let col = frame.column(0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in vertices {
                let s = col.dot(v);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            hi - lo
        }
        2 => {
            let (c0, c1) = (frame.column(0), frame.column(1));
            let mut pts: Vec<(f64, f64)> = vertices.iter().map(|v| (c0.dot(v), c1.dot(v))).collect();
            planar_hull_area(&mut pts)
        }
        _ => {
            let pts: Vec<Point> = vertices.iter().map(|v| frame.tr_mul(v)).collect();
            Body::canonicalize(&pts).map(|b| volume(&b)).unwrap_or(0.0)
        }
    }
}

/// Area of the convex hull of planar points (monotone chain + shoelace).
fn planar_hull_area(pts: &mut [(f64, f64)]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    let m = hull.len();
    if m < 3 {
        return 0.0;
    }
    let twice: f64 = (0..m)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % m]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum();
    0.5 * twice.abs()
}

/// Kubota estimate of `W_index(K)` from projections onto `l = n - index`
/// dimensional Haar-random subspaces.
pub fn quermassintegral_kubota_mc(body: &Body, index: usize, trials: usize, seed: u64) -> Result<Estimate> {
    let n = body.ambient_dim();
    if index == 0 || index >= n {
        return Err(Error::BadIndex { index, dim: n });
    }
    if trials < 100 {
        return Err(Error::BadSpec(format!("kubota needs at least 100 trials, got {trials}")));
    }
    let l = n - index;
    let vertices = body.vertices();
    let m = chunked(trials, seed, |rng| projected_volume(vertices, &haar_frame(rng, n, l)));
    Ok(m.estimate(kubota_constant(l, n)))
}

/// Mean width: average of `width(K,u)` over uniform unit `u`.
pub fn mean_width(body: &Body, samples: usize, seed: u64) -> Result<Estimate> {
    if samples < 1000 {
        return Err(Error::BadSpec(format!("mean width needs at least 1000 samples, got {samples}")));
    }
    let n = body.ambient_dim();
    let m = chunked(samples, seed, |rng| body.width(&unit_vector(rng, n)));
    Ok(m.estimate(1.0))
}

/// Steiner point `n E[h_K(u) u]` over uniform unit `u`.
///
/// Directions are drawn in antipodal pairs and the sum is corrected by the
/// inverse empirical second moment `(n/N) sum u u^T`. The estimator is then
/// exact for points, exactly translation-equivariant, and exactly zero for
/// origin-symmetric bodies. Returns the estimate and per-coordinate standard
/// errors.
pub fn steiner_point(body: &Body, samples: usize, seed: u64) -> Result<(Point, Point)> {
    if samples < 10_000 {
        return Err(Error::BadSpec(format!("steiner point needs at least 10^4 samples, got {samples}")));
    }
    let n = body.ambient_dim();
    let pairs = samples.div_ceil(2);
    let chunks = pairs.div_ceil(CHUNK);
    type Acc = (Point, DMatrix<f64>, Point);
    let parts: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, j as u64);
            let len = CHUNK.min(pairs - j * CHUNK);
            let mut sum = Point::zeros(n);
            let mut second = DMatrix::zeros(n, n);
            let mut sq = Point::zeros(n);
            for _ in 0..len {
                let u = unit_vector(&mut rng, n);
                let neg = -&u;
                let g = (body.support(&u) - body.support(&neg)) * 0.5;
                let term = &u * g;
                sq += term.component_mul(&term);
                sum += term;
                second.ger(1.0, &u, &u, 1.0);
            }
            (sum, second, sq)
        })
        .collect();
    let (sum, second, sq) = parts.into_iter().fold(
        (Point::zeros(n), DMatrix::zeros(n, n), Point::zeros(n)),
        |(a, b, c), (x, y, z)| (a + x, b + y, c + z),
    );
    let count = pairs as f64;
    let correction = second.try_inverse().ok_or(Error::SingularMatrix { det: 0.0 })?;
    let estimate = &correction * &sum;
    let mean = &sum / count;
    let var = (&sq / count - mean.component_mul(&mean)) * (count / (count - 1.0));
    let stderr = var.map(|v| (v.max(0.0) / count).sqrt() * n as f64);
    Ok((estimate, stderr))
}

/// Hit-or-miss estimate of `vol(K + rho B_n)` over the bounding box.
pub fn parallel_volume_mc(body: &Body, rho: f64, samples: usize, seed: u64) -> Result<Estimate> {
    if samples == 0 || !(rho >= 0.0) {
        return Err(Error::BadSpec("parallel volume needs samples > 0 and rho >= 0".into()));
    }
    let n = body.ambient_dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for v in body.vertices() {
        for i in 0..n {
            lo[i] = lo[i].min(v[i] - rho);
            hi[i] = hi[i].max(v[i] + rho);
        }
    }
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if box_volume <= 0.0 {
        return Ok(Estimate { value: 0.0, stderr: 0.0 });
    }
    let _ = body.hull();
    let m = chunked(samples, seed, |rng| {
        use rand::Rng;
        let x = Point::from_fn(n, |i, _| rng.random_range(lo[i]..hi[i]));
        if distance_to_body(body, &x) <= rho {
            1.0
        } else {
            0.0
        }
    });
    Ok(m.estimate(box_volume))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn body(rows: &[&[f64]]) -> Body {
        Body::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn kubota_constant_reproduces_ball() {
        for n in 2..=4 {
            for l in 1..n {
                let w = kubota_constant(l, n) * unit_ball_volume(l);
                assert!((w - unit_ball_volume(n)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn planar_area_of_square() {
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (0.5, 0.5), (1.0, 1.0), (0.0, 1.0)];
        assert!((planar_hull_area(&mut pts) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kubota_segment() {
        let seg = body(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let e = quermassintegral_kubota_mc(&seg, 1, 200, 1).unwrap();
        assert!(e.value.abs() < 1e-12);
        let e = quermassintegral_kubota_mc(&seg, 2, 20_000, 2).unwrap();
        assert!(e.agrees_with(PI / 3.0, 4.0), "{e:?}");
    }

    #[test]
    fn kubota_rejects_bad_index() {
        let seg = body(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert!(matches!(quermassintegral_kubota_mc(&seg, 0, 100, 0), Err(Error::BadIndex { .. })));
        assert!(matches!(quermassintegral_kubota_mc(&seg, 3, 100, 0), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn kubota_is_deterministic() {
        let t = body(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let a = quermassintegral_kubota_mc(&t, 1, 5000, 3).unwrap();
        let b = quermassintegral_kubota_mc(&t, 1, 5000, 3).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn steiner_point_of_point_and_symmetric_body() {
        let p = body(&[&[0.3, -1.2, 2.0]]);
        let (s, _) = steiner_point(&p, 10_000, 5).unwrap();
        assert!((s - Point::from_row_slice(&[0.3, -1.2, 2.0])).norm() < 1e-12);
        let sq = body(&[&[-1.0, -2.0], &[1.0, -2.0], &[1.0, 2.0], &[-1.0, 2.0]]);
        let (s, _) = steiner_point(&sq, 10_000, 5).unwrap();
        assert!(s.norm() < 1e-12);
    }

    #[test]
    fn steiner_point_translates() {
        let t = body(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let shift = Point::from_row_slice(&[2.0, -1.0]);
        let moved = crate::geometry::translate(&t, &shift).unwrap();
        let (a, _) = steiner_point(&t, 10_000, 9).unwrap();
        let (b, _) = steiner_point(&moved, 10_000, 9).unwrap();
        assert!((b - a - shift).norm() < 1e-12);
    }

    #[test]
    fn mean_width_is_additive() {
        assert_eq!(mean_width(&Body::origin(2), 1000, 0).unwrap().value, 0.0);
        let t = body(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let s = body(&[&[0.0, 0.0], &[2.0, 1.0]]);
        let sum = crate::geometry::minkowski_sum(&t, &s).unwrap();
        let (a, b, c) = (
            mean_width(&t, 50_000, 1).unwrap().value,
            mean_width(&s, 50_000, 1).unwrap().value,
            mean_width(&sum, 50_000, 1).unwrap().value,
        );
        assert!(((a + b) - c).abs() <= 1e-2 * c);
    }

    #[test]
    fn parallel_volume_of_square() {
        let sq = body(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let e = parallel_volume_mc(&sq, 0.5, 40_000, 4).unwrap();
        let exact = 1.0 + 4.0 * 0.5 + PI * 0.25;
        assert!(e.agrees_with(exact, 4.0), "{e:?}");
    }
}
