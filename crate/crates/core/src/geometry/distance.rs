//! Euclidean distance from a point to the convex hull of a finite point set.
//!
//! Uses Wolfe's minimum-norm-point iteration on the translated vertex set:
//! linear-minimization steps add one vertex at a time and an affine
//! correction step keeps the active set affinely independent. It terminates
//! once the Frank-Wolfe gap drops below `GAP_TOL * scale^2`.

use nalgebra::{DMatrix, DVector};

use super::{Body, Point};

const GAP_TOL: f64 = 1e-24;
const WEIGHT_TOL: f64 = 1e-14;
const MAX_ITERS: usize = 500;

/// Nearest point of `conv(points)` to `x` and its distance.
pub fn nearest_point(points: &[Point], x: &Point) -> (Point, f64) {
    let shifted: Vec<DVector<f64>> = points.iter().map(|p| p - x).collect();
    let scale2 = shifted.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let start = (0..shifted.len())
        .min_by(|&a, &b| shifted[a].norm_squared().total_cmp(&shifted[b].norm_squared()))
        .unwrap();
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut y = shifted[start].clone();

    for _ in 0..MAX_ITERS {
        let yy = y.norm_squared();
        if yy <= GAP_TOL * scale2 {
            break;
        }
        let (j, best) = shifted
            .iter()
            .enumerate()
            .map(|(i, p)| (i, y.dot(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if yy - best <= 1e-15 * yy.max(1e-300) + GAP_TOL * scale2 || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);

        loop {
            let Some(v) = affine_minimizer(&shifted, &active) else {
                // affinely dependent set: drop the newest point and stop
                active.pop();
                weights.pop();
                break;
            };
            if v.iter().all(|&w| w > WEIGHT_TOL) {
                weights = v;
                break;
            }
            let mut theta = 1.0;
            for (w, vi) in weights.iter().zip(v.iter()) {
                if *vi <= WEIGHT_TOL && w - vi > 0.0 {
                    theta = f64::min(theta, w / (w - vi));
                }
            }
            for (w, vi) in weights.iter_mut().zip(v.iter()) {
                *w = (1.0 - theta) * *w + theta * vi;
            }
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= WEIGHT_TOL {
                    active.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= total;
            }
            if active.len() <= 1 {
                break;
            }
        }
        y = combine(&shifted, &active, &weights);
    }
    let nearest = &y + x;
    (nearest, y.norm())
}

fn combine(points: &[DVector<f64>], active: &[usize], weights: &[f64]) -> DVector<f64> {
    let mut y = DVector::zeros(points[0].len());
    for (&i, &w) in active.iter().zip(weights) {
        y.axpy(w, &points[i], 1.0);
    }
    y
}

/// Affine weights (summing to one) of the minimum-norm point of the affine
/// hull of the active points.
fn affine_minimizer(points: &[DVector<f64>], active: &[usize]) -> Option<Vec<f64>> {
    let m = active.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let p0 = &points[active[0]];
    let n = p0.len();
    let a = DMatrix::from_fn(n, m - 1, |r, c| points[active[c + 1]][r] - p0[r]);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax.max(f64::MIN_POSITIVE) {
        return None;
    }
    let alpha = svd.solve(&(-p0), 0.0).ok()?;
    let mut w = Vec::with_capacity(m);
    w.push(1.0 - alpha.sum());
    w.extend(alpha.iter().copied());
    Some(w)
}

/// Distance from `x` to the body.
pub fn distance_to_body(body: &Body, x: &Point) -> f64 {
    if body.vertices().len() == 1 {
        return (x - &body.vertices()[0]).norm();
    }
    let hull = body.hull();
    if hull.is_full() {
        let inside = hull.ambient_planes().iter().all(|(n, c)| n.dot(x) <= *c);
        if inside {
            return 0.0;
        }
    }
    // the nearest vertex is the nearest point when x - w lies in its normal cone
    let verts = body.vertices();
    let dist2 = |v: &Point| v.iter().zip(x.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let (mut wi, mut dw) = (0, f64::INFINITY);
    for (i, v) in verts.iter().enumerate() {
        let d = dist2(v);
        if d < dw {
            (wi, dw) = (i, d);
        }
    }
    let w = &verts[wi];
    let in_cone = verts.iter().all(|u| {
        (0..x.len())
            .map(|k| (x[k] - w[k]) * (u[k] - w[k]))
            .sum::<f64>()
            <= 0.0
    });
    if in_cone {
        return dw.sqrt();
    }
    nearest_point(verts, x).1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::from_row_slice(v)
    }

    #[test]
    fn distance_to_square() {
        let sq = vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[1.0, 1.0]), p(&[0.0, 1.0])];
        let (q, d) = nearest_point(&sq, &p(&[2.0, 0.5]));
        assert!((d - 1.0).abs() < 1e-14);
        assert!((q - p(&[1.0, 0.5])).norm() < 1e-14);
        let (_, d) = nearest_point(&sq, &p(&[2.0, 2.0]));
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
        let (_, d) = nearest_point(&sq, &p(&[0.3, 0.4]));
        assert!(d < 1e-14);
    }

    #[test]
    fn distance_to_tetrahedron_face() {
        let t = vec![p(&[0.0, 0.0, 0.0]), p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0])];
        let (_, d) = nearest_point(&t, &p(&[1.0, 1.0, 1.0]));
        // distance to plane x+y+z=1 from (1,1,1)
        assert!((d - 2.0 / 3f64.sqrt()).abs() < 1e-14);
    }
}
