//! Volumes, quermassintegrals, mixed volumes and selection points.
//!
//! Exact kernels work from the triangulated hull; the Monte-Carlo estimators
//! always return a standard error alongside the estimate.

mod mixed;
mod monte_carlo;

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use mixed::{mixed_volume, MixedVolumeQuery};
pub use monte_carlo::{kubota_constant, mean_width, parallel_volume_mc, quermassintegral_kubota_mc, steiner_point};

use crate::error::{Error, Result};
use crate::geometry::hull::Coord;
use crate::geometry::{Body, Point};

/// Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Coefficients `W_0..W_n` of `vol(K + rho B) = sum_i binom(n,i) W_i rho^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteinerCoefficients {
    pub n: usize,
    pub w: Vec<f64>,
}

impl SteinerCoefficients {
    /// Evaluates the Steiner polynomial at `rho`.
    pub fn parallel_volume(&self, rho: f64) -> f64 {
        (0..=self.n)
            .map(|i| binomial(self.n, i) * self.w[i] * rho.powi(i as i32))
            .sum()
    }
}

/// Volume of the Euclidean unit ball in R^m.
pub fn unit_ball_volume(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * unit_ball_volume(m - 2),
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn det(rows: &[Coord], d: usize) -> f64 {
    match d {
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => {
            let (a, b, c) = (rows[0], rows[1], rows[2]);
            a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0])
        }
        _ => DMatrix::from_fn(d, d, |i, j| rows[i][j]).determinant(),
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|x| x as f64).product()
}

/// Cone decomposition of the intrinsic hull: `(volume, centroid)` pairs of the
/// simplices spanned by the interior point and each boundary facet.
fn cones(body: &Body) -> Vec<(f64, Coord)> {
    let h = body.hull();
    let d = h.dim();
    let c = h.interior;
    h.facets
        .iter()
        .map(|f| {
            let rows: Vec<Coord> = (0..d)
                .map(|i| {
                    let v = h.coords[f[i]];
                    [v[0] - c[0], v[1] - c[1], v[2] - c[2], v[3] - c[3]]
                })
                .collect();
            let vol = det(&rows, d).abs() / factorial(d);
            let mut centroid = c;
            for row in &rows {
                for k in 0..d {
                    centroid[k] += row[k] / (d + 1) as f64;
                }
            }
            (vol, centroid)
        })
        .collect()
}

/// k-dimensional volume of a body within its affine hull (k = its dimension).
/// A point has relative volume 1.
pub fn relative_volume(body: &Body) -> f64 {
    if body.hull().dim() == 0 {
        return 1.0;
    }
    cones(body).iter().map(|(v, _)| v).sum()
}

/// n-dimensional Lebesgue measure; zero for lower-dimensional bodies.
pub fn volume(body: &Body) -> f64 {
    if body.hull().dim() < body.ambient_dim() {
        return 0.0;
    }
    relative_volume(body)
}

/// Centroid of the relative interior (for any dimension).
pub(crate) fn relative_centroid(body: &Body) -> Point {
    let h = body.hull();
    let d = h.dim();
    let mut acc = [0.0; 4];
    let mut total = 0.0;
    if d == 0 {
        return body.vertices()[0].clone();
    }
    for (vol, cen) in cones(body) {
        total += vol;
        for k in 0..d {
            acc[k] += vol * cen[k];
        }
    }
    for x in acc.iter_mut() {
        *x /= total;
    }
    &h.frame.origin + h.frame.lift_direction(&acc)
}

/// Center of gravity of a full-dimensional body.
pub fn centroid(body: &Body) -> Result<Point> {
    let dim = body.hull().dim();
    if dim < body.ambient_dim() {
        return Err(Error::DegenerateBody {
            dim,
            ambient: body.ambient_dim(),
        });
    }
    Ok(relative_centroid(body))
}

/// Boundary measure of a body within its affine hull: perimeter in 2D,
/// surface area in 3D, length (2 endpoints count 0) in 1D.
fn boundary_measure(body: &Body) -> f64 {
    let h = body.hull();
    let d = h.dim();
    h.facets
        .iter()
        .map(|f| match d {
            2 => {
                let (a, b) = (h.coords[f[0]], h.coords[f[1]]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            }
            3 => {
                let (a, b, c) = (h.coords[f[0]], h.coords[f[1]], h.coords[f[2]]);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let x = u[1] * v[2] - u[2] * v[1];
                let y = u[2] * v[0] - u[0] * v[2];
                let z = u[0] * v[1] - u[1] * v[0];
                0.5 * (x * x + y * y + z * z).sqrt()
            }
            _ => 0.0,
        })
        .sum()
}

/// `sum over edges of length * exterior dihedral angle` for a 3-polytope.
fn edge_curvature_sum(body: &Body) -> f64 {
    let h = body.hull();
    let mut incident: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (fi, f) in h.facets.iter().enumerate() {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])] {
            incident.entry((a.min(b), a.max(b))).or_default().push(fi);
        }
    }
    let mut total = 0.0;
    for ((a, b), fs) in incident {
        if fs.len() != 2 {
            continue;
        }
        let (n1, n2) = (h.planes[fs[0]].0, h.planes[fs[1]].0);
        let cross = [
            n1[1] * n2[2] - n1[2] * n2[1],
            n1[2] * n2[0] - n1[0] * n2[2],
            n1[0] * n2[1] - n1[1] * n2[0],
        ];
        let sin = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
        let cos = n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2];
        let angle = sin.atan2(cos);
        let (pa, pb) = (h.coords[a], h.coords[b]);
        let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt();
        total += len * angle;
    }
    total
}

/// Exact quermassintegrals in the plane and in space.
///
/// Lower-dimensional bodies are handled as limits: a planar polygon in R^3
/// has exterior angle pi along every edge, a segment has 2 pi.
pub fn quermassintegrals_exact(body: &Body) -> Result<SteinerCoefficients> {
    let n = body.ambient_dim();
    let k = body.hull().dim();
    let w = match (n, k) {
        (2, 2) => vec![volume(body), boundary_measure(body) / 2.0, PI],
        (2, 1) => vec![0.0, relative_volume(body), PI],
        (2, 0) => vec![0.0, 0.0, PI],
        (3, 3) => vec![
            volume(body),
            boundary_measure(body) / 3.0,
            edge_curvature_sum(body) / 6.0,
            4.0 * PI / 3.0,
        ],
        (3, 2) => vec![
            0.0,
            2.0 * relative_volume(body) / 3.0,
            PI * boundary_measure(body) / 6.0,
            4.0 * PI / 3.0,
        ],
        (3, 1) => vec![0.0, 0.0, PI * relative_volume(body) / 3.0, 4.0 * PI / 3.0],
        (3, 0) => vec![0.0, 0.0, 0.0, 4.0 * PI / 3.0],
        _ => return Err(Error::UnsupportedDimension(n)),
    };
    Ok(SteinerCoefficients { n, w })
}

/// Quermassintegral `W_index` from the exact kernels.
pub fn quermassintegral(body: &Body, index: usize) -> Result<f64> {
    let n = body.ambient_dim();
    if index > n {
        return Err(Error::BadIndex { index, dim: n });
    }
    Ok(quermassintegrals_exact(body)?.w[index])
}

/// Mean width from the exact kernels (`2 W_{n-1} / kappa_n`); ambient
/// dimension 1 to 3.
pub fn mean_width_exact(body: &Body) -> Result<f64> {
    let n = body.ambient_dim();
    if n == 1 {
        return Ok(body.width(&Point::from_element(1, 1.0)));
    }
    let w = quermassintegral(body, n - 1)?;
    Ok(2.0 * w / unit_ball_volume(n))
}
