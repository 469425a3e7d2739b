//! Polytopal stand-ins for the Euclidean unit ball.
//!
//! Vertices lie on the unit sphere, so the circumradius is 1 and the inradius
//! is `1 - gap`. Each approximation is exactly origin-symmetric and built
//! once per resolution.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, Point};

/// Resolution of the ball approximations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallResolution {
    /// Number of sides of the regular polygon used in the plane.
    pub polygon_sides: usize,
    /// Subdivision frequency of the geodesic icosahedral sphere in space.
    pub sphere_frequency: usize,
}

impl Default for BallResolution {
    /// 128-gon (gap 3.0e-4) and frequency-18 geodesic sphere with 3242
    /// vertices (gap 9.0e-4).
    fn default() -> Self {
        BallResolution {
            polygon_sides: 128,
            sphere_frequency: 18,
        }
    }
}

type Cache = Mutex<HashMap<(usize, usize), Body>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Unit-ball approximation in dimension `n` (1 to 3).
pub fn unit_ball(n: usize, res: BallResolution) -> Result<Body> {
    let key = match n {
        1 => (1, 0),
        2 => (2, res.polygon_sides),
        3 => (3, res.sphere_frequency),
        _ => {
            return Err(Error::UnsupportedForDimension {
                op: "unit ball".into(),
                dim: n,
            })
        }
    };
    if let Some(b) = cache().lock().expect("ball cache").get(&key) {
        return Ok(b.clone());
    }
    let ball = match n {
        1 => Body::from_rows(&[vec![-1.0], vec![1.0]])?,
        2 => polygon(res.polygon_sides)?,
        _ => geodesic_sphere(res.sphere_frequency)?,
    };
    // force the face structure once so clones share it
    let _ = ball.hull();
    cache().lock().expect("ball cache").insert(key, ball.clone());
    Ok(ball)
}

/// `1 - inradius / circumradius` of the approximation.
pub fn ball_gap(n: usize, res: BallResolution) -> Result<f64> {
    let ball = unit_ball(n, res)?;
    let inradius = ball
        .hull()
        .ambient_planes()
        .iter()
        .map(|(_, c)| *c)
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 - inradius)
}

/// Hull of `points ∪ -points` with the vertex set forced to be exactly
/// symmetric.
pub(crate) fn symmetric_hull(points: &[Point]) -> Result<Body> {
    let mut all: Vec<Point> = points.to_vec();
    all.extend(points.iter().map(|p| -p));
    let hull = Body::canonicalize(&all)?;
    let mut verts: Vec<Point> = hull.vertices().to_vec();
    verts.extend(hull.vertices().iter().map(|p| -p));
    Body::from_extreme_points(verts)
}

/// Rounds to a 2^-40 grid so that points computed along different paths
/// coincide exactly.
fn snap(p: Point) -> Point {
    const GRID: f64 = (1u64 << 40) as f64;
    p.map(|x| (x * GRID).round() / GRID + 0.0)
}

fn polygon(sides: usize) -> Result<Body> {
    if sides < 4 || sides % 2 != 0 {
        return Err(Error::BadSpec(format!("ball polygon needs an even number >= 4 of sides, got {sides}")));
    }
    let half: Vec<Point> = (0..sides / 2)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / sides as f64;
            snap(Point::from_row_slice(&[t.cos(), t.sin()]))
        })
        .collect();
    symmetric_hull(&half)
}

fn geodesic_sphere(frequency: usize) -> Result<Body> {
    if frequency == 0 {
        return Err(Error::BadSpec("sphere frequency must be positive".into()));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let ico: Vec<Point> = raw.iter().map(|r| Point::from_row_slice(r).normalize()).collect();
    let ico_body = Body::canonicalize(&ico)?;
    let hull = ico_body.hull();
    let f = frequency;
    let mut pts = Vec::with_capacity(10 * f * f + 2);
    for face in hull.facets() {
        let (a, b, c) = (
            &ico_body.vertices()[face[0]],
            &ico_body.vertices()[face[1]],
            &ico_body.vertices()[face[2]],
        );
        for i in 0..=f {
            for j in 0..=f - i {
                let k = f - i - j;
                let p = a * i as f64 + b * j as f64 + c * k as f64;
                pts.push(snap(p.normalize()));
            }
        }
    }
    symmetric_hull(&pts)
}
