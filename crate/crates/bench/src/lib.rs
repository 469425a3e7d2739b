//! Shared fixtures for the kernel benchmarks.

use convexop::geometry::{scale, translate};
use convexop::harness::{CorpusKind, CorpusSpec};
use convexop::rng::{gaussian_vector, stream};
use convexop::{Body, Point};

/// Convex hull of `m` Gaussian points in R^n.
pub fn gauss_hull(n: usize, m: usize, seed: u64) -> Body {
    let mut rng = stream(seed, 0);
    let pts: Vec<Point> = (0..m).map(|_| gaussian_vector(&mut rng, n)).collect();
    Body::canonicalize(&pts).expect("gaussian hull")
}

/// The `index`-th body of the random hull corpus used by the checks.
pub fn corpus_body(n: usize, index: usize) -> Body {
    CorpusSpec::new(CorpusKind::RandomGaussHull { m: 2 * n + 4 })
        .with_seed(11)
        .body(n, index)
        .expect("corpus body")
}

/// A body and a slightly moved, rescaled copy of it.
pub fn nearby_pair(n: usize, m: usize) -> (Body, Body) {
    let k = gauss_hull(n, m, 5);
    let shift = Point::from_element(n, 0.01);
    let l = translate(&scale(&k, 1.02).expect("scale"), &shift).expect("translate");
    (k, l)
}
