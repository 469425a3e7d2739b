use nalgebra::DMatrix;

use super::volume;
use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum_all, scale, Body};

/// Smallest reciprocal condition number accepted for the interpolation system.
const MIN_RCOND: f64 = 1e-12;

/// `V(K_1[m_1], ..., K_r[m_r])` with multiplicities summing to n.
#[derive(Clone, Debug)]
pub struct MixedVolumeQuery {
    pub bodies: Vec<Body>,
    pub multiplicity: Vec<usize>,
}

/// All exponent vectors of length `m` with entries summing to `n`.
fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn multinomial(n: usize, alpha: &[usize]) -> f64 {
    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    fact(n) / alpha.iter().map(|&a| fact(a)).product::<f64>()
}

/// Mixed volume by interpolating the homogeneous polynomial
/// `lambda -> vol(lambda_1 K_1 + ... + lambda_m K_m)` on a lattice of nodes.
pub fn mixed_volume(q: &MixedVolumeQuery) -> Result<f64> {
    let m = q.bodies.len();
    if m == 0 || q.multiplicity.len() != m {
        return Err(Error::BadSpec("one multiplicity per body is required".into()));
    }
    let n = q.bodies[0].ambient_dim();
    for b in &q.bodies {
        if b.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.ambient_dim(),
            });
        }
    }
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if q.multiplicity.iter().sum::<usize>() != n {
        return Err(Error::BadSpec(format!("multiplicities must sum to {n}")));
    }

    let monomials = compositions(n, m);
    let mut last_rcond = 0.0;
    // shifted lattices stay unisolvent for homogeneous polynomials
    for shift in 0..3usize {
        let nodes: Vec<Vec<f64>> = monomials
            .iter()
            .map(|a| a.iter().map(|&x| (x + shift) as f64).collect())
            .collect();
        let sys = DMatrix::from_fn(nodes.len(), monomials.len(), |r, c| {
            nodes[r]
                .iter()
                .zip(&monomials[c])
                .map(|(l, &e)| l.powi(e as i32))
                .product()
        });
        let sv = sys.singular_values();
        let rcond = sv.min() / sv.max();
        last_rcond = rcond;
        if rcond < MIN_RCOND {
            continue;
        }
        let mut rhs = nodes
            .iter()
            .map(|lambda| {
                let parts: Vec<Body> = q
                    .bodies
                    .iter()
                    .zip(lambda)
                    .filter(|(_, &l)| l > 0.0)
                    .map(|(b, &l)| scale(b, l))
                    .collect::<Result<_>>()?;
                if parts.is_empty() {
                    return Ok(0.0);
                }
                Ok(volume(&minkowski_sum_all(&parts)?))
            })
            .collect::<Result<Vec<f64>>>()?;
        let coeffs = sys
            .lu()
            .solve(&nalgebra::DVector::from_vec(std::mem::take(&mut rhs)))
            .ok_or(Error::IllConditionedInterpolation { rcond })?;
        let idx = monomials.iter().position(|a| a == &q.multiplicity).expect("multiplicity is a composition");
        return Ok(coeffs[idx] / multinomial(n, &q.multiplicity));
    }
    Err(Error::IllConditionedInterpolation { rcond: last_rcond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn body(rows: &[&[f64]]) -> Body {
        Body::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn diagonal_is_volume() {
        let sq = body(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let v = mixed_volume(&MixedVolumeQuery {
            bodies: vec![sq.clone(), sq],
            multiplicity: vec![1, 1],
        })
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_segments() {
        // vol(S1 + S2) = 1 = 2 V(S1, S2)
        let s1 = body(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let s2 = body(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let v = mixed_volume(&MixedVolumeQuery {
            bodies: vec![s1, s2],
            multiplicity: vec![1, 1],
        })
        .unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_queries() {
        let s = Body::origin(2);
        let q = MixedVolumeQuery {
            bodies: vec![s.clone()],
            multiplicity: vec![1],
        };
        assert!(matches!(mixed_volume(&q), Err(Error::BadSpec(_))));
        let four = Body::point(Point::zeros(4)).unwrap();
        let q = MixedVolumeQuery {
            bodies: vec![four],
            multiplicity: vec![4],
        };
        assert!(matches!(mixed_volume(&q), Err(Error::UnsupportedDimension(4))));
    }
}
