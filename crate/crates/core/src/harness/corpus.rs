//! Deterministic, index-addressable body corpora.
//!
//! Item `i` of a corpus is drawn from RNG stream `(seed, i)`, so any item can
//! be regenerated on its own and parallel consumers see the same bodies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{clip_halfspace, translate, Body, Point};
use crate::operators::symmetric_hull;
use crate::rng::{gaussian_vector, haar_frame, stream, unit_vector, StreamRng};

/// Shape family of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusKind {
    /// Hull of `m` standard Gaussian points.
    RandomGaussHull { m: usize },
    /// Item 0 is `conv{0, e_1, ..., e_n}`; later items are random simplices.
    Simplex,
    /// Standard simplex with a jittered second copy of every vertex.
    NearSimplex { jitter: f64 },
    /// `[-1, 1]^n`.
    Cube,
    /// `conv{±e_i}`.
    CrossPolytope,
    /// Segment between two Gaussian points.
    Segment,
    /// A `k`-dimensional body from `inner`, placed in a random `k`-plane
    /// through a random offset point.
    LowdimEmbed { k: usize, inner: Box<CorpusKind> },
    /// `conv(X ∪ -X)` for `m` Gaussian points; reflection fixes it exactly.
    SymmetricRandom { m: usize },
    /// Pairs `(K, L)` cut from a parent body by a random hyperplane.
    SplitPairs { parent: Box<CorpusKind> },
    /// Round-robin over several kinds.
    Mixed { parts: Vec<CorpusKind> },
}

fn default_scale() -> [f64; 2] {
    [1.0, 1.0]
}

/// A corpus: a shape family plus sampling parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    #[serde(flatten)]
    pub kind: CorpusKind,
    /// Number of items; unbounded when absent.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Log-uniform range of a scale factor applied to every item.
    #[serde(default = "default_scale")]
    pub scale: [f64; 2],
    /// Standard deviation of a random translation applied before scaling.
    #[serde(default)]
    pub offset: f64,
}

/// A split of `parent` by the hyperplane `<u, x> = c` into
/// `k = parent ∩ {<u,x> <= c}` and `l = parent ∩ {<u,x> >= c}`.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub parent: Body,
    pub k: Body,
    pub l: Body,
    pub u: Point,
    pub c: f64,
}

impl SplitPair {
    /// `K ∩ L`, the slice of the parent by the cutting hyperplane.
    pub fn meet(&self) -> Result<Body> {
        clip_halfspace(&self.k, &-&self.u, -self.c)
    }
}

/// One corpus item.
#[derive(Clone, Debug)]
pub enum Sample {
    Body(Body),
    Pair(SplitPair),
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind) -> CorpusSpec {
        CorpusSpec {
            kind,
            count: None,
            seed: 0,
            scale: default_scale(),
            offset: 0.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> CorpusSpec {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> CorpusSpec {
        self.count = Some(count);
        self
    }

    pub fn with_scale(mut self, lo: f64, hi: f64) -> CorpusSpec {
        self.scale = [lo, hi];
        self
    }

    pub fn with_offset(mut self, offset: f64) -> CorpusSpec {
        self.offset = offset;
        self
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        label(&self.kind)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(1..=4).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let [lo, hi] = self.scale;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::BadSpec(format!("bad scale range [{lo}, {hi}]")));
        }
        if !(self.offset >= 0.0 && self.offset.is_finite()) {
            return Err(Error::BadSpec(format!("bad offset {}", self.offset)));
        }
        validate_kind(&self.kind, n)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        match self.count {
            Some(c) if index >= c => Err(Error::CorpusExhausted(c)),
            _ => Ok(()),
        }
    }

    fn post<R: Rng + ?Sized>(&self, rng: &mut R, body: Body) -> Result<Body> {
        let n = body.ambient_dim();
        let body = if self.offset > 0.0 {
            translate(&body, &(gaussian_vector(rng, n) * self.offset))?
        } else {
            body
        };
        let [lo, hi] = self.scale;
        if lo == 1.0 && hi == 1.0 {
            return Ok(body);
        }
        let s = if lo == hi {
            lo
        } else {
            (rng.random_range(lo.ln()..hi.ln())).exp()
        };
        crate::geometry::scale(&body, s)
    }

    /// Item `index` as a single body (split-pair corpora yield their parent).
    pub fn body(&self, n: usize, index: usize) -> Result<Body> {
        self.validate(n)?;
        self.check_index(index)?;
        let mut rng = stream(self.seed, index as u64);
        let b = match draw(&self.kind, n, index, &mut rng)? {
            Sample::Body(b) => b,
            Sample::Pair(p) => p.parent,
        };
        self.post(&mut rng, b)
    }

    /// Item `index` as a split pair.
    pub fn pair(&self, n: usize, index: usize) -> Result<SplitPair> {
        self.validate(n)?;
        self.check_index(index)?;
        let mut rng = stream(self.seed, index as u64);
        let parent = match draw(&self.kind, n, index, &mut rng)? {
            Sample::Pair(p) => return self.post_pair(&mut rng, p),
            Sample::Body(b) => b,
        };
        let parent = self.post(&mut rng, parent)?;
        split(&parent, &mut rng)
    }

    fn post_pair(&self, rng: &mut StreamRng, p: SplitPair) -> Result<SplitPair> {
        if self.offset == 0.0 && self.scale == [1.0, 1.0] {
            return Ok(p);
        }
        let parent = self.post(rng, p.parent)?;
        split(&parent, rng)
    }

    /// All items; requires a finite count.
    pub fn generate(&self, n: usize) -> Result<Vec<Sample>> {
        let count = self
            .count
            .ok_or_else(|| Error::BadSpec("generate needs a corpus count".into()))?;
        (0..count)
            .map(|i| {
                if self.is_pairs() {
                    self.pair(n, i).map(Sample::Pair)
                } else {
                    self.body(n, i).map(Sample::Body)
                }
            })
            .collect()
    }

    pub fn is_pairs(&self) -> bool {
        matches!(self.kind, CorpusKind::SplitPairs { .. })
    }
}

fn label(kind: &CorpusKind) -> String {
    match kind {
        CorpusKind::RandomGaussHull { m } => format!("random_gauss_hull({m})"),
        CorpusKind::Simplex => "simplex".into(),
        CorpusKind::NearSimplex { jitter } => format!("near_simplex({jitter})"),
        CorpusKind::Cube => "cube".into(),
        CorpusKind::CrossPolytope => "cross_polytope".into(),
        CorpusKind::Segment => "segment".into(),
        CorpusKind::LowdimEmbed { k, inner } => format!("lowdim_embed({k}, {})", label(inner)),
        CorpusKind::SymmetricRandom { m } => format!("symmetric_random({m})"),
        CorpusKind::SplitPairs { parent } => format!("split_pairs({})", label(parent)),
        CorpusKind::Mixed { parts } => {
            let inner: Vec<String> = parts.iter().map(label).collect();
            format!("mixed({})", inner.join(", "))
        }
    }
}

fn validate_kind(kind: &CorpusKind, n: usize) -> Result<()> {
    match kind {
        CorpusKind::RandomGaussHull { m } if *m < n + 1 => Err(Error::BadSpec(format!(
            "random_gauss_hull needs m >= n+1 = {}, got {m}",
            n + 1
        ))),
        CorpusKind::SymmetricRandom { m } if *m < n => Err(Error::BadSpec(format!(
            "symmetric_random needs m >= n = {n}, got {m}"
        ))),
        CorpusKind::NearSimplex { jitter } if !(0.0..=0.1).contains(jitter) => {
            Err(Error::BadSpec(format!("jitter must lie in [0, 0.1], got {jitter}")))
        }
        CorpusKind::LowdimEmbed { k, inner } => {
            if *k > n {
                return Err(Error::BadSpec(format!("cannot embed dimension {k} into R^{n}")));
            }
            if *k == 0 {
                Ok(())
            } else {
                validate_kind(inner, *k)
            }
        }
        CorpusKind::SplitPairs { parent } => {
            if n > 3 {
                return Err(Error::UnsupportedDimension(n));
            }
            validate_kind(parent, n)
        }
        CorpusKind::Mixed { parts } => {
            if parts.is_empty() {
                return Err(Error::BadSpec("mixed corpus needs at least one part".into()));
            }
            parts.iter().try_for_each(|p| validate_kind(p, n))
        }
        _ => Ok(()),
    }
}

fn standard_simplex(n: usize) -> Vec<Point> {
    let mut pts = vec![Point::zeros(n)];
    for i in 0..n {
        let mut e = Point::zeros(n);
        e[i] = 1.0;
        pts.push(e);
    }
    pts
}

fn gaussian_points<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Vec<Point> {
    (0..m).map(|_| gaussian_vector(rng, n)).collect()
}

/// Gaussian hull, redrawn until it is full-dimensional.
fn full_hull<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<Body> {
    for _ in 0..16 {
        let b = Body::canonicalize(&gaussian_points(rng, n, m))?;
        if b.is_full_dimensional() {
            return Ok(b);
        }
    }
    Err(Error::CorpusExhausted(16))
}

fn draw<R: Rng + ?Sized>(kind: &CorpusKind, n: usize, index: usize, rng: &mut R) -> Result<Sample> {
    let body = match kind {
        CorpusKind::RandomGaussHull { m } => full_hull(rng, n, *m)?,
        CorpusKind::Simplex => {
            if index == 0 {
                Body::canonicalize(&standard_simplex(n))?
            } else {
                full_hull(rng, n, n + 1)?
            }
        }
        CorpusKind::NearSimplex { jitter } => {
            let base = standard_simplex(n);
            let mut pts = base.clone();
            for v in &base {
                pts.push(v + gaussian_vector(rng, n) * *jitter);
            }
            Body::canonicalize(&pts)?
        }
        CorpusKind::Cube => {
            let pts: Vec<Point> = (0..1usize << n)
                .map(|mask| Point::from_fn(n, |i, _| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }))
                .collect();
            Body::canonicalize(&pts)?
        }
        CorpusKind::CrossPolytope => {
            let mut pts = Vec::new();
            for i in 0..n {
                for s in [-1.0, 1.0] {
                    let mut e = Point::zeros(n);
                    e[i] = s;
                    pts.push(e);
                }
            }
            Body::canonicalize(&pts)?
        }
        CorpusKind::Segment => {
            let a = gaussian_vector(rng, n);
            let b = &a + unit_vector(rng, n) * rng.random_range(0.5..2.0);
            Body::canonicalize(&[a, b])?
        }
        CorpusKind::LowdimEmbed { k, inner } => {
            let offset = gaussian_vector(rng, n);
            if *k == 0 {
                Body::point(offset)?
            } else {
                let local = match draw(inner, *k, index, rng)? {
                    Sample::Body(b) => b,
                    Sample::Pair(p) => p.parent,
                };
                if *k == n {
                    translate(&local, &offset)?
                } else {
                    let frame = haar_frame(rng, n, *k);
                    let pts: Vec<Point> = local.vertices().iter().map(|w| &frame * w + &offset).collect();
                    Body::canonicalize(&pts)?
                }
            }
        }
        CorpusKind::SymmetricRandom { m } => {
            let mut last = None;
            for _ in 0..16 {
                let b = symmetric_hull(&gaussian_points(rng, n, *m))?;
                if b.is_full_dimensional() {
                    last = Some(b);
                    break;
                }
            }
            last.ok_or(Error::CorpusExhausted(16))?
        }
        CorpusKind::SplitPairs { parent } => {
            let p = match draw(parent, n, index, rng)? {
                Sample::Body(b) => b,
                Sample::Pair(p) => p.parent,
            };
            return split(&p, rng).map(Sample::Pair);
        }
        CorpusKind::Mixed { parts } => {
            let part = &parts[index % parts.len()];
            return draw(part, n, index / parts.len(), rng);
        }
    };
    Ok(Sample::Body(body))
}

/// Cuts `parent` by a random hyperplane through its middle half.
fn split<R: Rng + ?Sized>(parent: &Body, rng: &mut R) -> Result<SplitPair> {
    let n = parent.ambient_dim();
    let u = unit_vector(rng, n);
    let lo = -parent.support(&-&u);
    let hi = parent.support(&u);
    let c = lo + (hi - lo) * rng.random_range(0.25..0.75);
    let k = clip_halfspace(parent, &u, c)?;
    let l = clip_halfspace(parent, &-&u, -c)?;
    Ok(SplitPair {
        parent: parent.clone(),
        k,
        l,
        u,
        c,
    })
}
