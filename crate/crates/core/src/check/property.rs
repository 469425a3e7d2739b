use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A property an operator may or may not have.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PropertyKind {
    /// `vol(◇K) <= C vol(K)`.
    RS,
    /// `vol(◇K) >= c vol(K)`.
    BM,
    /// `W_l(◇K) <= C W_l(K)`.
    RSQuermass(usize),
    /// `W_l(◇K) >= c W_l(K)`.
    BMQuermass(usize),
    /// `◇(K ∪ L) + ◇(K ∩ L) = ◇K + ◇L` whenever `K ∪ L` is convex.
    Valuation,
    GLCovariance,
    SLCovariance,
    TranslationInvariance,
    ProjectionCovariance,
    Additivity,
    Monotonicity,
    /// `◇(λK) = λ^k ◇K` for `λ > 0`.
    Homogeneity(f64),
    /// Every image is origin-symmetric.
    OSymmetrization,
    /// `◇K = λK` for origin-symmetric `K` with one fixed `λ`.
    Homothety,
    /// `dim ◇K = dim K` on `k`-dimensional inputs.
    DimensionPreservation(usize),
    /// `h_M(1,1) = 0` forces `◇K = {0}`.
    TrivialityFromM,
    /// Sampled Hausdorff-Lipschitz behavior under small perturbations.
    LipschitzSample,
}

impl PropertyKind {
    /// Validates the property's parameter against the ambient dimension.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            PropertyKind::RSQuermass(l) | PropertyKind::BMQuermass(l) if l >= n => {
                Err(Error::BadIndex { index: l, dim: n })
            }
            PropertyKind::Homogeneity(k) if !k.is_finite() => {
                Err(Error::BadSpec(format!("homogeneity degree must be finite, got {k}")))
            }
            PropertyKind::DimensionPreservation(k) if k > n => {
                Err(Error::BadSpec(format!("cannot test dimension {k} bodies in R^{n}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the property is a statement about continuity.
    pub fn is_continuity(&self) -> bool {
        matches!(self, PropertyKind::LipschitzSample)
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyKind::RS => write!(f, "RS"),
            PropertyKind::BM => write!(f, "BM"),
            PropertyKind::RSQuermass(l) => write!(f, "RS_quermass({l})"),
            PropertyKind::BMQuermass(l) => write!(f, "BM_quermass({l})"),
            PropertyKind::Valuation => write!(f, "Valuation"),
            PropertyKind::GLCovariance => write!(f, "GLCovariance"),
            PropertyKind::SLCovariance => write!(f, "SLCovariance"),
            PropertyKind::TranslationInvariance => write!(f, "TranslationInvariance"),
            PropertyKind::ProjectionCovariance => write!(f, "ProjectionCovariance"),
            PropertyKind::Additivity => write!(f, "Additivity"),
            PropertyKind::Monotonicity => write!(f, "Monotonicity"),
            PropertyKind::Homogeneity(k) => write!(f, "Homogeneity({k})"),
            PropertyKind::OSymmetrization => write!(f, "OSymmetrization"),
            PropertyKind::Homothety => write!(f, "Homothety"),
            PropertyKind::DimensionPreservation(k) => write!(f, "DimensionPreservation({k})"),
            PropertyKind::TrivialityFromM => write!(f, "TrivialityFromM"),
            PropertyKind::LipschitzSample => write!(f, "LipschitzSample"),
        }
    }
}

impl FromStr for PropertyKind {
    type Err = Error;

    /// Case-insensitive; underscores and dashes are ignored, so `rs_quermass(1)`,
    /// `RSQuermass(1)` and `rs-quermass(1)` are the same property.
    fn from_str(s: &str) -> Result<PropertyKind> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let bad = || Error::BadSpec(format!("unknown property '{s}'"));
        let (name, arg) = match norm.find('(') {
            Some(i) if norm.ends_with(')') => (&norm[..i], Some(&norm[i + 1..norm.len() - 1])),
            Some(_) => return Err(bad()),
            None => (norm.as_str(), None),
        };
        let int = |a: Option<&str>| -> Result<usize> {
            a.ok_or_else(bad)?.parse().map_err(|_| bad())
        };
        let plain = |p: PropertyKind| if arg.is_none() { Ok(p) } else { Err(bad()) };
        match name {
            "rs" => plain(PropertyKind::RS),
            "bm" => plain(PropertyKind::BM),
            "rsquermass" => Ok(PropertyKind::RSQuermass(int(arg)?)),
            "bmquermass" => Ok(PropertyKind::BMQuermass(int(arg)?)),
            "valuation" => plain(PropertyKind::Valuation),
            "glcovariance" | "gl" => plain(PropertyKind::GLCovariance),
            "slcovariance" | "sl" => plain(PropertyKind::SLCovariance),
            "translationinvariance" => plain(PropertyKind::TranslationInvariance),
            "projectioncovariance" => plain(PropertyKind::ProjectionCovariance),
            "additivity" => plain(PropertyKind::Additivity),
            "monotonicity" => plain(PropertyKind::Monotonicity),
            "homogeneity" => {
                let k: f64 = arg.ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if !k.is_finite() {
                    return Err(bad());
                }
                Ok(PropertyKind::Homogeneity(k))
            }
            "osymmetrization" => plain(PropertyKind::OSymmetrization),
            "homothety" => plain(PropertyKind::Homothety),
            "dimensionpreservation" => Ok(PropertyKind::DimensionPreservation(int(arg)?)),
            "trivialityfromm" => plain(PropertyKind::TrivialityFromM),
            "lipschitzsample" | "lipschitz" => plain(PropertyKind::LipschitzSample),
            _ => Err(bad()),
        }
    }
}

impl Serialize for PropertyKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PropertyKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
