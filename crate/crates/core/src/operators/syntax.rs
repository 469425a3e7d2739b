//! Textual forms of [`OperatorSpec`]: the `convexop.op.v1` JSON document and
//! a compact command-line syntax such as `wannerer:1,2,3,4` or
//! `msum:0,0;1,0`.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};

use super::{Center, OperatorSpec, PlanarBody, Shift};
use crate::error::{Error, Result};
use crate::geometry::{Body, Point};
use crate::harness::io::{body_from_value, body_to_value};

pub const OP_SCHEMA: &str = "convexop.op.v1";

fn num(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::BadSpec(format!("missing numeric parameter '{key}'")))
}

fn body_param(params: &Map<String, Value>, key: &str) -> Result<Body> {
    body_from_value(
        params
            .get(key)
            .ok_or_else(|| Error::BadSpec(format!("missing body parameter '{key}'")))?,
    )
}

fn optional_body(params: &Map<String, Value>, key: &str) -> Result<Option<Body>> {
    match params.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => body_from_value(v).map(Some),
    }
}

impl OperatorSpec {
    pub fn to_json(&self) -> Value {
        let mut m_field = None;
        let params = match self {
            OperatorSpec::DifferenceBody { lambda } => json!({ "lambda": lambda }),
            OperatorSpec::LinearComb { a, b } => json!({ "a": a, "b": b }),
            OperatorSpec::Wannerer { a, b, c, d } => json!({ "a": a, "b": b, "c": c, "d": d }),
            OperatorSpec::MSum { m } => {
                m_field = Some(body_to_value(m.body()));
                json!({})
            }
            OperatorSpec::ConstantBody { body } => json!({ "body": body_to_value(body) }),
            OperatorSpec::CentroidSymm { center } => json!({
                "center": match center { Center::Steiner => "steiner", Center::Centroid => "centroid" }
            }),
            OperatorSpec::TranslateBy { shift } => match shift {
                Shift::Fixed(p) => json!({ "point": p.iter().collect::<Vec<_>>() }),
                Shift::Steiner => json!({ "point": "steiner" }),
            },
            OperatorSpec::ClipByBall { ball } => json!({ "ball": ball.as_ref().map(body_to_value) }),
            OperatorSpec::DimGatedD { fallback } => json!({ "fallback": fallback.as_ref().map(body_to_value) }),
            OperatorSpec::SegmentVolume { base, segment } => json!({
                "base": body_to_value(base),
                "segment": body_to_value(segment),
            }),
            _ => json!({}),
        };
        let mut doc = json!({ "schema": OP_SCHEMA, "kind": self.kind(), "params": params });
        if let Some(m) = m_field {
            doc["M"] = m;
        }
        doc
    }

    pub fn from_json(doc: &Value) -> Result<OperatorSpec> {
        let schema = doc.get("schema").and_then(Value::as_str).unwrap_or_default();
        if schema != OP_SCHEMA {
            return Err(Error::BadSpec(format!("expected schema {OP_SCHEMA}, found '{schema}'")));
        }
        let kind = doc
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::BadSpec("operator document has no kind".into()))?;
        let empty = Map::new();
        let params = doc.get("params").and_then(Value::as_object).unwrap_or(&empty);
        let spec = match kind {
            "DifferenceBody" => OperatorSpec::DifferenceBody {
                lambda: num(params, "lambda")?,
            },
            "LinearComb" => OperatorSpec::LinearComb {
                a: num(params, "a")?,
                b: num(params, "b")?,
            },
            "HullOrigin" => OperatorSpec::HullOrigin,
            "Wannerer" => OperatorSpec::Wannerer {
                a: num(params, "a")?,
                b: num(params, "b")?,
                c: num(params, "c")?,
                d: num(params, "d")?,
            },
            "MSum" => {
                let m = doc
                    .get("M")
                    .ok_or_else(|| Error::BadSpec("MSum needs an \"M\" body".into()))?;
                OperatorSpec::MSum {
                    m: PlanarBody::new(body_from_value(m)?)?,
                }
            }
            "ConstantBody" => OperatorSpec::ConstantBody {
                body: body_param(params, "body")?,
            },
            "CentroidSymm" => OperatorSpec::CentroidSymm {
                center: match params.get("center").and_then(Value::as_str) {
                    Some("steiner") => Center::Steiner,
                    Some("centroid") => Center::Centroid,
                    other => return Err(Error::BadSpec(format!("unknown center {other:?}"))),
                },
            },
            "TranslateBy" => OperatorSpec::TranslateBy {
                shift: match params.get("point") {
                    Some(Value::String(s)) if s == "steiner" => Shift::Steiner,
                    Some(Value::Array(xs)) => {
                        let coords = xs
                            .iter()
                            .map(|x| x.as_f64().ok_or_else(|| Error::BadSpec("non-numeric point".into())))
                            .collect::<Result<Vec<f64>>>()?;
                        Shift::Fixed(Point::from_vec(coords))
                    }
                    _ => return Err(Error::BadSpec("TranslateBy needs a point or \"steiner\"".into())),
                },
            },
            "VolumeScaledD" => OperatorSpec::VolumeScaledD,
            "ClipByBall" => OperatorSpec::ClipByBall {
                ball: optional_body(params, "ball")?,
            },
            "DimGatedD" => OperatorSpec::DimGatedD {
                fallback: optional_body(params, "fallback")?,
            },
            "MeanWidthBall" => OperatorSpec::MeanWidthBall,
            "IntersectUnitBall" => OperatorSpec::IntersectUnitBall,
            "VolumeBall" => OperatorSpec::VolumeBall,
            "SegmentVolume" => OperatorSpec::SegmentVolume {
                base: body_param(params, "base")?,
                segment: body_param(params, "segment")?,
            },
            "EdgeZonotopePlusD" => OperatorSpec::EdgeZonotopePlusD,
            other => return Err(Error::BadSpec(format!("unknown operator kind '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadSpec(format!("not a number: '{x}'")))
        })
        .collect()
}

fn parse_body(s: &str) -> Result<Body> {
    let rows = s.split(';').map(parse_numbers).collect::<Result<Vec<_>>>()?;
    Body::from_rows(&rows)
}

fn write_body(f: &mut fmt::Formatter<'_>, b: &Body) -> fmt::Result {
    let rows: Vec<String> = b
        .vertex_rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    write!(f, "{}", rows.join(";"))
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::DifferenceBody { lambda } if *lambda == 1.0 => write!(f, "difference"),
            OperatorSpec::DifferenceBody { lambda } => write!(f, "difference:{lambda}"),
            OperatorSpec::LinearComb { a, b } => write!(f, "linear:{a},{b}"),
            OperatorSpec::HullOrigin => write!(f, "hull-origin"),
            OperatorSpec::Wannerer { a, b, c, d } => write!(f, "wannerer:{a},{b},{c},{d}"),
            OperatorSpec::MSum { m } => {
                write!(f, "msum:")?;
                write_body(f, m.body())
            }
            OperatorSpec::ConstantBody { body } => {
                write!(f, "constant:")?;
                write_body(f, body)
            }
            OperatorSpec::CentroidSymm { center: Center::Steiner } => write!(f, "centroid-symm:steiner"),
            OperatorSpec::CentroidSymm { center: Center::Centroid } => write!(f, "centroid-symm:centroid"),
            OperatorSpec::TranslateBy { shift: Shift::Steiner } => write!(f, "translate:steiner"),
            OperatorSpec::TranslateBy { shift: Shift::Fixed(p) } => {
                let xs: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                write!(f, "translate:{}", xs.join(","))
            }
            OperatorSpec::VolumeScaledD => write!(f, "volume-scaled-d"),
            OperatorSpec::ClipByBall { ball: None } => write!(f, "clip-by-ball"),
            OperatorSpec::ClipByBall { ball: Some(b) } => {
                write!(f, "clip-by-ball:")?;
                write_body(f, b)
            }
            OperatorSpec::DimGatedD { fallback: None } => write!(f, "dim-gated-d"),
            OperatorSpec::DimGatedD { fallback: Some(b) } => {
                write!(f, "dim-gated-d:")?;
                write_body(f, b)
            }
            OperatorSpec::MeanWidthBall => write!(f, "mean-width-ball"),
            OperatorSpec::IntersectUnitBall => write!(f, "intersect-unit-ball"),
            OperatorSpec::VolumeBall => write!(f, "volume-ball"),
            OperatorSpec::SegmentVolume { base, segment } => {
                write!(f, "segment-volume:")?;
                write_body(f, base)?;
                write!(f, "|")?;
                write_body(f, segment)
            }
            OperatorSpec::EdgeZonotopePlusD => write!(f, "edge-zonotope-plus-d"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// Parses the compact syntax produced by `Display`.
    fn from_str(s: &str) -> Result<OperatorSpec> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        fn need<'a>(name: &str, arg: Option<&'a str>) -> Result<&'a str> {
            arg.ok_or_else(|| Error::BadSpec(format!("operator '{name}' needs parameters")))
        }
        let fixed = |arg: Option<&str>, count: usize| -> Result<Vec<f64>> {
            let xs = parse_numbers(need(name, arg)?)?;
            if xs.len() != count {
                return Err(Error::BadSpec(format!("operator '{name}' takes {count} numbers")));
            }
            Ok(xs)
        };
        let spec = match name {
            "difference" => OperatorSpec::DifferenceBody {
                lambda: match arg {
                    Some(a) => fixed(Some(a), 1)?[0],
                    None => 1.0,
                },
            },
            "linear" => {
                let x = fixed(arg, 2)?;
                OperatorSpec::LinearComb { a: x[0], b: x[1] }
            }
            "hull-origin" => OperatorSpec::HullOrigin,
            "wannerer" => {
                let x = fixed(arg, 4)?;
                OperatorSpec::Wannerer {
                    a: x[0],
                    b: x[1],
                    c: x[2],
                    d: x[3],
                }
            }
            "msum" => OperatorSpec::MSum {
                m: PlanarBody::new(parse_body(need(name, arg)?)?)?,
            },
            "constant" => OperatorSpec::ConstantBody {
                body: parse_body(need(name, arg)?)?,
            },
            "centroid-symm" => OperatorSpec::CentroidSymm {
                center: match arg.unwrap_or("centroid") {
                    "steiner" => Center::Steiner,
                    "centroid" => Center::Centroid,
                    other => return Err(Error::BadSpec(format!("unknown center '{other}'"))),
                },
            },
            "translate" => OperatorSpec::TranslateBy {
                shift: match need(name, arg)? {
                    "steiner" => Shift::Steiner,
                    xs => Shift::Fixed(Point::from_vec(parse_numbers(xs)?)),
                },
            },
            "volume-scaled-d" => OperatorSpec::VolumeScaledD,
            "clip-by-ball" => OperatorSpec::ClipByBall {
                ball: arg.map(parse_body).transpose()?,
            },
            "dim-gated-d" => OperatorSpec::DimGatedD {
                fallback: arg.map(parse_body).transpose()?,
            },
            "mean-width-ball" => OperatorSpec::MeanWidthBall,
            "intersect-unit-ball" => OperatorSpec::IntersectUnitBall,
            "volume-ball" => OperatorSpec::VolumeBall,
            "segment-volume" => {
                let (l, seg) = need(name, arg)?
                    .split_once('|')
                    .ok_or_else(|| Error::BadSpec("segment-volume takes 'L|S' vertex lists".into()))?;
                OperatorSpec::SegmentVolume {
                    base: parse_body(l)?,
                    segment: parse_body(seg)?,
                }
            }
            "edge-zonotope-plus-d" => OperatorSpec::EdgeZonotopePlusD,
            other => return Err(Error::BadSpec(format!("unknown operator '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
