//! Reading JSON requests from files, inline text or standard input.

use std::io::Read;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use polydisc::funceq::{AbelFunction, ValironFunction};
use polydisc::geometry::{cayley_inv, PointD, PointH, PolyPoint};
use polydisc::polyauto::{AutoInput, PolydiscAuto, Space};

use crate::{domain, CliError};

/// Inline JSON when the argument starts with `{` or `[`, standard input
/// for `-`, otherwise a file path.
pub fn load(arg: &str) -> Result<Value, CliError> {
    let text = match arg.trim_start().chars().next() {
        Some('{') | Some('[') => arg.to_owned(),
        _ if arg == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Input(format!("standard input: {e}")))?;
            s
        }
        _ => std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))?,
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))
}

pub fn parse<T: DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    T::deserialize(v).map_err(|e| CliError::Input(e.to_string()))
}

/// An automorphism, with `space` overridden when given.
pub fn auto(v: &Value, space: Option<Space>) -> Result<PolydiscAuto, CliError> {
    let mut req: AutoInput = parse(v)?;
    if let Some(s) = space {
        req.space = s;
    }
    req.into_auto().map_err(|e| CliError::Input(e.to_string()))
}

/// A point given as `[[re, im], …]` in the coordinates of `space`.
pub fn point(coords: &[[f64; 2]], space: Space) -> Result<PolyPoint, CliError> {
    let coords = coords
        .iter()
        .map(|&[re, im]| match space {
            Space::H => PointH::from_parts(re, im),
            Space::D => PointD::new(Complex64::new(re, im)).and_then(|w| cayley_inv(&w)),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain)?;
    PolyPoint::new(coords).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceInput {
    #[serde(default)]
    pub space: Space,
    pub pairs: Vec<[Vec<[f64; 2]>; 2]>,
}

/// Either a bare automorphism or `{"auto": …, "function": …}`.
#[derive(Debug)]
pub struct FunctionInput<F> {
    pub auto: Value,
    pub function: Option<F>,
}

impl<'de, F: DeserializeOwned> Deserialize<'de> for FunctionInput<F> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        match v.get("auto") {
            Some(auto) => {
                let function = match v.get("function") {
                    Some(f) => Some(F::deserialize(f).map_err(serde::de::Error::custom)?),
                    None => None,
                };
                Ok(FunctionInput {
                    auto: auto.clone(),
                    function,
                })
            }
            None => Ok(FunctionInput {
                auto: v,
                function: None,
            }),
        }
    }
}

pub type ValironInput = FunctionInput<ValironFunction>;
pub type AbelInput = FunctionInput<AbelFunction>;

/// `h` is the projection onto `coords` (1-based; all coordinates when absent).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiModelInput {
    pub map: Value,
    pub base: Value,
    #[serde(default)]
    pub coords: Option<Vec<usize>>,
}

impl SemiModelInput {
    pub fn projection(&self, q: usize) -> Result<Vec<usize>, CliError> {
        match &self.coords {
            None => Ok((0..q).collect()),
            Some(cs) => cs
                .iter()
                .map(|&c| {
                    if (1..=q).contains(&c) {
                        Ok(c - 1)
                    } else {
                        Err(CliError::Input(format!("coordinate {c} outside 1..={q}")))
                    }
                })
                .collect(),
        }
    }
}
