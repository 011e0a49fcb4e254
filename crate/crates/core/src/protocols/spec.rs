use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{make_patient, ConstMap, DecisionMap, IdentityMap, MinMax, PatienceParams, Rounding};
use crate::error::{Error, Result};
use crate::views::Value;

/// Parsed map selection string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSpec {
    MinMax { k: u64 },
    MinMaxGrow { rounding: Rounding },
    Averaging,
    Patient(Box<MapSpec>),
    Const { v: Value },
    Identity,
}

impl MapSpec {
    /// Instantiates the map. Averaging works on real values and has no
    /// consensus decision map.
    pub fn build(&self, params: PatienceParams) -> Result<Arc<dyn DecisionMap>> {
        Ok(match self {
            MapSpec::MinMax { k } => Arc::new(MinMax::fixed(*k)),
            MapSpec::MinMaxGrow { rounding } => Arc::new(MinMax::growing(*rounding)),
            MapSpec::Averaging => {
                return Err(Error::Precondition(
                    "avg produces real values, not consensus decisions".into(),
                ))
            }
            MapSpec::Patient(inner) => Arc::new(make_patient(inner.build(params)?, params)),
            MapSpec::Const { v } => Arc::new(ConstMap(*v)),
            MapSpec::Identity => Arc::new(IdentityMap),
        })
    }

    pub fn is_averaging(&self) -> bool {
        matches!(self, MapSpec::Averaging)
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::MinMax { k: 0 } => write!(f, "minmax"),
            MapSpec::MinMax { k } => write!(f, "minmax:k={k}"),
            MapSpec::MinMaxGrow {
                rounding: Rounding::Floor,
            } => write!(f, "minmax-grow"),
            MapSpec::MinMaxGrow { rounding } => write!(f, "minmax-grow:round={rounding}"),
            MapSpec::Averaging => write!(f, "avg"),
            MapSpec::Patient(inner) => write!(f, "patient({inner})"),
            MapSpec::Const { v } => write!(f, "const:v={v}"),
            MapSpec::Identity => write!(f, "identity"),
        }
    }
}

fn single_param<'a>(rest: &'a str, key: &str, whole: &str) -> Result<Option<&'a str>> {
    if rest.is_empty() {
        return Ok(None);
    }
    match rest.split_once('=') {
        Some((k, v)) if k.trim() == key && !v.contains(',') => Ok(Some(v.trim())),
        _ => Err(Error::Parse(format!("expected {key}=<value> in {whole:?}"))),
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("patient(") {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in {s:?}")))?;
            let inner: MapSpec = inner.parse()?;
            if inner.is_averaging() {
                return Err(Error::Parse("avg cannot be made patient".into()));
            }
            return Ok(MapSpec::Patient(Box::new(inner)));
        }
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad_number = || Error::Parse(format!("bad number in {s:?}"));
        match name {
            "minmax" => {
                let k = match single_param(rest, "k", s)? {
                    Some(v) => v.parse().map_err(|_| bad_number())?,
                    None => 0,
                };
                Ok(MapSpec::MinMax { k })
            }
            "minmax-grow" => {
                let rounding = match single_param(rest, "round", s)? {
                    None | Some("floor") => Rounding::Floor,
                    Some("ceil") => Rounding::Ceil,
                    Some(other) => return Err(Error::Parse(format!("unknown rounding {other:?}"))),
                };
                Ok(MapSpec::MinMaxGrow { rounding })
            }
            "const" => {
                let v = single_param(rest, "v", s)?
                    .ok_or_else(|| Error::Parse(format!("const needs v=<value>: {s:?}")))?;
                Ok(MapSpec::Const {
                    v: v.parse().map_err(|_| bad_number())?,
                })
            }
            "avg" | "identity" if !rest.is_empty() => {
                Err(Error::Parse(format!("{name} takes no parameters")))
            }
            "avg" => Ok(MapSpec::Averaging),
            "identity" => Ok(MapSpec::Identity),
            other => Err(Error::Parse(format!("unknown map {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in [
            "minmax",
            "minmax:k=2",
            "minmax-grow",
            "minmax-grow:round=ceil",
            "avg",
            "patient(minmax:k=1)",
            "patient(patient(minmax))",
            "const:v=0",
            "const:v=-3",
            "identity",
        ] {
            let spec: MapSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!(
            "minmax:k=0".parse::<MapSpec>().unwrap().to_string(),
            "minmax"
        );
    }

    #[test]
    fn rejects_garbage() {
        for s in [
            "",
            "maxmin",
            "minmax:j=2",
            "minmax:k=x",
            "const",
            "patient(minmax",
            "patient(avg)",
            "identity:v=1",
        ] {
            assert!(s.parse::<MapSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn build_names_match() {
        let params = PatienceParams::default();
        for s in [
            "minmax",
            "minmax:k=3",
            "minmax-grow",
            "patient(minmax)",
            "const:v=1",
            "identity",
        ] {
            let map = s.parse::<MapSpec>().unwrap().build(params).unwrap();
            assert_eq!(map.name(), s);
        }
        assert!(MapSpec::Averaging.build(params).is_err());
    }
}
