//! `--config` files: flat TOML tables whose keys mirror the command-line
//! flags. Flags given on the command line win.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

/// A list of integers written either as a TOML array or as `"0,1,2"`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum IntList {
    List(Vec<i64>),
    Text(String),
}

impl IntList {
    pub fn into_string(self) -> String {
        match self {
            IntList::Text(s) => s,
            IntList::List(v) => v.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub class: Option<String>,
    pub f: Option<u64>,
    pub spec: Option<String>,
    pub map: Option<String>,
    pub inputs: Option<IntList>,
    pub input_set: Option<IntList>,
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
    pub runs: Option<u64>,
    pub enumerate: Option<usize>,
    pub pattern: Option<String>,
    pub confirm: Option<u64>,
    pub cap: Option<u64>,
    pub law: Option<String>,
    pub margin: Option<u64>,
    pub out: Option<PathBuf>,
    pub target: Option<String>,
    pub steps: Option<u64>,
    pub trace: Option<PathBuf>,
    pub starts: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Parses `"0,1,2"` into integers.
pub fn parse_int_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .with_context(|| format!("bad integer {t:?} in {s:?}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_list_forms() {
        let c: FileConfig =
            toml::from_str("inputs = [0, 1]\ninput-set = \"0,1,2\"\nspec = \"ll\"").unwrap();
        assert_eq!(c.inputs.unwrap().into_string(), "0,1");
        assert_eq!(c.input_set.unwrap().into_string(), "0,1,2");
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("0, 1,-2").unwrap(), vec![0, 1, -2]);
        assert!(parse_int_list("0,,1").is_err());
    }
}
