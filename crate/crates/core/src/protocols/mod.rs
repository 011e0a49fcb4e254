//! Decision maps over runs.
//!
//! Every map decides at every round. At round 0 no message has been received
//! yet, so every map returns the process's own input there.

mod averaging;
mod minmax;
mod patience;
mod spec;

use std::fmt;

use crate::graphs::ProcessId;
use crate::views::{Run, Value};

pub use averaging::{averaging_round, averaging_series, averaging_step, gap};
pub use minmax::MinMax;
pub use patience::{
    make_patient, patience, patience_with_graph, PatienceParams, PatientMap, DEFAULT_CAP,
    DEFAULT_CONFIRM,
};
pub use spec::MapSpec;

/// Rounding of the growing window `r / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rounding {
    #[default]
    Floor,
    Ceil,
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::Floor => "floor",
            Rounding::Ceil => "ceil",
        })
    }
}

/// How far back a map looks in the received-view history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lookback {
    /// Views received in the last `k + 1` rounds.
    Fixed(u64),
    /// Views received in the last `r / 2 + 1` rounds at round `r`.
    Growing(Rounding),
    /// Not declared.
    Unknown,
}

impl Lookback {
    /// Window length `k` at round `r >= 1`, if declared.
    pub fn window(self, r: u64) -> Option<u64> {
        match self {
            Lookback::Fixed(k) => Some(k),
            Lookback::Growing(Rounding::Floor) => Some(r / 2),
            Lookback::Growing(Rounding::Ceil) => Some(r.div_ceil(2)),
            Lookback::Unknown => None,
        }
    }

    /// First round whose received views count at round `r >= 1`.
    pub fn window_start(self, r: u64) -> Option<u64> {
        self.window(r).map(|k| r - k.min(r.saturating_sub(1)))
    }
}

/// A deterministic decision map `(run, process, round) -> value`.
pub trait DecisionMap: Send + Sync {
    fn name(&self) -> String;

    /// Decision of `p` after round `r`; `r` must not exceed `run.len()`.
    fn decide(&self, run: &Run, p: ProcessId, r: u64) -> Value;

    fn lookback(&self) -> Lookback {
        Lookback::Unknown
    }

    /// Decision vector after round `r`.
    fn decisions(&self, run: &Run, r: u64) -> Vec<Value> {
        (0..run.n()).map(|p| self.decide(run, p, r)).collect()
    }

    /// Reports problems the map ran into while deciding, such as a patience
    /// search that hit its cap.
    fn check_health(&self) -> crate::Result<()> {
        Ok(())
    }
}

/// Decides `v` from round 1 on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstMap(pub Value);

impl DecisionMap for ConstMap {
    fn name(&self) -> String {
        format!("const:v={}", self.0)
    }

    fn decide(&self, run: &Run, p: ProcessId, r: u64) -> Value {
        if r == 0 {
            run.inputs()[p]
        } else {
            self.0
        }
    }
}

/// Always decides the process's own input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IdentityMap;

impl DecisionMap for IdentityMap {
    fn name(&self) -> String {
        "identity".into()
    }

    fn decide(&self, run: &Run, p: ProcessId, _r: u64) -> Value {
        run.inputs()[p]
    }
}
