//! Consensus task semantics and horizon-bounded stabilization reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::DecisionMap;
use crate::views::{Run, Value};

pub const DEFAULT_CONFIRM_WINDOW: u64 = 10;

/// Consensus over a finite ordered input set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsensusTask {
    pub input_set: Vec<Value>,
    pub n: usize,
}

impl ConsensusTask {
    pub fn new(n: usize, mut input_set: Vec<Value>) -> Self {
        input_set.sort_unstable();
        input_set.dedup();
        ConsensusTask { input_set, n }
    }

    /// Whether `outputs` is a legal consensus outcome for `inputs`.
    pub fn admits(&self, inputs: &[Value], outputs: &[Value]) -> Result<bool> {
        for v in [inputs, outputs] {
            if v.len() != self.n {
                return Err(Error::LengthMismatch {
                    expected: self.n,
                    actual: v.len(),
                });
            }
        }
        is_valid_output(inputs, outputs)
    }
}

/// True iff all outputs are equal and the common value is some input.
pub fn is_valid_output(inputs: &[Value], outputs: &[Value]) -> Result<bool> {
    if inputs.len() != outputs.len() {
        return Err(Error::LengthMismatch {
            expected: inputs.len(),
            actual: outputs.len(),
        });
    }
    let Some(&first) = outputs.first() else {
        return Ok(true);
    };
    Ok(outputs.iter().all(|&v| v == first) && inputs.contains(&first))
}

/// Whether the decision vector after round `r` is not a valid output.
pub fn is_conflicted(run: &Run, map: &dyn DecisionMap, r: u64) -> bool {
    let decisions = map.decisions(run, r);
    !is_valid_output(run.inputs(), &decisions).expect("one decision per process")
}

/// Outcome of simulating a map up to a finite horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationReport {
    /// No decision changed during the last `confirm` rounds.
    pub stabilized: bool,
    /// Last round at which any decision changed, `0` if none did.
    pub est_round: u64,
    #[serde(rename = "final")]
    pub final_vector: Vec<Value>,
    /// Every final decision is some process's input.
    pub valid: bool,
    /// All final decisions are equal.
    pub agreement: bool,
}

impl StabilizationReport {
    pub fn solved(&self) -> bool {
        self.stabilized && self.valid && self.agreement
    }
}

/// Decision vectors after rounds `0..=horizon`.
pub fn decision_series(run: &Run, map: &dyn DecisionMap, horizon: u64) -> Result<Vec<Vec<Value>>> {
    if horizon > run.len() {
        return Err(Error::RoundOutOfRange {
            round: horizon,
            horizon: run.len(),
        });
    }
    Ok((0..=horizon).map(|r| map.decisions(run, r)).collect())
}

pub fn stabilization_report(
    run: &Run,
    map: &dyn DecisionMap,
    horizon: u64,
    confirm: u64,
) -> Result<StabilizationReport> {
    if confirm == 0 || confirm > horizon {
        return Err(Error::Precondition(format!(
            "need 1 <= confirm <= horizon, got confirm = {confirm}, horizon = {horizon}"
        )));
    }
    let series = decision_series(run, map, horizon)?;
    Ok(report_from_series(run.inputs(), &series, confirm))
}

/// Builds a report from decision vectors indexed by round.
pub fn report_from_series(
    inputs: &[Value],
    series: &[Vec<Value>],
    confirm: u64,
) -> StabilizationReport {
    let horizon = series.len() as u64 - 1;
    let est_round = series
        .windows(2)
        .rposition(|w| w[0] != w[1])
        .map_or(0, |i| i as u64 + 1);
    let final_vector = series.last().expect("round 0 is always present").clone();
    StabilizationReport {
        stabilized: est_round + confirm <= horizon,
        est_round,
        valid: final_vector.iter().all(|v| inputs.contains(v)),
        agreement: final_vector.windows(2).all(|w| w[0] == w[1]),
        final_vector,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{CommGraph, LinkGraph::*};
    use crate::protocols::{ConstMap, IdentityMap, MinMax};

    #[test]
    fn validity_examples() {
        assert!(is_valid_output(&[3, 5], &[3, 3]).unwrap());
        assert!(!is_valid_output(&[3, 5], &[3, 5]).unwrap());
        assert!(!is_valid_output(&[3, 5], &[4, 4]).unwrap());
        assert!(is_valid_output(&[3, 5], &[3]).is_err());
        let task = ConsensusTask::new(2, vec![5, 3, 3]);
        assert_eq!(task.input_set, vec![3, 5]);
        assert!(task.admits(&[3, 5], &[5, 5]).unwrap());
        assert!(task.admits(&[3, 5, 5], &[5, 5, 5]).is_err());
    }

    #[test]
    fn conflicted_examples() {
        let run = Run::from_prefix(vec![0, 1], &vec![Both.graph(); 3]).unwrap();
        assert!(is_conflicted(&run, &MinMax::plain(), 0));
        assert!(!is_conflicted(&run, &MinMax::plain(), 2));
        for r in 0..=3 {
            assert!(is_conflicted(&run, &IdentityMap, r));
        }
        let same = Run::from_prefix(vec![2, 2], &[Pq.graph(), None.graph()]).unwrap();
        for r in 0..=2 {
            assert!(!is_conflicted(&same, &MinMax::plain(), r));
        }
    }

    #[test]
    fn report_examples() {
        let run = Run::from_prefix(vec![0, 1], &vec![Both.graph(); 20]).unwrap();
        let rep = stabilization_report(&run, &MinMax::plain(), 20, 10).unwrap();
        assert!(rep.solved());
        assert_eq!(rep.final_vector, vec![0, 0]);

        let mut alt = Vec::new();
        for _ in 0..20 {
            alt.extend([Qp.graph(), None.graph()]);
        }
        let run = Run::from_prefix(vec![0, 1], &alt).unwrap();
        let rep = stabilization_report(&run, &MinMax::plain(), 40, 3).unwrap();
        assert!(!rep.stabilized);
        assert_eq!(rep.est_round, 40);

        let same = Run::from_prefix(vec![4, 4], &vec![CommGraph::empty(2); 5]).unwrap();
        let rep = stabilization_report(&same, &ConstMap(4), 5, 2).unwrap();
        assert_eq!(rep.est_round, 0);
        assert!(rep.solved());

        assert!(stabilization_report(&same, &ConstMap(4), 5, 0).is_err());
        assert!(stabilization_report(&same, &ConstMap(4), 6, 2).is_err());
    }

    #[test]
    fn report_json_shape() {
        let rep = report_from_series(&[0, 1], &[vec![0, 1], vec![0, 0], vec![0, 0]], 1);
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(
            json,
            r#"{"stabilized":true,"est_round":1,"final":[0,0],"valid":true,"agreement":true}"#
        );
    }
}
