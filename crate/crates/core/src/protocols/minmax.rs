use super::{DecisionMap, Lookback, Rounding};
use crate::graphs::ProcessId;
use crate::views::{Run, Value};

/// The MinMax family: the maximum, over views received in a trailing window
/// of rounds, of the smallest input each of those views has heard of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MinMax {
    lookback: Lookback,
}

impl MinMax {
    /// Only the views received in the current round.
    pub fn plain() -> Self {
        Self::fixed(0)
    }

    /// Views received in the last `k + 1` rounds.
    pub fn fixed(k: u64) -> Self {
        MinMax {
            lookback: Lookback::Fixed(k),
        }
    }

    /// Window of `r / 2` extra rounds at round `r`.
    pub fn growing(rounding: Rounding) -> Self {
        MinMax {
            lookback: Lookback::Growing(rounding),
        }
    }
}

impl DecisionMap for MinMax {
    fn name(&self) -> String {
        match self.lookback {
            Lookback::Fixed(0) => "minmax".into(),
            Lookback::Fixed(k) => format!("minmax:k={k}"),
            Lookback::Growing(Rounding::Floor) => "minmax-grow".into(),
            Lookback::Growing(Rounding::Ceil) => "minmax-grow:round=ceil".into(),
            Lookback::Unknown => unreachable!("minmax always declares its window"),
        }
    }

    fn lookback(&self) -> Lookback {
        self.lookback
    }

    fn decide(&self, run: &Run, p: ProcessId, r: u64) -> Value {
        if r == 0 {
            return run.inputs()[p];
        }
        let lo = self.lookback.window_start(r).expect("declared window");
        // Heard-of sets only grow, so within a block the earliest received
        // view has the largest minimum.
        run.blocks_in(lo, r)
            .flat_map(|b| {
                let before = b.first - 1;
                b.graph.in_set(p).iter().map(move |s| (s, before))
            })
            .map(|(s, before)| run.min_input(s, before))
            .max()
            .expect("the window is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::CommGraph;
    use crate::graphs::LinkGraph::{self, *};

    fn run(inputs: &[Value], gs: &[LinkGraph]) -> Run {
        let prefix: Vec<CommGraph> = gs.iter().map(|g| g.graph()).collect();
        Run::from_prefix(inputs.to_vec(), &prefix).unwrap()
    }

    /// Direct transcription: iterate every round of the window and every
    /// sender, no block shortcuts.
    fn oracle(run: &Run, p: usize, r: u64, k: u64) -> Value {
        if r == 0 {
            return run.inputs()[p];
        }
        let mut best = Value::MIN;
        for j in 0..=k.min(r - 1) {
            let s = r - j;
            for b in run.received(p, s).unwrap().iter() {
                let m = run
                    .leafs(b, s - 1)
                    .unwrap()
                    .iter()
                    .map(|i| run.inputs()[i])
                    .min()
                    .unwrap();
                best = best.max(m);
            }
        }
        best
    }

    #[test]
    fn one_way_pattern() {
        let pattern = run(&[0, 1], &[Pq; 6]);
        let m = MinMax::plain();
        assert_eq!(m.decide(&pattern, 1, 1), 1);
        for r in 2..=6 {
            assert_eq!(m.decide(&pattern, 1, r), 0);
        }
        let reverse = run(&[0, 1], &[Qp; 6]);
        for r in 1..=6 {
            assert_eq!(m.decide(&reverse, 0, r), 1);
        }
    }

    #[test]
    fn alternation_and_its_fix() {
        let mut gs = Vec::new();
        for _ in 0..6 {
            gs.extend([Qp, None]);
        }
        let pattern = run(&[0, 1], &gs);
        let plain: Vec<Value> = (1..=12)
            .map(|r| MinMax::plain().decide(&pattern, 0, r))
            .collect();
        assert_eq!(plain, [1, 0].repeat(6));
        let k1: Vec<Value> = (1..=12)
            .map(|r| MinMax::fixed(1).decide(&pattern, 0, r))
            .collect();
        assert_eq!(k1, vec![1; 12]);
    }

    #[test]
    fn equal_inputs_are_fixed_points() {
        let pattern = run(&[4, 4], &[Pq, None, Both, Qp]);
        for r in 0..=4 {
            assert_eq!(
                MinMax::growing(Rounding::Floor).decisions(&pattern, r),
                vec![4, 4]
            );
        }
    }

    #[test]
    fn matches_oracle_on_all_short_prefixes() {
        let alphabet = [None, Pq, Both, Qp];
        let mut idx = [0usize; 5];
        loop {
            let gs: Vec<LinkGraph> = idx.iter().map(|&i| alphabet[i]).collect();
            let pattern = run(&[0, 1], &gs);
            for k in 0..4 {
                for r in 0..=5 {
                    for p in 0..2 {
                        assert_eq!(
                            MinMax::fixed(k).decide(&pattern, p, r),
                            oracle(&pattern, p, r, k),
                            "{gs:?} k={k} r={r} p={p}"
                        );
                    }
                }
            }
            for r in 1..=5 {
                assert_eq!(
                    MinMax::growing(Rounding::Floor).decide(&pattern, 1, r),
                    oracle(&pattern, 1, r, r / 2)
                );
                assert_eq!(
                    MinMax::growing(Rounding::Ceil).decide(&pattern, 0, r),
                    oracle(&pattern, 0, r, r.div_ceil(2))
                );
            }
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < alphabet.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    #[test]
    fn names() {
        assert_eq!(MinMax::plain().name(), "minmax");
        assert_eq!(MinMax::fixed(2).name(), "minmax:k=2");
        assert_eq!(MinMax::growing(Rounding::Floor).name(), "minmax-grow");
    }
}
