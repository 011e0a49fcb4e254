//! Full-information flooding over a communication pattern.
//!
//! A [`Run`] stores the pattern run-length encoded. Within a block of `m`
//! identical graphs the knowledge state settles after at most `n` rounds:
//! heard-of sets stop growing, `latest_known[a][b]` advances by one per round
//! when `b` reaches `a` inside the block graph and is frozen otherwise. Only
//! the first `n` states of each block are stored, which keeps runs with very
//! long silent stretches cheap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{CommGraph, ProcSet, ProcessId, MAX_PROCESSES};

pub type Value = i64;

/// Input values and the finite set they are drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputConfig {
    pub values: Vec<Value>,
    pub input_set: Vec<Value>,
}

impl InputConfig {
    pub fn new(values: Vec<Value>, mut input_set: Vec<Value>) -> Result<Self> {
        input_set.sort_unstable();
        input_set.dedup();
        if input_set.is_empty() {
            return Err(Error::Precondition("input set is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| input_set.binary_search(v).is_err()) {
            return Err(Error::Precondition(format!(
                "input {v} is not in the input set"
            )));
        }
        check_process_count(values.len())?;
        Ok(InputConfig { values, input_set })
    }

    /// Uses the values themselves as the input set.
    pub fn from_values(values: Vec<Value>) -> Result<Self> {
        let set = values.clone();
        Self::new(values, set)
    }

    /// `n` inputs drawn uniformly from `input_set`, reproducible from `seed`.
    pub fn sample(n: usize, input_set: Vec<Value>, seed: u64) -> Result<Self> {
        if input_set.is_empty() {
            return Err(Error::Precondition("input set is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let values = (0..n)
            .map(|_| input_set[rng.random_range(0..input_set.len())])
            .collect();
        Self::new(values, input_set)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

fn check_process_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PROCESSES {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u64,
            range: "1..=64",
        });
    }
    Ok(())
}

/// Per-round full-information summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeState {
    pub round: u64,
    /// `latest_known[a][b]`: the latest round of `b` whose view `a` contains,
    /// `-1` if none.
    pub latest_known: Vec<Vec<i64>>,
    /// Processes whose input `a` has heard of.
    pub heard0: Vec<ProcSet>,
}

impl KnowledgeState {
    pub fn initial(n: usize) -> Self {
        let latest_known = (0..n)
            .map(|a| (0..n).map(|b| if a == b { 0 } else { -1 }).collect())
            .collect();
        KnowledgeState {
            round: 0,
            latest_known,
            heard0: (0..n).map(ProcSet::singleton).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.heard0.len()
    }

    /// The state after one more round with graph `g`.
    pub fn advance(&self, g: &CommGraph) -> KnowledgeState {
        let n = self.n();
        let r = self.round as i64;
        let mut next = KnowledgeState {
            round: self.round + 1,
            latest_known: self.latest_known.clone(),
            heard0: self.heard0.clone(),
        };
        for a in 0..n {
            let senders = g.in_set(a);
            let mut heard = ProcSet::EMPTY;
            for c in senders.iter() {
                heard = heard.union(self.heard0[c]);
            }
            next.heard0[a] = heard;
            let row = &mut next.latest_known[a];
            for (b, slot) in row.iter_mut().enumerate() {
                for c in senders.iter() {
                    let v = if c == b { r } else { self.latest_known[c][b] };
                    if v > *slot {
                        *slot = v;
                    }
                }
            }
            row[a] = r + 1;
        }
        next
    }
}

/// Hook receiving every round as it is simulated.
pub trait StepSink {
    fn on_step(&mut self, round: u64, graph: &CommGraph, heard0: &[ProcSet]);
}

#[derive(Debug, Clone)]
struct Segment {
    graph: CommGraph,
    /// Round before the first round of the segment.
    start: u64,
    len: u64,
    /// States after offsets `1..=min(len, n)`.
    explicit: Vec<KnowledgeState>,
    reach: Vec<ProcSet>,
}

impl Segment {
    fn last_round(&self) -> u64 {
        self.start + self.len
    }

    fn state(&self, r: u64) -> KnowledgeState {
        let offset = (r - self.start) as usize;
        if offset <= self.explicit.len() {
            return self.explicit[offset - 1].clone();
        }
        let last = self.explicit.last().expect("segment has states");
        let delta = (r - last.round) as i64;
        let mut st = last.clone();
        st.round = r;
        for (a, row) in st.latest_known.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                if a == b || self.reach[a].contains(b) {
                    *v += delta;
                }
            }
        }
        st
    }

    fn tail_heard0(&self, p: ProcessId, r: u64) -> ProcSet {
        let offset = (r - self.start) as usize;
        self.explicit[offset.min(self.explicit.len()) - 1].heard0[p]
    }

    fn latest_known(&self, a: ProcessId, b: ProcessId, r: u64) -> i64 {
        let offset = (r - self.start) as usize;
        if offset <= self.explicit.len() {
            return self.explicit[offset - 1].latest_known[a][b];
        }
        let last = self.explicit.last().expect("segment has states");
        let v = last.latest_known[a][b];
        if a == b || self.reach[a].contains(b) {
            v + (r - last.round) as i64
        } else {
            v
        }
    }
}

/// A maximal block of identical graphs in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<'a> {
    pub graph: &'a CommGraph,
    pub first: u64,
    pub len: u64,
}

impl Block<'_> {
    pub fn last(&self) -> u64 {
        self.first + self.len - 1
    }
}

/// Inputs plus a finite communication pattern, with the induced views.
#[derive(Debug, Clone)]
pub struct Run {
    inputs: Vec<Value>,
    init: KnowledgeState,
    segments: Vec<Segment>,
}

impl Run {
    pub fn new(inputs: Vec<Value>) -> Result<Self> {
        check_process_count(inputs.len())?;
        let init = KnowledgeState::initial(inputs.len());
        Ok(Run {
            inputs,
            init,
            segments: Vec::new(),
        })
    }

    pub fn from_config(config: &InputConfig) -> Result<Self> {
        Self::new(config.values.clone())
    }

    pub fn from_prefix(inputs: Vec<Value>, prefix: &[CommGraph]) -> Result<Self> {
        let mut run = Self::new(inputs)?;
        for g in prefix {
            run.step(g)?;
        }
        Ok(run)
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[Value] {
        &self.inputs
    }

    /// Number of simulated rounds.
    pub fn len(&self) -> u64 {
        self.segments.last().map_or(0, Segment::last_round)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn step(&mut self, g: &CommGraph) -> Result<()> {
        self.step_repeat(g, 1)
    }

    /// Appends `count` copies of `g`.
    pub fn step_repeat(&mut self, g: &CommGraph, count: u64) -> Result<()> {
        let n = self.n();
        if g.n() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: g.n(),
            });
        }
        if count == 0 {
            return Ok(());
        }
        let merge = self.segments.last().is_some_and(|s| &s.graph == g);
        if !merge {
            let start = self.len();
            self.segments.push(Segment {
                graph: g.clone(),
                start,
                len: 0,
                explicit: Vec::with_capacity(n),
                reach: g.reach_into(),
            });
        }
        let idx = self.segments.len() - 1;
        self.segments[idx].len += count;
        loop {
            let seg = &self.segments[idx];
            if seg.explicit.len() as u64 >= seg.len.min(n as u64) {
                break;
            }
            let next = match seg.explicit.last() {
                Some(st) => st.advance(g),
                None => state_before(&self.init, &self.segments[..idx], seg.start).advance(g),
            };
            self.segments[idx].explicit.push(next);
        }
        Ok(())
    }

    /// Steps one round and reports it to `sink`.
    pub fn step_with(&mut self, g: &CommGraph, sink: &mut dyn StepSink) -> Result<()> {
        self.step(g)?;
        let r = self.len();
        let heard: Vec<ProcSet> = (0..self.n()).map(|p| self.heard0_unchecked(p, r)).collect();
        sink.on_step(r, g, &heard);
        Ok(())
    }

    fn check_round(&self, r: u64) -> Result<()> {
        if r > self.len() {
            return Err(Error::RoundOutOfRange {
                round: r,
                horizon: self.len(),
            });
        }
        Ok(())
    }

    fn segment_index(&self, r: u64) -> usize {
        debug_assert!(r >= 1 && r <= self.len());
        self.segments.partition_point(|s| s.last_round() < r)
    }

    /// Graph of round `r`, for `1 <= r <= len`.
    pub fn graph_at(&self, r: u64) -> Result<&CommGraph> {
        if r == 0 {
            return Err(Error::RoundOutOfRange {
                round: 0,
                horizon: self.len(),
            });
        }
        self.check_round(r)?;
        Ok(&self.segments[self.segment_index(r)].graph)
    }

    /// `In_{G_r}(a)`.
    pub fn received(&self, a: ProcessId, r: u64) -> Result<ProcSet> {
        Ok(self.graph_at(r)?.in_set(a))
    }

    pub fn state_at(&self, r: u64) -> Result<KnowledgeState> {
        self.check_round(r)?;
        Ok(state_before(&self.init, &self.segments, r))
    }

    /// Processes whose input `p` has heard of by round `r`.
    pub fn leafs(&self, p: ProcessId, r: u64) -> Result<ProcSet> {
        self.check_round(r)?;
        Ok(self.heard0_unchecked(p, r))
    }

    pub fn heard0(&self, p: ProcessId, r: u64) -> Result<ProcSet> {
        self.leafs(p, r)
    }

    pub(crate) fn heard0_unchecked(&self, p: ProcessId, r: u64) -> ProcSet {
        if r == 0 {
            return self.init.heard0[p];
        }
        self.segments[self.segment_index(r)].tail_heard0(p, r)
    }

    pub fn latest_known(&self, a: ProcessId, b: ProcessId, r: u64) -> Result<i64> {
        self.check_round(r)?;
        if r == 0 {
            return Ok(self.init.latest_known[a][b]);
        }
        Ok(self.segments[self.segment_index(r)].latest_known(a, b, r))
    }

    /// Smallest input `p` has heard of by round `r`.
    pub fn min_input(&self, p: ProcessId, r: u64) -> Value {
        self.heard0_unchecked(p, r)
            .iter()
            .map(|j| self.inputs[j])
            .min()
            .expect("heard0 contains p")
    }

    /// Maximal blocks of identical graphs, in round order.
    pub fn blocks(&self) -> impl Iterator<Item = Block<'_>> + '_ {
        self.segments.iter().map(|s| Block {
            graph: &s.graph,
            first: s.start + 1,
            len: s.len,
        })
    }

    /// Blocks clipped to the rounds `lo..=hi`.
    pub fn blocks_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = Block<'_>> + '_ {
        let lo = lo.max(1);
        let hi = hi.min(self.len());
        let from = self.segments.partition_point(|s| s.last_round() < lo);
        self.segments[from..]
            .iter()
            .take_while(move |s| s.start < hi && lo <= hi)
            .map(move |s| {
                let first = (s.start + 1).max(lo);
                let last = s.last_round().min(hi);
                Block {
                    graph: &s.graph,
                    first,
                    len: last - first + 1,
                }
            })
    }

    /// Rounds after which the state may differ from the round before: every
    /// stored state of each block plus each block's last round.
    pub fn change_points(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for s in &self.segments {
            out.extend(s.explicit.iter().map(|st| st.round));
            out.push(s.last_round());
        }
        out.dedup();
        out
    }

    /// Graphs of the run expanded one per round.
    pub fn expanded_prefix(&self) -> Vec<CommGraph> {
        self.blocks()
            .flat_map(|b| std::iter::repeat_n(b.graph.clone(), b.len as usize))
            .collect()
    }
}

fn state_before(init: &KnowledgeState, segments: &[Segment], r: u64) -> KnowledgeState {
    if r == 0 {
        return init.clone();
    }
    let i = segments.partition_point(|s| s.last_round() < r);
    segments[i].state(r)
}

/// Whether process `a` at round `r` of `run_a` and process `b` at round `r`
/// of `run_b` have identical full-information views.
pub fn views_equal(run_a: &Run, a: ProcessId, run_b: &Run, b: ProcessId, r: u64) -> bool {
    if a != b || r > run_a.len() || r > run_b.len() || a >= run_a.n() || b >= run_b.n() {
        return false;
    }
    let (na, nb) = (run_a.n(), run_b.n());
    let width = na.max(nb);
    let mut eq: Vec<bool> = (0..width)
        .map(|c| c < na && c < nb && run_a.inputs[c] == run_b.inputs[c])
        .collect();
    let mut s = 0u64;
    while s < r {
        let sa = &run_a.segments[run_a.segment_index(s + 1)];
        let sb = &run_b.segments[run_b.segment_index(s + 1)];
        let span_end = sa.last_round().min(sb.last_round()).min(r);
        while s < span_end {
            let next: Vec<bool> = (0..width)
                .map(|c| {
                    if c >= na || c >= nb {
                        return false;
                    }
                    let ia = sa.graph.in_set(c);
                    ia == sb.graph.in_set(c) && ia.iter().all(|d| eq[d])
                })
                .collect();
            s += 1;
            if next == eq {
                s = span_end;
            }
            eq = next;
        }
    }
    eq[a]
}

/// Least `r' > start` at which every process has a view of `p` from round
/// `start` or later.
pub fn broadcast_time(run: &Run, p: ProcessId, start: u64) -> Option<u64> {
    (start + 1..=run.len())
        .find(|&r| (0..run.n()).all(|q| run.latest_known(q, p, r).is_ok_and(|v| v >= start as i64)))
}

/// Processes that broadcast from every sampled start within the horizon.
pub fn kernel_estimate(run: &Run, sample_starts: &[u64]) -> ProcSet {
    (0..run.n())
        .filter(|&p| {
            sample_starts
                .iter()
                .all(|&s| broadcast_time(run, p, s).is_some())
        })
        .collect()
}

/// Last round at which `p`'s heard-of set grew, `0` if never.
pub fn stable_value_round(run: &Run, p: ProcessId) -> u64 {
    let mut last = 0;
    let mut prev = run.init.heard0[p];
    for r in run.change_points() {
        let h = run.heard0_unchecked(p, r);
        if h != prev {
            // Heard-of sets only change inside a block's stored states, so the
            // change happened exactly at `r`.
            last = r;
            prev = h;
        }
    }
    last
}
