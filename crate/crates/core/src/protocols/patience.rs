use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{DecisionMap, Lookback};
use crate::error::{Error, Result};
use crate::graphs::{padding_graph, CommGraph, ProcessId};
use crate::views::{Run, Value};

pub const DEFAULT_CONFIRM: u64 = 10;
pub const DEFAULT_CAP: u64 = 64;

/// Confirmation window `confirm` and search cap `cap` for patience.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatienceParams {
    pub confirm: u64,
    pub cap: u64,
}

impl Default for PatienceParams {
    fn default() -> Self {
        PatienceParams {
            confirm: DEFAULT_CONFIRM,
            cap: DEFAULT_CAP,
        }
    }
}

impl PatienceParams {
    pub fn validate(&self) -> Result<()> {
        if self.confirm == 0 || self.cap < self.confirm {
            return Err(Error::Precondition(format!(
                "patience needs 1 <= confirm <= cap, got confirm = {}, cap = {}",
                self.confirm, self.cap
            )));
        }
        Ok(())
    }

    /// The cap used for a map with lookback `lookback` on a prefix of `len`
    /// rounds. Growing windows need padding proportional to the prefix.
    pub fn effective_cap(&self, lookback: Lookback, len: u64) -> u64 {
        match lookback {
            Lookback::Growing(_) => self.cap.max(len.saturating_mul(2).saturating_add(64)),
            _ => self.cap,
        }
    }
}

/// Least number of padding rounds after which no decision of `run` changes
/// any more, padding with the silent graph of the run's size.
pub fn patience(run: &Run, map: &dyn DecisionMap, params: PatienceParams) -> Result<u64> {
    patience_with_graph(run, map, params, &padding_graph(run.n()))
}

/// [`patience`] with an explicit padding graph.
///
/// Maps that declare their lookback are padded until the window has moved past
/// every round where the state can still change, and the last decision change
/// is located exactly. Other maps are padded until the decisions have been
/// constant for `confirm` consecutive further rounds.
pub fn patience_with_graph(
    run: &Run,
    map: &dyn DecisionMap,
    params: PatienceParams,
    pad: &CommGraph,
) -> Result<u64> {
    params.validate()?;
    match map.lookback() {
        Lookback::Unknown => confirmed_patience(run, map, params, pad),
        lookback => exact_patience(run, map, params, pad, lookback),
    }
}

fn confirmed_patience(
    run: &Run,
    map: &dyn DecisionMap,
    params: PatienceParams,
    pad: &CommGraph,
) -> Result<u64> {
    let len = run.len();
    let mut ext = run.clone();
    let mut prev = map.decisions(&ext, len);
    let mut stretch = 0;
    for j in 1..=params.cap {
        ext.step(pad)?;
        let d = map.decisions(&ext, len + j);
        if d != prev {
            stretch = j;
            prev = d;
        }
        if j - stretch >= params.confirm {
            return Ok(stretch);
        }
    }
    Err(Error::PatienceExhausted { cap: params.cap })
}

/// Least `r >= 1` whose window starts after round `e`.
fn first_round_past(lookback: Lookback, e: u64) -> u64 {
    let past = |r: u64| lookback.window_start(r).expect("declared") > e;
    let (mut lo, mut hi) = (1u64, 1u64);
    while !past(hi) {
        lo = hi + 1;
        hi = hi.saturating_mul(2).max(e + 1);
    }
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if past(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn exact_patience(
    run: &Run,
    map: &dyn DecisionMap,
    params: PatienceParams,
    pad: &CommGraph,
    lookback: Lookback,
) -> Result<u64> {
    let len = run.len();
    let cap = params.effective_cap(lookback, len);
    let mut ext = run.clone();
    ext.step_repeat(pad, run.n() as u64 + 1)?;
    // Between two consecutive events the window covers the same stored states,
    // so the decisions cannot change.
    let mut events: Vec<u64> = ext
        .change_points()
        .into_iter()
        .map(|e| first_round_past(lookback, e))
        .filter(|&r| r > len)
        .collect();
    events.push(len + 1);
    events.sort_unstable();
    events.dedup();
    let last_event = *events.last().expect("nonempty");
    if last_event > ext.len() {
        ext.step_repeat(pad, last_event - ext.len())?;
    }
    let mut prev = map.decisions(&ext, len);
    let mut last_change = len;
    for r in events {
        let d = map.decisions(&ext, r);
        if d != prev {
            last_change = r;
            prev = d;
        }
    }
    let m = last_change - len;
    if m.saturating_add(params.confirm) > cap {
        return Err(Error::PatienceExhausted { cap });
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// One real round followed by patience padding.
    Patient,
    /// Further padding rounds after a patient shadow.
    Repeat(u64),
}

struct Node {
    shadow: Arc<Run>,
    decisions: Vec<Value>,
}

#[derive(Default)]
struct Cache {
    nodes: Vec<Node>,
    roots: HashMap<Vec<Value>, usize>,
    children: HashMap<(usize, CommGraph, Edge), usize>,
    failure: Option<Error>,
}

/// A wrapper whose decisions do not change under silent padding.
///
/// For each real round it appends the round's graph to a shadow run, pads the
/// shadow with its patience and answers with the inner map's decision on the
/// shadow. Shadows are shared between runs with a common prefix.
pub struct PatientMap {
    inner: Arc<dyn DecisionMap>,
    params: PatienceParams,
    cache: Mutex<Cache>,
}

pub fn make_patient(inner: Arc<dyn DecisionMap>, params: PatienceParams) -> PatientMap {
    PatientMap {
        inner,
        params,
        cache: Mutex::new(Cache::default()),
    }
}

impl PatientMap {
    pub fn inner(&self) -> &Arc<dyn DecisionMap> {
        &self.inner
    }

    fn root(&self, cache: &mut Cache, inputs: &[Value]) -> usize {
        if let Some(&i) = cache.roots.get(inputs) {
            return i;
        }
        let shadow = Run::new(inputs.to_vec()).expect("inputs of an existing run");
        let decisions = self.inner.decisions(&shadow, 0);
        cache.nodes.push(Node {
            shadow: Arc::new(shadow),
            decisions,
        });
        let i = cache.nodes.len() - 1;
        cache.roots.insert(inputs.to_vec(), i);
        i
    }

    fn child(
        &self,
        cache: &mut Cache,
        at: usize,
        g: &CommGraph,
        edge: Edge,
        pad: &CommGraph,
    ) -> usize {
        let key = (at, g.clone(), edge);
        if let Some(&i) = cache.children.get(&key) {
            return i;
        }
        let mut shadow = (*cache.nodes[at].shadow).clone();
        match edge {
            Edge::Patient => {
                shadow.step(g).expect("graph sizes checked by the run");
                let m = match patience_with_graph(&shadow, self.inner.as_ref(), self.params, pad) {
                    Ok(m) => m,
                    Err(e) => {
                        cache.failure.get_or_insert(e);
                        self.params
                            .effective_cap(self.inner.lookback(), shadow.len())
                    }
                };
                shadow
                    .step_repeat(pad, m)
                    .expect("padding has the run's size");
            }
            Edge::Repeat(count) => {
                shadow
                    .step_repeat(g, count)
                    .expect("padding has the run's size");
            }
        }
        let decisions = self.inner.decisions(&shadow, shadow.len());
        cache.nodes.push(Node {
            shadow: Arc::new(shadow),
            decisions,
        });
        let i = cache.nodes.len() - 1;
        cache.children.insert(key, i);
        i
    }

    fn walk(&self, cache: &mut Cache, run: &Run, r: u64) -> usize {
        let pad = padding_graph(run.n());
        let mut at = self.root(cache, run.inputs());
        for block in run.blocks_in(1, r) {
            if *block.graph == pad {
                at = self.child(cache, at, block.graph, Edge::Patient, &pad);
                if block.len > 1 {
                    at = self.child(cache, at, block.graph, Edge::Repeat(block.len - 1), &pad);
                }
            } else {
                for _ in 0..block.len {
                    at = self.child(cache, at, block.graph, Edge::Patient, &pad);
                }
            }
        }
        at
    }

    fn node_for(&self, run: &Run, r: u64) -> Vec<Value> {
        let mut cache = self.cache.lock().expect("patient cache");
        let at = self.walk(&mut cache, run, r);
        cache.nodes[at].decisions.clone()
    }

    /// The shadow run standing in for the first `r` rounds of `run`.
    pub fn shadow(&self, run: &Run, r: u64) -> Arc<Run> {
        let mut cache = self.cache.lock().expect("patient cache");
        let at = self.walk(&mut cache, run, r);
        cache.nodes[at].shadow.clone()
    }
}

impl DecisionMap for PatientMap {
    fn name(&self) -> String {
        format!("patient({})", self.inner.name())
    }

    fn decide(&self, run: &Run, p: ProcessId, r: u64) -> Value {
        self.node_for(run, r)[p]
    }

    fn decisions(&self, run: &Run, r: u64) -> Vec<Value> {
        self.node_for(run, r)
    }

    fn check_health(&self) -> Result<()> {
        let cache = self.cache.lock().expect("patient cache");
        match &cache.failure {
            Some(e) => Err(e.clone()),
            None => self.inner.check_health(),
        }
    }
}
