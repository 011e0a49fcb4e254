//! The adversarial driver that keeps a decision map conflicted forever.
//!
//! Starting from the empty prefix, each step tries the continuations `p -> q`,
//! `p <-> q` and `q -> p` in that order. A candidate is the current prefix,
//! the continuation graph and as many silent rounds as the candidate's
//! patience. The first candidate whose decisions are conflicted is kept.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::error::{Error, Result};
use crate::graphs::{lift_two_process, padding_graph, CommGraph, LinkGraph, ProcessId};
use crate::protocols::{patience_with_graph, DecisionMap, PatienceParams};
use crate::tasks::is_valid_output;
use crate::views::{views_equal, Run, Value};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub version: u32,
    pub spec: AdversarySpec,
    pub map: String,
    pub inputs: Vec<Value>,
    pub patience: PatienceParams,
}

/// One driver step: the chosen graph followed by `pad` silent rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u64,
    pub pad: u64,
    pub graph: CommGraph,
    pub decisions: Vec<Value>,
    pub conflicted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum Outcome {
    #[serde(rename = "DROVE")]
    Drove { steps: u64 },
    /// No continuation stayed conflicted at `step` (1-based).
    #[serde(rename = "ESCAPED")]
    Escaped {
        step: u64,
        diagnosis: Option<Diagnosis>,
    },
    #[serde(rename = "PATIENCE_EXHAUSTED")]
    PatienceExhausted { step: u64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Drove { .. } => "DROVE",
            Outcome::Escaped { .. } => "ESCAPED",
            Outcome::PatienceExhausted { .. } => "PATIENCE_EXHAUSTED",
        }
    }
}

/// One equality of the indistinguishability chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub process: ProcessId,
    /// `None` for patience links, which compare decisions across lengths.
    pub views_equal: Option<bool>,
    pub decisions_equal: bool,
}

/// Which chain equalities failed when the driver escaped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnosis {
    /// Common padding used to compare the candidates.
    pub padding: u64,
    pub links: Vec<ChainLink>,
    pub broken: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictTrace {
    pub header: TraceHeader,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl ConflictTrace {
    pub fn conflicted_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.conflicted).count()
    }

    /// The prefix `G_1 pad^m_1 G_2 pad^m_2 ...` as `(graph, count)` blocks.
    pub fn blocks(&self) -> Vec<(CommGraph, u64)> {
        let pad = padding_graph(self.header.inputs.len());
        let mut out = Vec::with_capacity(2 * self.steps.len());
        for s in &self.steps {
            out.push((s.graph.clone(), 1));
            if s.pad > 0 {
                out.push((pad.clone(), s.pad));
            }
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        writeln!(w)?;
        for s in &self.steps {
            serde_json::to_writer(&mut w, s)?;
            writeln!(w)?;
        }
        serde_json::to_writer(&mut w, &self.outcome)?;
        writeln!(w)
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let parse_err = |i: usize, e: &dyn std::fmt::Display| {
            Error::Parse(format!("trace line {}: {e}", i + 1))
        };
        let mut header = None;
        let mut steps = Vec::new();
        let mut outcome = None;
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| parse_err(i, &e))?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| parse_err(i, &e))?;
            if header.is_none() {
                header = Some(
                    serde_json::from_value::<TraceHeader>(value).map_err(|e| parse_err(i, &e))?,
                );
            } else if outcome.is_some() {
                return Err(parse_err(i, &"content after the outcome line"));
            } else if value.get("outcome").is_some() {
                outcome = Some(serde_json::from_value(value).map_err(|e| parse_err(i, &e))?);
            } else {
                steps.push(serde_json::from_value(value).map_err(|e| parse_err(i, &e))?);
            }
        }
        let header = header.ok_or_else(|| Error::Parse("empty trace file".into()))?;
        if header.version != TRACE_VERSION {
            return Err(Error::Parse(format!(
                "unsupported trace version {}",
                header.version
            )));
        }
        let outcome = outcome.unwrap_or(Outcome::Drove {
            steps: steps.len() as u64,
        });
        Ok(ConflictTrace {
            header,
            steps,
            outcome,
        })
    }
}

/// Embeds a two-process prefix into `n` processes, the extra processes hearing
/// from everyone.
pub fn lift_dll_prefix(prefix: &[CommGraph], n: usize) -> Result<Vec<CommGraph>> {
    prefix.iter().map(|g| lift_two_process(g, n)).collect()
}

fn check_inputs(inputs: &[Value], n_expected: Option<usize>) -> Result<()> {
    if let Some(n) = n_expected {
        if inputs.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: inputs.len(),
            });
        }
    }
    if inputs.len() < 2 {
        return Err(Error::Precondition(
            "the driver needs at least two processes".into(),
        ));
    }
    if inputs[0] == inputs[1] {
        return Err(Error::Precondition(
            "the first two processes need different inputs".into(),
        ));
    }
    Ok(())
}

/// Drives a two-process map through the delayed lossy-link adversary.
pub fn drive_conflict_dll(
    map: &dyn DecisionMap,
    inputs: &[Value],
    steps: u64,
    params: PatienceParams,
) -> Result<ConflictTrace> {
    check_inputs(inputs, Some(2))?;
    let graphs = LinkGraph::CONTINUATIONS.map(LinkGraph::graph);
    drive(map, AdversarySpec::dll(), inputs, &graphs, steps, params)
}

/// Drives an `n`-process map through the lossy snapshot adversary with one
/// omission, using lifted two-process graphs for the first two processes.
pub fn drive_conflict_liis(
    map: &dyn DecisionMap,
    inputs: &[Value],
    steps: u64,
    params: PatienceParams,
) -> Result<ConflictTrace> {
    check_inputs(inputs, None)?;
    let n = inputs.len();
    let spec = AdversarySpec::liis(n, 1)?;
    let mut graphs = Vec::with_capacity(3);
    for g in LinkGraph::CONTINUATIONS {
        graphs.push(lift_two_process(&g.graph(), n)?);
    }
    drive(map, spec, inputs, &graphs, steps, params)
}

enum Candidate {
    Conflicted {
        run: Run,
        pad: u64,
        decisions: Vec<Value>,
    },
    Valid {
        pad: u64,
    },
    Exhausted,
}

fn try_candidate(
    map: &dyn DecisionMap,
    run: &Run,
    g: &CommGraph,
    pad_graph: &CommGraph,
    params: PatienceParams,
) -> Result<Candidate> {
    let mut cand = run.clone();
    cand.step(g)?;
    let pad = match patience_with_graph(&cand, map, params, pad_graph) {
        Ok(m) => m,
        Err(Error::PatienceExhausted { .. }) => return Ok(Candidate::Exhausted),
        Err(e) => return Err(e),
    };
    if let Err(Error::PatienceExhausted { .. }) = map.check_health() {
        return Ok(Candidate::Exhausted);
    }
    cand.step_repeat(pad_graph, pad)?;
    let decisions = map.decisions(&cand, cand.len());
    if is_valid_output(cand.inputs(), &decisions)? {
        Ok(Candidate::Valid { pad })
    } else {
        Ok(Candidate::Conflicted {
            run: cand,
            pad,
            decisions,
        })
    }
}

fn drive(
    map: &dyn DecisionMap,
    spec: AdversarySpec,
    inputs: &[Value],
    continuations: &[CommGraph],
    steps: u64,
    params: PatienceParams,
) -> Result<ConflictTrace> {
    params.validate()?;
    let header = TraceHeader {
        version: TRACE_VERSION,
        spec,
        map: map.name(),
        inputs: inputs.to_vec(),
        patience: params,
    };
    let pad_graph = padding_graph(inputs.len());
    let mut run = Run::new(inputs.to_vec())?;
    let mut out = Vec::new();
    let finish = |steps, outcome| ConflictTrace {
        header: header.clone(),
        steps,
        outcome,
    };
    if is_valid_output(inputs, &map.decisions(&run, 0))? {
        let outcome = Outcome::Escaped {
            step: 0,
            diagnosis: None,
        };
        return Ok(finish(out, outcome));
    }
    for step in 1..=steps {
        let mut pads = Vec::with_capacity(continuations.len());
        let mut chosen = None;
        for g in continuations {
            match try_candidate(map, &run, g, &pad_graph, params)? {
                Candidate::Exhausted => {
                    return Ok(finish(out, Outcome::PatienceExhausted { step }));
                }
                Candidate::Valid { pad } => pads.push(pad),
                Candidate::Conflicted {
                    run,
                    pad,
                    decisions,
                } => {
                    chosen = Some((g, run, pad, decisions));
                    break;
                }
            }
        }
        let Some((g, next, pad, decisions)) = chosen else {
            let diagnosis = diagnose(map, &run, continuations, &pad_graph, &pads);
            return Ok(finish(
                out,
                Outcome::Escaped {
                    step,
                    diagnosis: Some(diagnosis),
                },
            ));
        };
        out.push(TraceStep {
            step,
            pad,
            graph: g.clone(),
            decisions,
            conflicted: true,
        });
        run = next;
    }
    Ok(finish(out, Outcome::Drove { steps }))
}

/// Evaluates the chain `none ~p pq ~q both ~p qp ~q none` at a common padding
/// and the two patience equalities of the current prefix.
fn diagnose(
    map: &dyn DecisionMap,
    base: &Run,
    continuations: &[CommGraph],
    pad_graph: &CommGraph,
    pads: &[u64],
) -> Diagnosis {
    let padding = pads.iter().copied().max().unwrap_or(0);
    let extend = |g: &CommGraph| {
        let mut r = base.clone();
        r.step(g).expect("sizes match");
        r.step_repeat(pad_graph, padding).expect("sizes match");
        r
    };
    let silent = extend(pad_graph);
    let runs: Vec<(&str, Run)> = std::iter::once(("none", silent.clone()))
        .chain(
            ["pq", "both", "qp"]
                .into_iter()
                .zip(continuations.iter().map(extend)),
        )
        .collect();
    let at = base.len() + padding + 1;
    let mut links = Vec::with_capacity(6);
    for (i, process) in [(0usize, 0usize), (1, 1), (2, 0), (3, 1)] {
        let (left_name, left) = &runs[i];
        let (right_name, right) = &runs[(i + 1) % 4];
        links.push(ChainLink {
            name: format!("{}: {left_name}/{right_name}", process_name(process)),
            process,
            views_equal: Some(views_equal(left, process, right, process, at)),
            decisions_equal: map.decide(left, process, at) == map.decide(right, process, at),
        });
    }
    for process in [0, 1] {
        links.push(ChainLink {
            name: format!("{}: patience", process_name(process)),
            process,
            views_equal: None,
            decisions_equal: map.decide(&silent, process, at)
                == map.decide(base, process, base.len()),
        });
    }
    let broken = links
        .iter()
        .filter(|l| !l.decisions_equal)
        .map(|l| l.name.clone())
        .collect();
    Diagnosis {
        padding,
        links,
        broken,
    }
}

fn process_name(p: ProcessId) -> &'static str {
    if p == 0 {
        "p"
    } else {
        "q"
    }
}

/// First disagreement between a trace and its re-simulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub step: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub clean: bool,
    pub steps_checked: u64,
    pub mismatch: Option<Mismatch>,
}

/// Re-simulates a trace with `map` and checks decisions, conflicted flags and
/// admissibility step by step.
pub fn verify_conflict_trace(trace: &ConflictTrace, map: &dyn DecisionMap) -> VerifyReport {
    let mut checked = 0;
    let fail = |step: u64, reason: String, checked: u64| VerifyReport {
        clean: false,
        steps_checked: checked,
        mismatch: Some(Mismatch { step, reason }),
    };
    let n = trace.header.inputs.len();
    let mut run = match Run::new(trace.header.inputs.clone()) {
        Ok(r) => r,
        Err(e) => return fail(0, e.to_string(), 0),
    };
    let pad = padding_graph(n);
    let drove = matches!(trace.outcome, Outcome::Drove { .. });
    for (i, s) in trace.steps.iter().enumerate() {
        if s.step != i as u64 + 1 {
            return fail(s.step, format!("expected step number {}", i + 1), checked);
        }
        if let Err(e) = run
            .step(&s.graph)
            .and_then(|_| run.step_repeat(&pad, s.pad))
        {
            return fail(s.step, e.to_string(), checked);
        }
        if let Err(e) = trace
            .header
            .spec
            .check_runs(run.blocks().map(|b| (b.graph, b.len)))
        {
            return fail(s.step, format!("not admissible: {e}"), checked);
        }
        let decisions = map.decisions(&run, run.len());
        if decisions != s.decisions {
            return fail(
                s.step,
                format!(
                    "recorded decisions {:?}, re-simulated {:?}",
                    s.decisions, decisions
                ),
                checked,
            );
        }
        let conflicted = !is_valid_output(run.inputs(), &decisions).unwrap_or(false);
        if conflicted != s.conflicted {
            return fail(
                s.step,
                format!(
                    "recorded conflicted = {}, re-simulated {conflicted}",
                    s.conflicted
                ),
                checked,
            );
        }
        if drove && !conflicted {
            return fail(
                s.step,
                "a driven trace has a step that is not conflicted".into(),
                checked,
            );
        }
        checked += 1;
    }
    if let Outcome::Drove { steps } = trace.outcome {
        if steps != trace.steps.len() as u64 {
            return fail(
                steps,
                format!(
                    "outcome claims {steps} steps, trace has {}",
                    trace.steps.len()
                ),
                checked,
            );
        }
    }
    VerifyReport {
        clean: true,
        steps_checked: checked,
        mismatch: None,
    }
}
