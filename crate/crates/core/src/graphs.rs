//! Communication graphs, the snapshot graph class and its lossy variants.
//!
//! A [`CommGraph`] is a directed graph on `n` processes where an edge `a -> b`
//! means the message of `a` reaches `b` in that round. Self-loops are always
//! present and can never be removed.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type ProcessId = usize;

/// Largest process count a [`ProcSet`] can hold.
pub const MAX_PROCESSES: usize = 64;

/// Largest `n` accepted by [`enumerate_iis_graphs`].
pub const MAX_IIS_ENUM: usize = 6;

/// Largest `n` accepted by [`enumerate_lossy_graphs`].
pub const MAX_LOSSY_ENUM: usize = 5;

/// A set of process ids packed into a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcSet(u64);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ProcSet(bits)
    }

    pub fn singleton(p: ProcessId) -> Self {
        ProcSet(1 << p)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ProcSet(u64::MAX)
        } else {
            ProcSet((1u64 << n) - 1)
        }
    }

    /// `{lo, .., hi-1}`.
    pub fn range(lo: usize, hi: usize) -> Self {
        ProcSet(Self::full(hi).0 & !Self::full(lo).0)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, p: ProcessId) -> bool {
        p < 64 && self.0 & (1 << p) != 0
    }

    pub fn insert(&mut self, p: ProcessId) {
        self.0 |= 1 << p;
    }

    pub fn remove(&mut self, p: ProcessId) {
        self.0 &= !(1 << p);
    }

    pub fn union(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = ProcessId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }
}

impl FromIterator<ProcessId> for ProcSet {
    fn from_iter<I: IntoIterator<Item = ProcessId>>(iter: I) -> Self {
        let mut s = ProcSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ProcSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProcSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<ProcessId>::deserialize(d)?;
        if let Some(bad) = ids.iter().find(|&&p| p >= MAX_PROCESSES) {
            return Err(serde::de::Error::custom(format!(
                "process id {bad} too large"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}

/// Directed communication graph with implicit self-loops.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CommGraph {
    n: usize,
    /// `out[a]` holds every `b` with `a -> b`.
    out: Vec<u64>,
    /// `inc[b]` holds every `a` with `a -> b`, i.e. `In_G(b)`.
    inc: Vec<u64>,
}

impl CommGraph {
    /// The silent graph: self-loops only.
    pub fn empty(n: usize) -> Self {
        assert!(
            (1..=MAX_PROCESSES).contains(&n),
            "process count {n} outside 1..={MAX_PROCESSES}"
        );
        let diag: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        CommGraph {
            n,
            out: diag.clone(),
            inc: diag,
        }
    }

    /// Complete graph on all `n` processes.
    pub fn complete(n: usize) -> Self {
        Self::complete_on(n, ProcSet::full(n))
    }

    /// Complete graph on `vertices`; every other process only keeps its self-loop.
    pub fn complete_on(n: usize, vertices: ProcSet) -> Self {
        let mut g = Self::empty(n);
        for a in vertices.iter() {
            for b in vertices.iter() {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(ProcessId, ProcessId)]) -> Self {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: ProcessId, b: ProcessId) -> bool {
        self.out[a] & (1 << b) != 0
    }

    pub fn add_edge(&mut self, a: ProcessId, b: ProcessId) {
        assert!(a < self.n && b < self.n, "edge ({a},{b}) out of range");
        self.out[a] |= 1 << b;
        self.inc[b] |= 1 << a;
    }

    /// Removes a non-self edge. Self-loops are never removed.
    pub fn remove_edge(&mut self, a: ProcessId, b: ProcessId) {
        if a == b {
            return;
        }
        self.out[a] &= !(1 << b);
        self.inc[b] &= !(1 << a);
    }

    /// `In_G(p)`: the processes whose messages `p` receives, `p` included.
    pub fn in_set(&self, p: ProcessId) -> ProcSet {
        ProcSet(self.inc[p])
    }

    pub fn out_set(&self, p: ProcessId) -> ProcSet {
        ProcSet(self.out[p])
    }

    /// Non-self edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (ProcessId, ProcessId)> + '_ {
        (0..self.n).flat_map(move |a| {
            ProcSet(self.out[a])
                .iter()
                .filter(move |&b| b != a)
                .map(move |b| (a, b))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.out
            .iter()
            .map(|r| r.count_ones() as usize)
            .sum::<usize>()
            - self.n
    }

    /// True when no process hears from anybody else.
    pub fn is_silent(&self) -> bool {
        self.edge_count() == 0
    }

    /// Whether every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &CommGraph) -> bool {
        self.n == other.n && self.out.iter().zip(&other.out).all(|(a, b)| a & !b == 0)
    }

    /// For each `a`, the processes that reach `a` through a directed path
    /// (including `a` itself).
    pub fn reach_into(&self) -> Vec<ProcSet> {
        let mut reach = self.inc.clone();
        loop {
            let mut changed = false;
            for a in 0..self.n {
                let mut acc = reach[a];
                for c in ProcSet(reach[a]).iter() {
                    acc |= reach[c];
                }
                if acc != reach[a] {
                    reach[a] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        reach.into_iter().map(ProcSet).collect()
    }

    /// Row-major `'0'`/`'1'` string of length `n^2`.
    pub fn to_bits(&self) -> String {
        let mut s = String::with_capacity(self.n * self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                s.push(if self.has_edge(a, b) { '1' } else { '0' });
            }
        }
        s
    }

    pub fn from_bits(s: &str) -> Result<Self> {
        let len = s.len();
        let n = (len as f64).sqrt().round() as usize;
        if n == 0 || n * n != len || n > MAX_PROCESSES {
            return Err(Error::Parse(format!(
                "graph string of length {len} is not n*n for a supported n"
            )));
        }
        let mut g = Self::empty(n);
        for (i, c) in s.chars().enumerate() {
            let (a, b) = (i / n, i % n);
            match c {
                '1' => g.add_edge(a, b),
                '0' if a == b => {
                    return Err(Error::Parse(format!(
                        "self-loop of process {a} must be '1' in {s}"
                    )))
                }
                '0' => {}
                other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
            }
        }
        Ok(g)
    }

    fn bools(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).flat_map(move |a| (0..self.n).map(move |b| self.has_edge(a, b)))
    }
}

impl Ord for CommGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.bools().cmp(other.bools()))
    }
}

impl PartialOrd for CommGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for CommGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CommGraph({})", self.to_bits())
    }
}

impl fmt::Display for CommGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bits())
    }
}

impl FromStr for CommGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_bits(s.trim())
    }
}

impl Serialize for CommGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bits())
    }
}

impl<'de> Deserialize<'de> for CommGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CommGraph::from_bits(&s).map_err(serde::de::Error::custom)
    }
}

/// The four two-process graphs. Process 0 is `p`, process 1 is `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkGraph {
    None,
    /// `p -> q`
    Pq,
    /// `p <-> q`
    Both,
    /// `q -> p`
    Qp,
}

impl LinkGraph {
    /// The three communicating graphs in the order the conflict driver tries them.
    pub const CONTINUATIONS: [LinkGraph; 3] = [LinkGraph::Pq, LinkGraph::Both, LinkGraph::Qp];

    pub fn graph(self) -> CommGraph {
        match self {
            LinkGraph::None => CommGraph::empty(2),
            LinkGraph::Pq => CommGraph::from_edges(2, &[(0, 1)]),
            LinkGraph::Qp => CommGraph::from_edges(2, &[(1, 0)]),
            LinkGraph::Both => CommGraph::from_edges(2, &[(0, 1), (1, 0)]),
        }
    }

    pub fn of(g: &CommGraph) -> Option<LinkGraph> {
        if g.n() != 2 {
            return None;
        }
        Some(match (g.has_edge(0, 1), g.has_edge(1, 0)) {
            (false, false) => LinkGraph::None,
            (true, false) => LinkGraph::Pq,
            (false, true) => LinkGraph::Qp,
            (true, true) => LinkGraph::Both,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkGraph::None => "none",
            LinkGraph::Pq => "pq",
            LinkGraph::Qp => "qp",
            LinkGraph::Both => "both",
        }
    }
}

impl FromStr for LinkGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(LinkGraph::None),
            "pq" => Ok(LinkGraph::Pq),
            "qp" => Ok(LinkGraph::Qp),
            "both" | "pqp" => Ok(LinkGraph::Both),
            other => Err(Error::Parse(format!("unknown two-process graph {other:?}"))),
        }
    }
}

/// A class of graphs: the snapshot graphs, or their lossy variants `Φ(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphClass {
    Iis,
    Lossy { f: u64 },
}

impl GraphClass {
    pub fn enumerate(self, n: usize) -> Result<Vec<CommGraph>> {
        match self {
            GraphClass::Iis => enumerate_iis_graphs(n),
            GraphClass::Lossy { f } => enumerate_lossy_graphs(n, f),
        }
    }

    pub fn contains(self, g: &CommGraph) -> bool {
        match self {
            GraphClass::Iis => is_iis_graph(g),
            GraphClass::Lossy { f } => is_lossy_graph(g, f),
        }
    }
}

pub fn is_semi_complete(g: &CommGraph) -> bool {
    (0..g.n()).all(|a| (a + 1..g.n()).all(|b| g.has_edge(a, b) || g.has_edge(b, a)))
}

pub fn is_transitive(g: &CommGraph) -> bool {
    // a -> b and b -> c imply a -> c: every out-row of b is inside the out-row of a.
    (0..g.n()).all(|a| {
        g.out_set(a)
            .iter()
            .all(|b| g.out_set(b).is_subset(g.out_set(a)))
    })
}

pub fn is_iis_graph(g: &CommGraph) -> bool {
    is_semi_complete(g) && is_transitive(g)
}

/// Whether `g` is some snapshot graph minus between 1 and `f` non-self edges.
pub fn is_lossy_graph(g: &CommGraph, f: u64) -> bool {
    let Ok(iis) = iis_graphs(g.n()) else {
        return false;
    };
    let own = g.edge_count();
    iis.iter()
        .any(|h| g.is_subgraph_of(h) && (1..=f).contains(&((h.edge_count() - own) as u64)))
}

static IIS_CACHE: [OnceLock<Vec<CommGraph>>; MAX_IIS_ENUM + 1] =
    [const { OnceLock::new() }; MAX_IIS_ENUM + 1];

/// Cached [`enumerate_iis_graphs`].
pub fn iis_graphs(n: usize) -> Result<&'static [CommGraph]> {
    if !(1..=MAX_IIS_ENUM).contains(&n) {
        return enumerate_iis_graphs(n).map(|_| &[][..]);
    }
    if let Some(v) = IIS_CACHE[n].get() {
        return Ok(v);
    }
    let v = enumerate_iis_graphs(n)?;
    Ok(IIS_CACHE[n].get_or_init(|| v))
}

/// `(p_1 ? p_2) ⊕ K` on the remaining processes: embeds a two-process graph
/// into `n` processes so that `p_1`, `p_2` keep their two-process views.
pub fn lift_two_process(g: &CommGraph, n: usize) -> Result<CommGraph> {
    if g.n() != 2 {
        return Err(Error::SizeMismatch {
            expected: 2,
            actual: g.n(),
        });
    }
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u64,
            range: "2..=64",
        });
    }
    let pair = ProcSet::range(0, 2);
    let rest = ProcSet::range(2, n);
    let mut inner = CommGraph::empty(n);
    for (a, b) in g.edges() {
        inner.add_edge(a, b);
    }
    oplus(&inner, pair, &CommGraph::complete_on(n, rest), rest)
}

/// The padding graph for `n` processes: the silent graph for two processes,
/// its lift otherwise.
pub fn padding_graph(n: usize) -> CommGraph {
    if n <= 2 {
        CommGraph::empty(n)
    } else {
        lift_two_process(&CommGraph::empty(2), n).expect("n >= 3")
    }
}

/// All semi-complete transitive graphs on `n` processes, sorted canonically.
///
/// Such graphs are exactly the weak orders on the processes: `a -> b` whenever
/// `a`'s snapshot happens no later than `b`'s.
pub fn enumerate_iis_graphs(n: usize) -> Result<Vec<CommGraph>> {
    if !(1..=MAX_IIS_ENUM).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u64,
            range: "1..=6",
        });
    }
    let mut seen = HashSet::new();
    let mut rank = vec![0usize; n];
    loop {
        let used: u64 = rank.iter().fold(0, |m, &r| m | (1 << r));
        // Ranks must form a prefix 0..m of the naturals.
        if used & (used + 1) == 0 {
            let mut g = CommGraph::empty(n);
            for a in 0..n {
                for b in 0..n {
                    if rank[a] <= rank[b] {
                        g.add_edge(a, b);
                    }
                }
            }
            seen.insert(g);
        }
        // Odometer over rank vectors.
        let mut i = 0;
        while i < n {
            rank[i] += 1;
            if rank[i] < n {
                break;
            }
            rank[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let mut out: Vec<CommGraph> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// `Φ(f)`: graphs obtained by deleting 1..=f non-self edges from a snapshot graph.
///
/// The result may contain graphs that are themselves snapshot graphs.
pub fn enumerate_lossy_graphs(n: usize, f: u64) -> Result<Vec<CommGraph>> {
    if !(1..=MAX_LOSSY_ENUM).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u64,
            range: "1..=5",
        });
    }
    let max_f = (n * (n - 1)) as u64;
    if f < 1 || f > max_f {
        return Err(Error::OutOfRange {
            what: "f",
            value: f,
            range: "1..=n(n-1)",
        });
    }
    let mut level: HashSet<CommGraph> = enumerate_iis_graphs(n)?.into_iter().collect();
    let mut all = HashSet::new();
    for _ in 0..f {
        let mut next = HashSet::new();
        for g in &level {
            for (a, b) in g.edges() {
                let mut h = g.clone();
                h.remove_edge(a, b);
                next.insert(h);
            }
        }
        if next.is_empty() {
            break;
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    let mut out: Vec<CommGraph> = all.into_iter().collect();
    out.sort();
    Ok(out)
}

/// `G1 ⊕ G2`: both edge sets plus every edge from `left` to `right`.
///
/// Both graphs live on the same process count; only their edges inside the
/// given vertex sets are kept.
pub fn oplus(g1: &CommGraph, left: ProcSet, g2: &CommGraph, right: ProcSet) -> Result<CommGraph> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            expected: g1.n(),
            actual: g2.n(),
        });
    }
    let n = g1.n();
    let overlap = left.intersection(right);
    if !overlap.is_empty() {
        return Err(Error::OverlappingVertexSets(overlap.iter().collect()));
    }
    if !left.union(right).is_subset(ProcSet::full(n)) {
        return Err(Error::OutOfRange {
            what: "vertex id",
            value: left.union(right).bits().ilog2() as u64,
            range: "0..n",
        });
    }
    let mut g = CommGraph::empty(n);
    for (a, b) in g1.edges() {
        if left.contains(a) && left.contains(b) {
            g.add_edge(a, b);
        }
    }
    for (a, b) in g2.edges() {
        if right.contains(a) && right.contains(b) {
            g.add_edge(a, b);
        }
    }
    for a in left.iter() {
        for b in right.iter() {
            g.add_edge(a, b);
        }
    }
    Ok(g)
}

/// A vertex with an edge to every process, lowest id first.
pub fn dominating_vertex(g: &CommGraph) -> Option<ProcessId> {
    let all = ProcSet::full(g.n());
    (0..g.n()).find(|&v| g.out_set(v) == all)
}
