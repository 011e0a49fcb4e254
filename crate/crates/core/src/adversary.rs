//! Message adversaries: alphabets, finite-prefix admissibility, enumeration
//! and seeded sampling of communication patterns.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, CommGraph, MAX_IIS_ENUM, MAX_LOSSY_ENUM};

/// Upper bound on `|alphabet|^length` for [`enumerate_prefixes`].
pub const ENUMERATION_GUARD: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Lossy-link: at most one message lost per round.
    Ll,
    /// Lossy-link with at most `k` consecutive silent rounds.
    Bdll,
    /// Union of all bounded-delay lossy-link adversaries.
    BdllAny,
    /// Lossy-link with arbitrarily long, finite silent periods.
    Dll,
    /// Iterated immediate snapshot: semi-complete transitive graphs only.
    Iis,
    /// At most `k` consecutive lossy snapshot rounds.
    Bliis,
    BliisAny,
    /// Arbitrarily long, finite lossy stretches.
    Liis,
}

/// A message adversary together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdversarySpec {
    pub family: Family,
    pub n: usize,
    /// Bound on consecutive lossy rounds (`Bdll`, `Bliis`).
    pub k: Option<u64>,
    /// Omissions per lossy round (`Bliis`, `BliisAny`, `Liis`).
    pub f: Option<u64>,
}

impl AdversarySpec {
    pub fn ll() -> Self {
        Self::two(Family::Ll, None)
    }

    pub fn bdll(k: u64) -> Self {
        Self::two(Family::Bdll, Some(k))
    }

    pub fn bdll_any() -> Self {
        Self::two(Family::BdllAny, None)
    }

    pub fn dll() -> Self {
        Self::two(Family::Dll, None)
    }

    fn two(family: Family, k: Option<u64>) -> Self {
        AdversarySpec {
            family,
            n: 2,
            k,
            f: None,
        }
    }

    pub fn iis(n: usize) -> Result<Self> {
        Self::new(Family::Iis, n, None, None)
    }

    pub fn bliis(n: usize, f: u64, k: u64) -> Result<Self> {
        Self::new(Family::Bliis, n, Some(k), Some(f))
    }

    pub fn bliis_any(n: usize, f: u64) -> Result<Self> {
        Self::new(Family::BliisAny, n, None, Some(f))
    }

    pub fn liis(n: usize, f: u64) -> Result<Self> {
        Self::new(Family::Liis, n, None, Some(f))
    }

    pub fn new(family: Family, n: usize, k: Option<u64>, f: Option<u64>) -> Result<Self> {
        let spec = AdversarySpec { family, n, k, f };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        use Family::*;
        match self.family {
            Ll | Bdll | BdllAny | Dll => {
                if self.n != 2 {
                    return Err(Error::Precondition(format!(
                        "{} is a two-process adversary, got n = {}",
                        self, self.n
                    )));
                }
            }
            Iis | Bliis | BliisAny | Liis => {
                if !(2..=MAX_IIS_ENUM).contains(&self.n) {
                    return Err(Error::OutOfRange {
                        what: "n",
                        value: self.n as u64,
                        range: "2..=6",
                    });
                }
            }
        }
        let needs_k = matches!(self.family, Bdll | Bliis);
        if needs_k != self.k.is_some() {
            return Err(Error::Precondition(format!(
                "parameter k is {} for this family",
                if needs_k { "required" } else { "not accepted" }
            )));
        }
        let needs_f = matches!(self.family, Bliis | BliisAny | Liis);
        if needs_f != self.f.is_some() {
            return Err(Error::Precondition(format!(
                "parameter f is {} for this family",
                if needs_f { "required" } else { "not accepted" }
            )));
        }
        if let Some(f) = self.f {
            let max = (self.n * (self.n - 1)) as u64;
            if f < 1 || f > max {
                return Err(Error::OutOfRange {
                    what: "f",
                    value: f,
                    range: "1..=n(n-1)",
                });
            }
        }
        Ok(())
    }

    /// Whether the adversary can produce lossy (non-snapshot) rounds at all.
    pub fn has_lossy_rounds(&self) -> bool {
        !matches!(self.family, Family::Ll | Family::Iis) && self.k != Some(0)
    }

    /// Bound on consecutive lossy rounds within a finite prefix, if any.
    pub fn lossy_bound(&self) -> Option<u64> {
        match self.family {
            Family::Ll | Family::Iis => Some(0),
            Family::Bdll | Family::Bliis => self.k,
            _ => None,
        }
    }

    fn omissions(&self) -> u64 {
        self.f.unwrap_or(1)
    }

    /// Whether `g` is a communicating (snapshot) round of this adversary.
    pub fn is_good(&self, g: &CommGraph) -> bool {
        g.n() == self.n && graphs::is_iis_graph(g)
    }

    /// Whether `g` is a lossy round that is not also a snapshot round.
    pub fn is_lossy(&self, g: &CommGraph) -> bool {
        if g.n() != self.n || !self.has_lossy_rounds() || graphs::is_iis_graph(g) {
            return false;
        }
        if self.n == 2 {
            g.is_silent()
        } else {
            graphs::is_lossy_graph(g, self.omissions())
        }
    }

    /// The alphabet as explicit graph lists (cached).
    pub fn alphabet(&self) -> Result<Arc<Alphabet>> {
        type Cache = Mutex<HashMap<(usize, u64, bool), Arc<Alphabet>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (self.n, self.omissions(), self.has_lossy_rounds());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(a) = cache.lock().expect("alphabet cache").get(&key) {
            return Ok(a.clone());
        }
        let good = graphs::iis_graphs(self.n)?.to_vec();
        let lossy = if key.2 {
            if self.n > MAX_LOSSY_ENUM {
                return Err(Error::OutOfRange {
                    what: "n",
                    value: self.n as u64,
                    range: "2..=5 for lossy alphabets",
                });
            }
            let iis: HashSet<&CommGraph> = good.iter().collect();
            graphs::enumerate_lossy_graphs(self.n, self.omissions())?
                .into_iter()
                .filter(|g| !iis.contains(g))
                .collect()
        } else {
            Vec::new()
        };
        let mut all: Vec<CommGraph> = good.iter().chain(&lossy).cloned().collect();
        all.sort();
        let a = Arc::new(Alphabet { good, lossy, all });
        cache.lock().expect("alphabet cache").insert(key, a.clone());
        Ok(a)
    }

    /// Checks a run-length encoded prefix, reporting the first offending round.
    pub fn check_runs<'a, I>(&self, runs: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a CommGraph, u64)>,
    {
        let mut round = 0u64;
        let mut lossy_run = 0u64;
        let bound = self.lossy_bound();
        for (g, count) in runs {
            if count == 0 {
                continue;
            }
            if g.n() != self.n {
                return Err(Error::SizeMismatch {
                    expected: self.n,
                    actual: g.n(),
                });
            }
            if self.is_good(g) {
                lossy_run = 0;
            } else if self.is_lossy(g) {
                lossy_run += count;
                if let Some(k) = bound {
                    if lossy_run > k {
                        let first_bad = round + count - (lossy_run - k) + 1;
                        return Err(Error::LossyRunTooLong {
                            round: first_bad,
                            run: lossy_run,
                            k,
                        });
                    }
                }
            } else {
                return Err(Error::NotInAlphabet {
                    round: round + 1,
                    graph: g.to_bits(),
                    family: self.to_string(),
                });
            }
            round += count;
        }
        Ok(())
    }

    pub fn check_prefix(&self, prefix: &[CommGraph]) -> Result<()> {
        self.check_runs(prefix.iter().map(|g| (g, 1)))
    }
}

/// Whether the finite prefix extends to an infinite member of the adversary.
pub fn admits_prefix(spec: &AdversarySpec, prefix: &[CommGraph]) -> bool {
    spec.check_prefix(prefix).is_ok()
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.k.unwrap_or(0);
        let om = self.omissions();
        match self.family {
            Family::Ll => write!(f, "ll"),
            Family::Bdll => write!(f, "bdll:k={k}"),
            Family::BdllAny => write!(f, "bdll"),
            Family::Dll => write!(f, "dll"),
            Family::Iis => write!(f, "iis:n={}", self.n),
            Family::Bliis => write!(f, "bliis:n={},f={om},k={k}", self.n),
            Family::BliisAny => write!(f, "bliis:n={},f={om}", self.n),
            Family::Liis => write!(f, "liis:n={},f={om}", self.n),
        }
    }
}

fn parse_params(s: &str) -> Result<HashMap<String, u64>> {
    let mut out = HashMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in {part:?}")))?;
        if out.insert(key.trim().to_string(), value).is_some() {
            return Err(Error::Parse(format!("duplicate parameter {key:?}")));
        }
    }
    Ok(out)
}

impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = parse_params(rest)?;
        let mut take = |key: &str| params.remove(key);
        let spec = match name {
            "ll" => AdversarySpec::ll(),
            "dll" => AdversarySpec::dll(),
            "bdll" => match take("k") {
                Some(k) => AdversarySpec::bdll(k),
                None => AdversarySpec::bdll_any(),
            },
            "iis" | "bliis" | "liis" => {
                let n = take("n").ok_or_else(|| Error::Parse(format!("{name} needs n=")))?;
                let n = n as usize;
                match name {
                    "iis" => AdversarySpec::iis(n)?,
                    "liis" => AdversarySpec::liis(n, take("f").unwrap_or(1))?,
                    _ => {
                        let f = take("f").unwrap_or(1);
                        match take("k") {
                            Some(k) => AdversarySpec::bliis(n, f, k)?,
                            None => AdversarySpec::bliis_any(n, f)?,
                        }
                    }
                }
            }
            other => return Err(Error::Parse(format!("unknown adversary {other:?}"))),
        };
        if let Some(key) = params.keys().next() {
            return Err(Error::Parse(format!(
                "unexpected parameter {key:?} for {name}"
            )));
        }
        Ok(spec)
    }
}

impl Serialize for AdversarySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AdversarySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Explicit graph lists of an adversary.
#[derive(Debug)]
pub struct Alphabet {
    /// Snapshot graphs.
    pub good: Vec<CommGraph>,
    /// Lossy graphs that are not snapshot graphs.
    pub lossy: Vec<CommGraph>,
    /// Both lists merged in canonical order.
    pub all: Vec<CommGraph>,
}

/// All admissible prefixes of exactly `length` rounds, in lexicographic order
/// of the canonical alphabet.
pub fn enumerate_prefixes(spec: &AdversarySpec, length: usize) -> Result<PrefixIter> {
    let alphabet = spec.alphabet()?;
    let count = (alphabet.all.len() as u128)
        .checked_pow(length as u32)
        .unwrap_or(u128::MAX);
    if count > ENUMERATION_GUARD {
        return Err(Error::ExplosionGuard {
            count,
            limit: ENUMERATION_GUARD,
        });
    }
    Ok(PrefixIter {
        spec: *spec,
        alphabet,
        idx: vec![0; length],
        done: false,
    })
}

pub struct PrefixIter {
    spec: AdversarySpec,
    alphabet: Arc<Alphabet>,
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for PrefixIter {
    type Item = Vec<CommGraph>;

    fn next(&mut self) -> Option<Vec<CommGraph>> {
        let base = self.alphabet.all.len();
        while !self.done {
            let candidate: Vec<CommGraph> = self
                .idx
                .iter()
                .map(|&i| self.alphabet.all[i].clone())
                .collect();
            // Advance the odometer, last round fastest.
            let mut pos = self.idx.len();
            loop {
                if pos == 0 {
                    self.done = true;
                    break;
                }
                pos -= 1;
                self.idx[pos] += 1;
                if self.idx[pos] < base {
                    break;
                }
                self.idx[pos] = 0;
            }
            if admits_prefix(&self.spec, &candidate) {
                return Some(candidate);
            }
        }
        None
    }
}

/// Distribution of lossy-run lengths used when sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum LossyRunLaw {
    /// Geometric on `{0, 1, ..}` with the given mean.
    Geometric { mean: f64 },
    /// Always the same run length.
    Fixed { len: u64 },
}

impl Default for LossyRunLaw {
    fn default() -> Self {
        LossyRunLaw::Geometric { mean: 2.0 }
    }
}

impl fmt::Display for LossyRunLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossyRunLaw::Geometric { mean } => write!(f, "geometric:mean={mean}"),
            LossyRunLaw::Fixed { len } => write!(f, "fixed:len={len}"),
        }
    }
}

impl FromStr for LossyRunLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let value = rest.split_once('=').map(|(_, v)| v.trim());
        match name {
            "geometric" => {
                let mean = match value {
                    Some(v) => v
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad mean in {s:?}")))?,
                    None => 2.0,
                };
                if !(mean >= 0.0 && mean.is_finite()) {
                    return Err(Error::Parse(format!("mean must be finite and >= 0: {s:?}")));
                }
                Ok(LossyRunLaw::Geometric { mean })
            }
            "fixed" => {
                let len = value
                    .ok_or_else(|| Error::Parse(format!("fixed law needs len=: {s:?}")))?
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad len in {s:?}")))?;
                Ok(LossyRunLaw::Fixed { len })
            }
            other => Err(Error::Parse(format!("unknown lossy-run law {other:?}"))),
        }
    }
}

impl LossyRunLaw {
    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            LossyRunLaw::Fixed { len } => len,
            LossyRunLaw::Geometric { mean } => {
                if mean <= 0.0 {
                    return 0;
                }
                Geometric::new(1.0 / (1.0 + mean))
                    .expect("probability in (0, 1]")
                    .sample(rng)
            }
        }
    }
}

/// A seeded admissible prefix of `rounds` graphs.
///
/// Lossy runs are drawn from `law`, clipped to the adversary's bound and to the
/// remaining length so the last round always communicates.
pub fn sample_pattern(
    spec: &AdversarySpec,
    seed: u64,
    rounds: usize,
    law: LossyRunLaw,
) -> Result<Vec<CommGraph>> {
    if rounds == 0 {
        return Err(Error::Precondition("rounds must be at least 1".into()));
    }
    let alphabet = spec.alphabet()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(rounds);
    let bound = spec.lossy_bound();
    while out.len() < rounds {
        if spec.has_lossy_rounds() && !alphabet.lossy.is_empty() {
            let mut run = law.draw(&mut rng);
            if let Some(k) = bound {
                run = run.min(k);
            }
            run = run.min((rounds - out.len() - 1) as u64);
            for _ in 0..run {
                let i = rng.random_range(0..alphabet.lossy.len());
                out.push(alphabet.lossy[i].clone());
            }
        }
        let i = rng.random_range(0..alphabet.good.len());
        out.push(alphabet.good[i].clone());
    }
    Ok(out)
}

/// The subsequence of non-silent rounds.
pub fn silence_free_core(prefix: &[CommGraph]) -> Vec<CommGraph> {
    prefix.iter().filter(|g| !g.is_silent()).cloned().collect()
}

/// Inserts `schedule[i]` silent rounds before `core[i]`.
pub fn delay_pattern(core: &[CommGraph], schedule: &[u64]) -> Result<Vec<CommGraph>> {
    if core.len() != schedule.len() {
        return Err(Error::LengthMismatch {
            expected: core.len(),
            actual: schedule.len(),
        });
    }
    let mut out = Vec::with_capacity(core.len() + schedule.iter().sum::<u64>() as usize);
    for (g, &pad) in core.iter().zip(schedule) {
        out.extend(std::iter::repeat_n(CommGraph::empty(g.n()), pad as usize));
        out.push(g.clone());
    }
    Ok(out)
}

/// A finite prefix of a communication pattern and the adversary it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommPattern {
    pub spec: AdversarySpec,
    pub prefix: Vec<CommGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub silence_profile: Option<LossyRunLaw>,
}

impl CommPattern {
    pub fn new(spec: AdversarySpec, prefix: Vec<CommGraph>) -> Result<Self> {
        spec.check_prefix(&prefix)?;
        Ok(CommPattern {
            spec,
            prefix,
            generator_seed: None,
            silence_profile: None,
        })
    }

    pub fn sampled(
        spec: AdversarySpec,
        seed: u64,
        rounds: usize,
        law: LossyRunLaw,
    ) -> Result<Self> {
        let prefix = sample_pattern(&spec, seed, rounds, law)?;
        Ok(CommPattern {
            spec,
            prefix,
            generator_seed: Some(seed),
            silence_profile: Some(law),
        })
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::LinkGraph::{self, *};

    fn seq(gs: &[LinkGraph]) -> Vec<CommGraph> {
        gs.iter().map(|g| g.graph()).collect()
    }

    #[test]
    fn admissibility_examples() {
        assert!(!admits_prefix(&AdversarySpec::ll(), &seq(&[None])));
        assert!(admits_prefix(
            &AdversarySpec::dll(),
            &seq(&[None, None, Pq])
        ));
        assert!(!admits_prefix(
            &AdversarySpec::bdll(1),
            &seq(&[Pq, None, None])
        ));
        assert!(admits_prefix(
            &AdversarySpec::bdll(1),
            &seq(&[None, Pq, None])
        ));
        assert!(admits_prefix(&AdversarySpec::bdll_any(), &seq(&[None; 7])));
    }

    #[test]
    fn rejection_names_the_round() {
        let err = AdversarySpec::ll()
            .check_prefix(&seq(&[Pq, Qp, None]))
            .unwrap_err();
        assert!(
            matches!(err, Error::NotInAlphabet { round: 3, .. }),
            "{err:?}"
        );
        let err = AdversarySpec::bdll(1)
            .check_prefix(&seq(&[Pq, None, None, None]))
            .unwrap_err();
        assert!(
            matches!(err, Error::LossyRunTooLong { round: 3, .. }),
            "{err:?}"
        );
        let err = AdversarySpec::bdll(2)
            .check_runs([(&None.graph(), 5)])
            .unwrap_err();
        assert!(
            matches!(err, Error::LossyRunTooLong { round: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(
            enumerate_prefixes(&AdversarySpec::ll(), 2).unwrap().count(),
            9
        );
        assert_eq!(
            enumerate_prefixes(&AdversarySpec::bdll(1), 2)
                .unwrap()
                .count(),
            15
        );
        let iis3 = AdversarySpec::iis(3).unwrap();
        assert_eq!(enumerate_prefixes(&iis3, 1).unwrap().count(), 13);
        assert!(matches!(
            enumerate_prefixes(&iis3, 10),
            Err(Error::ExplosionGuard { .. })
        ));
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "ll",
            "bdll:k=2",
            "bdll",
            "dll",
            "iis:n=3",
            "bliis:n=3,f=1,k=2",
            "bliis:n=3,f=1",
            "liis:n=3,f=1",
        ] {
            let spec: AdversarySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("ll:n=3".parse::<AdversarySpec>().is_err());
        assert!("iis".parse::<AdversarySpec>().is_err());
        assert!("liis:n=3,f=7".parse::<AdversarySpec>().is_err());
        assert!("warp".parse::<AdversarySpec>().is_err());
    }

    #[test]
    fn two_process_lossy_snapshot_alphabets_match_lossy_link() {
        for k in 0..3 {
            let a = AdversarySpec::bliis(2, 1, k).unwrap().alphabet().unwrap();
            let b = AdversarySpec::bdll(k).alphabet().unwrap();
            assert_eq!(a.all, b.all);
        }
        let a = AdversarySpec::liis(2, 1).unwrap().alphabet().unwrap();
        let b = AdversarySpec::dll().alphabet().unwrap();
        assert_eq!(a.all, b.all);
        assert_eq!(a.lossy, vec![None.graph()]);
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let spec = AdversarySpec::bliis(3, 1, 2).unwrap();
        let law = LossyRunLaw::default();
        let a = sample_pattern(&spec, 11, 60, law).unwrap();
        assert_eq!(a, sample_pattern(&spec, 11, 60, law).unwrap());
        assert_eq!(a.len(), 60);
        assert!(admits_prefix(&spec, &a));
        assert!(spec.is_good(a.last().unwrap()));

        let ll = sample_pattern(&AdversarySpec::ll(), 3, 50, law).unwrap();
        assert!(ll.iter().all(|g| !g.is_silent()));
    }

    #[test]
    fn sampling_dll_produces_silence() {
        let p = sample_pattern(&AdversarySpec::dll(), 5, 400, LossyRunLaw::default()).unwrap();
        assert!(p.iter().any(|g| g.is_silent()));
        assert!(!p.last().unwrap().is_silent());
        let fixed =
            sample_pattern(&AdversarySpec::dll(), 5, 9, LossyRunLaw::Fixed { len: 2 }).unwrap();
        assert_eq!(fixed.iter().filter(|g| g.is_silent()).count(), 6);
    }

    #[test]
    fn core_and_delay() {
        let p = seq(&[None, Pq, None, None, Qp]);
        assert_eq!(silence_free_core(&p), seq(&[Pq, Qp]));
        assert_eq!(silence_free_core(&seq(&[Both])), seq(&[Both]));
        assert!(silence_free_core(&seq(&[None, None])).is_empty());
        assert_eq!(
            delay_pattern(&seq(&[Pq]), &[2]).unwrap(),
            seq(&[None, None, Pq])
        );
        assert_eq!(
            delay_pattern(&seq(&[Pq, Qp]), &[0, 0]).unwrap(),
            seq(&[Pq, Qp])
        );
        assert!(delay_pattern(&seq(&[Pq]), &[]).is_err());
    }

    #[test]
    fn pattern_serialization() {
        let p = CommPattern::new(AdversarySpec::dll(), seq(&[None, Pq])).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"spec":"dll","prefix":["1001","1101"]}"#);
        let back: CommPattern = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(CommPattern::new(AdversarySpec::ll(), seq(&[None])).is_err());
    }

    #[test]
    fn law_strings() {
        assert_eq!(
            "geometric:mean=3".parse::<LossyRunLaw>().unwrap(),
            LossyRunLaw::Geometric { mean: 3.0 }
        );
        assert_eq!(
            "fixed:len=4".parse::<LossyRunLaw>().unwrap(),
            LossyRunLaw::Fixed { len: 4 }
        );
        assert!("poisson".parse::<LossyRunLaw>().is_err());
    }
}
