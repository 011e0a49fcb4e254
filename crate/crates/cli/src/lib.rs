//! Batch front end for the simulator: graph listings, stabilization sweeps,
//! conflict drives, trace verification and kernel estimates.

pub mod config;
pub mod pattern;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stabsim::adversary::{enumerate_prefixes, sample_pattern, AdversarySpec, Family, LossyRunLaw};
use stabsim::conflict::{
    drive_conflict_dll, drive_conflict_liis, verify_conflict_trace, ConflictTrace, Outcome,
};
use stabsim::graphs::{enumerate_iis_graphs, enumerate_lossy_graphs, CommGraph};
use stabsim::protocols::{
    averaging_series, gap, DecisionMap, MapSpec, PatienceParams, DEFAULT_CAP, DEFAULT_CONFIRM,
};
use stabsim::sweep::par_map;
use stabsim::tasks::{stabilization_report, StabilizationReport};
use stabsim::views::{
    broadcast_time, kernel_estimate, stable_value_round, InputConfig, Run, Value,
};

use config::{parse_int_list, FileConfig};
use pattern::parse_pattern;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ESCAPED: i32 = 2;
pub const EXIT_PATIENCE_EXHAUSTED: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const EXIT_EMPTY_KERNEL: i32 = 5;

/// Largest number of input vectors `sim --enumerate` expands from an input set.
const MAX_INPUT_VECTORS: usize = 4096;

#[derive(Debug, Parser)]
#[command(
    name = "stabsim",
    version,
    about = "Simulate message adversaries and stabilizing consensus"
)]
pub struct Cli {
    /// TOML file with default values for the flags (kebab-case keys).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the snapshot graphs or lossy snapshot graphs on n processes.
    Graphs(GraphsArgs),
    /// Simulate a decision map and report stabilization.
    Sim(SimArgs),
    /// Drive a map through an adversary that keeps it conflicted.
    Drive(DriveArgs),
    /// Re-simulate a conflict trace and check every step.
    Verify(VerifyArgs),
    /// Estimate the kernel of sampled patterns.
    Kernel(KernelArgs),
}

#[derive(Debug, Default, Args)]
pub struct GraphsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// `iis` or `lossy`.
    #[arg(long)]
    pub class: Option<String>,
    /// Omitted edges for `lossy`.
    #[arg(long)]
    pub f: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct SimArgs {
    /// Adversary, e.g. `ll`, `bdll:k=2`, `bliis:n=3,f=1,k=2`.
    #[arg(long)]
    pub spec: Option<String>,
    /// Decision map, e.g. `minmax`, `minmax:k=2`, `minmax-grow`, `avg`.
    #[arg(long)]
    pub map: Option<String>,
    /// Comma-separated inputs, one per process.
    #[arg(long)]
    pub inputs: Option<String>,
    /// Finite input set; without `--inputs`, inputs are drawn from it.
    #[arg(long)]
    pub input_set: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds to sweep.
    #[arg(long)]
    pub runs: Option<u64>,
    /// Exhaust all admissible prefixes of this length.
    #[arg(long, value_name = "L")]
    pub enumerate: Option<usize>,
    /// Explicit pattern, e.g. `(qp,none)*`.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Confirmation window for stabilization.
    #[arg(long)]
    pub confirm: Option<u64>,
    /// Lossy-run law for sampling, e.g. `geometric:mean=2` or `fixed:len=1`.
    #[arg(long)]
    pub law: Option<String>,
    /// With `--enumerate`: runs whose heard-of sets settled at least this many
    /// rounds before the horizon count as eligible.
    #[arg(long)]
    pub margin: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct DriveArgs {
    /// `dll` or `liis`.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub inputs: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub confirm: Option<u64>,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Trace file; the trace goes to stdout otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Map to replay with; defaults to the map named in the trace.
    #[arg(long)]
    pub map: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Broadcasts are sampled from every start round `1..=starts`.
    #[arg(long)]
    pub starts: Option<u64>,
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line. Payloads go to `out`, notes to `err`; the
/// return value is the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Graphs(a) => cmd_graphs(a, cfg, out),
        Command::Sim(a) => cmd_sim(a, cfg, out),
        Command::Drive(a) => cmd_drive(a, cfg, out, err),
        Command::Verify(a) => cmd_verify(a, cfg, out),
        Command::Kernel(a) => cmd_kernel(a, cfg, out),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required"))
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Writes `payload` to `path` when given, to `out` otherwise.
fn emit(path: Option<&PathBuf>, out: &mut dyn Write, payload: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            );
            f.write_all(payload)?;
            f.flush()?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(payload)?,
    }
    Ok(())
}

fn to_json_line<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec(value)?;
    buf.push(b'\n');
    Ok(buf)
}

#[derive(Serialize)]
struct GraphListing {
    n: usize,
    class: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    f: Option<u64>,
    count: usize,
    graphs: Vec<CommGraph>,
}

pub fn cmd_graphs(a: GraphsArgs, cfg: FileConfig, out: &mut dyn Write) -> Result<i32> {
    let n = required(a.n.or(cfg.n), "n")?;
    let class = a.class.or(cfg.class).unwrap_or_else(|| "iis".into());
    let (graphs, f) = match class.as_str() {
        "iis" => (enumerate_iis_graphs(n)?, None),
        "lossy" => {
            let f = a.f.or(cfg.f).unwrap_or(1);
            (enumerate_lossy_graphs(n, f)?, Some(f))
        }
        other => bail!("unknown graph class {other:?}, expected iis or lossy"),
    };
    write_json(
        out,
        &GraphListing {
            n,
            class,
            f,
            count: graphs.len(),
            graphs,
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimRecord<'a> {
    spec: String,
    map: &'a str,
    inputs: &'a [Value],
    horizon: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(flatten)]
    report: StabilizationReport,
}

#[derive(Serialize)]
struct SweepSummary {
    spec: String,
    map: String,
    horizon: u64,
    runs: u64,
    stabilized: u64,
    valid: u64,
    agreeing: u64,
    solved: u64,
    unsolved_seeds: Vec<u64>,
}

#[derive(Serialize)]
struct EnumerationSummary {
    spec: String,
    map: String,
    length: usize,
    margin: u64,
    runs: u64,
    stabilized: u64,
    valid: u64,
    agreeing: u64,
    eligible: u64,
    eligible_valid_agreeing: u64,
    exceptions: u64,
}

/// Fully resolved `sim` configuration.
struct SimPlan {
    spec: AdversarySpec,
    map: MapSpec,
    inputs: Option<Vec<Value>>,
    input_set: Option<Vec<Value>>,
    confirm: u64,
    law: LossyRunLaw,
}

impl SimPlan {
    fn inputs_for(&self, seed: u64) -> Result<Vec<Value>> {
        match (&self.inputs, &self.input_set) {
            (Some(v), Some(set)) => Ok(InputConfig::new(v.clone(), set.clone())?.values),
            (Some(v), None) => Ok(v.clone()),
            (None, Some(set)) => Ok(InputConfig::sample(self.spec.n, set.clone(), seed)?.values),
            (None, None) => bail!("--inputs or --input-set is required"),
        }
    }
}

pub fn cmd_sim(a: SimArgs, cfg: FileConfig, out: &mut dyn Write) -> Result<i32> {
    let spec: AdversarySpec = required(a.spec.or(cfg.spec), "spec")?.parse()?;
    let map: MapSpec = a
        .map
        .or(cfg.map)
        .unwrap_or_else(|| "minmax".into())
        .parse()?;
    let inputs = a
        .inputs
        .or(cfg.inputs.map(|l| l.into_string()))
        .map(|s| parse_int_list(&s))
        .transpose()?;
    if let Some(v) = &inputs {
        if v.len() != spec.n {
            bail!("{} inputs given for {} processes", v.len(), spec.n);
        }
    }
    let input_set = a
        .input_set
        .or(cfg.input_set.map(|l| l.into_string()))
        .map(|s| parse_int_list(&s))
        .transpose()?;
    let enumerate = a.enumerate.or(cfg.enumerate);
    let pattern = a.pattern.or(cfg.pattern);
    let margin = a.margin.or(cfg.margin).unwrap_or(2);
    let law: LossyRunLaw = match a.law.or(cfg.law) {
        Some(s) => s.parse()?,
        None => LossyRunLaw::default(),
    };
    let default_confirm = if enumerate.is_some() {
        margin.max(1)
    } else {
        DEFAULT_CONFIRM
    };
    let plan = SimPlan {
        spec,
        map,
        inputs,
        input_set,
        confirm: a.confirm.or(cfg.confirm).unwrap_or(default_confirm),
        law,
    };
    let horizon = a.horizon.or(cfg.horizon);
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let runs = a.runs.or(cfg.runs).unwrap_or(1);
    let out_path = a.out.or(cfg.out);

    if plan.map.is_averaging() {
        if enumerate.is_some() {
            bail!("--enumerate is not supported for avg");
        }
        let payload = sim_averaging(&plan, pattern.as_deref(), horizon, seed)?;
        emit(out_path.as_ref(), out, &payload)?;
        return Ok(EXIT_OK);
    }
    let decision_map = plan.map.build(PatienceParams::default())?;
    let payload = if let Some(length) = enumerate {
        if pattern.is_some() {
            bail!("--enumerate and --pattern are exclusive");
        }
        if horizon.is_some_and(|h| h != length as u64) {
            bail!("with --enumerate the horizon is the prefix length");
        }
        to_json_line(&sim_enumerate(&plan, decision_map, length, margin)?)?
    } else if let Some(p) = pattern {
        let prefix = parse_pattern(&p, plan.spec.n, horizon)?;
        plan.spec.check_prefix(&prefix)?;
        let inputs = plan.inputs_for(seed)?;
        let horizon = prefix.len() as u64;
        let run = Run::from_prefix(inputs.clone(), &prefix)?;
        let report = stabilization_report(&run, decision_map.as_ref(), horizon, plan.confirm)?;
        to_json_line(&SimRecord {
            spec: plan.spec.to_string(),
            map: &plan.map.to_string(),
            inputs: &inputs,
            horizon,
            seed: None,
            report,
        })?
    } else {
        let horizon = horizon.unwrap_or(100);
        let seeds: Vec<u64> = (0..runs).map(|i| seed.wrapping_add(i)).collect();
        let results = par_map(
            seeds.clone(),
            |s| -> Result<(Vec<Value>, StabilizationReport)> {
                let inputs = plan.inputs_for(s)?;
                let prefix = sample_pattern(&plan.spec, s, horizon as usize, plan.law)?;
                let run = Run::from_prefix(inputs.clone(), &prefix)?;
                let report =
                    stabilization_report(&run, decision_map.as_ref(), horizon, plan.confirm)?;
                Ok((inputs, report))
            },
        );
        let results: Vec<(Vec<Value>, StabilizationReport)> =
            results.into_iter().collect::<Result<_>>()?;
        if runs == 1 {
            let (inputs, report) = results.into_iter().next().expect("one run");
            to_json_line(&SimRecord {
                spec: plan.spec.to_string(),
                map: &plan.map.to_string(),
                inputs: &inputs,
                horizon,
                seed: Some(seed),
                report,
            })?
        } else {
            let count = |f: &dyn Fn(&StabilizationReport) -> bool| {
                results.iter().filter(|(_, r)| f(r)).count() as u64
            };
            to_json_line(&SweepSummary {
                spec: plan.spec.to_string(),
                map: plan.map.to_string(),
                horizon,
                runs,
                stabilized: count(&|r| r.stabilized),
                valid: count(&|r| r.valid),
                agreeing: count(&|r| r.agreement),
                solved: count(&|r| r.solved()),
                unsolved_seeds: seeds
                    .iter()
                    .zip(&results)
                    .filter(|(_, (_, r))| !r.solved())
                    .map(|(s, _)| *s)
                    .collect(),
            })?
        }
    };
    emit(out_path.as_ref(), out, &payload)?;
    Ok(EXIT_OK)
}

fn all_input_vectors(set: &[Value], n: usize) -> Result<Vec<Vec<Value>>> {
    let mut set = set.to_vec();
    set.sort_unstable();
    set.dedup();
    let count = (set.len() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if count > MAX_INPUT_VECTORS as u128 {
        bail!("{count} input vectors exceed the limit of {MAX_INPUT_VECTORS}");
    }
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                set.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

fn sim_enumerate(
    plan: &SimPlan,
    map: Arc<dyn DecisionMap>,
    length: usize,
    margin: u64,
) -> Result<EnumerationSummary> {
    let vectors = match (&plan.inputs, &plan.input_set) {
        (Some(v), _) => vec![v.clone()],
        (None, Some(set)) => all_input_vectors(set, plan.spec.n)?,
        (None, None) => bail!("--inputs or --input-set is required"),
    };
    let prefixes: Vec<Vec<CommGraph>> = enumerate_prefixes(&plan.spec, length)?.collect();
    let jobs: Vec<(usize, usize)> = (0..prefixes.len())
        .flat_map(|i| (0..vectors.len()).map(move |j| (i, j)))
        .collect();
    let horizon = length as u64;
    let results = par_map(jobs, |(i, j)| -> Result<(StabilizationReport, bool)> {
        let run = Run::from_prefix(vectors[j].clone(), &prefixes[i])?;
        let report = stabilization_report(&run, map.as_ref(), horizon, plan.confirm)?;
        let eligible = margin <= horizon
            && (0..run.n()).all(|p| stable_value_round(&run, p) + margin <= horizon);
        Ok((report, eligible))
    });
    let results: Vec<(StabilizationReport, bool)> = results.into_iter().collect::<Result<_>>()?;
    let count = |f: &dyn Fn(&(StabilizationReport, bool)) -> bool| {
        results.iter().filter(|x| f(x)).count() as u64
    };
    let eligible = count(&|(_, e)| *e);
    let eligible_valid_agreeing = count(&|(r, e)| *e && r.valid && r.agreement);
    Ok(EnumerationSummary {
        spec: plan.spec.to_string(),
        map: plan.map.to_string(),
        length,
        margin,
        runs: results.len() as u64,
        stabilized: count(&|(r, _)| r.stabilized),
        valid: count(&|(r, _)| r.valid),
        agreeing: count(&|(r, _)| r.agreement),
        eligible,
        eligible_valid_agreeing,
        exceptions: eligible - eligible_valid_agreeing,
    })
}

fn sim_averaging(
    plan: &SimPlan,
    pattern: Option<&str>,
    horizon: Option<u64>,
    seed: u64,
) -> Result<Vec<u8>> {
    let inputs = plan.inputs_for(seed)?;
    let prefix = match pattern {
        Some(p) => {
            let prefix = parse_pattern(p, plan.spec.n, horizon)?;
            plan.spec.check_prefix(&prefix)?;
            prefix
        }
        None => sample_pattern(&plan.spec, seed, horizon.unwrap_or(100) as usize, plan.law)?,
    };
    let start: Vec<f64> = inputs.iter().map(|&v| v as f64).collect();
    let series = averaging_series(&start, &prefix);
    let mut buf = Vec::new();
    write!(buf, "round,gap")?;
    for p in 0..start.len() {
        write!(buf, ",x{p}")?;
    }
    writeln!(buf)?;
    for (r, values) in series.iter().enumerate() {
        write!(buf, "{r},{:e}", gap(values))?;
        for v in values {
            write!(buf, ",{v:e}")?;
        }
        writeln!(buf)?;
    }
    Ok(buf)
}

pub fn cmd_drive(
    a: DriveArgs,
    cfg: FileConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let target = a.target.or(cfg.target).unwrap_or_else(|| "dll".into());
    let map_spec: MapSpec = a
        .map
        .or(cfg.map)
        .unwrap_or_else(|| "patient(minmax)".into())
        .parse()?;
    let inputs = parse_int_list(&required(
        a.inputs.or(cfg.inputs.map(|l| l.into_string())),
        "inputs",
    )?)?;
    if let Some(n) = a.n.or(cfg.n) {
        if n != inputs.len() {
            bail!("--n {n} does not match {} inputs", inputs.len());
        }
    }
    let steps = a.steps.or(cfg.steps).unwrap_or(100);
    let params = PatienceParams {
        confirm: a.confirm.or(cfg.confirm).unwrap_or(DEFAULT_CONFIRM),
        cap: a.cap.or(cfg.cap).unwrap_or(DEFAULT_CAP),
    };
    let map = map_spec.build(params)?;
    let trace = match target.as_str() {
        "dll" => drive_conflict_dll(map.as_ref(), &inputs, steps, params)?,
        "liis" => drive_conflict_liis(map.as_ref(), &inputs, steps, params)?,
        other => bail!("unknown target {other:?}, expected dll or liis"),
    };
    let out_path = a.out.or(cfg.out);
    let summary = drive_summary(&trace);
    match &out_path {
        Some(p) => {
            let mut f = BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            );
            trace.write_jsonl(&mut f)?;
            f.flush()?;
            writeln!(out, "{summary}")?;
        }
        None => {
            trace.write_jsonl(&mut *out)?;
            writeln!(err, "{summary}")?;
        }
    }
    Ok(match trace.outcome {
        Outcome::Drove { .. } => EXIT_OK,
        Outcome::Escaped { .. } => EXIT_ESCAPED,
        Outcome::PatienceExhausted { .. } => EXIT_PATIENCE_EXHAUSTED,
    })
}

fn drive_summary(trace: &ConflictTrace) -> String {
    let conflicted = trace.conflicted_steps();
    match &trace.outcome {
        Outcome::Drove { steps } => format!("DROVE {conflicted}/{steps} steps conflicted"),
        Outcome::Escaped { step, diagnosis } => {
            let broken = diagnosis
                .as_ref()
                .map(|d| d.broken.join("; "))
                .unwrap_or_default();
            format!("ESCAPED at step {step} after {conflicted} conflicted steps; broken links: {broken}")
        }
        Outcome::PatienceExhausted { step } => {
            format!("PATIENCE_EXHAUSTED at step {step} after {conflicted} conflicted steps")
        }
    }
}

pub fn cmd_verify(a: VerifyArgs, cfg: FileConfig, out: &mut dyn Write) -> Result<i32> {
    let path = required(a.trace.or(cfg.trace), "trace")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let trace = ConflictTrace::read_jsonl(BufReader::new(file))?;
    let map_spec: MapSpec = a
        .map
        .or(cfg.map)
        .unwrap_or_else(|| trace.header.map.clone())
        .parse()?;
    let map = map_spec.build(trace.header.patience)?;
    let report = verify_conflict_trace(&trace, map.as_ref());
    write_json(out, &report)?;
    Ok(if report.clean { EXIT_OK } else { EXIT_MISMATCH })
}

#[derive(Serialize)]
struct KernelRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    horizon: u64,
    kernel: Vec<usize>,
    /// `broadcast[p][i]`: broadcast time of `p` from start round `i + 1`.
    broadcast: Vec<Vec<Option<u64>>>,
}

#[derive(Serialize)]
struct KernelSummary {
    spec: String,
    runs: u64,
    nonempty: u64,
}

pub fn cmd_kernel(a: KernelArgs, cfg: FileConfig, out: &mut dyn Write) -> Result<i32> {
    let spec: AdversarySpec = required(a.spec.or(cfg.spec), "spec")?.parse()?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let runs = a.runs.or(cfg.runs).unwrap_or(1);
    let starts = a.starts.or(cfg.starts).unwrap_or(20);
    let law: LossyRunLaw = match a.law.or(cfg.law) {
        Some(s) => s.parse()?,
        None => LossyRunLaw::default(),
    };
    let pattern = a.pattern.or(cfg.pattern);
    let horizon = a.horizon.or(cfg.horizon);
    let sample_starts: Vec<u64> = (1..=starts).collect();
    let inputs: Vec<Value> = (0..spec.n as Value).collect();

    let prefixes: Vec<(Option<u64>, Vec<CommGraph>)> = match &pattern {
        Some(p) => {
            let prefix = parse_pattern(p, spec.n, horizon)?;
            spec.check_prefix(&prefix)?;
            vec![(None, prefix)]
        }
        None => {
            let horizon = horizon.unwrap_or(80) as usize;
            (0..runs)
                .map(|i| {
                    let s = seed.wrapping_add(i);
                    Ok((Some(s), sample_pattern(&spec, s, horizon, law)?))
                })
                .collect::<Result<_>>()?
        }
    };
    if let Some((_, p)) = prefixes.first() {
        if (p.len() as u64) < starts {
            bail!("horizon {} is shorter than the sampled starts", p.len());
        }
    }
    let records = par_map(prefixes, |(seed, prefix)| -> Result<KernelRecord> {
        let run = Run::from_prefix(inputs.clone(), &prefix)?;
        let kernel = kernel_estimate(&run, &sample_starts);
        let broadcast = (0..run.n())
            .map(|p| {
                sample_starts
                    .iter()
                    .map(|&s| broadcast_time(&run, p, s))
                    .collect()
            })
            .collect();
        Ok(KernelRecord {
            seed,
            horizon: run.len(),
            kernel: kernel.iter().collect(),
            broadcast,
        })
    });
    let records: Vec<KernelRecord> = records.into_iter().collect::<Result<_>>()?;
    let mut payload = Vec::new();
    for r in &records {
        payload.extend(to_json_line(r)?);
    }
    let nonempty = records.iter().filter(|r| !r.kernel.is_empty()).count() as u64;
    if records.len() > 1 {
        payload.extend(to_json_line(&KernelSummary {
            spec: spec.to_string(),
            runs: records.len() as u64,
            nonempty,
        })?);
    }
    emit(a.out.or(cfg.out).as_ref(), out, &payload)?;
    let snapshot_family = matches!(
        spec.family,
        Family::Iis | Family::Bliis | Family::BliisAny | Family::Liis
    );
    Ok(if snapshot_family && nonempty < records.len() as u64 {
        EXIT_EMPTY_KERNEL
    } else {
        EXIT_OK
    })
}
