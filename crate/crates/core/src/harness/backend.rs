//! Planner back ends: where a trial's proposal comes from.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::llm::{llm_complete, LlmConfig};
use super::render::LayoutFile;
use super::{build_prompt, HarnessError, TaskSpec};
use crate::decoder::{render_pipe_plan, Plan, PlanStep, TargetSpec};
use crate::planners::{plan_stacking, route_pipes, LaidPipe, PipeLayout, PipeTaskSpec};
use crate::validators::{check_runs, Outcome, PipeRun};
use crate::world::{Axis, Dim, Segment, Sign};

/// What a planner hands back for one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Proposal {
    Text(String),
    /// An explicit from/to layout, as opposed to a head-chained text list.
    Layout(PipeLayout),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mutator {
    /// Drop one step or pipe.
    #[default]
    Deletion,
    /// Shift one pipe sideways by one unit (explicit layout), or swap two adjacent steps.
    Jitter,
    /// Insert an out-and-back excursion, or repeat a move.
    Detour,
}

impl FromStr for Mutator {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deletion" | "delete" => Ok(Mutator::Deletion),
            "jitter" => Ok(Mutator::Jitter),
            "detour" => Ok(Mutator::Detour),
            other => Err(HarnessError::BadBackend(format!("unknown mutator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlannerBackend {
    Oracle,
    TranscriptCorpus(PathBuf),
    RemoteLlm(LlmConfig),
    NoisyOracle { error_rate: f64, seed: u64, mutator: Mutator },
}

impl PlannerBackend {
    /// `oracle`, `corpus:PATH`, `llm`, or `noisy:RATE:SEED[:MUTATOR]`.
    pub fn parse(s: &str, llm: &LlmConfig) -> Result<Self, HarnessError> {
        let bad = |m: &str| HarnessError::BadBackend(format!("{m}: `{s}`"));
        if s == "oracle" {
            return Ok(PlannerBackend::Oracle);
        }
        if s == "llm" {
            return Ok(PlannerBackend::RemoteLlm(llm.clone()));
        }
        if let Some(path) = s.strip_prefix("corpus:") {
            return Ok(PlannerBackend::TranscriptCorpus(PathBuf::from(path)));
        }
        if let Some(rest) = s.strip_prefix("noisy:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(bad("expected noisy:RATE:SEED[:MUTATOR]"));
            }
            let error_rate: f64 = parts[0].parse().map_err(|_| bad("bad error rate"))?;
            if !(0.0..=1.0).contains(&error_rate) {
                return Err(bad("error rate must be in [0, 1]"));
            }
            let seed: u64 = parts[1].parse().map_err(|_| bad("bad seed"))?;
            let mutator = parts.get(2).map(|m| m.parse()).transpose()?.unwrap_or_default();
            return Ok(PlannerBackend::NoisyOracle { error_rate, seed, mutator });
        }
        Err(bad("unknown backend"))
    }

    pub fn name(&self) -> String {
        match self {
            PlannerBackend::Oracle => "oracle".into(),
            PlannerBackend::TranscriptCorpus(p) => format!("corpus:{}", p.display()),
            PlannerBackend::RemoteLlm(c) => format!("llm:{}", c.model),
            PlannerBackend::NoisyOracle { error_rate, seed, mutator } => {
                format!("noisy:{error_rate}:{seed}:{}", format!("{mutator:?}").to_lowercase())
            }
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, PlannerBackend::RemoteLlm(_))
    }
}

/// Files of a corpus, sorted by name. A file path is a one-entry corpus.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let unavailable = |e: std::io::Error| HarnessError::BackendUnavailable(format!("{}: {e}", path.display()));
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(unavailable)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::BackendUnavailable(format!("{}: empty corpus", path.display())));
    }
    Ok(files)
}

/// Reads a corpus entry: a layout file when it parses as one, text otherwise.
pub fn read_corpus_entry(path: &Path) -> Result<Proposal, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::BackendUnavailable(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        if let Ok(file) = LayoutFile::from_json(&text) {
            return Ok(Proposal::Layout(file.segments));
        }
    }
    Ok(Proposal::Text(text))
}

/// The reference plan for a task, rendered the way a planner would reply.
pub fn oracle_plan(task: &TaskSpec) -> Result<OracleOutput, HarnessError> {
    Ok(match task {
        TaskSpec::Stacking(t) => OracleOutput::Plan(plan_stacking(&t.cubes())?),
        TaskSpec::Hanoi(t) => OracleOutput::Plan(t.plan()),
        TaskSpec::Pipe(t) => OracleOutput::Layout(route_pipes(t)?.layout),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutput {
    Plan(Plan),
    Layout(PipeLayout),
}

impl OracleOutput {
    pub fn into_proposal(self) -> Proposal {
        match self {
            OracleOutput::Plan(p) => Proposal::Text(p.render()),
            OracleOutput::Layout(l) => Proposal::Text(render_pipe_plan(&l.to_specs())),
        }
    }
}

/// Obtains trial `index`'s proposal. `oracle` is the precomputed reference output.
pub fn propose(
    backend: &PlannerBackend,
    task: &TaskSpec,
    oracle: &OracleOutput,
    corpus: &[PathBuf],
    index: usize,
) -> Result<Proposal, HarnessError> {
    match backend {
        PlannerBackend::Oracle => Ok(oracle.clone().into_proposal()),
        PlannerBackend::TranscriptCorpus(_) => read_corpus_entry(&corpus[index % corpus.len()]),
        PlannerBackend::RemoteLlm(cfg) => {
            let bundle = build_prompt(task);
            llm_complete(&bundle, cfg)
                .map(|c| Proposal::Text(c.text))
                .map_err(|e| HarnessError::BackendUnavailable(e.to_string()))
        }
        PlannerBackend::NoisyOracle { error_rate, seed, mutator } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(index as u64);
            if rng.random::<f64>() >= *error_rate {
                return Ok(oracle.clone().into_proposal());
            }
            Ok(match (oracle, task) {
                (OracleOutput::Plan(p), _) => Proposal::Text(mutate_plan(p, *mutator, &mut rng).render()),
                (OracleOutput::Layout(l), TaskSpec::Pipe(spec)) => mutate_layout(l, spec, *mutator, &mut rng),
                (OracleOutput::Layout(l), _) => oracle_to_text(l),
            })
        }
    }
}

fn oracle_to_text(l: &PipeLayout) -> Proposal {
    Proposal::Text(render_pipe_plan(&l.to_specs()))
}

pub fn mutate_plan(plan: &Plan, mutator: Mutator, rng: &mut ChaCha8Rng) -> Plan {
    let mut steps = plan.steps.clone();
    let n = steps.len();
    match mutator {
        // The first placement only fixes where the tower stands, so drop a later one.
        Mutator::Deletion if n >= 2 => {
            steps.remove(rng.random_range(1..n));
        }
        Mutator::Deletion => steps.clear(),
        Mutator::Jitter if n >= 2 => {
            let k = rng.random_range(0..n - 1);
            steps.swap(k, k + 1);
        }
        Mutator::Jitter => {}
        Mutator::Detour if n >= 1 => {
            let k = rng.random_range(0..n);
            let s = steps[k].clone();
            match (&s.source, &s.target) {
                (Some(src), TargetSpec::NamedLocation(dst)) => {
                    let back = PlanStep::new(0, &s.action, &s.object, TargetSpec::NamedLocation(src.clone())).with_source(dst);
                    steps.insert(k + 1, back);
                    steps.insert(k + 2, s);
                }
                _ => steps.insert(k + 1, s),
            }
        }
        Mutator::Detour => {}
    }
    Plan::from_steps(steps)
}

pub fn mutate_layout(layout: &PipeLayout, spec: &PipeTaskSpec, mutator: Mutator, rng: &mut ChaCha8Rng) -> Proposal {
    let segs = &layout.segments;
    match mutator {
        Mutator::Deletion => {
            let mut specs = layout.to_specs();
            if !specs.is_empty() {
                specs.remove(rng.random_range(0..specs.len()));
            }
            Proposal::Text(render_pipe_plan(&specs))
        }
        Mutator::Jitter => {
            let mut out = layout.clone();
            if segs.is_empty() {
                return Proposal::Layout(out);
            }
            let k = if segs.len() >= 2 { rng.random_range(1..segs.len()) } else { 0 };
            let s = segs[k].segment;
            let sideways: Vec<Dim> = Dim::ALL.into_iter().filter(|d| *d != s.axis().dim).collect();
            let dim = *sideways.choose(rng).expect("two perpendicular axes");
            let sign = if rng.random::<bool>() { Sign::Pos } else { Sign::Neg };
            let a = Axis::new(dim, sign);
            let shifted = Segment::new(s.from().offset(a, 1), s.to().offset(a, 1)).expect("translation keeps the axis");
            out.segments[k] = LaidPipe { segment: shifted, length: segs[k].length };
            Proposal::Layout(out)
        }
        Mutator::Detour => {
            let mut candidates = Vec::new();
            for joint in 1..segs.len() {
                for axis in Axis::ALL {
                    for &len in &spec.allowed_lengths {
                        candidates.push((joint, axis, len));
                    }
                }
            }
            candidates.shuffle(rng);
            let oracle_min = Some(layout.total_length());
            for (joint, axis, len) in candidates {
                let p = segs[joint].segment.from();
                let q = p.offset(axis, len as i32);
                let (Ok(out), Ok(back)) = (Segment::new(p, q), Segment::new(q, p)) else { continue };
                let mut cand = layout.clone();
                cand.segments.insert(joint, LaidPipe { segment: back, length: len });
                cand.segments.insert(joint, LaidPipe { segment: out, length: len });
                let v = check_runs(&PipeRun::from_layout(&cand), spec, true, oracle_min);
                if v.outcome == Outcome::SuccessSubOptimal {
                    return Proposal::Text(render_pipe_plan(&cand.to_specs()));
                }
            }
            oracle_to_text(layout)
        }
    }
}
