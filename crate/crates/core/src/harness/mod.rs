//! Task files, prompts, planner back ends and batch trials.

mod backend;
mod llm;
mod prompt;
mod render;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::warn;

pub use backend::{
    corpus_files, mutate_layout, mutate_plan, oracle_plan, propose, read_corpus_entry, Mutator, OracleOutput,
    PlannerBackend, Proposal,
};
pub use llm::{llm_complete, Completion, LlmConfig, API_KEY_ENV};
pub use prompt::{build_prompt, system_principles, PromptBundle};
pub use render::{export_layout, layout_gaps, render_svg, LayoutFile};

use crate::decoder::{decode_plan, parse_pipe_plan, Dictionary};
use crate::executor::{execute_plan, ExecConfig, ImpedanceParams};
use crate::matcher::match_objects;
use crate::planners::{HanoiTask, PipeTaskSpec, PlanError, StackingTask};
use crate::validators::{
    check_runs, oracle_min, validate_hanoi, validate_stacking, Metrics, Outcome, PipeRun, Reason, ReasonCode, Verdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("unknown task family `{0}`")]
    UnknownTaskFamily(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("request timed out or endpoint unreachable: {0}")]
    Timeout(String),
    #[error("HTTP status {0}")]
    HttpError(u16),
    #[error("completion had no content")]
    EmptyCompletion,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("planner back end unavailable: {0}")]
    BackendUnavailable(String),
    #[error("bad back end spec: {0}")]
    BadBackend(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<PlanError> for HarnessError {
    fn from(e: PlanError) -> Self {
        HarnessError::InvalidTask(e.to_string())
    }
}

/// A task file: `{"task": "stacking" | "hanoi" | "pipe", ...}`. A file without
/// `task` but with `lengths` is read as a pipe task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum TaskSpec {
    Stacking(StackingTask),
    Hanoi(HanoiTask),
    Pipe(PipeTaskSpec),
}

impl TaskSpec {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HarnessError::InvalidTask(e.to_string()))?;
        let obj = value.as_object_mut().ok_or_else(|| HarnessError::InvalidTask("task file must be an object".into()))?;
        let family = match obj.get("task") {
            Some(t) => t.as_str().unwrap_or_default().to_string(),
            None if obj.contains_key("lengths") => {
                obj.insert("task".into(), "pipe".into());
                "pipe".into()
            }
            None => return Err(HarnessError::UnknownTaskFamily("<missing>".into())),
        };
        if !["stacking", "hanoi", "pipe"].contains(&family.as_str()) {
            return Err(HarnessError::UnknownTaskFamily(family));
        }
        let task: TaskSpec = serde_json::from_value(value).map_err(|e| HarnessError::InvalidTask(e.to_string()))?;
        task.validate()?;
        Ok(task)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&render::read(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        match self {
            TaskSpec::Stacking(t) => t.scene.validate().map_err(|e| HarnessError::InvalidTask(e.to_string())),
            TaskSpec::Hanoi(t) => Ok(t.validate()?),
            TaskSpec::Pipe(t) => Ok(t.validate()?),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            TaskSpec::Stacking(_) => "stacking",
            TaskSpec::Hanoi(_) => "hanoi",
            TaskSpec::Pipe(_) => "pipe",
        }
    }

    pub fn id(&self) -> String {
        let id = match self {
            TaskSpec::Stacking(t) => &t.id,
            TaskSpec::Hanoi(t) => &t.id,
            TaskSpec::Pipe(t) => &t.id,
        };
        id.clone().unwrap_or_else(|| self.family().to_string())
    }

    /// Object dictionary for decoding replies to this task.
    pub fn dictionary(&self) -> Dictionary {
        match self {
            TaskSpec::Stacking(t) => Dictionary::with_objects(t.labels()),
            TaskSpec::Hanoi(t) => Dictionary::with_objects(t.labels()),
            TaskSpec::Pipe(_) => Dictionary::default(),
        }
    }
}

/// Per-task state shared by all trials.
pub struct Evaluator<'a> {
    task: &'a TaskSpec,
    oracle_min: Option<u32>,
    dict: Dictionary,
    params: ImpedanceParams,
    exec: ExecConfig,
}

impl<'a> Evaluator<'a> {
    pub fn new(task: &'a TaskSpec) -> Self {
        let oracle_min = match task {
            TaskSpec::Pipe(spec) => oracle_min(spec),
            _ => None,
        };
        Self { task, oracle_min, dict: task.dictionary(), params: ImpedanceParams::default(), exec: ExecConfig::default() }
    }

    /// Decodes and classifies one proposal. Successful stacking plans are also
    /// matched and executed; an execution error turns the verdict into a Fail.
    pub fn evaluate(&self, proposal: &Proposal) -> Verdict {
        let decode_fail = |e: String| Verdict::fail(vec![Reason::new(ReasonCode::DecodeFailed, e)], Metrics::default());
        match (self.task, proposal) {
            (TaskSpec::Pipe(spec), Proposal::Text(text)) => match parse_pipe_plan(text) {
                Ok(specs) => check_runs(&PipeRun::from_specs(spec.start.p, &specs), spec, false, self.oracle_min),
                Err(e) => decode_fail(e.to_string()),
            },
            (TaskSpec::Pipe(spec), Proposal::Layout(layout)) => {
                check_runs(&PipeRun::from_layout(layout), spec, true, self.oracle_min)
            }
            (_, Proposal::Layout(_)) => decode_fail("a pipe layout is not a plan for this task".into()),
            (TaskSpec::Hanoi(t), Proposal::Text(text)) => match decode_plan(text, &self.dict) {
                Ok(plan) => validate_hanoi(&plan, t),
                Err(e) => decode_fail(e.to_string()),
            },
            (TaskSpec::Stacking(t), Proposal::Text(text)) => {
                let plan = match decode_plan(text, &self.dict) {
                    Ok(p) => p,
                    Err(e) => return decode_fail(e.to_string()),
                };
                let verdict = validate_stacking(&plan, &t.scene);
                if verdict.outcome == Outcome::Fail {
                    return verdict;
                }
                let executed = match_objects(&plan, &t.scene, &self.dict)
                    .map_err(|e| e.to_string())
                    .and_then(|ops| execute_plan(&ops, &t.scene, &self.params, &self.exec).map_err(|e| e.to_string()));
                match executed {
                    Ok(_) => verdict,
                    Err(e) => Verdict::fail(vec![Reason::new(ReasonCode::ExecutionFailed, e)], verdict.metrics),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub success_optimal: usize,
    pub success_suboptimal: usize,
    pub fail: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Ratios {
    pub optimal_total: f64,
    pub success_total: f64,
    pub failed_total: f64,
}

impl Counts {
    pub fn add(&mut self, o: Outcome) {
        match o {
            Outcome::SuccessOptimal => self.success_optimal += 1,
            Outcome::SuccessSubOptimal => self.success_suboptimal += 1,
            Outcome::Fail => self.fail += 1,
        }
        self.total += 1;
    }

    /// Ratios are always derived from the counts.
    pub fn ratios(&self) -> Ratios {
        if self.total == 0 {
            return Ratios::default();
        }
        let t = self.total as f64;
        Ratios {
            optimal_total: self.success_optimal as f64 / t,
            success_total: (self.success_optimal + self.success_suboptimal) as f64 / t,
            failed_total: self.fail as f64 / t,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.success_optimal + self.success_suboptimal + self.fail == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub task_id: String,
    pub backend: String,
    pub counts: Counts,
    pub ratios: Ratios,
    pub trials: Vec<TrialRecord>,
    /// Why the run stopped early, if it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incomplete: Option<String>,
}

impl TrialReport {
    fn from_records(task: &TaskSpec, backend: &PlannerBackend, trials: Vec<TrialRecord>, incomplete: Option<String>) -> Self {
        let mut counts = Counts::default();
        for t in &trials {
            counts.add(t.verdict.outcome);
        }
        Self { task_id: task.id(), backend: backend.name(), counts, ratios: counts.ratios(), trials, incomplete }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs `n` independent trials and aggregates them by trial index.
///
/// Local back ends run in parallel. A back end that becomes unavailable stops
/// the run; the report then holds the trials before the failure and is
/// flagged incomplete.
pub fn run_trials(task: &TaskSpec, backend: &PlannerBackend, n: usize) -> TrialReport {
    let stop = |why: String, done: Vec<TrialRecord>| {
        warn!(reason = %why, "trial run incomplete");
        TrialReport::from_records(task, backend, done, Some(why))
    };
    let corpus: Vec<PathBuf> = match backend {
        PlannerBackend::TranscriptCorpus(p) => match corpus_files(p) {
            Ok(files) => files,
            Err(e) => return stop(e.to_string(), Vec::new()),
        },
        _ => Vec::new(),
    };
    let oracle = match oracle_plan(task) {
        Ok(o) => o,
        Err(e) => return stop(e.to_string(), Vec::new()),
    };
    let eval = Evaluator::new(task);
    let one = |i: usize| propose(backend, task, &oracle, &corpus, i).map(|p| TrialRecord { index: i, verdict: eval.evaluate(&p) });

    let results: Vec<Result<TrialRecord, HarnessError>> = if backend.is_remote() {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = one(i);
            let failed = r.is_err();
            out.push(r);
            if failed {
                break;
            }
        }
        out
    } else {
        (0..n).into_par_iter().map(one).collect()
    };
    let mut done = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(rec) => done.push(rec),
            Err(e) => return stop(e.to_string(), done),
        }
    }
    TrialReport::from_records(task, backend, done, None)
}
