//! Turns planner replies into structured steps.
//!
//! Two grammars are recognised:
//!
//! * numbered step lists where object and location words are bracketed,
//!   e.g. `3. Move cube [C] from its original location to the top of cube [B].`
//! * pipe placement lists, e.g. `pipe 2ft #1 (5, 5, 2) z axis`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{normalize_label, Dim, GridPoint, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("no numbered steps found")]
    EmptyPlan,
    #[error("step {step}: action `{verb}` is not in the action dictionary")]
    UnknownAction { step: usize, verb: String },
    #[error("step {step}: no bracketed object from the object dictionary")]
    UnknownObject { step: usize },
    #[error("step {step}: ambiguous {what}: {candidates:?}")]
    AmbiguousStep { step: usize, what: &'static str, candidates: Vec<String> },
    #[error("step {step}: no recognisable target")]
    MissingTarget { step: usize },
    #[error("no pipe placements found")]
    NoSegmentsFound,
    #[error("malformed coordinate `({0})`")]
    MalformedCoordinate(String),
}

/// Where a step puts its object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TargetSpec {
    NamedLocation(String),
    OnTopOf(String),
    Coordinate(Vec3),
    BaseLocation,
}

impl fmt::Display for TargetSpec {
    /// Canonical phrasing, re-parseable by [`parse_step`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::NamedLocation(l) => write!(f, "to [{l}]"),
            TargetSpec::OnTopOf(l) => write!(f, "to the top of [{l}]"),
            TargetSpec::Coordinate(p) => write!(f, "to ({}, {}, {})", p.x, p.y, p.z),
            TargetSpec::BaseLocation => write!(f, "to the base location"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub index: usize,
    /// Normalised (lowercase) dictionary action.
    pub action: String,
    /// Object label as written in the reply.
    pub object: String,
    /// Stated source location (`from [a]`), when the reply names one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub target: TargetSpec,
}

impl PlanStep {
    pub fn new(index: usize, action: &str, object: &str, target: TargetSpec) -> Self {
        Self { index, action: normalize_label(action), object: object.to_string(), source: None, target }
    }

    pub fn with_source(mut self, source: &str) -> Self {
        self.source = Some(source.to_string());
        self
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Step {}. [{}] [{}]", self.index, self.action, self.object)?;
        if let Some(src) = &self.source {
            write!(f, " from [{src}]")?;
        }
        write!(f, " {}.", self.target)
    }
}

/// Steps in execution order, indexed from 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    /// Builds a plan, renumbering steps 1..=n.
    pub fn from_steps(steps: impl IntoIterator<Item = PlanStep>) -> Self {
        let steps = steps
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                s.index = i + 1;
                s
            })
            .collect();
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One canonical line per step.
    pub fn render(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

/// Known action verbs and object labels, compared after lowercasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    actions: BTreeSet<String>,
    objects: BTreeSet<String>,
}

pub const DEFAULT_ACTIONS: [&str; 6] = ["move", "place", "pick", "put", "stack", "connect"];

impl Default for Dictionary {
    fn default() -> Self {
        Self::new(DEFAULT_ACTIONS, std::iter::empty::<&str>())
    }
}

impl Dictionary {
    pub fn new<A, O>(actions: impl IntoIterator<Item = A>, objects: impl IntoIterator<Item = O>) -> Self
    where
        A: AsRef<str>,
        O: AsRef<str>,
    {
        let norm = |s: &str| Some(normalize_label(s)).filter(|s| !s.is_empty());
        Self {
            actions: actions.into_iter().filter_map(|a| norm(a.as_ref())).collect(),
            objects: objects.into_iter().filter_map(|o| norm(o.as_ref())).collect(),
        }
    }

    /// Default actions plus the given objects.
    pub fn with_objects<O: AsRef<str>>(objects: impl IntoIterator<Item = O>) -> Self {
        Self::new(DEFAULT_ACTIONS, objects)
    }

    /// Default actions; objects are every bracketed token in `text` that is not an action.
    pub fn inferred_from(text: &str) -> Self {
        let base = Self::default();
        let objects: Vec<String> = BRACKET
            .captures_iter(text)
            .map(|c| c[1].to_string())
            .filter(|t| !base.is_action(t))
            .collect();
        Self::with_objects(objects)
    }

    pub fn is_action(&self, s: &str) -> bool {
        self.actions.contains(&normalize_label(s))
    }

    pub fn is_object(&self, s: &str) -> bool {
        self.objects.contains(&normalize_label(s))
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(String::as_str)
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(String::as_str)
    }
}

// Optional bullet, optional one-word speaker tag ("Assistant:"), optional "Step", then "<n>.".
static NUMBERED_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:[-*•]\s*)?(?:[A-Za-z][\w-]*:\s*)?(?:step\s*)?(\d+)\.\s*(\S.*?)\s*$").unwrap()
});
static BRACKET: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\[\]]+)\]").unwrap());
static LEADING_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\W*([A-Za-z]+)").unwrap());
static TOP_OF_PREFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:top\s+of|onto|on)\s+(?:the\s+)?(?:[a-z]+\s+)?$").unwrap());
static TO_PREFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:to|at)\s+(?:the\s+)?(?:[a-z]+\s+)?$").unwrap());
static FROM_PREFIX: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bfrom\s+(?:the\s+)?(?:[a-z]+\s+)?$").unwrap());
static COORDINATE: LazyLock<Regex> = LazyLock::new(|| {
    let num = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";
    Regex::new(&format!(r"\(\s*{num}\s*,\s*{num}\s*,\s*{num}\s*\)")).unwrap()
});
static BASE_LOCATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bbase\s+location\b").unwrap());
static PIPE_SPEC: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)pipe\s*(\d+)\s*(?:ft|feet|foot)\s*#\s*(\d+)\s*\(([^)]*)\)\s*([xyz])\s*-?\s*axis").unwrap()
});

/// Numbered lines of a reply, numbering stripped, in order.
pub fn split_steps(transcript: &str) -> Result<Vec<String>, DecodeError> {
    let steps: Vec<String> =
        transcript.lines().filter_map(|l| NUMBERED_LINE.captures(l)).map(|c| c[2].to_string()).collect();
    if steps.is_empty() {
        return Err(DecodeError::EmptyPlan);
    }
    Ok(steps)
}

struct Token<'a> {
    text: &'a str,
    /// Text between the previous bracket (or line start) and this one.
    prefix: &'a str,
}

/// Parses one step body into an action, the moved object and a target.
pub fn parse_step(index: usize, raw: &str, dict: &Dictionary) -> Result<PlanStep, DecodeError> {
    let mut tokens = Vec::new();
    let mut last = 0;
    for m in BRACKET.captures_iter(raw) {
        let whole = m.get(0).unwrap();
        tokens.push(Token { text: m.get(1).unwrap().as_str().trim(), prefix: &raw[last..whole.start()] });
        last = whole.end();
    }

    let mut actions: Vec<String> = tokens.iter().filter(|t| dict.is_action(t.text)).map(|t| normalize_label(t.text)).collect();
    actions.dedup();
    let action = match actions.len() {
        0 => {
            let verb = LEADING_WORD.captures(raw).map(|c| c[1].to_string()).unwrap_or_default();
            if !dict.is_action(&verb) {
                return Err(DecodeError::UnknownAction { step: index, verb });
            }
            normalize_label(&verb)
        }
        1 => actions.remove(0),
        _ => return Err(DecodeError::AmbiguousStep { step: index, what: "action", candidates: actions }),
    };

    let objects: Vec<(usize, &Token)> =
        tokens.iter().enumerate().filter(|(_, t)| dict.is_object(t.text) && !dict.is_action(t.text)).collect();
    if objects.is_empty() {
        return Err(DecodeError::UnknownObject { step: index });
    }

    let mut target = None;
    let mut target_pos = None;
    let mut source_pos = None;
    for &(i, t) in objects.iter().skip(1) {
        if target.is_none() && TOP_OF_PREFIX.is_match(t.prefix) {
            target = Some(TargetSpec::OnTopOf(t.text.to_string()));
            target_pos = Some(i);
        } else if target.is_none() && TO_PREFIX.is_match(t.prefix) {
            target = Some(TargetSpec::NamedLocation(t.text.to_string()));
            target_pos = Some(i);
        } else if source_pos.is_none() && FROM_PREFIX.is_match(t.prefix) {
            source_pos = Some(i);
        }
    }
    if target.is_none() {
        if let Some(c) = COORDINATE.captures(raw) {
            let v: Vec<f64> = (1..=3).map(|k| c[k].parse().unwrap()).collect();
            target = Some(TargetSpec::Coordinate(Vec3::new(v[0], v[1], v[2])));
        } else if BASE_LOCATION.is_match(raw) {
            target = Some(TargetSpec::BaseLocation);
        }
    }

    let mut moved: Vec<&str> = Vec::new();
    for &(i, t) in &objects {
        if Some(i) != target_pos && Some(i) != source_pos && !moved.iter().any(|m| normalize_label(m) == normalize_label(t.text)) {
            moved.push(t.text);
        }
    }
    let object = match moved.as_slice() {
        [] => return Err(DecodeError::UnknownObject { step: index }),
        [one] => one.to_string(),
        many => {
            return Err(DecodeError::AmbiguousStep {
                step: index,
                what: "moved object",
                candidates: many.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    let target = target.ok_or(DecodeError::MissingTarget { step: index })?;
    Ok(PlanStep {
        index,
        action,
        object,
        source: source_pos.map(|i| tokens[i].text.to_string()),
        target,
    })
}

/// Splits and parses a whole reply.
pub fn decode_plan(transcript: &str, dict: &Dictionary) -> Result<Plan, DecodeError> {
    let steps = split_steps(transcript)?
        .iter()
        .enumerate()
        .map(|(i, raw)| parse_step(i + 1, raw, dict))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Plan { steps })
}

/// One placed pipe: the stated coordinate is the far end of the new run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipeSegmentSpec {
    pub length: u32,
    pub pipe_index: u32,
    pub head: GridPoint,
    pub axis: Dim,
}

impl fmt::Display for PipeSegmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pipe {}ft #{} {} {} axis",
            self.length,
            self.pipe_index,
            self.head,
            self.axis.letter().to_ascii_lowercase()
        )
    }
}

/// Renders specs as one comma-separated line, the form the parser reads back.
pub fn render_pipe_plan(specs: &[PipeSegmentSpec]) -> String {
    specs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn parse_pipe_plan(transcript: &str) -> Result<Vec<PipeSegmentSpec>, DecodeError> {
    let mut out = Vec::new();
    for c in PIPE_SPEC.captures_iter(transcript) {
        let inner = &c[3];
        let coords: Vec<Option<i32>> = inner
            .split(',')
            .map(|t| {
                let t = t.trim();
                let t = t.strip_suffix("ft").unwrap_or(t).trim();
                t.parse::<i32>().ok()
            })
            .collect();
        let head = match coords.as_slice() {
            [Some(x), Some(y), Some(z)] => GridPoint::new(*x, *y, *z),
            _ => return Err(DecodeError::MalformedCoordinate(inner.to_string())),
        };
        out.push(PipeSegmentSpec {
            length: c[1].parse().map_err(|_| DecodeError::MalformedCoordinate(c[1].to_string()))?,
            pipe_index: c[2].parse().map_err(|_| DecodeError::MalformedCoordinate(c[2].to_string()))?,
            head,
            axis: Dim::from_letter(c[4].chars().next().unwrap()).unwrap(),
        });
    }
    if out.is_empty() {
        return Err(DecodeError::NoSegmentsFound);
    }
    Ok(out)
}

/// Number of pipe-grammar fragments in `text`, well-formed or not.
pub fn count_pipe_fragments(text: &str) -> usize {
    PIPE_SPEC.find_iter(text).count()
}
