//! Plan and layout classification: optimal, sub-optimal or failed, with reasons.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoder::{Dictionary, PipeSegmentSpec, Plan, TargetSpec};
use crate::matcher::{match_objects, MatchError};
use crate::planners::{advance_mandatory, route_pipes, HanoiState, HanoiTask, PipeLayout, PipeTaskSpec};
use crate::world::{labels_equal, Dim, GridPoint, Scene, SceneObject, Segment, CONTACT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    SuccessOptimal,
    SuccessSubOptimal,
    Fail,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self != Outcome::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReasonCode {
    GapBetweenSegments,
    NotAxisParallel,
    DisallowedLength,
    ObstacleHit,
    MandatoryMissed,
    MandatoryOutOfOrder,
    WrongStart,
    WrongEnd,
    WrongStartAxis,
    WrongEndAxis,
    OutOfRoom,
    LargerOnSmaller,
    MoveFromWrongPeg,
    UnstableStack,
    IncompleteTower,
    AxisMismatch,
    NoMatch,
    UnknownPeg,
    DecodeFailed,
    ExecutionFailed,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reason {
    pub code: ReasonCode,
    pub detail: String,
    /// The offending grid point for `ObstacleHit` and `MandatoryMissed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<GridPoint>,
}

impl Reason {
    pub fn new(code: ReasonCode, detail: impl Into<String>) -> Self {
        Self { code, detail: detail.into(), point: None }
    }

    pub fn at(code: ReasonCode, point: GridPoint, detail: impl Into<String>) -> Self {
        Self { code, detail: detail.into(), point: Some(point) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub total_length: Option<u32>,
    pub step_count: usize,
    pub oracle_min_length: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reasons: Vec<Reason>,
    pub metrics: Metrics,
}

impl Verdict {
    pub fn success(optimal: bool, metrics: Metrics) -> Self {
        let outcome = if optimal { Outcome::SuccessOptimal } else { Outcome::SuccessSubOptimal };
        Self { outcome, reasons: Vec::new(), metrics }
    }

    /// Fail with at least one reason.
    pub fn fail(reasons: Vec<Reason>, metrics: Metrics) -> Self {
        assert!(!reasons.is_empty(), "a failed verdict needs a reason");
        Self { outcome: Outcome::Fail, reasons, metrics }
    }

    pub fn codes(&self) -> Vec<ReasonCode> {
        self.reasons.iter().map(|r| r.code).collect()
    }

    pub fn has(&self, code: ReasonCode) -> bool {
        self.reasons.iter().any(|r| r.code == code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

// ---------------------------------------------------------------- stacking

/// The movable object `idx` sits on, if any.
fn support_of(scene: &Scene, idx: usize) -> Option<usize> {
    let o = &scene.objects[idx];
    scene
        .objects
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            *i != idx
                && !s.kind.is_fixture()
                && (o.bottom() - s.top()).abs() <= CONTACT_TOL
                && s.footprint_contains(o.position, CONTACT_TOL)
        })
        .max_by(|a, b| a.1.footprint_area().total_cmp(&b.1.footprint_area()))
        .map(|(i, _)| i)
}

fn fits_on(upper: &SceneObject, lower: &SceneObject) -> bool {
    upper.size.x <= lower.size.x + CONTACT_TOL && upper.size.y <= lower.size.y + CONTACT_TOL
}

fn grounded(o: &SceneObject) -> bool {
    o.bottom().abs() <= CONTACT_TOL
}

/// Replays a stacking plan and checks stability and tower completeness.
///
/// Every move is checked against the scene as it stands: the moved object
/// must not be holding anything up, and where it lands it must either rest on
/// the floor or on an object at least as wide in both horizontal directions.
pub fn validate_stacking(plan: &Plan, scene: &Scene) -> Verdict {
    let metrics = Metrics { total_length: None, step_count: plan.len(), oracle_min_length: None };
    let names: Vec<&str> = scene.objects.iter().map(|o| o.name.as_str()).collect();
    let dict = Dictionary::new(crate::decoder::DEFAULT_ACTIONS.iter().copied(), names);
    let ops = match match_objects(plan, scene, &dict) {
        Ok(ops) => ops,
        Err(e) => return Verdict::fail(vec![match_reason(&e)], metrics),
    };
    let mut world = scene.clone();
    let mut moved: Vec<usize> = Vec::with_capacity(ops.len());
    for (k, op) in ops.iter().enumerate() {
        let step = k + 1;
        let idx = world.index_of(&op.object_name).expect("matched objects exist");
        if let Some(above) = world.resting_on(idx, None) {
            return Verdict::fail(
                vec![Reason::new(
                    ReasonCode::UnstableStack,
                    format!("step {step}: `{}` is moved from under `{}`", op.object_name, world.objects[above].name),
                )],
                metrics,
            );
        }
        world.objects[idx].position = op.target_position;
        let obj = &world.objects[idx];
        match support_of(&world, idx) {
            Some(s) if !fits_on(obj, &world.objects[s]) => {
                return Verdict::fail(
                    vec![Reason::new(
                        ReasonCode::UnstableStack,
                        format!("step {step}: `{}` rests on smaller `{}`", obj.name, world.objects[s].name),
                    )],
                    metrics,
                );
            }
            None if !grounded(obj) => {
                return Verdict::fail(
                    vec![Reason::new(ReasonCode::UnstableStack, format!("step {step}: `{}` is unsupported", obj.name))],
                    metrics,
                );
            }
            _ => {}
        }
        moved.push(idx);
    }

    let cubes: Vec<usize> = (0..world.objects.len()).filter(|&i| !world.objects[i].kind.is_fixture()).collect();
    let mut column = cubes.clone();
    column.sort_by(|&a, &b| world.objects[a].bottom().total_cmp(&world.objects[b].bottom()));
    let one_tower = column.first().is_some_and(|&i| grounded(&world.objects[i]))
        && column.windows(2).all(|w| support_of(&world, w[1]) == Some(w[0]) && world.resting_on(w[0], None) == Some(w[1]));
    if !one_tower {
        return Verdict::fail(
            vec![Reason::new(ReasonCode::IncompleteTower, format!("{} cubes do not form a single tower", cubes.len()))],
            metrics,
        );
    }
    let decreasing = moved
        .windows(2)
        .all(|w| world.objects[w[0]].footprint_area() > world.objects[w[1]].footprint_area());
    Verdict::success(decreasing && moved.len() == cubes.len(), metrics)
}

fn match_reason(e: &MatchError) -> Reason {
    Reason::new(ReasonCode::NoMatch, e.to_string())
}

// ------------------------------------------------------------------- hanoi

fn resolve_peg(task: &HanoiTask, label: &str) -> Option<usize> {
    task.pegs
        .iter()
        .position(|p| p == label)
        .or_else(|| task.pegs.iter().position(|p| labels_equal(p, label)))
}

fn resolve_disk(task: &HanoiTask, label: &str) -> Option<usize> {
    task.disks
        .iter()
        .position(|d| d == label)
        .or_else(|| task.disks.iter().position(|d| labels_equal(d, label)))
}

/// Replays a Hanoi plan move by move and stops at the first illegal move.
///
/// A stated source peg that disagrees with where the disk actually is counts
/// as `MoveFromWrongPeg`, as does moving a disk that is not on top.
pub fn validate_hanoi(plan: &Plan, task: &HanoiTask) -> Verdict {
    let n = task.disks.len();
    let metrics = Metrics { total_length: None, step_count: plan.len(), oracle_min_length: None };
    let Some(from) = resolve_peg(task, &task.from) else {
        return Verdict::fail(vec![Reason::new(ReasonCode::UnknownPeg, format!("start peg `{}`", task.from))], metrics);
    };
    let Some(to) = resolve_peg(task, &task.to) else {
        return Verdict::fail(vec![Reason::new(ReasonCode::UnknownPeg, format!("goal peg `{}`", task.to))], metrics);
    };
    let mut state = HanoiState::new(n, from);
    let fail = |code, detail: String| Verdict::fail(vec![Reason::new(code, detail)], metrics.clone());
    for s in &plan.steps {
        let k = s.index;
        let Some(disk) = resolve_disk(task, &s.object) else {
            return fail(ReasonCode::NoMatch, format!("step {k}: no disk `{}`", s.object));
        };
        let dst = match &s.target {
            TargetSpec::NamedLocation(l) | TargetSpec::OnTopOf(l) => match resolve_peg(task, l) {
                Some(p) => p,
                None => match resolve_disk(task, l).and_then(|d| state.peg_of(d)) {
                    Some(p) => p,
                    None => return fail(ReasonCode::UnknownPeg, format!("step {k}: target `{l}` is not a peg")),
                },
            },
            other => return fail(ReasonCode::UnknownPeg, format!("step {k}: target `{other}` is not a peg")),
        };
        let actual = state.peg_of(disk).expect("every disk is on a peg");
        if let Some(src) = &s.source {
            match resolve_peg(task, src) {
                None => return fail(ReasonCode::UnknownPeg, format!("step {k}: source `{src}` is not a peg")),
                Some(p) if p != actual => {
                    return fail(
                        ReasonCode::MoveFromWrongPeg,
                        format!("step {k}: `{}` is on `{}`, not `{src}`", s.object, task.pegs[actual]),
                    )
                }
                Some(_) => {}
            }
        }
        if state.top(actual) != Some(disk) {
            return fail(ReasonCode::MoveFromWrongPeg, format!("step {k}: `{}` is not on top of `{}`", s.object, task.pegs[actual]));
        }
        if let Some(top) = state.top(dst) {
            if top < disk {
                return fail(
                    ReasonCode::LargerOnSmaller,
                    format!("step {k}: `{}` onto smaller `{}` on `{}`", s.object, task.disks[top], task.pegs[dst]),
                );
            }
        }
        state.pegs[actual].pop();
        state.pegs[dst].push(disk);
    }
    if state.pegs[to].len() != n {
        return fail(ReasonCode::IncompleteTower, format!("{} of {n} disks end on `{}`", state.pegs[to].len(), task.to));
    }
    let minimal = if n < 64 { (1u64 << n) - 1 } else { u64::MAX };
    Verdict::success(plan.len() as u64 == minimal, metrics)
}

// -------------------------------------------------------------------- pipes

/// One pipe as stated by a planner: endpoints, declared length class and axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipeRun {
    pub from: GridPoint,
    pub to: GridPoint,
    pub length: u32,
    pub axis: Dim,
}

impl PipeRun {
    pub fn from_specs(start: GridPoint, specs: &[PipeSegmentSpec]) -> Vec<PipeRun> {
        let mut prev = start;
        specs
            .iter()
            .map(|s| {
                let run = PipeRun { from: prev, to: s.head, length: s.length, axis: s.axis };
                prev = s.head;
                run
            })
            .collect()
    }

    pub fn from_layout(layout: &PipeLayout) -> Vec<PipeRun> {
        layout
            .segments
            .iter()
            .map(|p| PipeRun { from: p.segment.from(), to: p.segment.to(), length: p.length, axis: p.segment.axis().dim })
            .collect()
    }

    fn segment(&self) -> Option<Segment> {
        Segment::new(self.from, self.to).ok()
    }
}

/// Head-chained pipe list: each pipe starts where the previous one ended.
pub fn validate_pipe_layout(segs: &[PipeSegmentSpec], spec: &PipeTaskSpec) -> Verdict {
    let min = oracle_min(spec);
    check_runs(&PipeRun::from_specs(spec.start.p, segs), spec, false, min)
}

/// Explicit from/to pipes, additionally checked for gaps and a wrong start.
pub fn validate_explicit_layout(layout: &PipeLayout, spec: &PipeTaskSpec) -> Verdict {
    let min = oracle_min(spec);
    check_runs(&PipeRun::from_layout(layout), spec, true, min)
}

/// Minimal total length for `spec`, if any layout exists.
pub fn oracle_min(spec: &PipeTaskSpec) -> Option<u32> {
    route_pipes(spec).ok().map(|r| r.total_length)
}

fn same_coords(a: GridPoint, b: GridPoint) -> String {
    let same: Vec<char> = Dim::ALL.iter().filter(|d| a.component(**d) == b.component(**d)).map(|d| d.letter()).collect();
    if same.is_empty() {
        "no shared coordinate".into()
    } else {
        format!("same {} only", same.iter().map(char::to_string).collect::<Vec<_>>().join(", "))
    }
}

/// Shared checks for both layout forms; `oracle_min` is supplied by the caller
/// so that batch runs can compute it once per task.
pub fn check_runs(runs: &[PipeRun], spec: &PipeTaskSpec, explicit: bool, oracle_min: Option<u32>) -> Verdict {
    let mut reasons = Vec::new();
    let total: u32 = runs.iter().map(|r| r.length).sum();
    let metrics = Metrics { total_length: Some(total), step_count: runs.len(), oracle_min_length: oracle_min };

    let mut segs: Vec<Option<Segment>> = Vec::with_capacity(runs.len());
    for (k, r) in runs.iter().enumerate() {
        let i = k + 1;
        let seg = r.segment();
        segs.push(seg);
        let Some(seg) = seg else {
            reasons.push(Reason::new(ReasonCode::NotAxisParallel, format!("pipe {i}: {} -> {}", r.from, r.to)));
            continue;
        };
        if seg.axis().dim != r.axis {
            reasons.push(Reason::new(
                ReasonCode::AxisMismatch,
                format!("pipe {i}: declared {} axis, runs along {}", r.axis, seg.axis().dim),
            ));
        }
        if seg.length() != r.length || !spec.allowed_lengths.contains(&r.length) {
            reasons.push(Reason::new(
                ReasonCode::DisallowedLength,
                format!("pipe {i}: declared {} ft, spans {}", r.length, seg.length()),
            ));
        }
        if !r.from.in_room(spec.room) || !r.to.in_room(spec.room) {
            reasons.push(Reason::new(ReasonCode::OutOfRoom, format!("pipe {i}: {} -> {}", r.from, r.to)));
        }
    }

    if explicit {
        if let Some(first) = runs.first() {
            if first.from != spec.start.p {
                reasons.push(Reason::new(ReasonCode::WrongStart, format!("first pipe starts at {}", first.from)));
            }
        }
        for (k, w) in runs.windows(2).enumerate() {
            if w[1].from != w[0].to {
                reasons.push(Reason::new(
                    ReasonCode::GapBetweenSegments,
                    format!("pipes {} and {}: {} vs {} ({})", k + 1, k + 2, w[0].to, w[1].from, same_coords(w[0].to, w[1].from)),
                ));
            }
        }
    }

    let run_dim = |k: usize| segs[k].map(|s| s.axis().dim).unwrap_or(runs[k].axis);
    if !runs.is_empty() {
        if run_dim(0) != spec.start.axis.dim {
            reasons.push(Reason::new(ReasonCode::WrongStartAxis, format!("first pipe along {}", run_dim(0))));
        }
        let last = runs.len() - 1;
        if run_dim(last) != spec.end.axis.dim {
            reasons.push(Reason::new(ReasonCode::WrongEndAxis, format!("last pipe along {}", run_dim(last))));
        }
    }
    let head = runs.last().map(|r| r.to).unwrap_or(spec.start.p);
    if head != spec.end.p {
        reasons.push(Reason::new(ReasonCode::WrongEnd, format!("pipeline ends at {head}")));
    }

    for o in &spec.obstacles {
        if let Some(k) = segs.iter().position(|s| s.is_some_and(|s| s.contains(*o))) {
            reasons.push(Reason::at(ReasonCode::ObstacleHit, *o, format!("pipe {} passes {o}", k + 1)));
        }
    }

    let progress = segs.iter().flatten().fold(0, |k, s| advance_mandatory(k, s, &spec.mandatory));
    if progress < spec.mandatory.len() {
        let mut missed = false;
        for m in &spec.mandatory {
            if !segs.iter().flatten().any(|s| s.contains(*m)) {
                reasons.push(Reason::at(ReasonCode::MandatoryMissed, *m, format!("no pipe passes {m}")));
                missed = true;
            }
        }
        if !missed {
            reasons.push(Reason::new(
                ReasonCode::MandatoryOutOfOrder,
                format!("only {progress} of {} mandatory points visited in order", spec.mandatory.len()),
            ));
        }
    }

    if !reasons.is_empty() {
        return Verdict::fail(reasons, metrics);
    }
    Verdict::success(oracle_min == Some(total), metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{decode_plan, PlanStep};
    use crate::planners::{plan_hanoi, plan_stacking, Endpoint, LaidPipe, StackingTask};
    use crate::world::{Axis, Sign};

    fn gp(x: i32, y: i32, z: i32) -> GridPoint {
        GridPoint::new(x, y, z)
    }

    fn avoid(lengths: &[u32]) -> PipeTaskSpec {
        PipeTaskSpec {
            id: None,
            room: 10,
            start: Endpoint { p: gp(5, 5, 0), axis: Axis::new(Dim::Z, Sign::Pos) },
            end: Endpoint { p: gp(5, 5, 10), axis: Axis::new(Dim::Z, Sign::Neg) },
            allowed_lengths: lengths.iter().copied().collect(),
            obstacles: vec![gp(5, 5, 5), gp(5, 7, 5)],
            mandatory: vec![],
        }
    }

    fn tower() -> StackingTask {
        StackingTask::with_sides(&[1.0, 0.9, 0.8, 0.7, 0.6])
    }

    fn on(l: &str) -> TargetSpec {
        TargetSpec::OnTopOf(l.into())
    }

    #[test]
    fn stacking_transcript_is_optimal() {
        let dict = Dictionary::with_objects(["A", "B", "C", "D", "E"]);
        let plan = decode_plan(include_str!("../fixtures/stacking_transcript.txt"), &dict).unwrap();
        let v = validate_stacking(&plan, &tower().scene);
        assert_eq!(v.outcome, Outcome::SuccessOptimal, "{v:?}");
    }

    #[test]
    fn smaller_first_is_unstable() {
        let plan = Plan::from_steps([
            PlanStep::new(1, "move", "E", TargetSpec::BaseLocation),
            PlanStep::new(2, "move", "D", on("E")),
        ]);
        let v = validate_stacking(&plan, &tower().scene);
        assert_eq!(v.codes(), vec![ReasonCode::UnstableStack]);
    }

    #[test]
    fn redundant_replace_is_suboptimal() {
        let plan = Plan::from_steps([
            PlanStep::new(1, "move", "A", TargetSpec::BaseLocation),
            PlanStep::new(2, "move", "B", on("A")),
            PlanStep::new(3, "move", "B", on("A")),
            PlanStep::new(4, "move", "C", on("B")),
            PlanStep::new(5, "move", "D", on("C")),
            PlanStep::new(6, "move", "E", on("D")),
        ]);
        let v = validate_stacking(&plan, &tower().scene);
        assert_eq!(v.outcome, Outcome::SuccessSubOptimal);
        assert_eq!(v.metrics.step_count, 6);
    }

    #[test]
    fn partial_tower_and_missing_cube() {
        let plan = Plan::from_steps([
            PlanStep::new(1, "move", "A", TargetSpec::BaseLocation),
            PlanStep::new(2, "move", "B", on("A")),
        ]);
        assert_eq!(validate_stacking(&plan, &tower().scene).codes(), vec![ReasonCode::IncompleteTower]);
        let plan = Plan::from_steps([PlanStep::new(1, "move", "F", TargetSpec::BaseLocation)]);
        assert_eq!(validate_stacking(&plan, &tower().scene).codes(), vec![ReasonCode::NoMatch]);
    }

    #[test]
    fn moving_a_support_is_unstable() {
        let mut plan = plan_stacking(&tower().cubes()).unwrap();
        plan.steps.push(PlanStep::new(6, "move", "C", TargetSpec::Coordinate(crate::world::Vec3::new(9.0, 9.0, 0.4))));
        assert_eq!(validate_stacking(&plan, &tower().scene).codes(), vec![ReasonCode::UnstableStack]);
    }

    #[test]
    fn hanoi_oracle_is_optimal() {
        for n in 1..=8 {
            let task = HanoiTask::new(n, ["a", "b", "c"], "a", "b");
            let v = validate_hanoi(&task.plan(), &task);
            assert_eq!(v.outcome, Outcome::SuccessOptimal, "n={n}");
            assert_eq!(v.metrics.step_count, (1 << n) - 1);
        }
    }

    #[test]
    fn hanoi_violations() {
        let task = HanoiTask::new(3, ["a", "b", "c"], "a", "c");
        let mv = |i, d: &str, s: &str, t: &str| PlanStep::new(i, "move", d, TargetSpec::NamedLocation(t.into())).with_source(s);
        let larger = Plan::from_steps([mv(1, "A", "a", "b"), mv(2, "B", "a", "b")]);
        assert_eq!(validate_hanoi(&larger, &task).codes(), vec![ReasonCode::LargerOnSmaller]);
        let buried = Plan::from_steps([mv(1, "B", "a", "b")]);
        assert_eq!(validate_hanoi(&buried, &task).codes(), vec![ReasonCode::MoveFromWrongPeg]);
        let wrong_src = Plan::from_steps([mv(1, "A", "a", "b"), mv(2, "A", "a", "c")]);
        assert_eq!(validate_hanoi(&wrong_src, &task).codes(), vec![ReasonCode::MoveFromWrongPeg]);
        let bad_peg = Plan::from_steps([mv(1, "A", "a", "q")]);
        assert_eq!(validate_hanoi(&bad_peg, &task).codes(), vec![ReasonCode::UnknownPeg]);
        let short = Plan::from_steps([mv(1, "A", "a", "c")]);
        assert_eq!(validate_hanoi(&short, &task).codes(), vec![ReasonCode::IncompleteTower]);
    }

    #[test]
    fn hanoi_suboptimal_with_detour() {
        let task = HanoiTask::new(1, ["a", "b", "c"], "a", "c");
        let mv = |i, s: &str, t: &str| PlanStep::new(i, "move", "A", TargetSpec::NamedLocation(t.into())).with_source(s);
        let plan = Plan::from_steps([mv(1, "a", "b"), mv(2, "b", "c")]);
        assert_eq!(validate_hanoi(&plan, &task).outcome, Outcome::SuccessSubOptimal);
        assert_eq!(validate_hanoi(&plan_hanoi(1, "a", "c", "b"), &task).outcome, Outcome::SuccessOptimal);
    }

    #[test]
    fn oracle_layout_is_optimal() {
        let spec = avoid(&[2]);
        let route = route_pipes(&spec).unwrap();
        let v = validate_pipe_layout(&route.layout.to_specs(), &spec);
        assert_eq!(v.outcome, Outcome::SuccessOptimal, "{v:?}");
        assert_eq!(v.metrics.oracle_min_length, Some(route.total_length));
    }

    #[test]
    fn straight_riser_hits_obstacle() {
        let spec = avoid(&[10]);
        let specs = [PipeSegmentSpec { length: 10, pipe_index: 1, head: gp(5, 5, 10), axis: Dim::Z }];
        let v = validate_pipe_layout(&specs, &spec);
        assert_eq!(v.codes(), vec![ReasonCode::ObstacleHit]);
        assert_eq!(v.reasons[0].point, Some(gp(5, 5, 5)));
    }

    #[test]
    fn gap_with_two_shared_coordinates() {
        let spec = avoid(&[2]);
        let mut layout = route_pipes(&spec).unwrap().layout;
        let k = 2;
        let old = layout.segments[k].segment;
        let shift = if old.axis().dim == Dim::Y { Axis::new(Dim::X, Sign::Pos) } else { Axis::new(Dim::Y, Sign::Pos) };
        layout.segments[k] = LaidPipe {
            segment: Segment::new(old.from().offset(shift, 1), old.to().offset(shift, 1)).unwrap(),
            length: layout.segments[k].length,
        };
        let v = validate_explicit_layout(&layout, &spec);
        assert!(v.has(ReasonCode::GapBetweenSegments), "{v:?}");
        let a = layout.segments[k - 1].segment.to();
        let b = layout.segments[k].segment.from();
        assert_eq!(a.shared_coordinates(b), 2);
    }

    #[test]
    fn declared_axis_and_length_are_cross_checked() {
        let spec = avoid(&[2]);
        let specs = [PipeSegmentSpec { length: 2, pipe_index: 1, head: gp(5, 5, 2), axis: Dim::Y }];
        assert!(validate_pipe_layout(&specs, &spec).has(ReasonCode::AxisMismatch));
        let specs = [PipeSegmentSpec { length: 2, pipe_index: 1, head: gp(5, 5, 3), axis: Dim::Z }];
        assert!(validate_pipe_layout(&specs, &spec).has(ReasonCode::DisallowedLength));
        let specs = [PipeSegmentSpec { length: 2, pipe_index: 1, head: gp(5, 6, 2), axis: Dim::Z }];
        assert!(validate_pipe_layout(&specs, &spec).has(ReasonCode::NotAxisParallel));
    }

    #[test]
    fn verdict_json_shape() {
        let spec = avoid(&[10]);
        let specs = [PipeSegmentSpec { length: 10, pipe_index: 1, head: gp(5, 5, 10), axis: Dim::Z }];
        let v: serde_json::Value = serde_json::from_str(&validate_pipe_layout(&specs, &spec).to_json()).unwrap();
        assert_eq!(v["outcome"], "Fail");
        assert_eq!(v["reasons"][0]["code"], "ObstacleHit");
        assert_eq!(v["metrics"]["total_length"], 10);
    }
}
