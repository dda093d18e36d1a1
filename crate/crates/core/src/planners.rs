//! Deterministic reference planners.
//!
//! These produce the ground-truth plans the validators compare against:
//! a largest-first stacking order, the recursive Tower of Hanoi solution and a
//! minimum-length rectilinear pipe layout.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::decoder::{PipeSegmentSpec, Plan, PlanStep, TargetSpec};
use crate::world::{grid_axis_of, Axis, Dim, GridPoint, ObjectKind, Scene, SceneObject, Segment, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("cubes `{0}` and `{1}` have the same footprint")]
    DuplicateSize(String, String),
    #[error("no layout reaches the end with the allowed pipe lengths")]
    Unreachable,
    #[error("invalid task: {0}")]
    InvalidTask(String),
}

// ---------------------------------------------------------------- stacking

/// Largest footprint to the base, each next cube on top of the previous one.
pub fn plan_stacking(cubes: &[SceneObject]) -> Result<Plan, PlanError> {
    let mut order: Vec<&SceneObject> = cubes.iter().collect();
    order.sort_by(|a, b| b.footprint_area().total_cmp(&a.footprint_area()).then_with(|| a.name.cmp(&b.name)));
    for w in order.windows(2) {
        if w[0].footprint_area() == w[1].footprint_area() {
            return Err(PlanError::DuplicateSize(w[0].name.clone(), w[1].name.clone()));
        }
    }
    let steps = order.iter().enumerate().map(|(i, c)| {
        let target = if i == 0 { TargetSpec::BaseLocation } else { TargetSpec::OnTopOf(order[i - 1].name.clone()) };
        PlanStep::new(i + 1, "move", &c.name, target)
    });
    Ok(Plan::from_steps(steps))
}

/// A stacking task: cubes scattered in a scene with a `base` marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingTask {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub scene: Scene,
}

impl StackingTask {
    pub fn cubes(&self) -> Vec<SceneObject> {
        self.scene.objects.iter().filter(|o| !o.kind.is_fixture()).cloned().collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.scene.objects.iter().map(|o| o.name.clone()).collect()
    }

    /// Cubes `A`, `B`, ... with side lengths `sides` (any order), laid out in a
    /// row away from a base marker at the origin.
    pub fn with_sides(sides: &[f64]) -> Self {
        let mut objects = vec![SceneObject::new(
            crate::matcher::BASE_MARKER,
            ObjectKind::Marker,
            Vec3::new(0.2, 0.2, 0.0),
            Vec3::ZERO,
        )];
        for (i, side) in sides.iter().enumerate() {
            objects.push(SceneObject::new(
                disk_label(i),
                ObjectKind::Cube,
                Vec3::splat(*side),
                Vec3::new(2.0 + 1.5 * i as f64, 2.0, side / 2.0),
            ));
        }
        StackingTask { id: None, scene: Scene { room: None, objects } }
    }
}

// ------------------------------------------------------------------- hanoi

/// `A`..`Z`, then `D27`, `D28`, ...
pub fn disk_label(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("D{}", i + 1)
    }
}

/// Classic recursive solution moving disks `A` (smallest) .. from `from` to `to`.
pub fn plan_hanoi(n: usize, from: &str, to: &str, aux: &str) -> Plan {
    let labels: Vec<String> = (0..n).map(disk_label).collect();
    plan_hanoi_labeled(&labels, from, to, aux)
}

/// Same as [`plan_hanoi`] with caller-chosen disk labels, smallest first.
pub fn plan_hanoi_labeled(disks: &[String], from: &str, to: &str, aux: &str) -> Plan {
    fn rec(disks: &[String], k: usize, from: &str, to: &str, aux: &str, out: &mut Vec<PlanStep>) {
        if k == 0 {
            return;
        }
        rec(disks, k - 1, from, aux, to, out);
        out.push(PlanStep::new(0, "move", &disks[k - 1], TargetSpec::NamedLocation(to.into())).with_source(from));
        rec(disks, k - 1, aux, to, from, out);
    }
    let mut steps = Vec::new();
    rec(disks, disks.len(), from, to, aux, &mut steps);
    Plan::from_steps(steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HanoiTask {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Smallest first.
    pub disks: Vec<String>,
    pub pegs: [String; 3],
    pub from: String,
    pub to: String,
}

impl HanoiTask {
    pub fn new(n: usize, pegs: [&str; 3], from: &str, to: &str) -> Self {
        Self {
            id: None,
            disks: (0..n).map(disk_label).collect(),
            pegs: pegs.map(String::from),
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn aux(&self) -> &str {
        self.pegs.iter().find(|p| **p != self.from && **p != self.to).map(String::as_str).unwrap_or("")
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let distinct: HashSet<&String> = self.pegs.iter().collect();
        if distinct.len() != 3 || self.disks.is_empty() {
            return Err(PlanError::InvalidTask("hanoi needs >= 1 disk and three distinct pegs".into()));
        }
        if !self.pegs.contains(&self.from) || !self.pegs.contains(&self.to) || self.from == self.to {
            return Err(PlanError::InvalidTask("from/to must be two distinct pegs".into()));
        }
        Ok(())
    }

    pub fn plan(&self) -> Plan {
        plan_hanoi_labeled(&self.disks, &self.from, &self.to, self.aux())
    }

    pub fn labels(&self) -> Vec<String> {
        self.disks.iter().chain(self.pegs.iter()).cloned().collect()
    }

    /// Pegs 0.3 apart on the x axis; disks 0.1 high, stacked on `from`.
    pub fn scene(&self) -> Scene {
        let n = self.disks.len();
        let mut objects: Vec<SceneObject> = self
            .pegs
            .iter()
            .enumerate()
            .map(|(i, p)| SceneObject::new(p, ObjectKind::Peg, Vec3::new(0.05, 0.05, 0.0), Vec3::new(0.3 * i as f64, 0.0, 0.0)))
            .collect();
        let from_x = 0.3 * self.pegs.iter().position(|p| *p == self.from).unwrap_or(0) as f64;
        for (k, d) in self.disks.iter().enumerate() {
            let width = 0.08 + 0.02 * k as f64;
            let level = (n - 1 - k) as f64;
            objects.push(SceneObject::new(
                d,
                ObjectKind::Disk,
                Vec3::new(width, width, 0.1),
                Vec3::new(from_x, 0.0, 0.05 + 0.1 * level),
            ));
        }
        Scene { room: None, objects }
    }
}

/// Three pegs holding disk sizes (0 = smallest), bottom first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HanoiState {
    pub pegs: [Vec<usize>; 3],
}

impl HanoiState {
    pub fn new(n: usize, from: usize) -> Self {
        let mut pegs: [Vec<usize>; 3] = Default::default();
        pegs[from] = (0..n).rev().collect();
        Self { pegs }
    }

    pub fn top(&self, peg: usize) -> Option<usize> {
        self.pegs[peg].last().copied()
    }

    pub fn peg_of(&self, disk: usize) -> Option<usize> {
        (0..3).find(|&p| self.pegs[p].contains(&disk))
    }

    pub fn is_valid(&self) -> bool {
        self.pegs.iter().all(|p| p.windows(2).all(|w| w[0] > w[1]))
    }
}

// ------------------------------------------------------------ pipe routing

/// A pipe endpoint and the direction the pipe must run there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub p: GridPoint,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipeTaskSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub room: i32,
    pub start: Endpoint,
    pub end: Endpoint,
    #[serde(rename = "lengths")]
    pub allowed_lengths: BTreeSet<u32>,
    #[serde(default)]
    pub obstacles: Vec<GridPoint>,
    #[serde(default)]
    pub mandatory: Vec<GridPoint>,
}

impl PipeTaskSpec {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::InvalidTask(m));
        if self.room < 1 {
            return bad(format!("room size {} < 1", self.room));
        }
        if self.allowed_lengths.is_empty() || self.allowed_lengths.contains(&0) {
            return bad("allowed lengths must be a non-empty set of positive integers".into());
        }
        if self.start.p == self.end.p {
            return bad("start equals end".into());
        }
        for (what, p) in [("start", self.start.p), ("end", self.end.p)] {
            if !p.in_room(self.room) {
                return bad(format!("{what} {p} outside room"));
            }
            if self.obstacles.contains(&p) {
                return bad(format!("obstacle on {what} {p}"));
            }
        }
        if let Some(m) = self.mandatory.iter().find(|m| !m.in_room(self.room)) {
            return bad(format!("mandatory point {m} outside room"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let spec: PipeTaskSpec = serde_json::from_str(text).map_err(|e| PlanError::InvalidTask(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// One laid pipe: an axis-parallel run annotated with its length class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LaidPipe {
    pub segment: Segment,
    pub length: u32,
}

#[derive(Serialize, Deserialize)]
struct LaidPipeRecord {
    from: GridPoint,
    to: GridPoint,
    length: u32,
    axis: Axis,
}

impl Serialize for LaidPipe {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LaidPipeRecord {
            from: self.segment.from(),
            to: self.segment.to(),
            length: self.length,
            axis: self.segment.axis(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaidPipe {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LaidPipeRecord::deserialize(d)?;
        let segment = Segment::new(r.from, r.to).map_err(serde::de::Error::custom)?;
        if segment.axis() != r.axis {
            return Err(serde::de::Error::custom(format!(
                "segment {} -> {} runs along {}, not {}",
                r.from,
                r.to,
                segment.axis(),
                r.axis
            )));
        }
        Ok(LaidPipe { segment, length: r.length })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PipeLayout {
    pub segments: Vec<LaidPipe>,
}

impl PipeLayout {
    pub fn total_length(&self) -> u32 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Head-chained placement list: each spec names the far end of its pipe.
    pub fn to_specs(&self) -> Vec<PipeSegmentSpec> {
        let mut counters = std::collections::BTreeMap::new();
        self.segments
            .iter()
            .map(|s| {
                let k = counters.entry(s.length).or_insert(0u32);
                *k += 1;
                PipeSegmentSpec { length: s.length, pipe_index: *k, head: s.segment.to(), axis: s.segment.axis().dim }
            })
            .collect()
    }

    /// Rebuilds explicit segments from a head-chained list starting at `start`.
    /// Fails when a step is not a single-axis displacement.
    pub fn from_specs(start: GridPoint, specs: &[PipeSegmentSpec]) -> Result<Self, PlanError> {
        let mut prev = start;
        let mut segments = Vec::with_capacity(specs.len());
        for s in specs {
            let segment = Segment::new(prev, s.head).map_err(|e| PlanError::InvalidTask(e.to_string()))?;
            segments.push(LaidPipe { segment, length: s.length });
            prev = s.head;
        }
        Ok(PipeLayout { segments })
    }
}

impl fmt::Display for PipeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::decoder::render_pipe_plan(&self.to_specs()))
    }
}

/// Count of mandatory points visited in order after laying `seg`.
pub fn advance_mandatory(progress: usize, seg: &Segment, mandatory: &[GridPoint]) -> usize {
    let mut k = progress;
    while k < mandatory.len() && seg.contains(mandatory[k]) {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub layout: PipeLayout,
    pub total_length: u32,
}

/// One search move: `Axis::ALL[axis]` by `length`. Ordering is the tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Move {
    axis: u8,
    length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    head: GridPoint,
    progress: usize,
    last: Option<Dim>,
}

#[derive(PartialEq, Eq)]
struct Entry {
    cost: u32,
    moves: Vec<Move>,
    state: State,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cost, self.moves.len(), &self.moves).cmp(&(other.cost, other.moves.len(), &other.moves))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum total-length layout by uniform-cost search.
///
/// A state is the current pipe head, how many mandatory points have been
/// visited in order, and the axis of the last pipe. Each move lays one pipe of
/// an allowed length along one of the six directions; pipes may not leave the
/// room or touch an obstacle. The first pipe must be parallel to the start
/// axis and the last parallel to the end axis. Among equal lengths, fewer
/// pipes win, then the lexicographically smallest move sequence (X<Y<Z,
/// positive first, shorter pipe first).
pub fn route_pipes(spec: &PipeTaskSpec) -> Result<Route, PlanError> {
    spec.validate()?;
    let lengths: Vec<u32> = spec.allowed_lengths.iter().copied().collect();
    let mut heap = BinaryHeap::new();
    let mut settled = HashSet::new();
    heap.push(Reverse(Entry {
        cost: 0,
        moves: Vec::new(),
        state: State { head: spec.start.p, progress: 0, last: None },
    }));
    while let Some(Reverse(Entry { cost, moves, state })) = heap.pop() {
        if !settled.insert(state) {
            continue;
        }
        if state.head == spec.end.p && state.progress == spec.mandatory.len() && state.last == Some(spec.end.axis.dim) {
            return Ok(build_route(spec.start.p, &moves));
        }
        for (ai, axis) in Axis::ALL.iter().enumerate() {
            if state.last.is_none() && axis.dim != spec.start.axis.dim {
                continue;
            }
            for &len in &lengths {
                let head = state.head.offset(*axis, len as i32);
                if !head.in_room(spec.room) {
                    continue;
                }
                let seg = Segment::new(state.head, head).expect("nonzero axis move");
                if spec.obstacles.iter().any(|o| seg.contains(*o)) {
                    continue;
                }
                let next = State { head, progress: advance_mandatory(state.progress, &seg, &spec.mandatory), last: Some(axis.dim) };
                if settled.contains(&next) {
                    continue;
                }
                let mut m = moves.clone();
                m.push(Move { axis: ai as u8, length: len });
                heap.push(Reverse(Entry { cost: cost + len, moves: m, state: next }));
            }
        }
    }
    Err(PlanError::Unreachable)
}

fn build_route(start: GridPoint, moves: &[Move]) -> Route {
    let mut head = start;
    let mut segments = Vec::with_capacity(moves.len());
    for m in moves {
        let next = head.offset(Axis::ALL[m.axis as usize], m.length as i32);
        segments.push(LaidPipe { segment: Segment::new(head, next).unwrap(), length: m.length });
        head = next;
    }
    let layout = PipeLayout { segments };
    Route { total_length: layout.total_length(), layout }
}

/// The axis a pipe from `a` to `b` would run along, if any.
pub fn pipe_axis(a: GridPoint, b: GridPoint) -> Option<Axis> {
    grid_axis_of(b - a).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Sign;

    fn gp(x: i32, y: i32, z: i32) -> GridPoint {
        GridPoint::new(x, y, z)
    }

    fn pz() -> Axis {
        Axis::new(Dim::Z, Sign::Pos)
    }

    fn spec(room: i32, start: GridPoint, end: GridPoint, lengths: &[u32], obstacles: &[GridPoint], mandatory: &[GridPoint]) -> PipeTaskSpec {
        PipeTaskSpec {
            id: None,
            room,
            start: Endpoint { p: start, axis: pz() },
            end: Endpoint { p: end, axis: Axis::new(Dim::Z, Sign::Neg) },
            allowed_lengths: lengths.iter().copied().collect(),
            obstacles: obstacles.to_vec(),
            mandatory: mandatory.to_vec(),
        }
    }

    #[test]
    fn stacking_order() {
        let task = StackingTask::with_sides(&[1.0, 0.9, 0.8, 0.7, 0.6]);
        let plan = plan_stacking(&task.cubes()).unwrap();
        let got: Vec<(String, TargetSpec)> = plan.steps.iter().map(|s| (s.object.clone(), s.target.clone())).collect();
        let on = |l: &str| TargetSpec::OnTopOf(l.into());
        assert_eq!(
            got,
            vec![
                ("A".into(), TargetSpec::BaseLocation),
                ("B".into(), on("A")),
                ("C".into(), on("B")),
                ("D".into(), on("C")),
                ("E".into(), on("D")),
            ]
        );
    }

    #[test]
    fn stacking_single_and_shuffled() {
        let one = StackingTask::with_sides(&[1.0]);
        let plan = plan_stacking(&one.cubes()).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.steps[0].target, TargetSpec::BaseLocation);

        let sorted = StackingTask::with_sides(&[1.0, 0.9, 0.8, 0.7, 0.6]).cubes();
        let shuffled: Vec<SceneObject> = [2, 0, 4, 1, 3].iter().map(|&i| sorted[i].clone()).collect();
        assert_eq!(plan_stacking(&shuffled).unwrap(), plan_stacking(&sorted).unwrap());
    }

    #[test]
    fn stacking_duplicate_size() {
        let task = StackingTask::with_sides(&[1.0, 1.0]);
        assert!(matches!(plan_stacking(&task.cubes()), Err(PlanError::DuplicateSize(_, _))));
    }

    #[test]
    fn hanoi_counts() {
        let p1 = plan_hanoi(1, "a", "b", "c");
        assert_eq!(p1.len(), 1);
        assert_eq!(p1.steps[0].object, "A");
        assert_eq!(p1.steps[0].source.as_deref(), Some("a"));
        assert_eq!(p1.steps[0].target, TargetSpec::NamedLocation("b".into()));
        assert_eq!(plan_hanoi(3, "a", "c", "b").len(), 7);
        assert_eq!(plan_hanoi(5, "a", "b", "c").len(), 31);
    }

    #[test]
    fn hanoi_scene_is_a_valid_tower() {
        let t = HanoiTask::new(4, ["a", "b", "c"], "a", "c");
        let scene = t.scene();
        scene.validate().unwrap();
        let peg = scene.index_of("a").unwrap();
        assert_eq!(scene.column_over(peg, None).len(), 4);
    }

    #[test]
    fn blocked_start_is_unreachable() {
        let s = gp(2, 2, 0);
        let blockers: Vec<GridPoint> = Axis::ALL.iter().map(|a| s.offset(*a, 1)).filter(|p| p.in_room(4)).collect();
        let sp = spec(4, s, gp(2, 2, 4), &[2], &blockers, &[]);
        assert_eq!(route_pipes(&sp), Err(PlanError::Unreachable));
    }

    #[test]
    fn straight_run_when_unobstructed() {
        let sp = spec(10, gp(5, 5, 0), gp(5, 5, 10), &[2], &[], &[]);
        let r = route_pipes(&sp).unwrap();
        assert_eq!(r.total_length, 10);
        assert_eq!(r.layout.segments.len(), 5);
    }

    #[test]
    fn tie_break_prefers_fewer_pipes_then_lexicographic() {
        let sp = spec(10, gp(5, 5, 0), gp(5, 5, 8), &[2, 4], &[], &[]);
        let r = route_pipes(&sp).unwrap();
        assert_eq!(r.total_length, 8);
        assert_eq!(r.layout.segments.iter().map(|s| s.length).collect::<Vec<_>>(), vec![4, 4]);

        let sp = spec(10, gp(5, 5, 0), gp(5, 5, 6), &[2, 4], &[], &[]);
        let r = route_pipes(&sp).unwrap();
        assert_eq!(r.layout.segments.iter().map(|s| s.length).collect::<Vec<_>>(), vec![2, 4]);
    }

    #[test]
    fn spec_validation() {
        let mut sp = spec(10, gp(5, 5, 0), gp(5, 5, 0), &[2], &[], &[]);
        assert!(sp.validate().is_err());
        sp.end.p = gp(5, 5, 10);
        sp.obstacles.push(gp(5, 5, 10));
        assert!(sp.validate().is_err());
        sp.obstacles.clear();
        sp.mandatory.push(gp(11, 0, 0));
        assert!(sp.validate().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let text = r#"{"room": 10, "start": {"p": [5,5,0], "axis": "+Z"}, "end": {"p": [5,5,10], "axis": "-Z"},
                       "lengths": [2], "obstacles": [[5,5,5],[5,7,5]], "mandatory": []}"#;
        let sp = PipeTaskSpec::from_json(text).unwrap();
        assert_eq!(sp.obstacles.len(), 2);
        assert_eq!(sp.end.axis, Axis::new(Dim::Z, Sign::Neg));
    }

    #[test]
    fn specs_round_trip_through_layout() {
        let sp = spec(10, gp(5, 5, 0), gp(5, 5, 10), &[2], &[gp(5, 5, 5)], &[]);
        let r = route_pipes(&sp).unwrap();
        let specs = r.layout.to_specs();
        assert_eq!(PipeLayout::from_specs(sp.start.p, &specs).unwrap(), r.layout);
        let json = serde_json::to_string(&r.layout).unwrap();
        assert_eq!(serde_json::from_str::<PipeLayout>(&json).unwrap(), r.layout);
    }
}
