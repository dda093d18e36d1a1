//! Independent reference implementations used as test oracles.
//!
//! None of these call the library's search, validation or clustering code;
//! they only share its plain data types.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use asmseq::harness::TaskSpec;
use asmseq::planners::PipeTaskSpec;
use asmseq::world::{GridPoint, Vec3};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn task(name: &str) -> TaskSpec {
    TaskSpec::load(&fixture(&format!("tasks/{name}.json"))).unwrap()
}

pub fn pipe_task(name: &str) -> PipeTaskSpec {
    match task(name) {
        TaskSpec::Pipe(p) => p,
        other => panic!("{name} is a {} task", other.family()),
    }
}

pub const PIPE_TASKS: [&str; 4] =
    ["avoid_obstacles_constant", "avoid_obstacles_variable", "pass_points_constant", "pass_points_variable"];

/// Loads a committed golden. Set `BLESS_GOLDENS=1` to (re)write it from `actual`.
pub fn golden(name: &str, actual: &serde_json::Value) -> serde_json::Value {
    let path = fixture(&format!("goldens/{name}.json"));
    if std::env::var_os("BLESS_GOLDENS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
    }
    load_golden(name)
}

pub fn load_golden(name: &str) -> serde_json::Value {
    let path = fixture(&format!("goldens/{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("golden {} missing", path.display()));
    serde_json::from_str(&text).unwrap()
}

const DIRS: [(i32, i32, i32); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];

fn dim_of(d: usize) -> u8 {
    (d / 2) as u8
}

fn dim_index(p: &PipeTaskSpec, start: bool) -> u8 {
    let a = if start { p.start.axis } else { p.end.axis };
    a.dim as u8
}

/// Every cell a pipe from `p` along direction `d` with `len` covers, both ends included.
pub fn cells(p: GridPoint, d: usize, len: u32) -> Vec<GridPoint> {
    let (dx, dy, dz) = DIRS[d];
    (0..=len as i32).map(|k| GridPoint::new(p.x + dx * k, p.y + dy * k, p.z + dz * k)).collect()
}

fn in_room(p: GridPoint, room: i32) -> bool {
    [p.x, p.y, p.z].iter().all(|c| *c >= 0 && *c <= room)
}

/// Pipe cells if the pipe is legal (inside the room, clear of obstacles).
fn legal_cells(spec: &PipeTaskSpec, p: GridPoint, d: usize, len: u32) -> Option<Vec<GridPoint>> {
    let cs = cells(p, d, len);
    let ok = cs.iter().all(|c| in_room(*c, spec.room) && !spec.obstacles.contains(c));
    ok.then_some(cs)
}

fn progress_after(k: usize, covered: &[GridPoint], mandatory: &[GridPoint]) -> usize {
    let mut k = k;
    while k < mandatory.len() && covered.contains(&mandatory[k]) {
        k += 1;
    }
    k
}

type PipeState = (GridPoint, usize, u8);

const NO_DIM: u8 = 3;

/// Minimal total length by Dial's bucket search: states are settled in order
/// of exact accumulated length.
pub fn pipe_min_bfs(spec: &PipeTaskSpec) -> Option<u32> {
    let lens: Vec<u32> = spec.allowed_lengths.iter().copied().collect();
    let max_len = *lens.iter().max()? as usize;
    let (sd, ed) = (dim_index(spec, true), dim_index(spec, false));
    let m = spec.mandatory.len();
    let mut buckets: Vec<Vec<PipeState>> = vec![vec![(spec.start.p, 0, NO_DIM)]];
    let mut seen: HashSet<PipeState> = HashSet::new();
    let mut cost = 0usize;
    let mut empty_run = 0;
    while empty_run <= max_len {
        if cost >= buckets.len() {
            buckets.resize(cost + 1, Vec::new());
        }
        let layer = std::mem::take(&mut buckets[cost]);
        empty_run = if layer.is_empty() { empty_run + 1 } else { 0 };
        for st in layer {
            if !seen.insert(st) {
                continue;
            }
            let (p, k, last) = st;
            if p == spec.end.p && k == m && last == ed {
                return Some(cost as u32);
            }
            for d in 0..6 {
                if last == NO_DIM && dim_of(d) != sd {
                    continue;
                }
                for &len in &lens {
                    let Some(cs) = legal_cells(spec, p, d, len) else { continue };
                    let next = (*cs.last().unwrap(), progress_after(k, &cs, &spec.mandatory), dim_of(d));
                    let c = cost + len as usize;
                    if c >= buckets.len() {
                        buckets.resize(c + 1, Vec::new());
                    }
                    buckets[c].push(next);
                }
            }
        }
        cost += 1;
    }
    None
}

/// Minimal total length over all layouts of total length at most `max_total`,
/// by exhaustive depth-first enumeration. A branch is cut only when the same
/// state was already reached with no more length.
pub fn pipe_min_enumerate(spec: &PipeTaskSpec, max_total: u32) -> Option<u32> {
    struct Search<'a> {
        spec: &'a PipeTaskSpec,
        lens: Vec<u32>,
        sd: u8,
        ed: u8,
        max: u32,
        best: Option<u32>,
        memo: HashMap<PipeState, u32>,
    }
    impl Search<'_> {
        fn go(&mut self, st: PipeState, cost: u32) {
            if cost > self.max || self.best.is_some_and(|b| cost >= b) {
                return;
            }
            let (p, k, last) = st;
            if p == self.spec.end.p && k == self.spec.mandatory.len() && last == self.ed {
                self.best = Some(cost);
                return;
            }
            if self.memo.get(&st).is_some_and(|c| *c <= cost) {
                return;
            }
            self.memo.insert(st, cost);
            for d in 0..6 {
                if last == NO_DIM && dim_of(d) != self.sd {
                    continue;
                }
                for li in 0..self.lens.len() {
                    let len = self.lens[li];
                    let Some(cs) = legal_cells(self.spec, p, d, len) else { continue };
                    let next = (*cs.last().unwrap(), progress_after(k, &cs, &self.spec.mandatory), dim_of(d));
                    self.go(next, cost + len);
                }
            }
        }
    }
    let mut s = Search {
        spec,
        lens: spec.allowed_lengths.iter().copied().collect(),
        sd: dim_index(spec, true),
        ed: dim_index(spec, false),
        max: max_total,
        best: None,
        memo: HashMap::new(),
    };
    s.go((spec.start.p, 0, NO_DIM), 0);
    s.best
}

/// A head-chained move: direction index (+X,-X,+Y,-Y,+Z,-Z) and length.
pub type Move = (usize, u32);

pub fn head_after(start: GridPoint, moves: &[Move]) -> Vec<GridPoint> {
    let mut p = start;
    let mut heads = Vec::new();
    for &(d, len) in moves {
        p = *cells(p, d, len).last().unwrap();
        heads.push(p);
    }
    heads
}

/// Whether a head-chained layout meets every constraint, checked directly:
/// allowed lengths, all cells in the room, no obstacle cell, first and last
/// pipe parallel to the end axes, ending at the end point, and mandatory
/// point k covered by some pipe laid after points 1..k-1 were covered.
pub fn layout_ok(spec: &PipeTaskSpec, moves: &[Move]) -> bool {
    if moves.is_empty() {
        return false;
    }
    let mut p = spec.start.p;
    let mut k = 0;
    for &(d, len) in moves {
        if !spec.allowed_lengths.contains(&len) {
            return false;
        }
        let cs = cells(p, d, len);
        if cs.iter().any(|c| !in_room(*c, spec.room) || spec.obstacles.contains(c)) {
            return false;
        }
        while k < spec.mandatory.len() && cs.contains(&spec.mandatory[k]) {
            k += 1;
        }
        p = *cs.last().unwrap();
    }
    dim_of(moves[0].0) == dim_index(spec, true)
        && dim_of(moves[moves.len() - 1].0) == dim_index(spec, false)
        && p == spec.end.p
        && k == spec.mandatory.len()
}

/// Connected components of the `radius` graph, by flood fill over all pairs.
pub fn brute_clusters(points: &[Vec3], radius: f64, min_points: usize) -> BTreeSet<Vec<usize>> {
    let n = points.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        let mut members = Vec::new();
        comp[s] = s;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                let d = points[i] - points[j];
                if comp[j] == usize::MAX && (d.x * d.x + d.y * d.y + d.z * d.z).sqrt() <= radius {
                    comp[j] = s;
                    stack.push(j);
                }
            }
        }
        if members.len() >= min_points.max(1) {
            members.sort_unstable();
            out.insert(members);
        }
    }
    out
}

/// Replays a Hanoi move list given as (disk index, destination peg); returns
/// the final pegs or the first illegal step (0-based).
pub fn replay_hanoi(n: usize, from: usize, moves: &[(usize, usize)]) -> Result<[Vec<usize>; 3], usize> {
    let mut pegs: [Vec<usize>; 3] = Default::default();
    pegs[from] = (0..n).rev().collect();
    for (i, &(disk, to)) in moves.iter().enumerate() {
        let Some(src) = (0..3).find(|p| pegs[*p].last() == Some(&disk)) else { return Err(i) };
        if pegs[to].last().is_some_and(|top| *top < disk) {
            return Err(i);
        }
        pegs[src].pop();
        pegs[to].push(disk);
    }
    Ok(pegs)
}

/// Final centers of a tower built bottom-up on a base at `base` (top surface
/// height `floor`), stacking `sizes` in order.
pub fn stack_centers(base: Vec3, floor: f64, heights: &[f64]) -> Vec<Vec3> {
    let mut z = floor;
    heights
        .iter()
        .map(|h| {
            let c = Vec3::new(base.x, base.y, z + h / 2.0);
            z += h;
            c
        })
        .collect()
}
