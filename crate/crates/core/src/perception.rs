//! Synthetic-scene perception: drift correction, clustering and box fitting.
//!
//! Labels come from the cloud itself (one optional label per point) rather
//! than from a learned segmentation model.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::Dictionary;
use crate::world::{ObjectKind, SceneObject, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("cannot fit a box to an empty cluster")]
    EmptyCluster,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parses `x y z [label]` lines. Blank lines and `#` comments are skipped.
pub fn parse_cloud(text: &str) -> Result<(PointCloud, Vec<Option<String>>), PerceptionError> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(PerceptionError::Parse { line: i + 1, msg: "expected `x y z [label]`".into() });
        }
        let mut xyz = [0.0; 3];
        for (k, f) in fields[..3].iter().enumerate() {
            xyz[k] = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| PerceptionError::Parse { line: i + 1, msg: format!("bad coordinate `{f}`") })?;
        }
        points.push(Vec3::from(xyz));
        labels.push((fields.len() > 3).then(|| fields[3..].join(" ")));
    }
    Ok((PointCloud { points }, labels))
}

type Cell = (i64, i64, i64);

/// Uniform grid over the points with cell edge `size`.
struct SpatialHash {
    size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl SpatialHash {
    fn new(points: &[Vec3], size: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(*p, size)).or_default().push(i);
        }
        Self { size, cells }
    }

    fn key(p: Vec3, size: f64) -> Cell {
        ((p.x / size).floor() as i64, (p.y / size).floor() as i64, (p.z / size).floor() as i64)
    }

    /// Candidate neighbors of `p`: everything in the 27 surrounding cells.
    fn near(&self, p: Vec3) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy, cz) = Self::key(p, self.size);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| self.cells.get(&(cx + dx, cy + dy, cz + dz)).into_iter().flatten().copied())
            })
        })
    }
}

/// Flat-kernel mean shift: every point moves to the mean of the input points
/// within `bandwidth` of where it currently is, `iterations` times.
pub fn density_shift(cloud: &PointCloud, bandwidth: f64, iterations: usize) -> PointCloud {
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    if iterations == 0 || cloud.is_empty() {
        return cloud.clone();
    }
    let input = &cloud.points;
    let grid = SpatialHash::new(input, bandwidth);
    let mut cur = input.clone();
    for _ in 0..iterations {
        cur = cur
            .par_iter()
            .map(|&p| {
                let mut members: Vec<usize> = grid.near(p).filter(|&j| input[j].distance(p) <= bandwidth).collect();
                if members.is_empty() {
                    return p;
                }
                members.sort_unstable();
                let sum = members.iter().fold(Vec3::ZERO, |acc, &j| acc + input[j]);
                sum * (1.0 / members.len() as f64)
            })
            .collect();
    }
    PointCloud { points: cur }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller index becomes the root.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the graph joining points at most `radius` apart.
/// Components below `min_points` are noise. Clusters are sorted internally and
/// ordered by their smallest index.
pub fn cluster_points(cloud: &PointCloud, radius: f64, min_points: usize) -> Vec<Vec<usize>> {
    assert!(radius > 0.0, "radius must be positive");
    let pts = &cloud.points;
    let grid = SpatialHash::new(pts, radius);
    let mut uf = UnionFind::new(pts.len());
    for (i, p) in pts.iter().enumerate() {
        for j in grid.near(*p) {
            if j > i && pts[j].distance(*p) <= radius {
                uf.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..pts.len() {
        let r = uf.find(i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().filter(|g| g.len() >= min_points.max(1)).collect()
}

/// Axis-aligned box given by size and center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub size: Vec3,
    pub center: Vec3,
}

impl BoundingBox {
    pub fn min(&self) -> Vec3 {
        self.center - self.size * 0.5
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.size * 0.5
    }

    /// Closed containment, evaluated as `center ± size / 2`.
    pub fn contains(&self, p: Vec3) -> bool {
        let (lo, hi) = (self.min(), self.max());
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z
    }
}

/// Tightest box around the member points.
///
/// Size and center are the extent and midpoint of the members. Rounding can
/// leave `center ± size / 2` a few ulps inside an extreme point, so the size is
/// nudged up one ulp at a time until both extremes are covered.
pub fn fit_box(cloud: &PointCloud, indices: &[usize]) -> Result<BoundingBox, PerceptionError> {
    let first = *indices.first().ok_or(PerceptionError::EmptyCluster)?;
    let mut lo = cloud.points[first].to_array();
    let mut hi = lo;
    for &i in indices {
        let p = cloud.points[i].to_array();
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut size = [0.0; 3];
    let mut center = [0.0; 3];
    for d in 0..3 {
        let c = lo[d] + (hi[d] - lo[d]) * 0.5;
        let mut s = hi[d] - lo[d];
        while c - s * 0.5 > lo[d] || c + s * 0.5 < hi[d] {
            s = s.next_up();
        }
        size[d] = s;
        center[d] = c;
    }
    Ok(BoundingBox { size: Vec3::from(size), center: Vec3::from(center) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledBox {
    pub label: String,
    pub size: Vec3,
    pub center: Vec3,
    #[serde(skip)]
    pub point_indices: Vec<usize>,
}

impl LabeledBox {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox { size: self.size, center: self.center }
    }

    pub fn to_scene_object(&self, kind: ObjectKind) -> SceneObject {
        SceneObject::new(&self.label, kind, self.size, self.center)
    }
}

/// Majority label per cluster (ties to the smallest label). Clusters whose
/// label is missing or outside the object dictionary are dropped.
pub fn label_clusters(
    cloud: &PointCloud,
    clusters: &[Vec<usize>],
    labels: &[Option<String>],
    dict: &Dictionary,
) -> Result<Vec<LabeledBox>, PerceptionError> {
    let mut out = Vec::new();
    for c in clusters {
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in c {
            if let Some(Some(l)) = labels.get(i) {
                *votes.entry(l.as_str()).or_default() += 1;
            }
        }
        let best = votes.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)));
        let Some((label, _)) = best else { continue };
        if !dict.is_object(label) {
            continue;
        }
        let b = fit_box(cloud, c)?;
        out.push(LabeledBox { label: label.to_string(), size: b.size, center: b.center, point_indices: c.clone() });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptionConfig {
    pub bandwidth: f64,
    pub iterations: usize,
    pub radius: f64,
    pub min_points: usize,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self { bandwidth: 0.1, iterations: 1, radius: 0.05, min_points: 10 }
    }
}

/// Drift correction, clustering and labeling in one pass. Boxes are fitted to
/// the original points of each cluster.
pub fn perceive(
    cloud: &PointCloud,
    labels: &[Option<String>],
    dict: &Dictionary,
    cfg: &PerceptionConfig,
) -> Result<Vec<LabeledBox>, PerceptionError> {
    let shifted = density_shift(cloud, cfg.bandwidth, cfg.iterations);
    let clusters = cluster_points(&shifted, cfg.radius, cfg.min_points);
    label_clusters(cloud, &clusters, labels, dict)
}
