//! Geometry and scene types shared by every other module.
//!
//! Continuous quantities ([`Vec3`]) are used for the simulated scene and the
//! end-effector; pipe routing lives on the integer lattice ([`GridPoint`]),
//! where every pipe is an axis-parallel [`Segment`].

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum WorldError {
    #[error("displacement is zero")]
    ZeroDisplacement,
    #[error("displacement {0} is not parallel to a single axis")]
    NotAxisParallel(String),
    #[error("object name must be non-empty")]
    EmptyName,
    #[error("object `{0}` has a negative or non-finite size")]
    BadSize(String),
    #[error("object `{0}` has a non-finite position")]
    BadPosition(String),
    #[error("duplicate object name `{0}`")]
    DuplicateName(String),
    #[error("invalid axis `{0}`")]
    BadAxis(String),
    #[error("scene file: {0}")]
    Io(String),
}

/// A point or displacement in task length units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self { x: v, y: v, z: v }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Componentwise product.
    pub fn hadamard(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn component(self, dim: Dim) -> f64 {
        match dim {
            Dim::X => self.x,
            Dim::Y => self.y,
            Dim::Z => self.z,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<GridPoint> for Vec3 {
    fn from(p: GridPoint) -> Self {
        Vec3::new(p.x as f64, p.y as f64, p.z as f64)
    }
}

impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(a.into())
    }
}

/// A lattice point of the routing grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn component(self, dim: Dim) -> i32 {
        match dim {
            Dim::X => self.x,
            Dim::Y => self.y,
            Dim::Z => self.z,
        }
    }

    /// Moves `steps` cells along `axis`.
    pub fn offset(self, axis: Axis, steps: i32) -> GridPoint {
        let d = axis.sign.factor() * steps;
        match axis.dim {
            Dim::X => GridPoint::new(self.x + d, self.y, self.z),
            Dim::Y => GridPoint::new(self.x, self.y + d, self.z),
            Dim::Z => GridPoint::new(self.x, self.y, self.z + d),
        }
    }

    pub fn in_room(self, room: i32) -> bool {
        [self.x, self.y, self.z].iter().all(|c| (0..=room).contains(c))
    }

    pub fn manhattan(self, other: GridPoint) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs() + (self.z - other.z).abs()
    }

    /// Number of coordinates in which two points agree.
    pub fn shared_coordinates(self, other: GridPoint) -> usize {
        (self.x == other.x) as usize + (self.y == other.y) as usize + (self.z == other.z) as usize
    }
}

impl Sub for GridPoint {
    type Output = GridPoint;
    fn sub(self, o: GridPoint) -> GridPoint {
        GridPoint::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Serialize for GridPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[i32; 3]>::deserialize(d)?;
        Ok(GridPoint::new(x, y, z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dim {
    X,
    Y,
    Z,
}

impl Dim {
    pub const ALL: [Dim; 3] = [Dim::X, Dim::Y, Dim::Z];

    pub fn letter(self) -> char {
        match self {
            Dim::X => 'X',
            Dim::Y => 'Y',
            Dim::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Dim> {
        match c.to_ascii_lowercase() {
            'x' => Some(Dim::X),
            'y' => Some(Dim::Y),
            'z' => Some(Dim::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Positive sorts before negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn factor(self) -> i32 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// A signed coordinate axis. Ordered X<Y<Z, then positive before negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axis {
    pub dim: Dim,
    pub sign: Sign,
}

impl Axis {
    pub const ALL: [Axis; 6] = [
        Axis::new(Dim::X, Sign::Pos),
        Axis::new(Dim::X, Sign::Neg),
        Axis::new(Dim::Y, Sign::Pos),
        Axis::new(Dim::Y, Sign::Neg),
        Axis::new(Dim::Z, Sign::Pos),
        Axis::new(Dim::Z, Sign::Neg),
    ];

    pub const fn new(dim: Dim, sign: Sign) -> Self {
        Self { dim, sign }
    }

    pub fn is_parallel(self, other: Axis) -> bool {
        self.dim == other.dim
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign == Sign::Pos { '+' } else { '-' };
        write!(f, "{}{}", s, self.dim)
    }
}

impl FromStr for Axis {
    type Err = WorldError;

    /// Accepts `+Z`, `-z`, `Z+`, `z-` and bare `Z` (positive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: Vec<char> = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || WorldError::BadAxis(s.to_string());
        let sign_of = |c: char| match c {
            '+' => Some(Sign::Pos),
            '-' | '−' => Some(Sign::Neg),
            _ => None,
        };
        match t.as_slice() {
            [d] => Dim::from_letter(*d).map(|d| Axis::new(d, Sign::Pos)).ok_or_else(bad),
            [a, b] => {
                if let (Some(sg), Some(d)) = (sign_of(*a), Dim::from_letter(*b)) {
                    Ok(Axis::new(d, sg))
                } else if let (Some(d), Some(sg)) = (Dim::from_letter(*a), sign_of(*b)) {
                    Ok(Axis::new(d, sg))
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Axis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Returns the signed axis of a displacement with exactly one nonzero component.
pub fn axis_of(d: Vec3) -> Result<Axis, WorldError> {
    let nonzero: Vec<(Dim, f64)> =
        Dim::ALL.iter().map(|&dim| (dim, d.component(dim))).filter(|(_, c)| *c != 0.0).collect();
    match nonzero.as_slice() {
        [] => Err(WorldError::ZeroDisplacement),
        [(dim, c)] => Ok(Axis::new(*dim, if *c > 0.0 { Sign::Pos } else { Sign::Neg })),
        _ => Err(WorldError::NotAxisParallel(d.to_string())),
    }
}

/// Integer-lattice variant of [`axis_of`].
pub fn grid_axis_of(d: GridPoint) -> Result<Axis, WorldError> {
    axis_of(d.into())
}

/// An axis-parallel pipe run between two distinct lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    from: GridPoint,
    to: GridPoint,
}

impl Segment {
    pub fn new(from: GridPoint, to: GridPoint) -> Result<Self, WorldError> {
        grid_axis_of(to - from)?;
        Ok(Self { from, to })
    }

    pub fn from(&self) -> GridPoint {
        self.from
    }

    pub fn to(&self) -> GridPoint {
        self.to
    }

    pub fn axis(&self) -> Axis {
        grid_axis_of(self.to - self.from).expect("segment invariant")
    }

    pub fn length(&self) -> u32 {
        self.from.manhattan(self.to) as u32
    }

    /// Closed-segment membership; endpoints count.
    pub fn contains(&self, p: GridPoint) -> bool {
        segment_contains_point(self, p)
    }

    /// Every lattice point on the segment, `from` first.
    pub fn lattice_points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        let axis = self.axis();
        (0..=self.length() as i32).map(move |k| self.from.offset(axis, k))
    }
}

pub fn segment_contains_point(s: &Segment, p: GridPoint) -> bool {
    let between = |a: i32, b: i32, v: i32| a.min(b) <= v && v <= a.max(b);
    between(s.from.x, s.to.x, p.x) && between(s.from.y, s.to.y, p.y) && between(s.from.z, s.to.z, p.z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Cube,
    Disk,
    Pipe,
    Peg,
    Marker,
}

impl ObjectKind {
    /// Pegs and markers are fixed locations, never picked up.
    pub fn is_fixture(self) -> bool {
        matches!(self, ObjectKind::Peg | ObjectKind::Marker)
    }
}

/// A labeled axis-aligned object; `position` is the box center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub kind: ObjectKind,
    /// Width, length, height.
    pub size: Vec3,
    pub position: Vec3,
}

impl SceneObject {
    pub fn new(name: impl Into<String>, kind: ObjectKind, size: Vec3, position: Vec3) -> Self {
        Self { name: name.into(), kind, size, position }
    }

    pub fn height(&self) -> f64 {
        self.size.z
    }

    pub fn bottom(&self) -> f64 {
        self.position.z - self.size.z / 2.0
    }

    pub fn top(&self) -> f64 {
        self.position.z + self.size.z / 2.0
    }

    pub fn footprint_area(&self) -> f64 {
        self.size.x * self.size.y
    }

    /// True when `p`'s horizontal projection falls inside this footprint (closed, with `tol`).
    pub fn footprint_contains(&self, p: Vec3, tol: f64) -> bool {
        (p.x - self.position.x).abs() <= self.size.x / 2.0 + tol
            && (p.y - self.position.y).abs() <= self.size.y / 2.0 + tol
    }

    /// Positive-area overlap of two footprints when `self` is centered at `at`.
    pub fn footprint_overlaps_at(&self, at: Vec3, other: &SceneObject, tol: f64) -> bool {
        (at.x - other.position.x).abs() < (self.size.x + other.size.x) / 2.0 - tol
            && (at.y - other.position.y).abs() < (self.size.y + other.size.y) / 2.0 - tol
    }

    fn validate(&self) -> Result<(), WorldError> {
        if self.name.trim().is_empty() {
            return Err(WorldError::EmptyName);
        }
        if !self.size.is_finite() || self.size.x < 0.0 || self.size.y < 0.0 || self.size.z < 0.0 {
            return Err(WorldError::BadSize(self.name.clone()));
        }
        if !self.position.is_finite() {
            return Err(WorldError::BadPosition(self.name.clone()));
        }
        Ok(())
    }
}

/// Tolerance for contact and alignment tests in scene units.
pub const CONTACT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Scene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room: Option<i32>,
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self, WorldError> {
        let scene = Scene { room: None, objects };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let mut seen = HashSet::new();
        for o in &self.objects {
            o.validate()?;
            if !seen.insert(o.name.as_str()) {
                return Err(WorldError::DuplicateName(o.name.clone()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| WorldError::Io(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn get(&self, name: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.name == name)
    }

    /// Case-insensitive label lookup restricted by a kind predicate.
    pub fn find_labeled<'a>(
        &'a self,
        label: &'a str,
        filter: impl Fn(&SceneObject) -> bool + 'a,
    ) -> impl Iterator<Item = (usize, &'a SceneObject)> + 'a {
        self.objects
            .iter()
            .enumerate()
            .filter(move |(_, o)| filter(o) && labels_equal(&o.name, label))
    }

    /// The movable object resting directly on object `idx`, if any.
    pub fn resting_on(&self, idx: usize, exclude: Option<usize>) -> Option<usize> {
        let base = &self.objects[idx];
        self.objects
            .iter()
            .enumerate()
            .filter(|(i, o)| {
                *i != idx
                    && Some(*i) != exclude
                    && !o.kind.is_fixture()
                    && (o.bottom() - base.top()).abs() <= CONTACT_TOL
                    && base.footprint_contains(o.position, CONTACT_TOL)
            })
            .min_by(|a, b| a.1.bottom().total_cmp(&b.1.bottom()))
            .map(|(i, _)| i)
    }

    /// Follows `resting_on` upward from `idx` and returns the top of that column.
    pub fn top_of_column(&self, idx: usize, exclude: Option<usize>) -> usize {
        let mut cur = idx;
        let mut steps = 0;
        while let Some(next) = self.resting_on(cur, exclude) {
            cur = next;
            steps += 1;
            if steps > self.objects.len() {
                break;
            }
        }
        cur
    }

    /// Movable objects whose center lies over a fixture's location.
    pub fn column_over(&self, fixture: usize, exclude: Option<usize>) -> Vec<usize> {
        let f = &self.objects[fixture];
        let mut ids: Vec<usize> = self
            .objects
            .iter()
            .enumerate()
            .filter(|(i, o)| {
                *i != fixture
                    && Some(*i) != exclude
                    && !o.kind.is_fixture()
                    && (o.position.x - f.position.x).abs() <= f.size.x / 2.0 + CONTACT_TOL
                    && (o.position.y - f.position.y).abs() <= f.size.y / 2.0 + CONTACT_TOL
                    && o.bottom() >= f.position.z - CONTACT_TOL
            })
            .map(|(i, _)| i)
            .collect();
        ids.sort_by(|&a, &b| self.objects[a].bottom().total_cmp(&self.objects[b].bottom()));
        ids
    }
}

pub fn normalize_label(s: &str) -> String {
    s.trim().to_lowercase()
}

pub fn labels_equal(a: &str, b: &str) -> bool {
    normalize_label(a) == normalize_label(b)
}
