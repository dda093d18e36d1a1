//! Binds decoded steps to scene objects and resolves targets to coordinates.
//!
//! Each step's object label is paired with a detected object of the same
//! label; the pair carries the object's size and current position, the step's
//! action, and a concrete target position. Targets are resolved against the
//! scene as it will look after every earlier step has been carried out, so
//! `OnTopOf` follows a growing tower and named pegs account for the disks
//! already stacked on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{Dictionary, Plan, TargetSpec};
use crate::world::{Scene, SceneObject, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("step {step}: no scene object labeled `{label}`")]
    NoMatch { step: usize, label: String },
    #[error("step {step}: {count} objects labeled `{label}` are equally close")]
    AmbiguousMatch { step: usize, label: String, count: usize },
    #[error("step {step}: action `{action}` is not in the dictionary")]
    UnknownAction { step: usize, action: String },
    #[error("unknown location label `{0}`")]
    UnknownLabel(String),
    #[error("scene has no base marker")]
    NoBaseDefined,
}

impl MatchError {
    fn at_step(self, step: usize) -> Self {
        match self {
            MatchError::UnknownLabel(l) => MatchError::NoMatch { step, label: l },
            other => other,
        }
    }
}

/// One ready-to-execute operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedOperation {
    pub object_name: String,
    pub size: Vec3,
    pub current_position: Vec3,
    pub action: String,
    pub target_position: Vec3,
}

/// Name of the marker `BaseLocation` refers to.
pub const BASE_MARKER: &str = "base";

fn is_location(o: &SceneObject) -> bool {
    o.kind.is_fixture()
}

fn find_location(scene: &Scene, label: &str) -> Result<usize, MatchError> {
    // Exact spelling first so that peg `a` and disk `A` never collide.
    scene
        .objects
        .iter()
        .position(|o| is_location(o) && o.name == label)
        .or_else(|| scene.find_labeled(label, is_location).map(|(i, _)| i).next())
        .ok_or_else(|| MatchError::UnknownLabel(label.to_string()))
}

fn find_any(scene: &Scene, label: &str) -> Result<usize, MatchError> {
    scene
        .objects
        .iter()
        .position(|o| o.name == label)
        .or_else(|| scene.find_labeled(label, |_| true).map(|(i, _)| i).next())
        .ok_or_else(|| MatchError::UnknownLabel(label.to_string()))
}

/// Position at which the center of `moving` ends up for target `t`.
///
/// Fixture locations (pegs, markers) are flat: their `z` is the support
/// surface. `moving` itself is ignored when measuring stacks, so re-placing
/// the top object of a column onto the same column is a no-op.
pub fn resolve_target(t: &TargetSpec, scene: &Scene, moving: &SceneObject) -> Result<Vec3, MatchError> {
    let moving_idx = scene.index_of(&moving.name);
    let half = moving.height() / 2.0;
    match t {
        TargetSpec::Coordinate(p) => Ok(*p),
        TargetSpec::OnTopOf(label) => {
            let base = find_any(scene, label)?;
            let top = scene.top_of_column(base, moving_idx);
            let top = &scene.objects[top];
            let surface = if is_location(top) { top.position.z } else { top.top() };
            Ok(Vec3::new(top.position.x, top.position.y, surface + half))
        }
        TargetSpec::NamedLocation(label) => stack_on_location(scene, find_location(scene, label)?, moving_idx, half),
        TargetSpec::BaseLocation => {
            let base = find_location(scene, BASE_MARKER).map_err(|_| MatchError::NoBaseDefined)?;
            stack_on_location(scene, base, moving_idx, half)
        }
    }
}

fn stack_on_location(scene: &Scene, loc: usize, moving: Option<usize>, half: f64) -> Result<Vec3, MatchError> {
    let marker = &scene.objects[loc];
    let surface = scene
        .column_over(loc, moving)
        .iter()
        .map(|&i| scene.objects[i].top())
        .fold(marker.position.z, f64::max);
    Ok(Vec3::new(marker.position.x, marker.position.y, surface + half))
}

/// Pairs every step with a scene object, in plan order.
///
/// Movable objects only are candidates for a step's object. When several
/// share the label, the one nearest the previous step's target (the origin for
/// the first step) wins.
pub fn match_objects(plan: &Plan, scene: &Scene, dict: &Dictionary) -> Result<Vec<MatchedOperation>, MatchError> {
    let mut world = scene.clone();
    let mut anchor = Vec3::ZERO;
    let mut ops = Vec::with_capacity(plan.len());
    for step in &plan.steps {
        if !dict.is_action(&step.action) {
            return Err(MatchError::UnknownAction { step: step.index, action: step.action.clone() });
        }
        let candidates: Vec<(usize, f64)> = world
            .find_labeled(&step.object, |o| !is_location(o))
            .map(|(i, o)| (i, o.position.distance(anchor)))
            .collect();
        let idx = match candidates.as_slice() {
            [] => return Err(MatchError::NoMatch { step: step.index, label: step.object.clone() }),
            [(i, _)] => *i,
            many => {
                let best = many.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                let tied: Vec<usize> = many.iter().filter(|c| c.1 == best).map(|c| c.0).collect();
                if tied.len() > 1 {
                    return Err(MatchError::AmbiguousMatch {
                        step: step.index,
                        label: step.object.clone(),
                        count: tied.len(),
                    });
                }
                tied[0]
            }
        };
        let obj = world.objects[idx].clone();
        let target = resolve_target(&step.target, &world, &obj).map_err(|e| e.at_step(step.index))?;
        ops.push(MatchedOperation {
            object_name: obj.name.clone(),
            size: obj.size,
            current_position: obj.position,
            action: step.action.clone(),
            target_position: target,
        });
        world.objects[idx].position = target;
        anchor = target;
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::{decode_plan, PlanStep};
    use crate::world::ObjectKind;

    fn cube(name: &str, side: f64, at: (f64, f64)) -> SceneObject {
        SceneObject::new(name, ObjectKind::Cube, Vec3::splat(side), Vec3::new(at.0, at.1, side / 2.0))
    }

    fn marker(name: &str, at: Vec3) -> SceneObject {
        SceneObject::new(name, ObjectKind::Marker, Vec3::new(0.1, 0.1, 0.0), at)
    }

    fn tower_scene() -> Scene {
        let mut objs = vec![marker("base", Vec3::ZERO)];
        for (i, n) in ["A", "B", "C", "D", "E"].iter().enumerate() {
            objs.push(cube(n, 1.0 - 0.1 * i as f64, (2.0 + 1.5 * i as f64, 2.0)));
        }
        Scene::new(objs).unwrap()
    }

    #[test]
    fn on_top_of_arithmetic() {
        let a = SceneObject::new("A", ObjectKind::Cube, Vec3::splat(1.0), Vec3::new(0.0, 0.0, 0.5));
        let m = SceneObject::new("M", ObjectKind::Cube, Vec3::new(0.8, 0.8, 0.8), Vec3::new(5.0, 0.0, 0.4));
        let scene = Scene::new(vec![a, m.clone()]).unwrap();
        let p = resolve_target(&TargetSpec::OnTopOf("A".into()), &scene, &m).unwrap();
        assert!((p - Vec3::new(0.0, 0.0, 1.4)).norm() < 1e-12);
    }

    #[test]
    fn coordinate_is_identity() {
        let scene = tower_scene();
        let p = Vec3::new(5.0, 5.0, 2.0);
        assert_eq!(resolve_target(&TargetSpec::Coordinate(p), &scene, &scene.objects[1]).unwrap(), p);
    }

    #[test]
    fn empty_peg_named_location() {
        let peg = SceneObject::new("b", ObjectKind::Peg, Vec3::new(0.05, 0.05, 0.0), Vec3::new(0.3, 0.0, 0.0));
        let disk = SceneObject::new("A", ObjectKind::Disk, Vec3::new(0.1, 0.1, 0.1), Vec3::new(0.0, 0.0, 0.05));
        let scene = Scene::new(vec![peg, disk.clone()]).unwrap();
        let p = resolve_target(&TargetSpec::NamedLocation("b".into()), &scene, &disk).unwrap();
        assert!((p - Vec3::new(0.3, 0.0, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn missing_labels() {
        let scene = Scene::new(vec![cube("A", 1.0, (0.0, 0.0))]).unwrap();
        let a = &scene.objects[0];
        assert_eq!(resolve_target(&TargetSpec::BaseLocation, &scene, a), Err(MatchError::NoBaseDefined));
        assert_eq!(
            resolve_target(&TargetSpec::NamedLocation("z".into()), &scene, a),
            Err(MatchError::UnknownLabel("z".into()))
        );
    }

    #[test]
    fn stacking_transcript_resolves_tower() {
        let dict = Dictionary::with_objects(["A", "B", "C", "D", "E"]);
        let plan = decode_plan(include_str!("../fixtures/stacking_transcript.txt"), &dict).unwrap();
        let scene = tower_scene();
        let ops = match_objects(&plan, &scene, &dict).unwrap();
        assert_eq!(ops.len(), 5);
        assert_eq!(ops[1].object_name, "B");
        let (ha, hb) = (1.0, 0.9);
        assert!((ops[1].target_position - Vec3::new(0.0, 0.0, ha + hb / 2.0)).norm() < 1e-12);
        // (h_A + h_B) / 2 above A's center.
        assert!((ops[1].target_position.z - (ops[0].target_position.z + (ha + hb) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn absent_label_is_no_match() {
        let dict = Dictionary::with_objects(["A", "F"]);
        let plan = Plan::from_steps([PlanStep::new(1, "move", "F", TargetSpec::OnTopOf("A".into()))]);
        assert_eq!(
            match_objects(&plan, &tower_scene(), &dict),
            Err(MatchError::NoMatch { step: 1, label: "F".into() })
        );
    }

    #[test]
    fn duplicate_labels_pick_nearest_to_previous_target() {
        let pipe = |name: &str, x: f64| SceneObject::new(name, ObjectKind::Pipe, Vec3::new(0.1, 0.1, 2.0), Vec3::new(x, 0.0, 1.0));
        let anchor = Vec3::new(10.0, 0.0, 1.0);
        // Names stay unique; labels compare case-insensitively.
        let scene = Scene::new(vec![cube("A", 1.0, (0.0, 5.0)), pipe("pipe 2ft", 7.0), pipe("Pipe 2ft", 11.0)]).unwrap();
        let dict = Dictionary::with_objects(["A", "pipe 2ft"]);
        let plan = Plan::from_steps([
            PlanStep::new(1, "move", "A", TargetSpec::Coordinate(anchor)),
            PlanStep::new(2, "move", "pipe 2ft", TargetSpec::Coordinate(Vec3::new(0.0, 0.0, 1.0))),
        ]);
        let brute = scene.objects[1..]
            .iter()
            .min_by(|a, b| a.position.distance(anchor).total_cmp(&b.position.distance(anchor)))
            .unwrap();
        assert_eq!(brute.position.distance(anchor), 1.0);
        let ops = match_objects(&plan, &scene, &dict).unwrap();
        assert_eq!(ops[1].object_name, brute.name);

        let mut tied = scene.clone();
        tied.objects[1].position = Vec3::new(9.0, 0.0, 1.0);
        assert!(matches!(match_objects(&plan, &tied, &dict), Err(MatchError::AmbiguousMatch { count: 2, .. })));
    }

    #[test]
    fn deterministic() {
        let dict = Dictionary::with_objects(["A", "B", "C", "D", "E"]);
        let plan = decode_plan(include_str!("../fixtures/stacking_transcript.txt"), &dict).unwrap();
        let scene = tower_scene();
        assert_eq!(match_objects(&plan, &scene, &dict), match_objects(&plan, &scene, &dict));
    }
}
