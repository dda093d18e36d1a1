//! Pick-and-place execution on a point-mass end-effector under impedance control.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::debug;

use crate::matcher::MatchedOperation;
use crate::world::{Scene, Vec3, CONTACT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("operation {op}: waypoint `{waypoint}` not reached within {steps} steps")]
    ConvergenceTimeout { op: usize, waypoint: &'static str, steps: usize },
    #[error("operation {op}: object `{name}` is not in the scene")]
    ObjectMissing { op: usize, name: String },
    #[error("operation {op}: target of `{name}` is occupied by `{by}`")]
    TargetOccupied { op: usize, name: String, by: String },
    #[error("invalid impedance parameters: {0}")]
    InvalidParams(String),
}

/// Per-axis stiffness and damping, payload force and end-effector mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceParams {
    pub stiffness: Vec3,
    pub damping: Vec3,
    pub payload: Vec3,
    pub mass: f64,
}

impl ImpedanceParams {
    /// Critically damped on every axis: `C = 2 sqrt(K m)`.
    pub fn critically_damped(k: f64, mass: f64) -> Self {
        Self {
            stiffness: Vec3::splat(k),
            damping: Vec3::splat(2.0 * (k * mass).sqrt()),
            payload: Vec3::ZERO,
            mass,
        }
    }

    pub fn validate(&self) -> Result<(), ExecError> {
        let k = self.stiffness.to_array();
        let c = self.damping.to_array();
        if !k.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(ExecError::InvalidParams("stiffness must be positive".into()));
        }
        if !c.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(ExecError::InvalidParams("damping must be non-negative".into()));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) || !self.payload.is_finite() {
            return Err(ExecError::InvalidParams("mass must be positive and payload finite".into()));
        }
        Ok(())
    }

    /// `½ m |v|² + ½ Δxᵀ K Δx` relative to `x_des`.
    pub fn energy(&self, s: &EEState, x_des: Vec3) -> f64 {
        let dx = x_des - s.x;
        0.5 * self.mass * s.v.dot(s.v) + 0.5 * dx.dot(self.stiffness.hadamard(dx))
    }
}

impl Default for ImpedanceParams {
    fn default() -> Self {
        Self::critically_damped(100.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "object")]
pub enum Gripper {
    Open,
    Closed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEState {
    pub x: Vec3,
    pub v: Vec3,
    pub gripper: Gripper,
}

impl EEState {
    pub fn at_rest(x: Vec3) -> Self {
        Self { x, v: Vec3::ZERO, gripper: Gripper::Open }
    }
}

/// Commanded force `C v + K (x_des - x) + ld`.
pub fn impedance_force(p: &ImpedanceParams, s: &EEState, x_des: Vec3) -> Vec3 {
    p.damping.hadamard(s.v) + p.stiffness.hadamard(x_des - s.x) + p.payload
}

/// One semi-implicit Euler step. The payload is taken as gravity compensated
/// and left out of the acceleration.
pub fn step_dynamics(p: &ImpedanceParams, s: &EEState, x_des: Vec3, dt: f64) -> EEState {
    let a = (p.stiffness.hadamard(x_des - s.x) - p.damping.hadamard(s.v)) * (1.0 / p.mass);
    let v = s.v + a * dt;
    EEState { x: s.x + v * dt, v, gripper: s.gripper.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    pub dt: f64,
    pub pos_tol: f64,
    pub vel_tol: f64,
    /// Lift above source and target, as a multiple of the object's height.
    pub clearance: f64,
    pub max_steps: usize,
    pub home: Vec3,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self { dt: 1e-3, pos_tol: 1e-3, vel_tol: 1e-3, clearance: 1.5, max_steps: 100_000, home: Vec3::ZERO }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: EEState,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,z,vx,vy,vz,gripper\n");
        for s in &self.samples {
            let g = match &s.state.gripper {
                Gripper::Open => "open",
                Gripper::Closed(_) => "closed",
            };
            let (x, v) = (s.state.x, s.state.v);
            let _ = writeln!(out, "{},{},{},{},{},{},{},{g}", s.t, x.x, x.y, x.z, v.x, v.y, v.z);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub trajectory: Trajectory,
    pub scene: Scene,
    pub final_state: EEState,
}

struct Runner<'a> {
    p: &'a ImpedanceParams,
    cfg: &'a ExecConfig,
    state: EEState,
    trajectory: Trajectory,
}

impl Runner<'_> {
    fn reach(&mut self, op: usize, waypoint: &'static str, target: Vec3) -> Result<(), ExecError> {
        let start = self.trajectory.samples.len();
        loop {
            if (self.state.x - target).norm() < self.cfg.pos_tol && self.state.v.norm() < self.cfg.vel_tol {
                return Ok(());
            }
            if self.trajectory.samples.len() - start >= self.cfg.max_steps {
                return Err(ExecError::ConvergenceTimeout { op, waypoint, steps: self.cfg.max_steps });
            }
            self.state = step_dynamics(self.p, &self.state, target, self.cfg.dt);
            let t = (self.trajectory.samples.len() + 1) as f64 * self.cfg.dt;
            self.trajectory.samples.push(Sample { t, state: self.state.clone() });
        }
    }
}

/// Runs every operation through the five pick-and-place waypoints, updating
/// the object's position when the gripper opens at the target.
pub fn execute_plan(
    ops: &[MatchedOperation],
    scene: &Scene,
    p: &ImpedanceParams,
    cfg: &ExecConfig,
) -> Result<Execution, ExecError> {
    p.validate()?;
    let mut world = scene.clone();
    let mut run = Runner {
        p,
        cfg,
        state: EEState::at_rest(cfg.home),
        trajectory: Trajectory { dt: cfg.dt, samples: Vec::new() },
    };
    for (k, op) in ops.iter().enumerate() {
        let n = k + 1;
        let idx = world
            .index_of(&op.object_name)
            .ok_or_else(|| ExecError::ObjectMissing { op: n, name: op.object_name.clone() })?;
        let obj = world.objects[idx].clone();
        if let Some(other) = world.objects.iter().enumerate().find(|(i, o)| {
            *i != idx
                && !o.kind.is_fixture()
                && obj.footprint_overlaps_at(op.target_position, o, CONTACT_TOL)
                && (o.position.z - op.target_position.z).abs() < (o.height() + obj.height()) / 2.0 - CONTACT_TOL
        }) {
            return Err(ExecError::TargetOccupied { op: n, name: obj.name, by: other.1.name.clone() });
        }
        let lift = Vec3::new(0.0, 0.0, cfg.clearance * obj.height());
        debug!(op = n, object = %obj.name, from = %obj.position, to = %op.target_position, "pick and place");
        run.reach(n, "above-source", obj.position + lift)?;
        run.reach(n, "source", obj.position)?;
        run.state.gripper = Gripper::Closed(obj.name.clone());
        run.reach(n, "above-source", obj.position + lift)?;
        run.reach(n, "above-target", op.target_position + lift)?;
        run.reach(n, "target", op.target_position)?;
        run.state.gripper = Gripper::Open;
        world.objects[idx].position = op.target_position;
    }
    Ok(Execution { trajectory: run.trajectory, scene: world, final_state: run.state })
}
