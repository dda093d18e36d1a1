mod common;

use std::collections::BTreeSet;

use asmseq::decoder::{Plan, PlanStep, PipeSegmentSpec, TargetSpec};
use asmseq::planners::{plan_hanoi, plan_stacking, route_pipes, Endpoint, HanoiTask, PipeTaskSpec, StackingTask};
use asmseq::validators::{check_runs, validate_hanoi, validate_stacking, Outcome, PipeRun, ReasonCode};
use asmseq::world::{Axis, Dim, GridPoint, Sign};
use common::*;
use proptest::prelude::*;

const PEGS: [&str; 3] = ["a", "b", "c"];

fn specs_for(start: GridPoint, moves: &[Move]) -> Vec<PipeSegmentSpec> {
    head_after(start, moves)
        .into_iter()
        .zip(moves)
        .enumerate()
        .map(|(k, (head, &(d, len)))| PipeSegmentSpec { length: len, pipe_index: k as u32 + 1, head, axis: Dim::ALL[d / 2] })
        .collect()
}

fn hanoi_plan(moves: &[(usize, usize)]) -> Plan {
    Plan::from_steps(
        moves.iter().map(|&(d, p)| PlanStep::new(0, "move", &asmseq::planners::disk_label(d), TargetSpec::NamedLocation(PEGS[p].into()))),
    )
}

#[test]
fn hanoi_oracle_is_optimal_up_to_eight_disks() {
    for n in 1..=8 {
        let task = HanoiTask::new(n, PEGS, "a", "c");
        let plan = plan_hanoi(n, "a", "c", "b");
        assert_eq!(plan.len(), (1 << n) - 1);
        let moves: Vec<(usize, usize)> = plan
            .steps
            .iter()
            .map(|s| {
                let disk = task.disks.iter().position(|d| *d == s.object).unwrap();
                let TargetSpec::NamedLocation(peg) = &s.target else { panic!("peg target") };
                (disk, PEGS.iter().position(|p| p == peg).unwrap())
            })
            .collect();
        let pegs = replay_hanoi(n, 0, &moves).expect("every move legal");
        assert_eq!(pegs[2].len(), n);
        assert_eq!(validate_hanoi(&plan, &task).outcome, Outcome::SuccessOptimal, "n={n}");
    }
}

proptest! {
    #[test]
    fn hanoi_verdict_agrees_with_replay(
        n in 1usize..5,
        raw in prop::collection::vec((0usize..5, 0usize..3), 0..20),
    ) {
        let moves: Vec<(usize, usize)> = raw.into_iter().map(|(d, p)| (d % n, p)).collect();
        let task = HanoiTask::new(n, PEGS, "a", "b");
        let v = validate_hanoi(&hanoi_plan(&moves), &task);
        match replay_hanoi(n, 0, &moves) {
            Err(_) => prop_assert_eq!(v.outcome, Outcome::Fail),
            Ok(pegs) if pegs[1].len() < n => {
                prop_assert!(v.has(ReasonCode::IncompleteTower), "{:?}", v.reasons);
            }
            Ok(_) if moves.len() == (1 << n) - 1 => prop_assert_eq!(v.outcome, Outcome::SuccessOptimal),
            Ok(_) => prop_assert_eq!(v.outcome, Outcome::SuccessSubOptimal),
        }
    }

    #[test]
    fn stacking_oracle_is_optimal(mut sides in prop::collection::btree_set(5u32..40, 1..7)) {
        let sides: Vec<f64> = std::mem::take(&mut sides).into_iter().rev().map(|s| s as f64 / 20.0).collect();
        let mut shuffled = sides.clone();
        shuffled.rotate_left(sides.len() / 2);
        let task = StackingTask::with_sides(&shuffled);
        let plan = plan_stacking(&task.cubes()).unwrap();
        let v = validate_stacking(&plan, &task.scene);
        prop_assert_eq!(v.outcome, Outcome::SuccessOptimal, "{:?}", v.reasons);
        prop_assert_eq!(plan.len(), sides.len());
    }

    #[test]
    fn stacking_with_a_step_dropped_fails(sides in prop::collection::btree_set(5u32..40, 2..7), k in 0usize..7) {
        let sides: Vec<f64> = sides.into_iter().map(|s| s as f64 / 20.0).collect();
        let task = StackingTask::with_sides(&sides);
        let mut plan = plan_stacking(&task.cubes()).unwrap();
        plan.steps.remove(1 + k % (plan.len() - 1));
        let v = validate_stacking(&Plan::from_steps(plan.steps), &task.scene);
        prop_assert_eq!(v.outcome, Outcome::Fail);
    }
}

fn tiny_spec() -> impl Strategy<Value = PipeTaskSpec> {
    (1i32..=3)
        .prop_flat_map(|room| {
            let pt = (0..=room, 0..=room, 0..=room).prop_map(|(x, y, z)| GridPoint::new(x, y, z));
            (Just(room), pt.clone(), pt.clone(), 0usize..3, 0usize..3, prop::collection::vec(pt.clone(), 0..=2), prop::collection::vec(pt, 0..=2))
        })
        .prop_filter_map("invalid", |(room, s, e, sd, ed, obs, mand)| {
            let spec = PipeTaskSpec {
                id: None,
                room,
                start: Endpoint { p: s, axis: Axis::new(Dim::ALL[sd], Sign::Pos) },
                end: Endpoint { p: e, axis: Axis::new(Dim::ALL[ed], Sign::Pos) },
                allowed_lengths: BTreeSet::from([1]),
                obstacles: obs.into_iter().filter(|o| *o != s && *o != e).collect(),
                mandatory: mand,
            };
            spec.validate().is_ok().then_some(spec)
        })
}

/// Every sequence of up to `depth` unit moves, including ones leaving the room.
fn all_move_lists(depth: usize) -> Vec<Vec<Move>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<Move>> = vec![vec![]];
    for _ in 0..depth {
        let mut next = Vec::new();
        for m in &frontier {
            for d in 0..6 {
                let mut m = m.clone();
                m.push((d, 1));
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn validator_is_complete_on_tiny_rooms(spec in tiny_spec()) {
        let min = route_pipes(&spec).ok().map(|r| r.total_length);
        for moves in all_move_lists(5) {
            let v = check_runs(&PipeRun::from_specs(spec.start.p, &specs_for(spec.start.p, &moves)), &spec, false, min);
            let ok = layout_ok(&spec, &moves);
            prop_assert_eq!(v.outcome.is_success(), ok, "{:?} {:?}", moves, v.reasons);
            if ok {
                let optimal = Some(moves.len() as u32) == min;
                prop_assert_eq!(v.outcome == Outcome::SuccessOptimal, optimal);
            }
        }
    }

    #[test]
    fn an_extra_obstacle_never_rescues_a_layout(
        spec in tiny_spec(),
        moves in prop::collection::vec((0usize..6, Just(1u32)), 1..8),
        ox in 0i32..4, oy in 0i32..4, oz in 0i32..4,
    ) {
        let o = GridPoint::new(ox, oy, oz);
        let specs = specs_for(spec.start.p, &moves);
        let runs = PipeRun::from_specs(spec.start.p, &specs);
        let before = check_runs(&runs, &spec, false, None);
        let mut harder = spec.clone();
        if o != spec.start.p && o != spec.end.p {
            harder.obstacles.push(o);
        }
        let after = check_runs(&runs, &harder, false, None);
        if before.outcome == Outcome::Fail {
            prop_assert_eq!(after.outcome, Outcome::Fail);
        }
        // same input, same verdict
        prop_assert_eq!(&after, &check_runs(&runs, &harder, false, None));
    }
}
