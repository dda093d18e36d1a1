//! Prompt templates bound to task parameters.

use serde::{Deserialize, Serialize};

use super::TaskSpec;
use crate::planners::{HanoiTask, PipeTaskSpec, StackingTask};
use crate::world::{Axis, Dim, GridPoint, Sign};

const SYSTEM: &str = include_str!("../../prompts/system.txt");
const STACKING: &str = include_str!("../../prompts/stacking.txt");
const HANOI: &str = include_str!("../../prompts/hanoi.txt");
const PIPE_AVOID: &str = include_str!("../../prompts/pipe_avoid.txt");
const PIPE_PASS: &str = include_str!("../../prompts/pipe_pass.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
}

/// The three reply rules sent as the system message.
pub fn system_principles() -> Vec<&'static str> {
    SYSTEM.lines().filter(|l| !l.trim().is_empty()).collect()
}

fn fill(template: &str, vars: &[(&str, String)]) -> String {
    let mut out = template.trim().to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn count_word(n: usize) -> String {
    const WORDS: [&str; 13] =
        ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve"];
    WORDS.get(n).map(|w| w.to_string()).unwrap_or_else(|| n.to_string())
}

fn bracketed(labels: &[String]) -> String {
    let b: Vec<String> = labels.iter().map(|l| format!("[{l}]")).collect();
    match b.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn build_prompt(task: &TaskSpec) -> PromptBundle {
    let user_text = match task {
        TaskSpec::Stacking(t) => stacking_prompt(t),
        TaskSpec::Hanoi(t) => hanoi_prompt(t),
        TaskSpec::Pipe(t) => pipe_prompt(t),
    };
    PromptBundle { system_text: SYSTEM.trim().to_string(), user_text }
}

fn stacking_prompt(t: &StackingTask) -> String {
    let mut cubes = t.cubes();
    cubes.sort_by(|a, b| b.footprint_area().total_cmp(&a.footprint_area()));
    let names: Vec<String> = cubes.iter().map(|c| c.name.clone()).collect();
    fill(
        STACKING,
        &[
            ("count", count_word(names.len())),
            ("first", format!("[{}]", names.first().cloned().unwrap_or_default())),
            ("last", format!("[{}]", names.last().cloned().unwrap_or_default())),
        ],
    )
}

fn hanoi_prompt(t: &HanoiTask) -> String {
    fill(
        HANOI,
        &[
            ("count", count_word(t.disks.len())),
            ("disks", bracketed(&t.disks)),
            ("pegs", bracketed(&t.pegs)),
            ("from", format!("[{}]", t.from)),
            ("to", format!("[{}]", t.to)),
        ],
    )
}

fn direction(a: Axis) -> String {
    let sign = if a.sign == Sign::Pos { "positive" } else { "negative" };
    format!("{sign} {}", a.dim)
}

fn point(p: GridPoint) -> String {
    format!("({}, {}, {})", p.x, p.y, p.z)
}

fn points(ps: &[GridPoint]) -> String {
    let v: Vec<String> = ps.iter().map(|p| format!("point {}", point(*p))).collect();
    match v.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Two pipes along the start axis, then one sideways, using the shortest pipe.
fn example(t: &PipeTaskSpec) -> String {
    let l = *t.allowed_lengths.iter().next().unwrap_or(&1);
    let side_dim = if t.start.axis.dim == Dim::Y { Dim::X } else { Dim::Y };
    let side = Axis::new(side_dim, Sign::Pos);
    let p1 = t.start.p.offset(t.start.axis, l as i32);
    let p2 = p1.offset(t.start.axis, l as i32);
    let p3 = p2.offset(side, l as i32);
    let dim = |d: Dim| d.to_string().to_lowercase();
    format!(
        "pipe {l}ft #1 {} {} axis, pipe {l}ft #2 {} {} axis, pipe {l}ft #3 {} {} axis",
        point(p1),
        dim(t.start.axis.dim),
        point(p2),
        dim(t.start.axis.dim),
        point(p3),
        dim(side_dim)
    )
}

fn pipe_prompt(t: &PipeTaskSpec) -> String {
    let inventory: Vec<String> =
        t.allowed_lengths.iter().map(|l| format!("several {l}ft length straight pipes (pipe {l}ft)")).collect();
    let inventory = match inventory.as_slice() {
        [one] => one.clone(),
        [init @ .., last] => format!("{}, {last}", init.join(", ")),
        [] => String::new(),
    };
    let obstacles = if t.obstacles.is_empty() {
        String::new()
    } else {
        format!(
            " There {} {} {} at {}, the pipe cannot pass through this point from neither X, Y nor Z axes.",
            if t.obstacles.len() == 1 { "is" } else { "are" },
            count_word(t.obstacles.len()),
            if t.obstacles.len() == 1 { "obstacle" } else { "obstacles" },
            points(&t.obstacles)
        )
    };
    let start = format!("({}ft, {}ft, {}ft)", t.start.p.x, t.start.p.y, t.start.p.z);
    let mut vars = vec![
        ("inventory", inventory),
        ("start", start),
        ("start_dir", direction(t.start.axis)),
        ("end", point(t.end.p)),
        ("end_dir", direction(t.end.axis)),
        ("example", example(t)),
        ("obstacles", obstacles),
    ];
    if t.mandatory.is_empty() {
        return fill(PIPE_AVOID, &vars);
    }
    const ORDINALS: [&str; 5] = ["first", "second", "third", "fourth", "fifth"];
    let route: String = t
        .mandatory
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let ord = ORDINALS.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("#{}", i + 1));
            let lead = if i == 0 { "the pipe connection must pass" } else { "then pass" };
            format!("{lead} the {ord} mandatory point {}, ", point(*m))
        })
        .collect();
    let mandatory: Vec<String> = t.mandatory.iter().map(|m| point(*m)).collect();
    let mandatory = match mandatory.as_slice() {
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
        [] => String::new(),
    };
    vars.push(("route", route));
    vars.push(("mandatory", mandatory));
    fill(PIPE_PASS, &vars)
}
