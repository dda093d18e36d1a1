//! Layout files and three-view SVG drawings.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::planners::{PipeLayout, PipeTaskSpec};
use crate::world::GridPoint;

/// A layout together with the task it was laid for. Re-importable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutFile {
    #[serde(flatten)]
    pub spec: PipeTaskSpec,
    pub segments: PipeLayout,
}

impl LayoutFile {
    pub fn new(layout: &PipeLayout, spec: &PipeTaskSpec) -> Self {
        Self { spec: spec.clone(), segments: layout.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::InvalidTask(format!("layout file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_json(&read(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

pub(crate) fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Joints where a pipe does not start at the previous pipe's end (the first
/// pipe is compared with the start point).
pub fn layout_gaps(layout: &PipeLayout, spec: &PipeTaskSpec) -> Vec<(GridPoint, GridPoint)> {
    let mut prev = spec.start.p;
    let mut gaps = Vec::new();
    for s in &layout.segments {
        if s.segment.from() != prev {
            gaps.push((prev, s.segment.from()));
        }
        prev = s.segment.to();
    }
    gaps
}

#[derive(Clone, Copy)]
struct View {
    name: &'static str,
    axes: (usize, usize),
    left: f64,
}

const PANEL: f64 = 300.0;
const MARGIN: f64 = 30.0;

impl View {
    fn project(&self, p: GridPoint, scale: f64) -> (f64, f64) {
        let c = [p.x, p.y, p.z];
        let u = self.left + MARGIN + c[self.axes.0] as f64 * scale;
        let v = PANEL - MARGIN - c[self.axes.1] as f64 * scale;
        (u, v)
    }
}

const VIEWS: [View; 3] = [
    View { name: "XY", axes: (0, 1), left: 0.0 },
    View { name: "XZ", axes: (0, 2), left: PANEL },
    View { name: "YZ", axes: (1, 2), left: 2.0 * PANEL },
];

/// Three orthographic views (XY, XZ, YZ) side by side.
///
/// Every element carries `data-view`; pipes carry `data-seg`, obstacles and
/// mandatory points `data-index`, so the drawing can be checked geometrically.
pub fn render_svg(layout: &PipeLayout, spec: &PipeTaskSpec) -> String {
    let scale = (PANEL - 2.0 * MARGIN) / spec.room.max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL}" viewBox="0 0 {} {PANEL}">"#,
        3.0 * PANEL,
        3.0 * PANEL
    );
    s.push_str(
        "<style>.room{fill:none;stroke:#999}.segment{stroke:#1f5fbf;stroke-width:3}\
         .obstacle{fill:#000}.mandatory{fill:none;stroke:#000;stroke-width:2}\
         .start{fill:#2a2}.end{fill:#c22}.gap{stroke:#f80;stroke-width:2;stroke-dasharray:4 3;fill:none}</style>\n",
    );
    let gaps = layout_gaps(layout, spec);
    for view in VIEWS {
        let side = spec.room as f64 * scale;
        let _ = writeln!(
            s,
            r#"<rect class="room" data-view="{}" x="{:.3}" y="{:.3}" width="{side:.3}" height="{side:.3}"/>"#,
            view.name,
            view.left + MARGIN,
            PANEL - MARGIN - side
        );
        let _ = writeln!(s, r#"<text x="{:.3}" y="20">{}</text>"#, view.left + MARGIN, view.name);
        for (k, seg) in layout.segments.iter().enumerate() {
            let (a, b) = (view.project(seg.segment.from(), scale), view.project(seg.segment.to(), scale));
            let _ = writeln!(
                s,
                r#"<line class="segment" data-view="{}" data-seg="{k}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                view.name, a.0, a.1, b.0, b.1
            );
        }
        for (j, o) in spec.obstacles.iter().enumerate() {
            let (u, v) = view.project(*o, scale);
            let _ = writeln!(
                s,
                r#"<rect class="obstacle" data-view="{}" data-index="{j}" data-cx="{u:.3}" data-cy="{v:.3}" x="{:.3}" y="{:.3}" width="8" height="8"/>"#,
                view.name,
                u - 4.0,
                v - 4.0
            );
        }
        for (j, m) in spec.mandatory.iter().enumerate() {
            let (u, v) = view.project(*m, scale);
            let _ = writeln!(
                s,
                r#"<circle class="mandatory" data-view="{}" data-index="{j}" cx="{u:.3}" cy="{v:.3}" r="6"/>"#,
                view.name
            );
        }
        for (class, p) in [("start", spec.start.p), ("end", spec.end.p)] {
            let (u, v) = view.project(p, scale);
            let _ = writeln!(s, r#"<circle class="{class}" data-view="{}" cx="{u:.3}" cy="{v:.3}" r="4"/>"#, view.name);
        }
        for (a, b) in &gaps {
            let (pa, pb) = (view.project(*a, scale), view.project(*b, scale));
            let _ = writeln!(
                s,
                r#"<line class="gap" data-view="{}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                view.name, pa.0, pa.1, pb.0, pb.1
            );
            for (u, v) in [pa, pb] {
                let _ = writeln!(s, r#"<circle class="gap" data-view="{}" cx="{u:.3}" cy="{v:.3}" r="9"/>"#, view.name);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.json` and `<stem>.svg`.
pub fn export_layout(layout: &PipeLayout, spec: &PipeTaskSpec, json_path: &Path, svg_path: &Path) -> Result<(), HarnessError> {
    let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
    std::fs::write(json_path, LayoutFile::new(layout, spec).to_json()).map_err(|e| io(json_path, e))?;
    std::fs::write(svg_path, render_svg(layout, spec)).map_err(|e| io(svg_path, e))?;
    Ok(())
}
