//! SVG rendering of an episode from its state log: one panel per floor with
//! the trajectory coloured by state, pursued frontiers, keypoints and the
//! target cells.

use crate::grid::{CellPos, CELL_SIZE};
use crate::state_machine::{AgentState, LogLine};
use crate::world::{CellKind, MultiFloorWorld};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

const PX: f64 = 10.0;
const GAP: f64 = 20.0;
const HEADER: f64 = 24.0;

fn state_color(line: &LogLine) -> &'static str {
    if line.approaching {
        return "#d62728";
    }
    match line.state {
        AgentState::Exploration { .. } => "#2ca02c",
        AgentState::Recovery { .. } => "#ff7f0e",
        AgentState::Reminiscing { .. } => "#9467bd",
    }
}

fn cell_color(kind: CellKind) -> &'static str {
    match kind {
        CellKind::Free => "#ffffff",
        CellKind::Obstacle => "#444444",
        CellKind::Door => "#a0522d",
        CellKind::StairUp | CellKind::StairDown => "#1f77b4",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Panel extents in cells per floor: the world's grid when known, else the
/// log's bounding box.
fn extents(world: Option<&MultiFloorWorld>, log: &[LogLine]) -> BTreeMap<usize, (i32, i32)> {
    let mut out = BTreeMap::new();
    if let Some(w) = world {
        for (i, f) in w.floors.iter().enumerate() {
            out.insert(i, (f.grid.width() as i32, f.grid.height() as i32));
        }
        return out;
    }
    for l in log {
        let c = l.pose.cell();
        let mut cells = vec![c];
        cells.extend(l.frontier);
        cells.extend(l.keypoints.iter().copied());
        let e = out.entry(l.pose.floor).or_insert((1, 1));
        for c in cells {
            e.0 = e.0.max(c.x + 2);
            e.1 = e.1.max(c.y + 2);
        }
    }
    out
}

pub fn render_svg(world: Option<&MultiFloorWorld>, log: &[LogLine]) -> String {
    let ext = extents(world, log);
    let mut offsets = BTreeMap::new();
    let mut x0 = GAP;
    let mut height: f64 = 0.0;
    for (&f, &(w, h)) in &ext {
        offsets.insert(f, x0);
        x0 += f64::from(w) * PX + GAP;
        height = height.max(f64::from(h) * PX);
    }
    let width = x0.max(2.0 * GAP);
    let total_h = height + HEADER + GAP;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{total_h}" viewBox="0 0 {width} {total_h}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#f4f4f4"/>"##);
    let at = |floor: usize, x: f64, y: f64| -> (f64, f64) {
        let ox = offsets.get(&floor).copied().unwrap_or(GAP);
        (ox + x / CELL_SIZE * PX, HEADER + y / CELL_SIZE * PX)
    };

    for (&f, &(w, h)) in &ext {
        let (ox, oy) = at(f, 0.0, 0.0);
        let _ = writeln!(s, r#"<g id="floor-{f}">"#);
        let _ = writeln!(s, r#"<text x="{ox}" y="{}" font-family="sans-serif" font-size="14">floor {f}</text>"#, oy - 8.0);
        let _ = writeln!(
            s,
            r##"<rect x="{ox}" y="{oy}" width="{}" height="{}" fill="#dddddd" stroke="#888888"/>"##,
            f64::from(w) * PX,
            f64::from(h) * PX
        );
        if let Some(world) = world {
            let floor = world.floor(f);
            for (pos, cell) in floor.grid.iter() {
                let label = cell.label.category.as_deref();
                let fill = if label == Some(world.target_category.as_str()) {
                    "#ffb3b3"
                } else {
                    cell_color(cell.kind)
                };
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="{PX}" height="{PX}" fill="{fill}"/>"#,
                    ox + f64::from(pos.x) * PX,
                    oy + f64::from(pos.y) * PX
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    // trajectory: the segment leaving each logged pose takes that step's colour
    let _ = writeln!(s, r#"<g id="trajectory" stroke-width="2" stroke-linecap="round">"#);
    for pair in log.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.pose.floor != b.pose.floor {
            continue;
        }
        let (x1, y1) = at(a.pose.floor, a.pose.x, a.pose.y);
        let (x2, y2) = at(b.pose.floor, b.pose.x, b.pose.y);
        if (x1, y1) == (x2, y2) {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{}"/>"#,
            state_color(a)
        );
    }
    let _ = writeln!(s, "</g>");

    let mut frontiers: BTreeSet<(usize, CellPos)> = BTreeSet::new();
    let mut keypoints: BTreeSet<(usize, CellPos)> = BTreeSet::new();
    for l in log {
        if let Some(c) = l.frontier {
            frontiers.insert((l.pose.floor, c));
        }
        keypoints.extend(l.keypoints.iter().map(|&k| (l.pose.floor, k)));
    }
    let _ = writeln!(s, r#"<g id="frontiers">"#);
    for (f, c) in frontiers {
        let (x, y) = c.center();
        let (cx, cy) = at(f, x, y);
        let _ = writeln!(
            s,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="2.5" fill="none" stroke="#17becf"/>"##
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="keypoints">"#);
    for (f, c) in keypoints {
        let (x, y) = c.center();
        let (cx, cy) = at(f, x, y);
        let r = PX * 0.4;
        let _ = writeln!(
            s,
            r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#bcbd22"/>"##,
            cx,
            cy - r,
            cx + r,
            cy,
            cx,
            cy + r,
            cx - r,
            cy
        );
    }
    let _ = writeln!(s, "</g>");

    if let (Some(first), Some(last)) = (log.first(), log.last()) {
        let (sx, sy) = at(first.pose.floor, first.pose.x, first.pose.y);
        let (ex, ey) = at(last.pose.floor, last.pose.x, last.pose.y);
        let _ = writeln!(s, r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="4" fill="#000000"/>"##);
        let _ = writeln!(
            s,
            r##"<circle cx="{ex:.2}" cy="{ey:.2}" r="4" fill="none" stroke="#000000" stroke-width="2"/>"##
        );
    }
    if let Some(w) = world {
        let _ = writeln!(
            s,
            r#"<text x="{GAP}" y="{}" font-family="sans-serif" font-size="12">{} / target: {}</text>"#,
            total_h - 6.0,
            escape(&w.name),
            escape(&w.target_category)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Log lines as JSONL.
pub fn log_to_jsonl(log: &[LogLine]) -> String {
    let mut s = String::new();
    for l in log {
        s.push_str(&serde_json::to_string(l).expect("log lines serialize"));
        s.push('\n');
    }
    s
}

pub fn log_from_jsonl(text: &str) -> Result<Vec<LogLine>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
