use super::{Candidate, QueryKind, ReasonerQuery, SceneDescription};
use std::fmt::Write;
use std::path::Path;

/// Prompt text assets, one per query kind plus the system message and the
/// retry reminder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub system: String,
    pub frontier_choice: String,
    pub fine_action: String,
    pub keypoint_target_review: String,
    pub keypoint_stair_review: String,
    pub format_reminder: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            system: include_str!("../../../../assets/prompts/system.txt").into(),
            frontier_choice: include_str!("../../../../assets/prompts/frontier_choice.txt").into(),
            fine_action: include_str!("../../../../assets/prompts/fine_action.txt").into(),
            keypoint_target_review: include_str!("../../../../assets/prompts/keypoint_target_review.txt").into(),
            keypoint_stair_review: include_str!("../../../../assets/prompts/keypoint_stair_review.txt").into(),
            format_reminder: include_str!("../../../../assets/prompts/format_reminder.txt").into(),
        }
    }
}

impl PromptTemplates {
    /// Loads `<name>.txt` files from `dir`, keeping the bundled text for any
    /// file that is missing.
    pub fn load_dir(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        let dir = dir.as_ref();
        let mut t = Self::default();
        for (name, slot) in [
            ("system", &mut t.system),
            ("frontier_choice", &mut t.frontier_choice),
            ("fine_action", &mut t.fine_action),
            ("keypoint_target_review", &mut t.keypoint_target_review),
            ("keypoint_stair_review", &mut t.keypoint_stair_review),
            ("format_reminder", &mut t.format_reminder),
        ] {
            let p = dir.join(format!("{name}.txt"));
            if p.exists() {
                *slot = std::fs::read_to_string(p)?;
            }
        }
        Ok(t)
    }

    pub fn for_kind(&self, kind: QueryKind) -> &str {
        match kind {
            QueryKind::FrontierChoice => &self.frontier_choice,
            QueryKind::FineAction => &self.fine_action,
            QueryKind::KeypointTargetReview => &self.keypoint_target_review,
            QueryKind::KeypointStairReview => &self.keypoint_stair_review,
        }
    }
}

fn scene_text(scene: &SceneDescription) -> String {
    let p = scene.current_pose;
    let c = p.cell();
    let mut s = format!(
        "Robot on floor {} at cell ({}, {}), heading {} degrees.\nRegions in view:\n",
        p.floor,
        c.x,
        c.y,
        p.heading.degrees()
    );
    for r in &scene.rooms {
        let place = match r.via_door {
            None => "own region".to_string(),
            Some(d) => format!("through door at ({}, {})", d.x, d.y),
        };
        let objects = if r.object_categories.is_empty() {
            "none".to_string()
        } else {
            r.object_categories.join(", ")
        };
        let _ = writeln!(s, "- {place}: {}; objects: {objects}", r.room_type);
    }
    s
}

fn candidate_text(i: usize, c: &Candidate) -> String {
    match c {
        Candidate::Region {
            room_type,
            via_door,
            frontier,
            ..
        } => {
            let via = via_door.map_or(String::new(), |d| format!(" through door ({}, {})", d.x, d.y));
            format!("{i}: region {room_type}{via}, unexplored edge at ({}, {})", frontier.x, frontier.y)
        }
        Candidate::Action { action } => format!("{i}: {}", action.name()),
        Candidate::KeyPoint(k) => {
            let kind = match k.kind {
                crate::mapping::KeyPointKind::RoomEntrance => "room entrance",
                crate::mapping::KeyPointKind::OpenFrontier => "open area",
            };
            let sees = if k.categories.is_empty() {
                "nothing notable".to_string()
            } else {
                k.categories.join(", ")
            };
            let stairs = if k.stair_cells.is_empty() {
                "no stairs".to_string()
            } else {
                format!("stairs visible ({} cells)", k.stair_cells.len())
            };
            format!(
                "{i}: {kind} at ({}, {}) on floor {}, open area {:.1} m2, sees: {sees}; {stairs}",
                k.pos.x, k.pos.y, k.floor, k.open_area_m2
            )
        }
    }
}

/// Fills the kind's template with the query's target, scene, map sketch and
/// numbered candidates.
pub fn render_prompt(templates: &PromptTemplates, q: &ReasonerQuery) -> String {
    let scene = q.scene.as_ref().map(scene_text).unwrap_or_default();
    let candidates: Vec<String> = q.candidates.iter().enumerate().map(|(i, c)| candidate_text(i, c)).collect();
    templates
        .for_kind(q.kind)
        .replace("{{target}}", &q.target)
        .replace("{{scene}}", &scene)
        .replace("{{map}}", &q.map_sketch)
        .replace("{{candidates}}", &candidates.join("\n"))
}
