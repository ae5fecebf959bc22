use super::{Candidate, QueryKind, Reasoner, ReasonerDecision, ReasonerQuery};
use crate::locomotion::{drive_toward, greedy_step};
use crate::mapping::Traversal;
use crate::priors::{PriorTable, TargetPriors};
use crate::recovery::astar;
use crate::world::Action;

/// Deterministic rule-based stand-in for a multimodal model.
#[derive(Debug, Clone)]
pub struct ScriptedReasoner {
    priors: PriorTable,
    review_threshold: f64,
}

impl ScriptedReasoner {
    pub fn new(priors: PriorTable, review_threshold: f64) -> Self {
        Self {
            priors,
            review_threshold,
        }
    }

    fn target_priors(&self, target: &str) -> TargetPriors {
        self.priors.resolve(target, true).expect("scenario categories always resolve")
    }

    fn frontier_choice(&self, q: &ReasonerQuery) -> ReasonerDecision {
        let p = self.target_priors(&q.target);
        let mut best: Option<(usize, f64, &str)> = None;
        for (i, c) in q.candidates.iter().enumerate() {
            if let Candidate::Region { room_type, .. } = c {
                let w = p.room(room_type);
                if best.is_none_or(|b| w > b.1) {
                    best = Some((i, w, room_type));
                }
            }
        }
        let (i, w, room) = best.unwrap_or((0, 0.0, "unknown"));
        decision(vec![i], w, format!("a {} is most likely in the {room}", q.target))
    }

    fn fine_action(&self, q: &ReasonerQuery) -> ReasonerDecision {
        let action = match &q.fine {
            Some(ctx) => {
                let here = ctx.pose.cell();
                let t = Traversal {
                    start: here,
                    goal: Some(ctx.goal),
                    allow_unknown: ctx.map.is_frontier_cell(ctx.goal),
                };
                match astar(&ctx.map, here, ctx.goal) {
                    Ok(path) if path.len() >= 2 => drive_toward(&ctx.pose, path[1], |c| t.open(&ctx.map, c)),
                    _ => None,
                }
                // no usable path: greedy lattice step towards the goal
                .unwrap_or_else(|| greedy_step(&ctx.pose, ctx.goal, &ctx.map))
            }
            None => Action::TurnLeft,
        };
        let idx = q
            .candidates
            .iter()
            .position(|c| matches!(c, Candidate::Action { action: a } if *a == action))
            .unwrap_or(0);
        decision(vec![idx], 1.0, format!("{} towards the goal", action.name()))
    }

    fn target_review(&self, q: &ReasonerQuery) -> ReasonerDecision {
        let p = self.target_priors(&q.target);
        let mut scored: Vec<(usize, f64)> = q
            .candidates
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                Candidate::KeyPoint(k) => {
                    let s = k.categories.iter().map(|c| p.object(c)).fold(0.0, f64::max);
                    (s >= self.review_threshold).then_some((i, s))
                }
                _ => None,
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let confidence = scored.first().map_or(0.0, |s| s.1);
        let rationale = if scored.is_empty() {
            "no stored view shows anything related to the target".to_string()
        } else {
            format!("{} stored views show related objects", scored.len())
        };
        decision(scored.into_iter().map(|s| s.0).collect(), confidence, rationale)
    }

    fn stair_review(&self, q: &ReasonerQuery) -> ReasonerDecision {
        let keypoints = q.candidates.iter().enumerate().filter_map(|(i, c)| match c {
            Candidate::KeyPoint(k) => Some((i, k)),
            _ => None,
        });
        let with_stairs = keypoints
            .clone()
            .filter(|(_, k)| !k.stair_cells.is_empty())
            .max_by(|a, b| a.1.stair_cells.len().cmp(&b.1.stair_cells.len()).then(b.0.cmp(&a.0)));
        if let Some((i, _)) = with_stairs {
            return decision(vec![i], 0.9, "this view shows a staircase".into());
        }
        let open = keypoints.max_by(|a, b| a.1.open_area_m2.total_cmp(&b.1.open_area_m2).then(b.0.cmp(&a.0)));
        decision(vec![open.map_or(0, |o| o.0)], 0.3, "the most open view may hide a staircase".into())
    }
}

fn decision(chosen: Vec<usize>, confidence: f64, rationale: String) -> ReasonerDecision {
    ReasonerDecision {
        chosen,
        confidence: confidence.clamp(0.0, 1.0),
        rationale,
        fallback: false,
        error: None,
    }
}

impl Reasoner for ScriptedReasoner {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision {
        match query.kind {
            QueryKind::FrontierChoice => self.frontier_choice(query),
            QueryKind::FineAction => self.fine_action(query),
            QueryKind::KeypointTargetReview => self.target_review(query),
            QueryKind::KeypointStairReview => self.stair_review(query),
        }
    }
}
