use serde::{Deserialize, Serialize};

use super::config::{Evaluation, PlannerConfig, UnknownPolicy};
use super::PlannerError;
use crate::memory::{FrameChain, Verdict};
use crate::primitives::{
    build_library, build_stop_after, sample_points, MotionPrimitive, ReferenceState, StopPrimitive,
    Trajectory,
};
use crate::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Primitive,
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    Obstacle,
    Unknown,
}

/// Outcome of checking one primitive together with its stop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub reason: Option<InfeasibleReason>,
    /// Where the first failing sample sits.
    pub failed_at: Option<(Segment, f64)>,
    /// Smallest obstacle distance over the checked samples (infinite if
    /// nothing was in view).
    pub min_distance: f64,
    pub samples: usize,
}

impl CheckResult {
    pub fn is_feasible(&self) -> bool {
        self.reason.is_none()
    }
}

/// Checks `prim` over `[0, T]` and `stop` over its full duration.
///
/// `robot_position` is the vehicle's current world position; unknown
/// samples within `startup_free_radius` of it are accepted.
pub fn check_primitive(
    chain: &FrameChain,
    prim: &MotionPrimitive,
    stop: &StopPrimitive,
    cfg: &PlannerConfig,
    robot_position: &Vec3,
) -> CheckResult {
    let mut result = CheckResult {
        reason: None,
        failed_at: None,
        min_distance: f64::INFINITY,
        samples: 0,
    };
    let segments: [(Segment, &dyn Trajectory); 2] =
        [(Segment::Primitive, prim), (Segment::Stop, stop)];
    for (segment, traj) in segments {
        for (tau, p) in sample_points(traj, cfg.delta_t) {
            result.samples += 1;
            let q = chain.query_world(&p, cfg.k, cfg.r_coll);
            let failure = match q.verdict {
                Verdict::FreeKnown => None,
                Verdict::NearObstacle => Some(InfeasibleReason::Obstacle),
                Verdict::Unknown => match cfg.unknown_policy {
                    UnknownPolicy::Conservative
                        if (p - robot_position).norm() <= cfg.startup_free_radius =>
                    {
                        None
                    }
                    UnknownPolicy::Conservative => Some(InfeasibleReason::Unknown),
                },
            };
            if q.distance.is_finite() {
                result.min_distance = result.min_distance.min(q.distance);
            }
            if let Some(reason) = failure {
                result.reason = Some(reason);
                result.failed_at = Some((segment, tau));
                return result;
            }
        }
    }
    result
}

/// Distance from the primitive's endpoint to the goal.
pub fn cost(prim: &MotionPrimitive, goal: &Vec3) -> f64 {
    (goal - prim.endpoint()).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    Commit,
    ExecuteStop,
    GoalReached,
}

impl DecisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Commit => "commit",
            Self::ExecuteStop => "execute_stop",
            Self::GoalReached => "goal_reached",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateVerdict {
    Feasible,
    Obstacle,
    Unknown,
    /// Not checked: a cheaper candidate was already feasible.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateDiagnostics {
    /// Position in library order.
    pub index: usize,
    pub omega: f64,
    pub v_z: f64,
    pub cost: f64,
    pub verdict: CandidateVerdict,
    pub min_distance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PlanDecision {
    pub kind: DecisionKind,
    pub selected: Option<MotionPrimitive>,
    pub stop: Option<StopPrimitive>,
    pub selected_index: Option<usize>,
    /// One entry per library member, in library order. Empty when the
    /// round did not evaluate the library.
    pub candidates: Vec<CandidateDiagnostics>,
}

impl PlanDecision {
    pub fn without_evaluation(kind: DecisionKind) -> Self {
        Self {
            kind,
            selected: None,
            stop: None,
            selected_index: None,
            candidates: Vec::new(),
        }
    }
}

/// One planning round from the state the vehicle will have at the handoff.
///
/// Candidates are ranked by cost, ties broken by library order. Each
/// candidate is checked together with a stop that branches off where the
/// candidate hands off to the next round, at `t_p`.
pub fn plan_round(
    handoff: &ReferenceState,
    robot_position: &Vec3,
    chain: &FrameChain,
    goal: &Vec3,
    cfg: &PlannerConfig,
) -> Result<PlanDecision, PlannerError> {
    if (handoff.position - goal).norm() <= cfg.goal_radius {
        return Ok(PlanDecision::without_evaluation(DecisionKind::GoalReached));
    }
    let library = build_library(
        handoff,
        cfg.v_x,
        &cfg.omega_set,
        &cfg.v_z_set,
        cfg.duration,
        cfg.ramp_duration,
    )?;
    let mut candidates: Vec<CandidateDiagnostics> = library
        .primitives
        .iter()
        .enumerate()
        .map(|(index, prim)| CandidateDiagnostics {
            index,
            omega: prim.command().omega,
            v_z: prim.command().v_z,
            cost: cost(prim, goal),
            verdict: CandidateVerdict::Skipped,
            min_distance: None,
        })
        .collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[a].cost.total_cmp(&candidates[b].cost).then(a.cmp(&b)));

    let mut best: Option<(usize, StopPrimitive)> = None;
    for &i in &order {
        let prim = &library.primitives[i];
        let stop = build_stop_after(prim, cfg.t_p, cfg.stop_duration)?;
        let check = check_primitive(chain, prim, &stop, cfg, robot_position);
        let diag = &mut candidates[i];
        diag.min_distance = check.min_distance.is_finite().then_some(check.min_distance);
        diag.verdict = match check.reason {
            None => CandidateVerdict::Feasible,
            Some(InfeasibleReason::Obstacle) => CandidateVerdict::Obstacle,
            Some(InfeasibleReason::Unknown) => CandidateVerdict::Unknown,
        };
        if check.is_feasible() && best.is_none() {
            best = Some((i, stop));
            if cfg.evaluation == Evaluation::Lazy {
                break;
            }
        }
    }

    Ok(match best {
        Some((i, stop)) => PlanDecision {
            kind: DecisionKind::Commit,
            selected: Some(library.primitives[i].clone()),
            stop: Some(stop),
            selected_index: Some(i),
            candidates,
        },
        None => PlanDecision {
            kind: DecisionKind::ExecuteStop,
            selected: None,
            stop: None,
            selected_index: None,
            candidates,
        },
    })
}
