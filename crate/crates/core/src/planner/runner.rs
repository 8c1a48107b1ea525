use serde::{Deserialize, Serialize};

use super::config::PlannerConfig;
use super::round::{plan_round, CandidateDiagnostics, DecisionKind, PlanDecision};
use super::PlannerError;
use crate::memory::FrameChain;
use crate::primitives::{commit_schedule, ReferenceSource, ReferenceState, ScheduledTrajectory};
use crate::Vec3;

/// Inputs of one planning decision.
#[derive(Clone, Copy, Debug)]
pub struct PlanInput<'a> {
    pub t_now: f64,
    /// Scheduled reference at `t_now + t_p`.
    pub handoff: &'a ReferenceState,
    /// Where the vehicle is now.
    pub robot_position: &'a Vec3,
    pub chain: &'a FrameChain,
    pub goal: &'a Vec3,
}

/// Decision function the planning loop calls once per round. Alternative
/// planners plug in here.
pub trait LocalPlanner {
    fn period(&self) -> f64;
    fn plan(&mut self, input: &PlanInput<'_>) -> Result<PlanDecision, PlannerError>;
}

/// The forward-arc library planner.
#[derive(Clone, Debug)]
pub struct ForwardArcPlanner {
    cfg: PlannerConfig,
}

impl ForwardArcPlanner {
    pub fn new(cfg: PlannerConfig) -> Result<Self, PlannerError> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }
}

impl LocalPlanner for ForwardArcPlanner {
    fn period(&self) -> f64 {
        self.cfg.t_p
    }

    fn plan(&mut self, input: &PlanInput<'_>) -> Result<PlanDecision, PlannerError> {
        plan_round(
            input.handoff,
            input.robot_position,
            input.chain,
            input.goal,
            &self.cfg,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Flying,
    /// Running the committed stop; planning resumes at hover.
    Stopping,
    GoalReached,
}

/// One line of the per-round log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: f64,
    pub kind: DecisionKind,
    /// False when the round reused an earlier decision without planning.
    pub evaluated: bool,
    pub selected_index: Option<usize>,
    pub candidates: Vec<CandidateDiagnostics>,
}

impl RoundRecord {
    pub fn new(t: f64, decision: &PlanDecision, evaluated: bool) -> Self {
        Self {
            t,
            kind: decision.kind,
            evaluated,
            selected_index: decision.selected_index,
            candidates: decision.candidates.clone(),
        }
    }

    /// Single-line JSON.
    pub fn to_ndjson(&self) -> String {
        serde_json::to_string(self).expect("round records always serialize")
    }
}

/// Result of one [`PlanningLoop::step`].
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub decision: PlanDecision,
    pub evaluated: bool,
}

/// Owns the committed schedule and runs one planner invocation per period.
#[derive(Clone, Debug)]
pub struct PlanningLoop {
    initial: ReferenceState,
    schedule: Option<ScheduledTrajectory>,
    mode: Mode,
}

impl PlanningLoop {
    /// Starts holding `initial` until the first commit.
    pub fn new(initial: ReferenceState) -> Self {
        Self {
            initial,
            schedule: None,
            mode: Mode::Flying,
        }
    }

    pub fn schedule(&self) -> Option<&ScheduledTrajectory> {
        self.schedule.as_ref()
    }

    pub fn goal_reached(&self) -> bool {
        self.mode == Mode::GoalReached
    }

    /// Reference the vehicle tracks at `t`.
    pub fn reference(&self, t: f64) -> ReferenceState {
        match &self.schedule {
            Some(s) => s.eval(t),
            None => self.initial,
        }
    }

    pub fn step<P: LocalPlanner + ?Sized>(
        &mut self,
        t_now: f64,
        chain: &FrameChain,
        goal: &Vec3,
        planner: &mut P,
    ) -> Result<StepOutcome, PlannerError> {
        let t_p = planner.period();
        match self.mode {
            Mode::GoalReached => {
                return Ok(StepOutcome {
                    decision: PlanDecision::without_evaluation(DecisionKind::GoalReached),
                    evaluated: false,
                })
            }
            Mode::Stopping => {
                let end = self.schedule.as_ref().map_or(f64::NEG_INFINITY, |s| s.end_time());
                if t_now + t_p < end {
                    return Ok(StepOutcome {
                        decision: PlanDecision::without_evaluation(DecisionKind::ExecuteStop),
                        evaluated: false,
                    });
                }
            }
            Mode::Flying => {}
        }

        let handoff = self.reference(t_now + t_p);
        let robot = self.reference(t_now).position;
        let input = PlanInput {
            t_now,
            handoff: &handoff,
            robot_position: &robot,
            chain,
            goal,
        };
        let decision = planner.plan(&input)?;
        match decision.kind {
            DecisionKind::Commit => {
                let (Some(selected), Some(stop)) = (&decision.selected, &decision.stop) else {
                    return Err(PlannerError::Config(
                        "commit decision without a primitive and stop".into(),
                    ));
                };
                let prev = self.schedule.as_ref();
                // the first commit starts from the held initial state
                let next = commit_schedule(prev, selected.clone(), stop.clone(), t_now, t_p)?;
                self.schedule = Some(next);
                self.mode = Mode::Flying;
            }
            DecisionKind::ExecuteStop => self.mode = Mode::Stopping,
            DecisionKind::GoalReached => self.mode = Mode::GoalReached,
        }
        Ok(StepOutcome {
            decision,
            evaluated: true,
        })
    }
}

impl ReferenceSource for PlanningLoop {
    fn reference_at(&self, t: f64) -> ReferenceState {
        self.reference(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{CameraModel, ChainConfig};

    struct Scripted {
        inner: ForwardArcPlanner,
        script: Vec<DecisionKind>,
        calls: usize,
    }

    impl LocalPlanner for Scripted {
        fn period(&self) -> f64 {
            self.inner.period()
        }

        fn plan(&mut self, input: &PlanInput<'_>) -> Result<PlanDecision, PlannerError> {
            self.calls += 1;
            let kind = self.script.remove(0);
            match kind {
                DecisionKind::Commit => {
                    let mut cfg = self.inner.config().clone();
                    cfg.startup_free_radius = f64::INFINITY;
                    plan_round(input.handoff, input.robot_position, input.chain, input.goal, &cfg)
                }
                other => Ok(PlanDecision::without_evaluation(other)),
            }
        }
    }

    fn chain() -> FrameChain {
        FrameChain::new(CameraModel::default().scaled(0.25), ChainConfig::default()).unwrap()
    }

    #[test]
    fn commit_then_stop_keeps_committed_stop() {
        let inner = ForwardArcPlanner::new(PlannerConfig::default()).unwrap();
        let tp = inner.period();
        let mut planner = Scripted {
            inner,
            script: vec![DecisionKind::Commit, DecisionKind::ExecuteStop],
            calls: 0,
        };
        let mut lp = PlanningLoop::new(ReferenceState::hover(Vec3::zeros(), 0.0));
        let goal = Vec3::new(50.0, 0.0, 0.0);
        let c = chain();
        lp.step(0.0, &c, &goal, &mut planner).unwrap();
        let committed_stop = lp.schedule().unwrap().stop().start().position;
        let out = lp.step(tp, &c, &goal, &mut planner).unwrap();
        assert_eq!(out.decision.kind, DecisionKind::ExecuteStop);
        assert_eq!(lp.schedule().unwrap().stop().start().position, committed_stop);
        // while the stop runs the planner is not consulted
        let out = lp.step(2.0 * tp, &c, &goal, &mut planner).unwrap();
        assert!(!out.evaluated);
        assert_eq!(planner.calls, 2);
        let end = lp.schedule().unwrap().end_time();
        assert_eq!(lp.reference(end + 1.0).speed(), 0.0);
    }

    #[test]
    fn goal_reached_is_sticky() {
        let inner = ForwardArcPlanner::new(PlannerConfig::default()).unwrap();
        let mut planner = Scripted {
            inner,
            script: vec![DecisionKind::GoalReached],
            calls: 0,
        };
        let mut lp = PlanningLoop::new(ReferenceState::hover(Vec3::zeros(), 0.0));
        let c = chain();
        let goal = Vec3::zeros();
        lp.step(0.0, &c, &goal, &mut planner).unwrap();
        for i in 1..5 {
            let out = lp.step(i as f64 * 0.1, &c, &goal, &mut planner).unwrap();
            assert_eq!(out.decision.kind, DecisionKind::GoalReached);
            assert!(!out.evaluated);
        }
        assert_eq!(planner.calls, 1);
    }

    #[test]
    fn round_record_is_one_line() {
        let d = PlanDecision::without_evaluation(DecisionKind::ExecuteStop);
        let line = RoundRecord::new(0.25, &d, true).to_ndjson();
        assert!(!line.contains('\n'));
        let back: RoundRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.kind, DecisionKind::ExecuteStop);
    }
}
