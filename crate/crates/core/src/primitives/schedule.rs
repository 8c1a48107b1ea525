use std::sync::Arc;

use super::arc::{MotionPrimitive, StopPrimitive, Trajectory};
use super::reference::ReferenceState;
use super::PrimitiveError;

/// Tolerance on the handoff state when committing a new schedule.
pub const HANDOFF_TOLERANCE: f64 = 1e-9;

/// Something the vehicle can track: a reference for every time.
pub trait ReferenceSource {
    fn reference_at(&self, t: f64) -> ReferenceState;
}

/// Holds a single state forever.
#[derive(Clone, Copy, Debug)]
pub struct Hold(pub ReferenceState);

impl ReferenceSource for Hold {
    fn reference_at(&self, _t: f64) -> ReferenceState {
        self.0
    }
}

/// Plan committed at `t0`:
///
/// ```text
/// [t0, t0+tp)            lead-in (the remainder of the previous plan)
/// [t0+tp, t0+2tp)        active primitive, local time [0, tp)
/// [t0+2tp, t0+2tp+Ts)    stop primitive
/// [t0+2tp+Ts, inf)       terminal hover
/// ```
#[derive(Clone, Debug)]
pub struct ScheduledTrajectory {
    t0: f64,
    period: f64,
    lead_in: Option<Arc<ScheduledTrajectory>>,
    active: MotionPrimitive,
    stop: StopPrimitive,
}

impl ScheduledTrajectory {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn active(&self) -> &MotionPrimitive {
        &self.active
    }

    pub fn stop(&self) -> &StopPrimitive {
        &self.stop
    }

    pub fn active_window(&self) -> (f64, f64) {
        (self.t0 + self.period, self.t0 + 2.0 * self.period)
    }

    pub fn stop_window(&self) -> (f64, f64) {
        let begin = self.t0 + 2.0 * self.period;
        (begin, begin + self.stop.duration())
    }

    /// Time after which the schedule only holds the terminal hover.
    pub fn end_time(&self) -> f64 {
        self.stop_window().1
    }

    /// Reference at absolute time `t`. Times before the active window fall
    /// back to the previous plan, or to the active start for a first commit.
    pub fn eval(&self, t: f64) -> ReferenceState {
        let (active_begin, active_end) = self.active_window();
        if t < active_begin {
            match &self.lead_in {
                Some(prev) => prev.eval(t),
                None => *self.active.start(),
            }
        } else if t < active_end {
            self.active.reference(t - active_begin)
        } else {
            self.stop.eval(t - active_end)
        }
    }

    /// Evaluates the piece that ends at `t` from the left, for junction checks.
    pub fn eval_left_limit(&self, t: f64) -> ReferenceState {
        let (active_begin, active_end) = self.active_window();
        if t <= active_begin {
            match &self.lead_in {
                Some(prev) => prev.eval_left_limit(t),
                None => *self.active.start(),
            }
        } else if t <= active_end {
            self.active.reference(t - active_begin)
        } else {
            self.stop.eval(t - active_end)
        }
    }

    /// Copy without the lead-in; enough to evaluate from the active window on.
    fn detached(&self) -> ScheduledTrajectory {
        ScheduledTrajectory {
            t0: self.t0,
            period: self.period,
            lead_in: None,
            active: self.active.clone(),
            stop: self.stop.clone(),
        }
    }
}

impl ReferenceSource for ScheduledTrajectory {
    fn reference_at(&self, t: f64) -> ReferenceState {
        self.eval(t)
    }
}

/// Commits `selected` (and the stop that follows it) as the new plan.
///
/// `selected` must start where the previous plan puts the vehicle at
/// `t_now + t_p`, and `stop` must start where `selected` is at `t_p`.
pub fn commit_schedule(
    prev: Option<&ScheduledTrajectory>,
    selected: MotionPrimitive,
    stop: StopPrimitive,
    t_now: f64,
    t_p: f64,
) -> Result<ScheduledTrajectory, PrimitiveError> {
    if !(t_p > 0.0 && t_p <= selected.duration()) {
        return Err(PrimitiveError::invalid(format!(
            "planning period {t_p} must lie in (0, {}]",
            selected.duration()
        )));
    }
    if let Some(prev) = prev {
        let expected = prev.eval(t_now + t_p);
        let (deviation, field) = selected.start().max_deviation(&expected);
        if !(deviation <= HANDOFF_TOLERANCE) {
            return Err(PrimitiveError::StartMismatch { field, deviation });
        }
    }
    let handoff = selected.reference(t_p);
    let (deviation, field) = stop.start().max_deviation(&handoff);
    if !(deviation <= HANDOFF_TOLERANCE) {
        return Err(PrimitiveError::StopMismatch { field, deviation });
    }
    Ok(ScheduledTrajectory {
        t0: t_now,
        period: t_p,
        lead_in: prev.map(|p| Arc::new(p.detached())),
        active: selected,
        stop,
    })
}
