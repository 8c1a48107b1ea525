use super::blend::QuinticBlend;
use super::flat::{advance_arc, wrap_angle, BodyCommand};
use super::reference::ReferenceState;
use super::PrimitiveError;
use crate::Vec3;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];
const QUADRATURE_PANEL: f64 = 0.05;

/// Unicycle segment whose forward speed, climb rate and yaw rate each blend
/// from the start state to a constant target, then hold it.
///
/// The horizontal position inside the blend has no closed form and is
/// integrated with composite Gauss-Legendre quadrature; past the blend the
/// exact arc solution takes over.
#[derive(Clone, Debug)]
pub(crate) struct ArcSegment {
    start: ReferenceState,
    heading0: f64,
    speed: QuinticBlend,
    climb: QuinticBlend,
    turn: QuinticBlend,
    blend_end_xy: (f64, f64),
}

impl ArcSegment {
    pub fn new(start: &ReferenceState, v_x: f64, v_z: f64, omega: f64, blend: f64) -> Self {
        let heading0 = start.yaw;
        let (c, s) = (heading0.cos(), heading0.sin());
        let along = Vec3::new(c, s, 0.0);
        let omega0 = start.yaw_rate;
        let u0 = start.velocity.dot(&along);
        let du0 = start.acceleration.dot(&along);
        let ddu0 = start.jerk.dot(&along) + u0 * omega0 * omega0;
        let speed = QuinticBlend::new(u0, du0, ddu0, v_x, blend);
        let climb = QuinticBlend::new(
            start.velocity.z,
            start.acceleration.z,
            start.jerk.z,
            v_z,
            blend,
        );
        let turn = QuinticBlend::new(omega0, start.yaw_acceleration, 0.0, omega, blend);
        let mut segment = Self {
            start: *start,
            heading0,
            speed,
            climb,
            turn,
            blend_end_xy: (start.position.x, start.position.y),
        };
        segment.blend_end_xy = segment.blend_xy(blend);
        segment
    }

    pub fn start(&self) -> &ReferenceState {
        &self.start
    }

    pub fn blend_duration(&self) -> f64 {
        self.speed.duration()
    }

    fn heading(&self, tau: f64) -> f64 {
        self.heading0 + self.turn.integral(tau)
    }

    fn blend_xy(&self, tau: f64) -> (f64, f64) {
        let (x0, y0) = (self.start.position.x, self.start.position.y);
        if tau <= 0.0 {
            return (x0, y0);
        }
        let panels = (tau / QUADRATURE_PANEL).ceil().max(1.0) as usize;
        let width = tau / panels as f64;
        let (mut ix, mut iy) = (0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                let t = mid + 0.5 * width * node;
                let u = self.speed.value(t);
                let th = self.heading(t);
                ix += weight * u * th.cos();
                iy += weight * u * th.sin();
            }
        }
        (x0 + 0.5 * width * ix, y0 + 0.5 * width * iy)
    }

    pub fn position(&self, tau: f64) -> Vec3 {
        let tau = tau.max(0.0);
        let z = self.start.position.z + self.climb.integral(tau);
        let blend = self.blend_duration();
        let (x, y) = if tau <= blend {
            self.blend_xy(tau)
        } else {
            let (bx, by) = self.blend_end_xy;
            let (p, _) = advance_arc(
                &Vec3::new(bx, by, 0.0),
                self.heading(blend),
                self.speed.target(),
                0.0,
                self.turn.target(),
                tau - blend,
            );
            (p.x, p.y)
        };
        Vec3::new(x, y, z)
    }

    pub fn state(&self, tau: f64) -> ReferenceState {
        let tau = tau.max(0.0);
        let [u, du, ddu, dddu] = self.speed.derivatives(tau);
        let [w, dw, ddw, dddw] = self.climb.derivatives(tau);
        let [om, dom, ddom, _] = self.turn.derivatives(tau);
        let heading = self.heading(tau);
        let along = Vec3::new(heading.cos(), heading.sin(), 0.0);
        let lateral = Vec3::new(-heading.sin(), heading.cos(), 0.0);
        let up = Vec3::z();

        let velocity = along * u + up * w;
        let acceleration = along * du + lateral * (u * om) + up * dw;
        let jerk = along * (ddu - u * om * om) + lateral * (2.0 * du * om + u * dom) + up * ddw;
        let snap = along * (dddu - 3.0 * du * om * om - 3.0 * u * om * dom)
            + lateral * (3.0 * ddu * om - u * om * om * om + 3.0 * du * dom + u * ddom)
            + up * dddw;

        ReferenceState {
            position: self.position(tau),
            velocity,
            acceleration,
            jerk,
            snap,
            yaw: wrap_angle(heading),
            yaw_rate: om,
            yaw_acceleration: dom,
        }
    }
}

/// Anything evaluable as a time-parameterized reference on `[0, duration]`.
pub trait Trajectory {
    fn duration(&self) -> f64;
    /// Reference at local time `tau`, clamped into the valid range.
    fn reference(&self, tau: f64) -> ReferenceState;
    fn position(&self, tau: f64) -> Vec3 {
        self.reference(tau).position
    }
}

/// Forward-arc motion primitive.
#[derive(Clone, Debug)]
pub struct MotionPrimitive {
    segment: ArcSegment,
    command: BodyCommand,
}

impl MotionPrimitive {
    pub fn new(
        start: ReferenceState,
        command: BodyCommand,
        ramp_duration: f64,
    ) -> Result<Self, PrimitiveError> {
        command.validate()?;
        if !start.is_finite() {
            return Err(PrimitiveError::invalid("start state is not finite"));
        }
        if !(0.0..=command.duration).contains(&ramp_duration) {
            return Err(PrimitiveError::invalid(format!(
                "ramp duration {ramp_duration} outside [0, {}]",
                command.duration
            )));
        }
        Ok(Self {
            segment: ArcSegment::new(
                &start,
                command.v_x,
                command.v_z,
                command.omega,
                ramp_duration,
            ),
            command,
        })
    }

    pub fn start(&self) -> &ReferenceState {
        self.segment.start()
    }

    pub fn command(&self) -> &BodyCommand {
        &self.command
    }

    pub fn ramp_duration(&self) -> f64 {
        self.segment.blend_duration()
    }

    /// Reference at `tau`; errors if `tau` is outside `[0, T]`.
    pub fn eval(&self, tau: f64) -> Result<ReferenceState, PrimitiveError> {
        if !(0.0..=self.command.duration).contains(&tau) {
            return Err(PrimitiveError::invalid(format!(
                "tau {tau} outside [0, {}]",
                self.command.duration
            )));
        }
        Ok(self.segment.state(tau))
    }

    pub fn endpoint(&self) -> Vec3 {
        self.segment.position(self.command.duration)
    }
}

impl Trajectory for MotionPrimitive {
    fn duration(&self) -> f64 {
        self.command.duration
    }

    fn reference(&self, tau: f64) -> ReferenceState {
        self.segment.state(tau.clamp(0.0, self.command.duration))
    }

    fn position(&self, tau: f64) -> Vec3 {
        self.segment.position(tau.clamp(0.0, self.command.duration))
    }
}

/// Brings the vehicle to hover.
///
/// An optional lead phase first finishes the blend of the primitive the
/// stop branches off from, so the deceleration starts from a constant
/// command. Forward speed, climb rate and yaw rate then blend to zero over
/// `stop_duration`, after which the terminal pose is held with exactly zero
/// derivatives.
#[derive(Clone, Debug)]
pub struct StopPrimitive {
    start: ReferenceState,
    lead: Option<Lead>,
    segment: ArcSegment,
    stop_duration: f64,
}

#[derive(Clone, Debug)]
struct Lead {
    segment: ArcSegment,
    offset: f64,
    duration: f64,
}

impl StopPrimitive {
    pub fn start(&self) -> &ReferenceState {
        &self.start
    }

    /// Length of the deceleration phase.
    pub fn stop_duration(&self) -> f64 {
        self.stop_duration
    }

    /// Length of the lead phase, zero without one.
    pub fn lead_duration(&self) -> f64 {
        self.lead.as_ref().map_or(0.0, |l| l.duration)
    }

    /// Defined for every `tau >= 0`; holds the terminal hover afterwards.
    pub fn eval(&self, tau: f64) -> ReferenceState {
        match &self.lead {
            Some(l) if tau < l.duration => l.segment.state(l.offset + tau.max(0.0)),
            _ => self.segment.state(tau - self.lead_duration()),
        }
    }

    pub fn terminal(&self) -> ReferenceState {
        self.segment.state(self.stop_duration)
    }
}

impl Trajectory for StopPrimitive {
    fn duration(&self) -> f64 {
        self.lead_duration() + self.stop_duration
    }

    fn reference(&self, tau: f64) -> ReferenceState {
        self.eval(tau.clamp(0.0, self.duration()))
    }

    fn position(&self, tau: f64) -> Vec3 {
        let tau = tau.clamp(0.0, self.duration());
        match &self.lead {
            Some(l) if tau < l.duration => l.segment.position(l.offset + tau),
            _ => self.segment.position(tau - self.lead_duration()),
        }
    }
}

fn check_stop_duration(stop_duration: f64) -> Result<(), PrimitiveError> {
    if !(stop_duration.is_finite() && stop_duration > 0.0) {
        return Err(PrimitiveError::invalid(format!(
            "stop duration must be positive, got {stop_duration}"
        )));
    }
    Ok(())
}

/// Decelerates from `start` directly.
///
/// Speed only decreases when `start` has no along-track acceleration or
/// jerk; use [`build_stop_after`] to branch off a primitive mid-blend.
pub fn build_stop(
    start: &ReferenceState,
    stop_duration: f64,
) -> Result<StopPrimitive, PrimitiveError> {
    if !start.is_finite() {
        return Err(PrimitiveError::invalid("start state is not finite"));
    }
    check_stop_duration(stop_duration)?;
    Ok(StopPrimitive {
        start: *start,
        lead: None,
        segment: ArcSegment::new(start, 0.0, 0.0, 0.0, stop_duration),
        stop_duration,
    })
}

/// Stop branching off `prim` at local time `tau`: follows `prim` until its
/// blend is complete, then decelerates.
pub fn build_stop_after(
    prim: &MotionPrimitive,
    tau: f64,
    stop_duration: f64,
) -> Result<StopPrimitive, PrimitiveError> {
    let start = prim.eval(tau)?;
    check_stop_duration(stop_duration)?;
    let ramp = prim.ramp_duration();
    if tau >= ramp {
        return build_stop(&start, stop_duration);
    }
    let cruise = prim.segment.state(ramp);
    Ok(StopPrimitive {
        start,
        lead: Some(Lead {
            segment: prim.segment.clone(),
            offset: tau,
            duration: ramp - tau,
        }),
        segment: ArcSegment::new(&cruise, 0.0, 0.0, 0.0, stop_duration),
        stop_duration,
    })
}

/// Samples at `0, dt, 2dt, ...` plus the terminal time, which is always
/// included exactly once.
pub fn sample_times(duration: f64, dt: f64) -> Vec<f64> {
    assert!(dt > 0.0, "sample step must be positive");
    let steps = (duration / dt + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    match times.last_mut() {
        Some(last) if (duration - *last).abs() <= 1e-9 => *last = duration,
        _ => times.push(duration),
    }
    times
}

pub fn sample_points<T: Trajectory + ?Sized>(traj: &T, dt: f64) -> Vec<(f64, Vec3)> {
    sample_times(traj.duration(), dt)
        .into_iter()
        .map(|tau| (tau, traj.position(tau)))
        .collect()
}

/// Cartesian product of yaw rates and climb rates at a fixed forward speed.
#[derive(Clone, Debug)]
pub struct PrimitiveLibrary {
    pub primitives: Vec<MotionPrimitive>,
    pub v_x: f64,
    /// Yaw rates in library order (centered outward).
    pub omega_set: Vec<f64>,
    /// Climb rates in library order (centered outward).
    pub v_z_set: Vec<f64>,
    pub duration: f64,
}

impl PrimitiveLibrary {
    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }
}

/// Orders values by magnitude, negative first on ties, so the library
/// starts with the straight, level primitive.
fn centered_outward(values: &[f64]) -> Result<Vec<f64>, PrimitiveError> {
    if values.is_empty() {
        return Err(PrimitiveError::invalid("discretization set is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PrimitiveError::invalid("discretization set has non-finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(PrimitiveError::invalid("discretization set has duplicates"));
    }
    Ok(sorted)
}

pub fn build_library(
    start: &ReferenceState,
    v_x: f64,
    omega_set: &[f64],
    v_z_set: &[f64],
    duration: f64,
    ramp_duration: f64,
) -> Result<PrimitiveLibrary, PrimitiveError> {
    let omegas = centered_outward(omega_set)?;
    let climbs = centered_outward(v_z_set)?;
    let mut primitives = Vec::with_capacity(omegas.len() * climbs.len());
    for &omega in &omegas {
        for &v_z in &climbs {
            let cmd = BodyCommand::new(v_x, v_z, omega, duration)?;
            primitives.push(MotionPrimitive::new(*start, cmd, ramp_duration)?);
        }
    }
    Ok(PrimitiveLibrary {
        primitives,
        v_x,
        omega_set: omegas,
        v_z_set: climbs,
        duration,
    })
}

/// Uniform grid of `count` values over `[-max, max]`.
pub fn symmetric_grid(max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        n => {
            let last = (n - 1) as i64;
            (0..n as i64)
                .map(|i| max * (2 * i - last) as f64 / last as f64)
                .collect()
        }
    }
}
