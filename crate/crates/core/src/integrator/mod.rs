//! Adaptive forward integration of the scattering equations, with event
//! detection and extraction of the deflection angle.

mod dopri;

use serde::{Deserialize, Serialize};

use crate::closed_forms::{asymptotic_start_state_with, explicit_bounds, AsymptoticData};
use crate::dynamics::{energy, PhasePoint};
use crate::error::{Error, Result};
use dopri::{to_point, to_state, AcceptedStep, FailReason, StepOutcome, Stepper};

/// Resolution of event times.
pub const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Distance before the `T0` lower bound at which integration starts.
    pub t_start_offset: f64,
    /// Escape requires `|eta e^{2 xi}|` and `|speed^2 - 1|` below this.
    pub escape_tol: f64,
    /// Longest integration time measured from the start state.
    pub max_time: f64,
    pub boundary_tol: f64,
    /// Spacing of the output samples.
    pub dense_step: f64,
    /// The run continues past escape until `t >= T0 + min_span_after_t0`, so
    /// that tail fits have a window deep in the free regime.
    pub min_span_after_t0: f64,
    /// `xi` above this value is treated as finite-time blow-up.
    pub xi_limit: f64,
    pub max_step: f64,
    /// Threshold on `max(1, eta_in) * e^{2(xi_in + t_start)}` for the start
    /// state expansion.
    pub start_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_start_offset: 14.0,
            escape_tol: 1e-8,
            max_time: 2000.0,
            boundary_tol: 1e-9,
            dense_step: 0.01,
            min_span_after_t0: 10.0,
            xi_limit: 50.0,
            max_step: 0.5,
            start_threshold: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("t_start_offset", self.t_start_offset),
            ("escape_tol", self.escape_tol),
            ("max_time", self.max_time),
            ("boundary_tol", self.boundary_tol),
            ("dense_step", self.dense_step),
            ("max_step", self.max_step),
            ("start_threshold", self.start_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_span_after_t0 >= 0.0) {
            return Err(Error::Config("min_span_after_t0 must be >= 0".into()));
        }
        Ok(())
    }

    /// Start time for data `a`: `t0_lower - t_start_offset`, moved earlier if
    /// needed so the start expansion stays below `start_threshold`.
    pub fn start_time(&self, a: &AsymptoticData) -> f64 {
        let scale = a.eta_in.abs().max(1.0);
        let by_threshold = 0.5 * (self.start_threshold / scale).ln() - a.xi_in;
        let by_offset = match explicit_bounds(a) {
            Ok(b) => b.t0_lower - self.t_start_offset,
            Err(_) => -a.xi_in - self.t_start_offset,
        };
        by_offset.min(by_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventPoint {
    pub t: f64,
    pub state: PhasePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowUpReason {
    /// `e^{2 xi}` overflowed inside a step.
    Overflow,
    /// Adaptive step size fell below its floor.
    StepUnderflow,
    /// `xi` exceeded the configured limit.
    Runaway,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub last: PhasePoint,
    pub reason: BlowUpReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvents {
    /// `eta = 0`.
    pub t0: Option<EventPoint>,
    /// `eta = eta_in / 2`.
    pub t_half: Option<EventPoint>,
    /// First zero of `xi_dot`, i.e. the maximum of `xi`.
    pub t_m: Option<EventPoint>,
    pub blowup: Option<BlowUp>,
}

impl TrajectoryEvents {
    pub fn t0(&self) -> Option<f64> {
        self.t0.map(|e| e.t)
    }
    pub fn t_half(&self) -> Option<f64> {
        self.t_half.map(|e| e.t)
    }
    pub fn t_m(&self) -> Option<f64> {
        self.t_m.map(|e| e.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The escape criterion was met at the final sample.
    Escaped,
    BlowUp,
    /// `max_time` elapsed without escape.
    NoEscape,
    /// Fixed-horizon run reached its end time.
    Reached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Samples on the uniform grid `t_start + k * dense_step`.
    pub samples: Vec<PhasePoint>,
    pub events: TrajectoryEvents,
    pub max_energy_drift: f64,
    pub asymptotics: Option<AsymptoticData>,
    pub outcome: Outcome,
    pub dense_step: f64,
    pub escape_tol: f64,
}

impl Trajectory {
    pub fn first(&self) -> &PhasePoint {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhasePoint {
        self.samples.last().expect("trajectory has samples")
    }

    pub fn escaped(&self) -> bool {
        self.outcome == Outcome::Escaped
    }
}

#[derive(Debug, Clone, Copy)]
enum StopRule {
    Escape,
    Horizon(f64),
}

struct EventTracker {
    eta_half: Option<f64>,
}

impl EventTracker {
    fn scan(&self, step: &AcceptedStep, y0: &dopri::State, events: &mut TrajectoryEvents) {
        let y1 = &step.y1;
        if events.t0.is_none() && y0[2] > 0.0 && y1[2] <= 0.0 {
            events.t0 = Some(refine(step, |y| y[2]));
        }
        if let Some(half) = self.eta_half {
            if events.t_half.is_none() && y0[2] > half && y1[2] <= half {
                events.t_half = Some(refine(step, |y| y[2] - half));
            }
        }
        if events.t_m.is_none() && y0[1] > 0.0 && y1[1] <= 0.0 {
            events.t_m = Some(refine(step, |y| y[1]));
        }
    }
}

/// Bisection on the dense output for a downward zero crossing of `g`.
fn refine(step: &AcceptedStep, g: impl Fn(&dopri::State) -> f64) -> EventPoint {
    let (mut lo, mut hi) = (step.t0, step.t1);
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(&step.eval(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    EventPoint {
        t,
        state: to_point(t, &step.eval(t)),
    }
}

fn is_escaped(p: &PhasePoint, escape_tol: f64) -> bool {
    p.potential_term().abs() < escape_tol
        && (p.xi_dot * p.xi_dot + p.eta_dot * p.eta_dot - 1.0).abs() < escape_tol
        && p.xi_dot < 0.0
}

/// Integrates the scattering solution with incoming data `a`, starting from
/// the asymptotic start state and stopping at escape, blow-up or `max_time`.
///
/// Blow-up and non-escape are reported through [`Trajectory::outcome`] and
/// [`TrajectoryEvents::blowup`]; they are outcomes, not errors.
pub fn integrate(a: &AsymptoticData, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !(a.xi_in.is_finite() && a.eta_in.is_finite()) {
        return Err(Error::Domain {
            op: "integrate",
            detail: format!("non-finite data {a:?}"),
        });
    }
    let t_start = cfg.start_time(a);
    let p0 = asymptotic_start_state_with(t_start, a, cfg.start_threshold)?;
    let eta_half = (a.eta_in > 0.0).then_some(0.5 * a.eta_in);
    let mut traj = run(p0, StopRule::Escape, cfg, eta_half)?;
    traj.asymptotics = Some(*a);
    Ok(traj)
}

/// Integrates from an arbitrary state up to `t_end` on the grid
/// `p0.t + k * dense_step`. Only `t0` and `t_m` events are tracked.
pub fn integrate_from(p0: PhasePoint, t_end: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !p0.is_finite() || !(t_end > p0.t) {
        return Err(Error::Precondition {
            op: "integrate_from",
            detail: format!("need finite start state and t_end > {}", p0.t),
        });
    }
    run(p0, StopRule::Horizon(t_end), cfg, None)
}

fn run(
    p0: PhasePoint,
    stop: StopRule,
    cfg: &SolverConfig,
    eta_half: Option<f64>,
) -> Result<Trajectory> {
    let t_start = p0.t;
    let h_out = cfg.dense_step;
    let t_limit = match stop {
        StopRule::Escape => t_start + cfg.max_time,
        StopRule::Horizon(t_end) => t_end,
    };
    let mut stepper = Stepper::new(
        t_start,
        to_state(&p0),
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_step,
    )?;
    let tracker = EventTracker { eta_half };
    let mut events = TrajectoryEvents::default();
    let mut samples = vec![p0];
    let mut next_k: u64 = 1;
    let grid_t = |k: u64| t_start + k as f64 * h_out;
    let mut outcome = None;

    while outcome.is_none() {
        let y0 = stepper.y;
        let step = match stepper.step(t_limit) {
            StepOutcome::Accepted(step) => step,
            StepOutcome::Failed { reason } => {
                events.blowup = Some(BlowUp {
                    last: to_point(stepper.t, &stepper.y),
                    reason: match reason {
                        FailReason::Overflow => BlowUpReason::Overflow,
                        FailReason::StepUnderflow => BlowUpReason::StepUnderflow,
                    },
                });
                outcome = Some(Outcome::BlowUp);
                break;
            }
        };
        tracker.scan(&step, &y0, &mut events);

        while grid_t(next_k) <= step.t1 {
            let t = grid_t(next_k);
            let p = to_point(t, &step.eval(t));
            samples.push(p);
            next_k += 1;
            if let StopRule::Escape = stop {
                let past_t0 = events.t0.is_some_and(|e| t >= e.t + cfg.min_span_after_t0);
                if past_t0 && is_escaped(&p, cfg.escape_tol) {
                    outcome = Some(Outcome::Escaped);
                    break;
                }
            }
        }
        if outcome.is_some() {
            break;
        }

        let end = to_point(step.t1, &step.y1);
        if end.xi > cfg.xi_limit || !end.is_finite() {
            events.blowup = Some(BlowUp {
                last: end,
                reason: BlowUpReason::Runaway,
            });
            outcome = Some(Outcome::BlowUp);
        } else if step.t1 >= t_limit {
            outcome = Some(match stop {
                StopRule::Escape => Outcome::NoEscape,
                StopRule::Horizon(_) => Outcome::Reached,
            });
        }
    }

    let mut traj = Trajectory {
        samples,
        events,
        max_energy_drift: 0.0,
        asymptotics: None,
        outcome: outcome.expect("loop sets outcome"),
        dense_step: h_out,
        escape_tol: cfg.escape_tol,
    };
    traj.max_energy_drift = energy_drift(&traj);
    Ok(traj)
}

/// Asymptotic deflection angle `atan2(eta_dot, xi_dot)` at the final sample.
pub fn deflection(traj: &Trajectory) -> Result<f64> {
    if !traj.escaped() {
        return Err(Error::NotEscaped(format!("outcome {:?}", traj.outcome)));
    }
    let p = traj.last();
    if !is_escaped(p, traj.escape_tol) {
        return Err(Error::NotEscaped(
            "final sample fails the escape criterion".into(),
        ));
    }
    Ok(p.eta_dot.atan2(p.xi_dot))
}

/// Deflection from the chord between the final sample and the sample a
/// time `span` earlier.
pub fn chord_deflection(traj: &Trajectory, span: f64) -> Result<f64> {
    if !traj.escaped() {
        return Err(Error::NotEscaped(format!("outcome {:?}", traj.outcome)));
    }
    let last = traj.last();
    let back = (span / traj.dense_step).round() as usize;
    if back == 0 || back >= traj.samples.len() {
        return Err(Error::WindowTooShort(format!(
            "no sample {span} before the end"
        )));
    }
    let first = &traj.samples[traj.samples.len() - 1 - back];
    Ok((last.eta - first.eta).atan2(last.xi - first.xi))
}

/// Recomputes events from the samples alone, by cubic Hermite interpolation
/// between neighbouring samples and bisection.
pub fn detect_events(traj: &Trajectory) -> TrajectoryEvents {
    let mut ev = TrajectoryEvents {
        blowup: traj.events.blowup,
        ..Default::default()
    };
    let eta_half = traj
        .asymptotics
        .filter(|a| a.eta_in > 0.0)
        .map(|a| 0.5 * a.eta_in);
    let accel_xi = |p: &PhasePoint| -p.eta * (2.0 * p.xi).exp();
    for w in traj.samples.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if ev.t0.is_none() && p.eta > 0.0 && q.eta <= 0.0 {
            ev.t0 = Some(hermite_root(p, q, |s| (s.eta, s.eta_dot), 0.0));
        }
        if let Some(half) = eta_half {
            if ev.t_half.is_none() && p.eta > half && q.eta <= half {
                ev.t_half = Some(hermite_root(p, q, |s| (s.eta, s.eta_dot), half));
            }
        }
        if ev.t_m.is_none() && p.xi_dot > 0.0 && q.xi_dot <= 0.0 {
            ev.t_m = Some(hermite_root(p, q, |s| (s.xi_dot, accel_xi(s)), 0.0));
        }
    }
    ev
}

fn hermite_root(
    p: &PhasePoint,
    q: &PhasePoint,
    value: impl Fn(&PhasePoint) -> (f64, f64),
    level: f64,
) -> EventPoint {
    let h = q.t - p.t;
    let (f0, d0) = value(p);
    let (f1, d1) = value(q);
    let interp = |t: f64| {
        let s = (t - p.t) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1 - level
    };
    let (mut lo, mut hi) = (p.t, q.t);
    while hi - lo > EVENT_TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if interp(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    // Linear blend of the bracketing samples; only `t` is refined.
    let s = (t - p.t) / h;
    let mix = |a: f64, b: f64| a + s * (b - a);
    EventPoint {
        t,
        state: PhasePoint::new(
            t,
            mix(p.xi, q.xi),
            mix(p.eta, q.eta),
            mix(p.xi_dot, q.xi_dot),
            mix(p.eta_dot, q.eta_dot),
        ),
    }
}

/// `max |2 E - 1|` over the samples.
pub fn energy_drift(traj: &Trajectory) -> f64 {
    traj.samples
        .iter()
        .map(|p| (2.0 * energy(p) - 1.0).abs())
        .fold(0.0, f64::max)
}
