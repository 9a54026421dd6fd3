//! Dormand-Prince 5(4) pair with the Hairer continuous extension of order 4.

use crate::dynamics::{rhs, PhasePoint};
use crate::error::Result;

pub(crate) type State = [f64; 4];

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

#[rustfmt::skip]
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub(crate) fn to_state(p: &PhasePoint) -> State {
    [p.xi, p.xi_dot, p.eta, p.eta_dot]
}

pub(crate) fn to_point(t: f64, y: &State) -> PhasePoint {
    PhasePoint::new(t, y[0], y[2], y[1], y[3])
}

fn deriv(t: f64, y: &State) -> Result<State> {
    let d = rhs(&to_point(t, y))?;
    Ok([d.dxi, d.dxi_dot, d.deta, d.deta_dot])
}

/// One accepted step together with its dense-output coefficients.
#[derive(Debug, Clone)]
pub(crate) struct AcceptedStep {
    pub t0: f64,
    pub t1: f64,
    pub y1: State,
    cont: [State; 5],
}

impl AcceptedStep {
    pub fn eval(&self, t: f64) -> State {
        if t == self.t1 {
            return self.y1;
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| {
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        })
    }
}

#[allow(clippy::large_enum_variant)]
pub(crate) enum StepOutcome {
    Accepted(AcceptedStep),
    /// Step size collapsed below `h_min` or the right-hand side overflowed
    /// repeatedly. Carries the last accepted state.
    Failed {
        reason: FailReason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FailReason {
    Overflow,
    StepUnderflow,
}

pub(crate) struct Stepper {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub t: f64,
    pub y: State,
    k1: State,
    h: f64,
}

impl Stepper {
    pub fn new(t: f64, y: State, rel_tol: f64, abs_tol: f64, h_max: f64) -> Result<Self> {
        let k1 = deriv(t, &y)?;
        Ok(Self {
            rel_tol,
            abs_tol,
            h_max,
            h_min: 1e-12,
            t,
            y,
            k1,
            h: 1e-3_f64.min(h_max),
        })
    }

    /// Advances by one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> StepOutcome {
        loop {
            let mut h = self.h.min(self.h_max);
            let mut last = false;
            if self.t + h >= t_limit {
                h = t_limit - self.t;
                last = true;
            }
            if h < self.h_min && !last {
                return StepOutcome::Failed {
                    reason: FailReason::StepUnderflow,
                };
            }
            match self.try_step(h) {
                Ok((y1, k7, err, k)) => {
                    if err <= 1.0 {
                        let t1 = if last { t_limit } else { self.t + h };
                        let cont = self.dense(h, &y1, &k, &k7);
                        let step = AcceptedStep {
                            t0: self.t,
                            t1,
                            y1,
                            cont,
                        };
                        let fac = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        self.h = h * fac;
                        self.t = t1;
                        self.y = y1;
                        self.k1 = k7;
                        return StepOutcome::Accepted(step);
                    }
                    let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    self.h = h * fac;
                }
                Err(()) => {
                    self.h = h * 0.25;
                    if self.h < self.h_min {
                        return StepOutcome::Failed {
                            reason: FailReason::Overflow,
                        };
                    }
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn try_step(&self, h: f64) -> std::result::Result<(State, State, f64, [State; 7]), ()> {
        let mut k = [[0.0; 4]; 7];
        k[0] = self.k1;
        for s in 1..7 {
            let ys: State = std::array::from_fn(|i| {
                self.y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
            });
            k[s] = deriv(self.t + C[s] * h, &ys).map_err(|_| ())?;
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        let y1: State =
            std::array::from_fn(|i| self.y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        if y1.iter().any(|v| !v.is_finite()) {
            return Err(());
        }
        let mut acc = 0.0;
        for i in 0..4 {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = self.abs_tol + self.rel_tol * self.y[i].abs().max(y1[i].abs());
            acc += (e / sc) * (e / sc);
        }
        let err = (acc / 4.0).sqrt();
        if !err.is_finite() {
            return Err(());
        }
        Ok((y1, k[6], err, k))
    }

    fn dense(&self, h: f64, y1: &State, k: &[State; 7], k7: &State) -> [State; 5] {
        let y0 = self.y;
        let mut cont = [[0.0; 4]; 5];
        for i in 0..4 {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k[0][i] - ydiff;
            cont[0][i] = y0[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * k7[i] - bspl;
            cont[4][i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
        }
        cont
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_output_hits_endpoints() {
        let p = PhasePoint::new(0.0, -0.5, 1.0, 0.3, -0.2);
        let mut s = Stepper::new(0.0, to_state(&p), 1e-10, 1e-12, 0.5).unwrap();
        let StepOutcome::Accepted(step) = s.step(10.0) else {
            panic!("step failed")
        };
        let y0 = step.eval(step.t0);
        for (a, b) in y0.iter().zip(to_state(&p).iter()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(step.eval(step.t1), step.y1);
    }
}
