use thiserror::Error;

use crate::dynamics::PhasePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input outside the domain of a closed-form expression.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The asymptotic start state was requested too late for its truncation
    /// error to be negligible.
    #[error(
        "start state at t = {t_start} has w = {w:e} above threshold {threshold:e}; start earlier"
    )]
    Precision {
        t_start: f64,
        w: f64,
        threshold: f64,
    },

    /// e^{2 xi} left the representable range.
    #[error("exponential overflow at xi = {}", .last.xi)]
    Overflow { last: PhasePoint },

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("precondition violated in {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The trajectory did not reach the escape regime.
    #[error("trajectory not escaped: {0}")]
    NotEscaped(String),

    #[error("no bracket for target deflection {theta_target}: scanned {scanned:?}")]
    BracketNotFound {
        theta_target: f64,
        /// Pairs of (eta_in, theta) seen during the scan; blow-ups are NaN.
        scanned: Vec<(f64, f64)>,
    },

    #[error("fit window too short: {0}")]
    WindowTooShort(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// The gradient flow left the open south-west quadrant.
    #[error("gradient flow left the quadrant at iteration {iteration}: (mu, nu) = ({mu}, {nu})")]
    LeftQuadrant { iteration: usize, mu: f64, nu: f64 },

    #[error("no sign change of {0} found")]
    NoCrossing(&'static str),
}
