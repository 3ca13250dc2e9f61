//! Discrete-time PD controllers for the 100 Hz loops.
//!
//! The platform loops run in incremental (velocity) form: each step adds a
//! rate-limited delta to the previous output. The bubble loop is a model
//! inversion plus a P+D correction on the residual force error.

use crate::characterization::{invert_bubble, BubbleModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdGains {
    /// Output units per error unit.
    pub kp: f64,
    /// Output units per (error unit / s).
    pub kd: f64,
    pub output_min: f64,
    pub output_max: f64,
    /// Maximum output change, output units per second.
    pub rate_limit: f64,
}

impl PdGains {
    /// Platform force loop: error in N, output a position command in mm.
    pub fn platform_force() -> Self {
        PdGains {
            kp: 1.0,
            kd: 0.002,
            output_min: -6.0,
            output_max: 10.0,
            rate_limit: 50.0,
        }
    }

    /// Platform position loop: error in mm, output a position command in mm.
    pub fn platform_position() -> Self {
        PdGains {
            kp: 1.0,
            kd: 0.0,
            output_min: -6.0,
            output_max: 10.0,
            rate_limit: 50.0,
        }
    }

    /// Bubble feedback correction: error in N, output in kPa.
    pub fn bubble_feedback() -> Self {
        PdGains {
            kp: 2.0,
            kd: 0.0,
            output_min: -41.0,
            output_max: 41.0,
            rate_limit: 4100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kp >= 0.0 && self.kd >= 0.0) {
            return Err(Error::InvalidParameter(
                "PD gains must be non-negative".into(),
            ));
        }
        if !(self.output_min < self.output_max) {
            return Err(Error::InvalidParameter(
                "PD output limits need min < max".into(),
            ));
        }
        if !(self.rate_limit > 0.0) {
            return Err(Error::InvalidParameter(
                "PD rate limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    pub previous_error: f64,
    pub previous_output: f64,
    /// False until the first step after a reset; the derivative term is 0 then.
    pub initialized: bool,
}

impl ControllerState {
    pub fn new(output: f64) -> Self {
        ControllerState {
            previous_error: 0.0,
            previous_output: output,
            initialized: false,
        }
    }

    pub fn reset(&mut self, output: f64) {
        *self = ControllerState::new(output);
    }

    fn derivative(&self, error: f64, dt: f64) -> f64 {
        if self.initialized {
            (error - self.previous_error) / dt
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdOutput {
    /// `kp·e + kd·ė` before limiting.
    pub raw: f64,
    /// Change actually applied to the output.
    pub delta: f64,
    pub output: f64,
}

/// One incremental PD step: the output moves by `kp·e + kd·ė`, limited to
/// `rate_limit·dt` and then to the output range.
pub fn pd_step(gains: &PdGains, state: &mut ControllerState, error: f64, dt: f64) -> PdOutput {
    debug_assert!(dt > 0.0);
    let raw = gains.kp * error + gains.kd * state.derivative(error, dt);
    let step = gains.rate_limit * dt;
    let prev = state.previous_output;
    let output = (prev + raw.clamp(-step, step)).clamp(gains.output_min, gains.output_max);
    state.previous_error = error;
    state.previous_output = output;
    state.initialized = true;
    PdOutput {
        raw,
        delta: output - prev,
        output,
    }
}

/// Bubble pressure command: inversion of the residual target plus a P+D
/// correction on the force error, clamped to `[0, p_max]`.
///
/// The correction is not accumulated between steps. The command change per
/// step is limited to `rate_limit·dt`.
pub fn bubble_ff_fb_step(
    model: &BubbleModel,
    gains: &PdGains,
    state: &mut ControllerState,
    residual_target: f64,
    residual_measured: f64,
    dt: f64,
) -> f64 {
    debug_assert!(dt > 0.0);
    let error = residual_target - residual_measured;
    let feedforward = invert_bubble(model, residual_target).value;
    let correction = (gains.kp * error + gains.kd * state.derivative(error, dt))
        .clamp(gains.output_min, gains.output_max);
    let mut command = (feedforward + correction).clamp(0.0, model.p_max);
    if state.initialized {
        let step = gains.rate_limit * dt;
        command = command.clamp(state.previous_output - step, state.previous_output + step);
    }
    state.previous_error = error;
    state.previous_output = command;
    state.initialized = true;
    command
}
