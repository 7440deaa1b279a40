//! Online estimation of the lumped term `F` in the ultra-local model
//! `dy/dt = F + alpha * u`.
//!
//! The output derivative is the slope of a causal least-squares line through
//! the last `window_len` samples. `F` is then whatever part of that slope the
//! most recently applied input does not explain.

use std::collections::VecDeque;

use crate::error::{finite, invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltraLocalConfig {
    /// Input gain of the ultra-local model.
    pub alpha: f64,
    /// Number of samples in the derivative fit.
    pub window_len: usize,
    /// Sample spacing (s).
    pub sample_time: f64,
}

impl UltraLocalConfig {
    pub fn new(alpha: f64, window_len: usize, sample_time: f64) -> Result<Self> {
        let c = UltraLocalConfig {
            alpha,
            window_len,
            sample_time,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha != 0.0) {
            return Err(invalid(
                "alpha",
                format!("must be finite and non-zero, got {}", self.alpha),
            ));
        }
        if self.window_len < 2 {
            return Err(invalid("window_len", format!("must be >= 2, got {}", self.window_len)));
        }
        if !(self.sample_time.is_finite() && self.sample_time > 0.0) {
            return Err(invalid(
                "sample_time",
                format!("must be finite and > 0, got {}", self.sample_time),
            ));
        }
        Ok(())
    }
}

/// Sliding window of `(time, measured y)` samples and the last applied input.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    window_len: usize,
    sample_time: f64,
    samples: VecDeque<(f64, f64)>,
    /// Input applied over the most recent completed interval (W).
    pub u_prev: f64,
}

impl EstimatorState {
    pub fn new(cfg: &UltraLocalConfig) -> Self {
        EstimatorState {
            window_len: cfg.window_len,
            sample_time: cfg.sample_time,
            samples: VecDeque::with_capacity(cfg.window_len),
            u_prev: 0.0,
        }
    }

    /// Appends a sample, dropping the oldest once the window is full.
    pub fn push(&mut self, t: f64, y: f64) -> Result<()> {
        finite("t", t)?;
        finite("y", y)?;
        if let Some(&(last, _)) = self.samples.back() {
            let gap = t - last;
            if !(gap > 0.0) {
                return Err(invalid("t", format!("sample times must increase ({t} after {last})")));
            }
            if (gap - self.sample_time).abs() > 1e-9 * self.sample_time.max(1.0) {
                return Err(invalid(
                    "t",
                    format!("sample spacing {gap} s differs from sample_time {} s", self.sample_time),
                ));
            }
        }
        if self.samples.len() == self.window_len {
            self.samples.pop_front();
        }
        self.samples.push_back((t, y));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_warm(&self) -> bool {
        self.samples.len() == self.window_len
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().copied()
    }
}

/// Least-squares slope of the buffered samples.
///
/// Returns [`Error::WarmUp`] until the window is full.
pub fn estimate_derivative(est: &EstimatorState) -> Result<f64> {
    if !est.is_warm() {
        return Err(Error::WarmUp {
            have: est.samples.len(),
            need: est.window_len,
        });
    }
    let n = est.samples.len() as f64;
    let (st, sy) = est.samples.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y));
    let (tm, ym) = (st / n, sy / n);
    let (num, den) = est.samples.iter().fold((0.0, 0.0), |(num, den), &(t, y)| {
        let dt = t - tm;
        (num + dt * (y - ym), den + dt * dt)
    });
    Ok(num / den)
}

/// `F = dy_hat - alpha * u_prev`.
#[allow(non_snake_case)]
pub fn estimate_F(dy_hat: f64, u_prev: f64, alpha: f64) -> Result<f64> {
    finite("dy_hat", dy_hat)?;
    finite("u_prev", u_prev)?;
    finite("alpha", alpha)?;
    Ok(dy_hat - alpha * u_prev)
}
