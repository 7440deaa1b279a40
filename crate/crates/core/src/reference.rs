//! Reference trajectories built from a setpoint schedule.
//!
//! A new setpoint takes effect at its scheduled start time. Smooth and ramp
//! references begin their transition at that instant and reach the new level
//! `transition_duration` seconds later.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Reference value and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub y: f64,
    pub y_dot: f64,
}

/// Piecewise-constant setpoint schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    segments: Vec<(f64, f64)>,
    transition_duration: f64,
}

impl Schedule {
    pub fn new(segments: Vec<(f64, f64)>, transition_duration: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("schedule.segments", "at least one segment required"));
        }
        if !(transition_duration.is_finite() && transition_duration >= 0.0) {
            return Err(invalid(
                "schedule.transition_duration",
                format!("must be finite and >= 0, got {transition_duration}"),
            ));
        }
        for &(t, y) in &segments {
            if !t.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite("schedule.segments"));
            }
        }
        for w in segments.windows(2) {
            let gap = w[1].0 - w[0].0;
            if gap <= 0.0 {
                return Err(invalid(
                    "schedule.segments",
                    "segment start times must be strictly increasing",
                ));
            }
            if transition_duration >= gap {
                return Err(invalid(
                    "schedule.transition_duration",
                    format!("{transition_duration} s is not shorter than the {gap} s gap"),
                ));
            }
        }
        Ok(Schedule {
            segments,
            transition_duration,
        })
    }

    /// A single setpoint held forever.
    pub fn constant(setpoint: f64) -> Self {
        Schedule {
            segments: vec![(0.0, setpoint)],
            transition_duration: 0.0,
        }
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn transition_duration(&self) -> f64 {
        self.transition_duration
    }

    pub fn start(&self) -> f64 {
        self.segments[0].0
    }

    pub fn min_setpoint(&self) -> f64 {
        self.segments.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_setpoint(&self) -> f64 {
        self.segments.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether `t` falls inside a transition window `[start, start + D)`.
    pub fn in_transition(&self, t: f64) -> bool {
        self.segments[1..]
            .iter()
            .any(|&(s, _)| t >= s && t < s + self.transition_duration)
    }

    /// Index of the segment active at `t`.
    fn active(&self, t: f64) -> Result<usize> {
        if !(t >= self.start()) {
            return Err(Error::BeforeSchedule { t, start: self.start() });
        }
        Ok(self.segments.partition_point(|&(s, _)| s <= t) - 1)
    }

    /// `(from, to, tau)` when `t` lies in a transition window.
    fn transition(&self, t: f64) -> Result<(usize, Option<(f64, f64, f64)>)> {
        let i = self.active(t)?;
        if i == 0 {
            return Ok((i, None));
        }
        let tau = t - self.segments[i].0;
        if tau < self.transition_duration {
            Ok((i, Some((self.segments[i - 1].1, self.segments[i].1, tau))))
        } else {
            Ok((i, None))
        }
    }
}

/// How a schedule is turned into a reference trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceMode {
    Step,
    Smooth,
    Ramp,
}

impl ReferenceMode {
    pub fn evaluate(self, sched: &Schedule, t: f64) -> Result<ReferencePoint> {
        match self {
            ReferenceMode::Step => step_reference(sched, t),
            ReferenceMode::Smooth => smooth_reference(sched, t),
            ReferenceMode::Ramp => ramp_reference(sched, t),
        }
    }
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMode::Step => "step",
            ReferenceMode::Smooth => "smooth",
            ReferenceMode::Ramp => "ramp",
        })
    }
}

impl FromStr for ReferenceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "step" => Ok(ReferenceMode::Step),
            "smooth" => Ok(ReferenceMode::Smooth),
            "ramp" => Ok(ReferenceMode::Ramp),
            other => Err(format!(
                "unknown reference mode `{other}` (expected step, smooth or ramp)"
            )),
        }
    }
}

/// Raw setpoint steps. The derivative is zero everywhere, jumps included.
pub fn step_reference(sched: &Schedule, t: f64) -> Result<ReferencePoint> {
    let i = sched.active(t)?;
    Ok(ReferencePoint {
        y: sched.segments[i].1,
        y_dot: 0.0,
    })
}

/// Quintic `6s^5 - 15s^4 + 10s^3` blend between consecutive setpoints.
pub fn smooth_reference(sched: &Schedule, t: f64) -> Result<ReferencePoint> {
    match sched.transition(t)? {
        (_, Some((a, b, tau))) => {
            let d = sched.transition_duration;
            let s = tau / d;
            let shape = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
            let slope = 30.0 * s * s * (1.0 - s) * (1.0 - s);
            Ok(ReferencePoint {
                y: a + (b - a) * shape,
                y_dot: (b - a) * slope / d,
            })
        }
        (i, None) => Ok(ReferencePoint {
            y: sched.segments[i].1,
            y_dot: 0.0,
        }),
    }
}

/// Linear setpoint ramp.
pub fn ramp_reference(sched: &Schedule, t: f64) -> Result<ReferencePoint> {
    match sched.transition(t)? {
        (_, Some((a, b, tau))) => {
            let d = sched.transition_duration;
            Ok(ReferencePoint {
                y: a + (b - a) * tau / d,
                y_dot: (b - a) / d,
            })
        }
        (i, None) => Ok(ReferencePoint {
            y: sched.segments[i].1,
            y_dot: 0.0,
        }),
    }
}
