//! Closed-loop simulation and comparison metrics.
//!
//! One tick of [`run`]:
//!
//! 1. sample the measured indoor temperature (true value plus noise),
//! 2. update the estimator window or the error integral,
//! 3. evaluate the reference,
//! 4. compute the command and clamp it to the actuator range,
//! 5. advance the plant one RK4 step with the applied heat and the current
//!    outdoor temperature.
//!
//! Controllers only see the measured temperature. Metrics use the true one.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::controllers::{
    clamp, flat_feedforward, ip_control, pi_control, Actuation, ActuatorMode, ControllerConfig, FlatGains,
};
use crate::error::{invalid, Error, Result};
use crate::estimation::{estimate_F, estimate_derivative, EstimatorState, UltraLocalConfig};
use crate::noise::GaussianNoise;
use crate::plant::{step_rk4, ThermalParams, ThermalState};
use crate::reference::{ReferenceMode, Schedule};

const HOUR: f64 = 3600.0;

/// Outdoor temperature over time.
#[derive(Debug, Clone, PartialEq)]
pub enum TExtProfile {
    Constant(f64),
    /// `mean + amplitude * sin(2 pi t / period + phase)`, phase in radians.
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
        phase: f64,
    },
    /// Linear interpolation of `(time_s, temp_C)` points, held flat past the ends.
    Table {
        path: PathBuf,
        points: Vec<(f64, f64)>,
    },
}

impl TExtProfile {
    /// 5 ± 5 °C over 24 h, coldest at 03:00.
    pub fn default_sinusoid() -> Self {
        TExtProfile::Sinusoid {
            mean: 5.0,
            amplitude: 5.0,
            period: 24.0 * HOUR,
            phase: -0.75 * std::f64::consts::PI,
        }
    }

    /// Reads a two-column `time_s,temp_C` CSV. A non-numeric first line is
    /// taken as a header.
    pub fn load_table(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = (cols.next(), cols.next());
            let parsed = match (a, b, cols.next()) {
                (Some(a), Some(b), None) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if i == 0 => continue,
                None => {
                    return Err(Error::Config {
                        line: i + 1,
                        reason: format!("{}: expected `time_s,temp_C`, got `{line}`", path.display()),
                    })
                }
            }
        }
        let p = TExtProfile::Table {
            path: path.to_path_buf(),
            points,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TExtProfile::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::NonFinite("t_ext.value"));
                }
            }
            TExtProfile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => {
                if ![mean, amplitude, phase].iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite("t_ext"));
                }
                if !(period.is_finite() && *period > 0.0) {
                    return Err(invalid("t_ext.period", "must be finite and > 0"));
                }
            }
            TExtProfile::Table { points, .. } => {
                if points.is_empty() {
                    return Err(invalid("t_ext.file", "table has no rows"));
                }
                if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(Error::NonFinite("t_ext.file"));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(invalid("t_ext.file", "times must be strictly increasing"));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            TExtProfile::Constant(c) => *c,
            TExtProfile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (std::f64::consts::TAU * t / period + phase).sin(),
            TExtProfile::Table { points, .. } => {
                let i = points.partition_point(|p| p.0 <= t);
                if i == 0 {
                    points[0].1
                } else if i == points.len() {
                    points[i - 1].1
                } else {
                    let (t0, v0) = points[i - 1];
                    let (t1, v1) = points[i];
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }
}

/// Everything needed to reproduce one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub horizon: f64,
    pub dt: f64,
    pub plant: ThermalParams,
    pub initial_state: ThermalState,
    pub schedule: Schedule,
    pub reference_mode: ReferenceMode,
    pub controller: ControllerConfig,
    pub actuator: ActuatorMode,
    pub t_ext: TExtProfile,
    /// Standard deviation of the measurement noise on the indoor temperature (K).
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl Default for Scenario {
    /// 48 h at 60 s, 16 °C nights and 19 °C days (07:00-23:00), one-hour
    /// smooth transitions, outdoor 5 ± 5 °C with its minimum at 03:00,
    /// 0.05 K measurement noise, iP controller, heating only (2 kW).
    fn default() -> Self {
        let segments = vec![
            (0.0, 16.0),
            (7.0 * HOUR, 19.0),
            (23.0 * HOUR, 16.0),
            (31.0 * HOUR, 19.0),
            (47.0 * HOUR, 16.0),
        ];
        Scenario {
            horizon: 48.0 * HOUR,
            dt: 60.0,
            plant: ThermalParams::NOMINAL,
            initial_state: ThermalState::new(16.0, 15.5),
            schedule: Schedule::new(segments, HOUR).expect("default schedule is valid"),
            reference_mode: ReferenceMode::Smooth,
            controller: ControllerConfig::ip_default(),
            actuator: ActuatorMode {
                mode: Actuation::HeatingOnly,
                q_max: 2000.0,
            },
            t_ext: TExtProfile::default_sinusoid(),
            noise_std: 0.05,
            rng_seed: 42,
        }
    }
}

impl Scenario {
    pub fn ticks(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(invalid("horizon", "must be finite and > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", "must be finite and > 0"));
        }
        let n = self.horizon / self.dt;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(invalid(
                "dt",
                format!("{} s does not divide the horizon {} s", self.dt, self.horizon),
            ));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(invalid("noise_std", "must be finite and >= 0"));
        }
        if self.schedule.start() > 0.0 {
            return Err(invalid("schedule", "must start at or before t = 0"));
        }
        self.plant.validate()?;
        self.initial_state.validate()?;
        self.controller.validate()?;
        self.actuator.validate()?;
        self.t_ext.validate()?;
        Ok(())
    }
}

/// One logged tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub t_int_true: f64,
    pub t_int_measured: f64,
    pub t_wall: f64,
    pub t_ext: f64,
    pub y_star: f64,
    pub y_star_dot: f64,
    pub q_command: f64,
    pub q_applied: f64,
    /// Present for controllers with an ultra-local estimator.
    pub f_estim: Option<f64>,
}

impl SimRecord {
    /// True tracking error `T_int - y*`.
    pub fn error(&self) -> f64 {
        self.t_int_true - self.y_star
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub records: Vec<SimRecord>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Per-run state of the active control law.
enum LoopState {
    Ip {
        gains: crate::controllers::IpGains,
        est: EstimatorState,
    },
    Pi {
        gains: crate::controllers::PiGains,
        integral: f64,
    },
    Flat {
        gains: FlatGains,
        model: ThermalParams,
        integral: f64,
    },
}

impl LoopState {
    fn new(s: &Scenario) -> Result<Self> {
        Ok(match s.controller {
            ControllerConfig::Ip { gains, window_len } => {
                let cfg = UltraLocalConfig::new(gains.alpha, window_len, s.dt)?;
                LoopState::Ip {
                    gains,
                    est: EstimatorState::new(&cfg),
                }
            }
            ControllerConfig::Pi { gains } => LoopState::Pi { gains, integral: 0.0 },
            ControllerConfig::Flat { corrector, model } => LoopState::Flat {
                gains: FlatGains::place(corrector, &model)?,
                model,
                integral: 0.0,
            },
        })
    }
}

/// Rectangle-rule integration with conditional anti-windup: the integral is
/// held while the command is saturated, unless the new increment reduces
/// the saturation.
fn integrate_clamped(integral: f64, e: f64, dt: f64, actuator: &ActuatorMode, law: impl Fn(f64) -> f64) -> (f64, f64) {
    let tentative = integral + e * dt;
    let q_try = law(tentative);
    let excess_try = (q_try - clamp(q_try, actuator)).abs();
    if excess_try == 0.0 {
        return (q_try, tentative);
    }
    let q_held = law(integral);
    let excess_held = (q_held - clamp(q_held, actuator)).abs();
    if excess_try < excess_held {
        (q_try, tentative)
    } else {
        (q_held, integral)
    }
}

/// Runs a scenario.
pub fn run(scenario: &Scenario) -> Result<TimeSeries> {
    run_with_measurement_hook(scenario, |_, y| y)
}

/// Like [`run`], with `hook(tick, measured)` able to alter each measurement
/// before the controller sees it.
pub fn run_with_measurement_hook(scenario: &Scenario, mut hook: impl FnMut(usize, f64) -> f64) -> Result<TimeSeries> {
    scenario.validate()?;
    let s = scenario;
    let n = s.ticks();
    let mut noise = GaussianNoise::new(s.rng_seed, s.noise_std);
    let mut ctl = LoopState::new(s)?;
    let mut state = s.initial_state;
    let mut u_prev = 0.0;
    let mut records = Vec::with_capacity(n);

    for tick in 0..n {
        let nan = || Error::NanAtTick { tick };
        let t = tick as f64 * s.dt;
        let t_ext = s.t_ext.at(t);
        let y = hook(tick, state.t_int + noise.sample());
        if !y.is_finite() {
            return Err(nan());
        }
        let r = s.reference_mode.evaluate(&s.schedule, t)?;
        let e = y - r.y;

        let (q_command, f_estim) = match &mut ctl {
            LoopState::Ip { gains, est } => {
                est.push(t, y).map_err(|_| nan())?;
                est.u_prev = u_prev;
                let f = match estimate_derivative(est) {
                    Ok(dy) => estimate_F(dy, est.u_prev, gains.alpha).map_err(|_| nan())?,
                    Err(Error::WarmUp { .. }) => 0.0,
                    Err(other) => return Err(other),
                };
                (ip_control(f, r.y_dot, e, gains), Some(f))
            }
            LoopState::Pi { gains, integral } => {
                let (q, i) = integrate_clamped(*integral, e, s.dt, &s.actuator, |i| pi_control(e, i, gains));
                *integral = i;
                (q, None)
            }
            LoopState::Flat { gains, model, integral } => {
                let ff = flat_feedforward(r.y, r.y_dot, model);
                let (q, i) = integrate_clamped(*integral, e, s.dt, &s.actuator, |i| ff + gains.k_p * e + gains.k_i * i);
                *integral = i;
                (q, None)
            }
        };
        if !q_command.is_finite() {
            return Err(nan());
        }
        let q_applied = clamp(q_command, &s.actuator);

        records.push(SimRecord {
            t,
            t_int_true: state.t_int,
            t_int_measured: y,
            t_wall: state.t_wall,
            t_ext,
            y_star: r.y,
            y_star_dot: r.y_dot,
            q_command,
            q_applied,
            f_estim,
        });

        state = step_rk4(state, q_applied, t_ext, s.dt, &s.plant).map_err(|_| nan())?;
        u_prev = q_applied;
    }
    Ok(TimeSeries { dt: s.dt, records })
}

/// Runs independent scenarios in parallel; results keep the input order.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<TimeSeries>> {
    scenarios.par_iter().map(run).collect()
}

/// Summary of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// K
    pub rmse: f64,
    /// K
    pub max_abs_error: f64,
    /// Heating energy (J).
    pub energy: f64,
    /// Cooling energy (J).
    pub cooling_energy: f64,
    /// Sum of absolute tick-to-tick changes of the applied heat (W).
    pub control_variation: f64,
    /// Fraction of ticks where the command was clamped.
    pub saturation_fraction: f64,
}

pub fn compute_metrics(ts: &TimeSeries) -> Result<Metrics> {
    let recs = &ts.records;
    if recs.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = recs.len() as f64;
    let sq: f64 = recs.iter().map(|r| r.error() * r.error()).sum();
    let max_abs_error = recs.iter().map(|r| r.error().abs()).fold(0.0, f64::max);
    let energy = recs.iter().map(|r| r.q_applied.max(0.0) * ts.dt).sum();
    let cooling_energy = recs.iter().map(|r| (-r.q_applied).max(0.0) * ts.dt).sum();
    let control_variation = recs.windows(2).map(|w| (w[1].q_applied - w[0].q_applied).abs()).sum();
    let saturated = recs.iter().filter(|r| r.q_applied != r.q_command).count();
    Ok(Metrics {
        // clamp guards against rounding pushing rmse a hair above the max
        rmse: (sq / n).sqrt().min(max_abs_error),
        max_abs_error,
        energy,
        cooling_energy,
        control_variation,
        saturation_fraction: saturated as f64 / n,
    })
}

/// Re-runs `base` with every plant coefficient scaled by each factor, the
/// controller tuning left untouched.
pub fn sweep(base: &Scenario, factors: &[f64]) -> Result<Vec<(f64, Metrics)>> {
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(invalid("factors", format!("must be finite and > 0, got {bad}")));
    }
    factors
        .par_iter()
        .map(|&f| {
            let mut s = base.clone();
            s.plant = base.plant.scaled(f);
            let ts = run(&s)?;
            Ok((f, compute_metrics(&ts)?))
        })
        .collect()
}

/// The seven comparison runs derived from `base`, in table order.
///
/// `base` supplies everything except controller, reference mode and, for the
/// two iP rows, the actuator mode.
pub fn comparison_suite(base: &Scenario) -> Vec<(&'static str, Scenario)> {
    let with = |controller: ControllerConfig, reference: ReferenceMode, mode: Option<Actuation>| {
        let mut s = base.clone();
        s.controller = controller;
        s.reference_mode = reference;
        if let Some(m) = mode {
            s.actuator.mode = m;
        }
        s
    };
    vec![
        (
            "ip_heat",
            with(
                ControllerConfig::ip_default(),
                ReferenceMode::Smooth,
                Some(Actuation::HeatingOnly),
            ),
        ),
        (
            "ip_heat_cool",
            with(
                ControllerConfig::ip_default(),
                ReferenceMode::Smooth,
                Some(Actuation::HeatingAndCooling),
            ),
        ),
        (
            "pi_step",
            with(ControllerConfig::pi_default(), ReferenceMode::Step, None),
        ),
        (
            "pi_smooth",
            with(ControllerConfig::pi_default(), ReferenceMode::Smooth, None),
        ),
        (
            "flat_p",
            with(ControllerConfig::flat_p(-0.01), ReferenceMode::Smooth, None),
        ),
        (
            "flat_pi_-0.005",
            with(ControllerConfig::flat_pi(-0.005), ReferenceMode::Smooth, None),
        ),
        (
            "flat_pi_-0.001",
            with(ControllerConfig::flat_pi(-0.001), ReferenceMode::Smooth, None),
        ),
    ]
}
