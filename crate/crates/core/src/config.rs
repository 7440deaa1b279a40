//! Flat `key = value` scenario files.
//!
//! ```text
//! # comments start with '#'
//! scenario.horizon = 172800
//! scenario.dt = 60
//! plant.c_a = 1400
//! schedule.segments = 0:16, 25200:19, 82800:16
//! controller.kind = ip
//! controller.alpha = 0.5
//! t_ext.kind = sinusoid
//! ```
//!
//! Keys that are absent keep the value of [`Scenario::default`]. Unknown keys
//! and keys that do not apply to the selected controller or outdoor profile
//! are rejected. [`write_scenario`] emits every key, so its output parses back
//! to the same scenario.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::controllers::{Actuation, ActuatorMode, ControllerConfig, ControllerKind, FlatCorrector, IpGains, PiGains};
use crate::engine::{Scenario, TExtProfile};
use crate::error::{Error, Result};
use crate::plant::ThermalParams;
use crate::reference::{ReferenceMode, Schedule};

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: i + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config {
                    line: i + 1,
                    reason: "empty key".into(),
                });
            }
            if map.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Config {
                    line: i + 1,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Entries { map })
    }

    fn take_str(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| Error::Config {
                line,
                reason: format!("`{key}`: {e}"),
            }),
        }
    }

    fn set<T: FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key)? {
            *slot = v;
        }
        Ok(())
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config {
                line,
                reason: format!("unknown or inapplicable key `{key}`"),
            }),
        }
    }
}

fn parse_segments(line: usize, v: &str) -> Result<Vec<(f64, f64)>> {
    v.split(',')
        .map(|item| {
            let item = item.trim();
            let parsed = item
                .split_once(':')
                .and_then(|(t, y)| t.trim().parse::<f64>().ok().zip(y.trim().parse::<f64>().ok()));
            parsed.ok_or_else(|| Error::Config {
                line,
                reason: format!("bad schedule segment `{item}` (expected `start_s:setpoint_C`)"),
            })
        })
        .collect()
}

fn set_params(e: &mut Entries, prefix: &str, p: &mut ThermalParams) -> Result<()> {
    e.set(&format!("{prefix}.c_a"), &mut p.c_a)?;
    e.set(&format!("{prefix}.c_w"), &mut p.c_w)?;
    e.set(&format!("{prefix}.k_c"), &mut p.k_c)?;
    e.set(&format!("{prefix}.k_f"), &mut p.k_f)?;
    e.set(&format!("{prefix}.k_ext"), &mut p.k_ext)?;
    e.set(&format!("{prefix}.wall_denominator_cw"), &mut p.wall_denominator_cw)?;
    Ok(())
}

/// Parses a scenario. Relative `t_ext.file` paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<Scenario> {
    let mut e = Entries::parse(text)?;
    let mut s = Scenario::default();

    e.set("scenario.horizon", &mut s.horizon)?;
    e.set("scenario.dt", &mut s.dt)?;
    e.set("scenario.noise_std", &mut s.noise_std)?;
    e.set("scenario.rng_seed", &mut s.rng_seed)?;

    set_params(&mut e, "plant", &mut s.plant)?;

    e.set("initial.t_int", &mut s.initial_state.t_int)?;
    e.set("initial.t_wall", &mut s.initial_state.t_wall)?;

    let mut segments = s.schedule.segments().to_vec();
    let mut duration = s.schedule.transition_duration();
    if let Some((line, v)) = e.take_str("schedule.segments") {
        segments = parse_segments(line, &v)?;
    }
    e.set("schedule.transition_duration", &mut duration)?;
    s.schedule = Schedule::new(segments, duration)?;

    if let Some(m) = e.take::<ReferenceMode>("reference.mode")? {
        s.reference_mode = m;
    }

    let kind = e
        .take::<ControllerKind>("controller.kind")?
        .unwrap_or(s.controller.kind());
    s.controller = match kind {
        ControllerKind::Ip => {
            let mut gains = IpGains::default();
            let mut window_len = 5usize;
            e.set("controller.alpha", &mut gains.alpha)?;
            e.set("controller.k_p", &mut gains.k_p)?;
            e.set("controller.window_len", &mut window_len)?;
            ControllerConfig::Ip { gains, window_len }
        }
        ControllerKind::Pi => {
            let mut gains = PiGains::default();
            e.set("controller.k_p", &mut gains.k_p)?;
            e.set("controller.k_i", &mut gains.k_i)?;
            ControllerConfig::Pi { gains }
        }
        ControllerKind::FlatP | ControllerKind::FlatPi => {
            let mut model = ThermalParams::NOMINAL;
            set_params(&mut e, "controller.model", &mut model)?;
            let corrector = if kind == ControllerKind::FlatP {
                let mut pole = -0.01;
                e.set("controller.pole", &mut pole)?;
                FlatCorrector::P { pole }
            } else {
                let mut double_pole = -0.005;
                e.set("controller.double_pole", &mut double_pole)?;
                FlatCorrector::Pi { double_pole }
            };
            ControllerConfig::Flat { corrector, model }
        }
    };

    let mut mode = s.actuator.mode;
    let mut q_max = s.actuator.q_max;
    if let Some(m) = e.take::<Actuation>("actuator.mode")? {
        mode = m;
    }
    e.set("actuator.q_max", &mut q_max)?;
    s.actuator = ActuatorMode { mode, q_max };

    if let Some((line, kind)) = e.take_str("t_ext.kind") {
        s.t_ext = match kind.as_str() {
            "constant" => {
                let v = e
                    .take("t_ext.value")?
                    .ok_or_else(|| Error::MissingKey("t_ext.value".into()))?;
                TExtProfile::Constant(v)
            }
            "sinusoid" => {
                let TExtProfile::Sinusoid {
                    mut mean,
                    mut amplitude,
                    mut period,
                    mut phase,
                } = TExtProfile::default_sinusoid()
                else {
                    unreachable!()
                };
                e.set("t_ext.mean", &mut mean)?;
                e.set("t_ext.amplitude", &mut amplitude)?;
                e.set("t_ext.period", &mut period)?;
                e.set("t_ext.phase", &mut phase)?;
                TExtProfile::Sinusoid {
                    mean,
                    amplitude,
                    period,
                    phase,
                }
            }
            "table" => {
                let (_, file) = e
                    .take_str("t_ext.file")
                    .ok_or_else(|| Error::MissingKey("t_ext.file".into()))?;
                let mut path = PathBuf::from(file);
                if path.is_relative() {
                    if let Some(base) = base_dir {
                        path = base.join(path);
                    }
                }
                TExtProfile::load_table(&path)?
            }
            other => {
                return Err(Error::Config {
                    line,
                    reason: format!("unknown t_ext.kind `{other}` (expected constant, sinusoid or table)"),
                })
            }
        };
    }

    e.finish()?;
    s.validate()?;
    Ok(s)
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path.parent())
}

fn write_params(out: &mut String, prefix: &str, p: &ThermalParams) {
    let _ = writeln!(out, "{prefix}.c_a = {}", p.c_a);
    let _ = writeln!(out, "{prefix}.c_w = {}", p.c_w);
    let _ = writeln!(out, "{prefix}.k_c = {}", p.k_c);
    let _ = writeln!(out, "{prefix}.k_f = {}", p.k_f);
    let _ = writeln!(out, "{prefix}.k_ext = {}", p.k_ext);
    let _ = writeln!(out, "{prefix}.wall_denominator_cw = {}", p.wall_denominator_cw);
}

/// Serializes every field of a scenario.
pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario.horizon = {}", s.horizon);
    let _ = writeln!(out, "scenario.dt = {}", s.dt);
    let _ = writeln!(out, "scenario.noise_std = {}", s.noise_std);
    let _ = writeln!(out, "scenario.rng_seed = {}", s.rng_seed);
    write_params(&mut out, "plant", &s.plant);
    let _ = writeln!(out, "initial.t_int = {}", s.initial_state.t_int);
    let _ = writeln!(out, "initial.t_wall = {}", s.initial_state.t_wall);
    let segs: Vec<String> = s.schedule.segments().iter().map(|(t, y)| format!("{t}:{y}")).collect();
    let _ = writeln!(out, "schedule.segments = {}", segs.join(", "));
    let _ = writeln!(
        out,
        "schedule.transition_duration = {}",
        s.schedule.transition_duration()
    );
    let _ = writeln!(out, "reference.mode = {}", s.reference_mode);
    let _ = writeln!(out, "controller.kind = {}", s.controller.kind());
    match &s.controller {
        ControllerConfig::Ip { gains, window_len } => {
            let _ = writeln!(out, "controller.alpha = {}", gains.alpha);
            let _ = writeln!(out, "controller.k_p = {}", gains.k_p);
            let _ = writeln!(out, "controller.window_len = {window_len}");
        }
        ControllerConfig::Pi { gains } => {
            let _ = writeln!(out, "controller.k_p = {}", gains.k_p);
            let _ = writeln!(out, "controller.k_i = {}", gains.k_i);
        }
        ControllerConfig::Flat { corrector, model } => {
            match corrector {
                FlatCorrector::P { pole } => {
                    let _ = writeln!(out, "controller.pole = {pole}");
                }
                FlatCorrector::Pi { double_pole } => {
                    let _ = writeln!(out, "controller.double_pole = {double_pole}");
                }
            }
            write_params(&mut out, "controller.model", model);
        }
    }
    let _ = writeln!(out, "actuator.mode = {}", s.actuator.mode);
    let _ = writeln!(out, "actuator.q_max = {}", s.actuator.q_max);
    match &s.t_ext {
        TExtProfile::Constant(v) => {
            let _ = writeln!(out, "t_ext.kind = constant");
            let _ = writeln!(out, "t_ext.value = {v}");
        }
        TExtProfile::Sinusoid {
            mean,
            amplitude,
            period,
            phase,
        } => {
            let _ = writeln!(out, "t_ext.kind = sinusoid");
            let _ = writeln!(out, "t_ext.mean = {mean}");
            let _ = writeln!(out, "t_ext.amplitude = {amplitude}");
            let _ = writeln!(out, "t_ext.period = {period}");
            let _ = writeln!(out, "t_ext.phase = {phase}");
        }
        TExtProfile::Table { path, .. } => {
            let _ = writeln!(out, "t_ext.kind = table");
            let _ = writeln!(out, "t_ext.file = {}", path.display());
        }
    }
    out
}
