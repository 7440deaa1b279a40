#![allow(dead_code)]

use std::path::Path;

use mfc_heat::controllers::{Actuation, ActuatorMode, ControllerConfig, FlatCorrector, IpGains, PiGains};
use mfc_heat::engine::{Scenario, TExtProfile};
use mfc_heat::plant::{ThermalParams, ThermalState};
use mfc_heat::reference::{ReferenceMode, Schedule};
use rand::Rng;

fn params<R: Rng>(rng: &mut R) -> ThermalParams {
    let mut p = ThermalParams::NOMINAL.scaled(rng.gen_range(0.3..3.0));
    p.k_ext *= rng.gen_range(0.5..2.0);
    p.wall_denominator_cw = rng.gen_bool(0.3);
    p
}

/// A valid scenario with every field drawn at random. `table` is a CSV
/// usable as a tabulated outdoor profile.
pub fn random_scenario<R: Rng>(rng: &mut R, table: &Path) -> Scenario {
    let dt = [10.0, 30.0, 60.0, 120.0][rng.gen_range(0..4)];
    let horizon = dt * rng.gen_range(10..3000) as f64;
    let d = rng.gen_range(60.0..5000.0);
    let mut t = -rng.gen_range(0.0..1000.0);
    let mut segments = Vec::new();
    for _ in 0..rng.gen_range(1..7) {
        segments.push((t, rng.gen_range(10.0..25.0)));
        t += d + rng.gen_range(1.0..20000.0);
    }
    let controller = match rng.gen_range(0..4) {
        0 => ControllerConfig::Ip {
            gains: IpGains {
                alpha: rng.gen_range(0.01..5.0),
                k_p: -rng.gen_range(0.001..2.0),
            },
            window_len: rng.gen_range(2..12),
        },
        1 => ControllerConfig::Pi {
            gains: PiGains {
                k_p: -rng.gen_range(0.0..50.0),
                k_i: -rng.gen_range(0.0..1.0),
            },
        },
        2 => ControllerConfig::Flat {
            corrector: FlatCorrector::P {
                pole: -rng.gen_range(1e-4..0.1),
            },
            model: params(rng),
        },
        _ => ControllerConfig::Flat {
            corrector: FlatCorrector::Pi {
                double_pole: -rng.gen_range(1e-4..0.1),
            },
            model: params(rng),
        },
    };
    let t_ext = match rng.gen_range(0..3) {
        0 => TExtProfile::Constant(rng.gen_range(-20.0..30.0)),
        1 => TExtProfile::Sinusoid {
            mean: rng.gen_range(-10.0..20.0),
            amplitude: rng.gen_range(0.0..15.0),
            period: rng.gen_range(3600.0..200000.0),
            phase: rng.gen_range(-7.0..7.0),
        },
        _ => TExtProfile::load_table(table).unwrap(),
    };
    Scenario {
        horizon,
        dt,
        plant: params(rng),
        initial_state: ThermalState::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0)),
        schedule: Schedule::new(segments, d).unwrap(),
        reference_mode: [ReferenceMode::Step, ReferenceMode::Smooth, ReferenceMode::Ramp][rng.gen_range(0..3)],
        controller,
        actuator: ActuatorMode::new(
            if rng.gen_bool(0.5) {
                Actuation::HeatingOnly
            } else {
                Actuation::HeatingAndCooling
            },
            rng.gen_range(10.0..10000.0),
        )
        .unwrap(),
        t_ext,
        noise_std: if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..0.5)
        },
        rng_seed: rng.gen(),
    }
}

pub fn write_table(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("outdoor.csv");
    std::fs::write(&path, "time_s,temp_C\n0,2.5\n43200,9.25\n86400,1.125\n172800,-3\n").unwrap();
    path
}
