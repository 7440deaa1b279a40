//! Control laws and the actuator limit.
//!
//! All laws use the tracking error `e = y - y*`. Gains are signed accordingly:
//! a room that is too cold has `e < 0`, and the negative proportional gains of
//! the default tunings turn that into positive heat.

use std::fmt;
use std::str::FromStr;

use crate::error::{finite, invalid, Result};
use crate::plant::ThermalParams;

/// Tuning of the intelligent proportional controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpGains {
    pub alpha: f64,
    /// Proportional gain on the tracking error (1/s).
    pub k_p: f64,
}

impl Default for IpGains {
    fn default() -> Self {
        IpGains { alpha: 0.5, k_p: -0.5 }
    }
}

impl IpGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha != 0.0) {
            return Err(invalid("controller.alpha", "must be finite and non-zero"));
        }
        finite("controller.k_p", self.k_p)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiGains {
    /// W/K
    pub k_p: f64,
    /// W/(K s)
    pub k_i: f64,
}

impl Default for PiGains {
    fn default() -> Self {
        PiGains { k_p: -0.5, k_i: -0.01 }
    }
}

impl PiGains {
    pub fn validate(&self) -> Result<()> {
        finite("controller.k_p", self.k_p)?;
        finite("controller.k_i", self.k_i)?;
        Ok(())
    }
}

/// Feedback part added to the flatness feedforward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlatCorrector {
    /// Static gain placing a single closed-loop pole (1/s).
    P { pole: f64 },
    /// PI placing a double closed-loop pole (1/s).
    Pi { double_pole: f64 },
}

/// Corrector gains obtained by pole placement on the first-order design model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatGains {
    pub corrector: FlatCorrector,
    pub k_p: f64,
    pub k_i: f64,
}

impl FlatGains {
    pub fn place(corrector: FlatCorrector, model: &ThermalParams) -> Result<Self> {
        match corrector {
            FlatCorrector::P { pole } => Ok(FlatGains {
                corrector,
                k_p: place_flat_p_gain(pole, model)?,
                k_i: 0.0,
            }),
            FlatCorrector::Pi { double_pole } => {
                let (k_p, k_i) = place_flat_pi_gains(double_pole, model)?;
                Ok(FlatGains { corrector, k_p, k_i })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Actuation {
    HeatingOnly,
    HeatingAndCooling,
}

impl fmt::Display for Actuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actuation::HeatingOnly => "heat",
            Actuation::HeatingAndCooling => "heat_cool",
        })
    }
}

impl FromStr for Actuation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "heat" => Ok(Actuation::HeatingOnly),
            "heat_cool" => Ok(Actuation::HeatingAndCooling),
            other => Err(format!("unknown actuator mode `{other}` (expected heat or heat_cool)")),
        }
    }
}

/// Actuator range: `[0, q_max]` for heating only, `[-q_max, q_max]` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorMode {
    pub mode: Actuation,
    pub q_max: f64,
}

impl ActuatorMode {
    pub fn new(mode: Actuation, q_max: f64) -> Result<Self> {
        let a = ActuatorMode { mode, q_max };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_max.is_finite() && self.q_max > 0.0) {
            return Err(invalid(
                "actuator.q_max",
                format!("must be finite and > 0, got {}", self.q_max),
            ));
        }
        Ok(())
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self.mode {
            Actuation::HeatingOnly => (0.0, self.q_max),
            Actuation::HeatingAndCooling => (-self.q_max, self.q_max),
        }
    }
}

/// Which control law drives the loop, with its tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerConfig {
    Ip {
        gains: IpGains,
        window_len: usize,
    },
    Pi {
        gains: PiGains,
    },
    /// Flatness feedforward computed from `model`, plus a corrector tuned on it.
    Flat {
        corrector: FlatCorrector,
        model: ThermalParams,
    },
}

impl ControllerConfig {
    pub fn ip_default() -> Self {
        ControllerConfig::Ip {
            gains: IpGains::default(),
            window_len: 5,
        }
    }

    pub fn pi_default() -> Self {
        ControllerConfig::Pi {
            gains: PiGains::default(),
        }
    }

    pub fn flat_p(pole: f64) -> Self {
        ControllerConfig::Flat {
            corrector: FlatCorrector::P { pole },
            model: ThermalParams::NOMINAL,
        }
    }

    pub fn flat_pi(double_pole: f64) -> Self {
        ControllerConfig::Flat {
            corrector: FlatCorrector::Pi { double_pole },
            model: ThermalParams::NOMINAL,
        }
    }

    pub fn kind(&self) -> ControllerKind {
        match self {
            ControllerConfig::Ip { .. } => ControllerKind::Ip,
            ControllerConfig::Pi { .. } => ControllerKind::Pi,
            ControllerConfig::Flat {
                corrector: FlatCorrector::P { .. },
                ..
            } => ControllerKind::FlatP,
            ControllerConfig::Flat {
                corrector: FlatCorrector::Pi { .. },
                ..
            } => ControllerKind::FlatPi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControllerConfig::Ip { gains, window_len } => {
                gains.validate()?;
                if *window_len < 2 {
                    return Err(invalid("controller.window_len", "must be >= 2"));
                }
                Ok(())
            }
            ControllerConfig::Pi { gains } => gains.validate(),
            ControllerConfig::Flat { corrector, model } => {
                model.validate()?;
                FlatGains::place(*corrector, model).map(|_| ())
            }
        }
    }
}

/// Controller family, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Ip,
    Pi,
    FlatP,
    FlatPi,
}

impl ControllerKind {
    /// Default tuning for this family.
    pub fn default_config(self) -> ControllerConfig {
        match self {
            ControllerKind::Ip => ControllerConfig::ip_default(),
            ControllerKind::Pi => ControllerConfig::pi_default(),
            ControllerKind::FlatP => ControllerConfig::flat_p(-0.01),
            ControllerKind::FlatPi => ControllerConfig::flat_pi(-0.005),
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::Ip => "ip",
            ControllerKind::Pi => "pi",
            ControllerKind::FlatP => "flat_p",
            ControllerKind::FlatPi => "flat_pi",
        })
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ip" => Ok(ControllerKind::Ip),
            "pi" => Ok(ControllerKind::Pi),
            "flat_p" => Ok(ControllerKind::FlatP),
            "flat_pi" => Ok(ControllerKind::FlatPi),
            other => Err(format!(
                "unknown controller `{other}` (expected ip, pi, flat_p or flat_pi)"
            )),
        }
    }
}

/// Intelligent proportional law `u = -(F - y*' - K_P e) / alpha`.
pub fn ip_control(f_estim: f64, y_star_dot: f64, e: f64, g: &IpGains) -> f64 {
    -(f_estim - y_star_dot - g.k_p * e) / g.alpha
}

/// `q = k_p e + k_i * integral(e)`.
pub fn pi_control(e: f64, e_integral: f64, g: &PiGains) -> f64 {
    g.k_p * e + g.k_i * e_integral
}

/// Open-loop heat that makes the air node follow `T*` when the wall and
/// outdoor temperatures are ignored: `c_a T*' + (k_c + k_f) T*`.
pub fn flat_feedforward(t_int_star: f64, t_int_star_dot: f64, p: &ThermalParams) -> f64 {
    p.c_a * t_int_star_dot + (p.k_c + p.k_f) * t_int_star
}

fn check_stable_pole(name: &'static str, pole: f64) -> Result<()> {
    if pole.is_finite() && pole < 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and < 0, got {pole}")))
    }
}

/// Gain giving `c_a e' = (k_p - (k_c + k_f)) e` the closed-loop pole `pole`.
pub fn place_flat_p_gain(pole: f64, p: &ThermalParams) -> Result<f64> {
    check_stable_pole("pole", pole)?;
    Ok(p.c_a * pole + (p.k_c + p.k_f))
}

/// Gains matching `s^2 + ((k_c + k_f - k_p)/c_a) s - k_i/c_a` to
/// `(s - double_pole)^2`.
pub fn place_flat_pi_gains(double_pole: f64, p: &ThermalParams) -> Result<(f64, f64)> {
    check_stable_pole("double_pole", double_pole)?;
    let k_p = (p.k_c + p.k_f) + 2.0 * double_pole * p.c_a;
    let k_i = -p.c_a * double_pole * double_pole;
    Ok((k_p, k_i))
}

/// Saturates a command to the actuator range.
pub fn clamp(q_command: f64, a: &ActuatorMode) -> f64 {
    let (lo, hi) = a.bounds();
    q_command.max(lo).min(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const P: ThermalParams = ThermalParams::NOMINAL;

    #[test]
    fn ip_examples() {
        let g = IpGains::default();
        assert_eq!(ip_control(0.3, 0.3, 0.0, &g), 0.0);
        assert_eq!(ip_control(1.0, 0.0, 2.0, &g), -4.0);
        let g2 = IpGains { alpha: 1.0, ..g };
        assert_abs_diff_eq!(
            ip_control(1.0, 0.2, 2.0, &g2),
            ip_control(1.0, 0.2, 2.0, &g) / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pi_examples() {
        let g = PiGains::default();
        assert_eq!(pi_control(0.0, 0.0, &g), 0.0);
        assert_abs_diff_eq!(pi_control(2.0, 10.0, &g), -1.1, epsilon = 1e-15);
        assert!(pi_control(-1.0, 0.0, &g) > 0.0);
    }

    #[test]
    fn feedforward_examples() {
        assert_eq!(flat_feedforward(0.0, 0.0, &P), 0.0);
        assert_abs_diff_eq!(flat_feedforward(20.0, 0.0, &P), 28.08, epsilon = 1e-12);
        assert_abs_diff_eq!(flat_feedforward(0.0, 1e-3, &P), 1.4, epsilon = 1e-12);
    }

    #[test]
    fn p_placement() {
        assert_abs_diff_eq!(place_flat_p_gain(-0.01, &P).unwrap(), -12.596, epsilon = 1e-12);
        let open_loop = -(P.k_c + P.k_f) / P.c_a;
        assert_abs_diff_eq!(place_flat_p_gain(open_loop, &P).unwrap(), 0.0, epsilon = 1e-15);
        let a = place_flat_p_gain(-0.02, &P).unwrap();
        let b = place_flat_p_gain(-0.01, &P).unwrap();
        assert_abs_diff_eq!((b - a) / 0.01, P.c_a, epsilon = 1e-9);
        assert!(place_flat_p_gain(0.01, &P).is_err());
        assert!(place_flat_p_gain(0.0, &P).is_err());
    }

    #[test]
    fn pi_placement() {
        let (kp, ki) = place_flat_pi_gains(-0.005, &P).unwrap();
        assert_abs_diff_eq!(kp, -12.596, epsilon = 1e-12);
        assert_abs_diff_eq!(ki, -0.035, epsilon = 1e-15);
        let (kp, ki) = place_flat_pi_gains(-0.001, &P).unwrap();
        assert_abs_diff_eq!(kp, -1.396, epsilon = 1e-12);
        assert_abs_diff_eq!(ki, -0.0014, epsilon = 1e-15);
        assert!(place_flat_pi_gains(0.0, &P).is_err());
        assert!(FlatGains::place(FlatCorrector::Pi { double_pole: 0.005 }, &P).is_err());
    }

    /// Error dynamics of the PI-corrected design model, `z = integral(e)`:
    /// `c_a e' = (k_p - k_c - k_f) e + k_i z`, integrated with small Euler
    /// steps and compared to the critically damped solution.
    #[test]
    fn double_pole_response_is_critically_damped() {
        let p0 = -0.005;
        let (kp, ki) = place_flat_pi_gains(p0, &P).unwrap();
        let a = (kp - P.k_c - P.k_f) / P.c_a;
        let b = ki / P.c_a;
        // start at rest: e(0) = 1, e'(0) = 0
        let (mut e, mut z) = (1.0_f64, -a / b);
        let h = 0.01;
        let mut t = 0.0;
        let mut worst = 0.0_f64;
        while t < 2000.0 {
            let de = a * e + b * z;
            z += h * e;
            e += h * de;
            t += h;
            let expected = (1.0 - p0 * t) * (p0 * t).exp();
            assert!(e >= -1e-9, "overshoot at t={t}: {e}");
            assert!(
                e >= (p0 * t).exp() - 1e-9,
                "faster than the single exponential at t={t}"
            );
            worst = worst.max((e - expected).abs());
        }
        assert!(worst < 0.05, "envelope error {worst}");
    }

    #[test]
    fn clamp_examples() {
        let heat = ActuatorMode::new(Actuation::HeatingOnly, 2000.0).unwrap();
        let both = ActuatorMode::new(Actuation::HeatingAndCooling, 2000.0).unwrap();
        assert_eq!(clamp(-50.0, &heat), 0.0);
        assert_eq!(clamp(-50.0, &both), -50.0);
        assert_eq!(clamp(5000.0, &heat), 2000.0);
        assert_eq!(clamp(5000.0, &both), 2000.0);
        assert!(ActuatorMode::new(Actuation::HeatingOnly, 0.0).is_err());
    }

    #[test]
    fn names_roundtrip() {
        for k in [
            ControllerKind::Ip,
            ControllerKind::Pi,
            ControllerKind::FlatP,
            ControllerKind::FlatPi,
        ] {
            assert_eq!(k.to_string().parse::<ControllerKind>().unwrap(), k);
            assert_eq!(k.default_config().kind(), k);
        }
        for a in [Actuation::HeatingOnly, Actuation::HeatingAndCooling] {
            assert_eq!(a.to_string().parse::<Actuation>().unwrap(), a);
        }
        assert!("pid".parse::<ControllerKind>().is_err());
    }

    proptest! {
        #[test]
        fn clamp_idempotent_and_admissible(q in -1e5..1e5f64, q_max in 1.0..5000.0f64, heat_only: bool) {
            let mode = if heat_only { Actuation::HeatingOnly } else { Actuation::HeatingAndCooling };
            let a = ActuatorMode::new(mode, q_max).unwrap();
            let once = clamp(q, &a);
            let (lo, hi) = a.bounds();
            prop_assert!(once >= lo && once <= hi);
            prop_assert_eq!(clamp(once, &a), once);
        }

        #[test]
        fn pi_is_linear(e1 in -10.0..10.0f64, e2 in -10.0..10.0f64, i1 in -1e4..1e4f64, i2 in -1e4..1e4f64, c in -3.0..3.0f64) {
            let g = PiGains::default();
            let lhs = pi_control(e1 + c * e2, i1 + c * i2, &g);
            let rhs = pi_control(e1, i1, &g) + c * pi_control(e2, i2, &g);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
