//! Two-node RC thermal model of a heated room.
//!
//! The indoor air node exchanges heat with a wall node and leaks directly to
//! the outdoors; the wall node also loses heat to the outdoors. The heat input
//! `q` enters the air node only.
//!
//! ```text
//! dT_int/dt  = q/c_a - (k_c/c_a)(T_int - T_wall) - (k_f/c_a)(T_int - T_ext)
//! dT_wall/dt = (k_c/c_w)(T_int - T_wall) - (k_ext/c_a)(T_wall - T_ext)
//! ```
//!
//! The wall loss term is scaled by `c_a` as in the reference formulation; set
//! [`ThermalParams::wall_denominator_cw`] to scale it by `c_w` instead.

use crate::error::{finite, invalid, Result};

/// Physical coefficients of the room model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Thermal capacity of the indoor air (J/K).
    pub c_a: f64,
    /// Thermal capacity of the wall (J/K).
    pub c_w: f64,
    /// Air-wall coupling conductance (W/K).
    pub k_c: f64,
    /// Air-outdoor leakage conductance (W/K).
    pub k_f: f64,
    /// Wall-outdoor conductance (W/K).
    pub k_ext: f64,
    /// Divide the wall-outdoor term by `c_w` instead of `c_a`.
    pub wall_denominator_cw: bool,
}

impl Default for ThermalParams {
    fn default() -> Self {
        Self::NOMINAL
    }
}

impl ThermalParams {
    pub const NOMINAL: ThermalParams = ThermalParams {
        c_a: 1400.0,
        c_w: 2200.0,
        k_c: 1.4,
        k_f: 0.004,
        k_ext: 0.04,
        wall_denominator_cw: false,
    };

    pub fn new(c_a: f64, c_w: f64, k_c: f64, k_f: f64, k_ext: f64) -> Result<Self> {
        let p = ThermalParams {
            c_a,
            c_w,
            k_c,
            k_f,
            k_ext,
            wall_denominator_cw: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_a", self.c_a),
            ("c_w", self.c_w),
            ("k_c", self.k_c),
            ("k_f", self.k_f),
            ("k_ext", self.k_ext),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// All five coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ThermalParams {
            c_a: self.c_a * factor,
            c_w: self.c_w * factor,
            k_c: self.k_c * factor,
            k_f: self.k_f * factor,
            k_ext: self.k_ext * factor,
            wall_denominator_cw: self.wall_denominator_cw,
        }
    }

    fn wall_loss_rate(&self) -> f64 {
        if self.wall_denominator_cw {
            self.k_ext / self.c_w
        } else {
            self.k_ext / self.c_a
        }
    }

    /// State matrix `A` and input vector `b` of `x' = A x + b`.
    fn affine(&self, q: f64, t_ext: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let ke = self.wall_loss_rate();
        let a = [
            [-(self.k_c + self.k_f) / self.c_a, self.k_c / self.c_a],
            [self.k_c / self.c_w, -self.k_c / self.c_w - ke],
        ];
        let b = [q / self.c_a + self.k_f / self.c_a * t_ext, ke * t_ext];
        (a, b)
    }
}

/// Indoor and wall temperatures (°C).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub t_int: f64,
    pub t_wall: f64,
}

impl ThermalState {
    pub fn new(t_int: f64, t_wall: f64) -> Self {
        ThermalState { t_int, t_wall }
    }

    pub fn uniform(t: f64) -> Self {
        ThermalState::new(t, t)
    }

    pub fn validate(&self) -> Result<()> {
        finite("t_int", self.t_int)?;
        finite("t_wall", self.t_wall)?;
        Ok(())
    }

    fn axpy(self, h: f64, d: (f64, f64)) -> Self {
        ThermalState::new(self.t_int + h * d.0, self.t_wall + h * d.1)
    }
}

fn rates(s: ThermalState, q: f64, t_ext: f64, p: &ThermalParams) -> (f64, f64) {
    let dt_int = q / p.c_a - p.k_c / p.c_a * (s.t_int - s.t_wall) - p.k_f / p.c_a * (s.t_int - t_ext);
    let dt_wall = p.k_c / p.c_w * (s.t_int - s.t_wall) - p.wall_loss_rate() * (s.t_wall - t_ext);
    (dt_int, dt_wall)
}

/// Time derivatives `(dT_int/dt, dT_wall/dt)` in K/s.
pub fn derivatives(state: ThermalState, q: f64, t_ext: f64, p: &ThermalParams) -> Result<(f64, f64)> {
    state.validate()?;
    finite("q", q)?;
    finite("t_ext", t_ext)?;
    Ok(rates(state, q, t_ext, p))
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(invalid("dt", format!("must be finite and > 0, got {dt}")))
    }
}

/// One classical Runge-Kutta step with `q` and `t_ext` held over the step.
pub fn step_rk4(state: ThermalState, q: f64, t_ext: f64, dt: f64, p: &ThermalParams) -> Result<ThermalState> {
    check_dt(dt)?;
    let k1 = derivatives(state, q, t_ext, p)?;
    let k2 = rates(state.axpy(dt / 2.0, k1), q, t_ext, p);
    let k3 = rates(state.axpy(dt / 2.0, k2), q, t_ext, p);
    let k4 = rates(state.axpy(dt, k3), q, t_ext, p);
    let next = ThermalState::new(
        state.t_int + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        state.t_wall + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    );
    next.validate()?;
    Ok(next)
}

/// Stationary state for constant `q` and `t_ext`.
pub fn fixed_point(q: f64, t_ext: f64, p: &ThermalParams) -> ThermalState {
    let (a, b) = p.affine(q, t_ext);
    // det(A) > 0 for strictly positive coefficients
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let t_int = (-b[0] * a[1][1] + b[1] * a[0][1]) / det;
    let t_wall = (-b[1] * a[0][0] + b[0] * a[1][0]) / det;
    ThermalState::new(t_int, t_wall)
}

/// `exp(A t)` for a real 2x2 matrix.
///
/// Writes `A = mu I + N` with `N^2 = delta I`, so that
/// `exp(A t) = exp(mu t) (c(t) I + s(t) N)` where `c`, `s` are the hyperbolic
/// (or circular, for `delta < 0`) functions of `sqrt(|delta|) t`. The two
/// eigenvalues are `mu +- sqrt(delta)`. When they nearly coincide the Taylor
/// series of `c` and `s` is used instead.
pub fn expm2(a: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let mu = 0.5 * (a[0][0] + a[1][1]);
    let n = [[a[0][0] - mu, a[0][1]], [a[1][0], a[1][1] - mu]];
    let delta = n[0][0] * n[0][0] + n[0][1] * n[1][0];
    let z = delta * t * t;
    let (c, s) = if z.abs() < 1e-6 {
        (
            1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0,
            t * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0),
        )
    } else if delta > 0.0 {
        let w = delta.sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    } else {
        let w = (-delta).sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    };
    let g = (mu * t).exp();
    [
        [g * (c + s * n[0][0]), g * s * n[0][1]],
        [g * s * n[1][0], g * (c + s * n[1][1])],
    ]
}

/// Exact flow of the linear model over `dt` with constant inputs.
pub fn exact_step(state: ThermalState, q: f64, t_ext: f64, dt: f64, p: &ThermalParams) -> Result<ThermalState> {
    check_dt(dt)?;
    state.validate()?;
    finite("q", q)?;
    finite("t_ext", t_ext)?;
    let (a, _) = p.affine(q, t_ext);
    let eq = fixed_point(q, t_ext, p);
    let e = expm2(a, dt);
    let d0 = state.t_int - eq.t_int;
    let d1 = state.t_wall - eq.t_wall;
    Ok(ThermalState::new(
        eq.t_int + e[0][0] * d0 + e[0][1] * d1,
        eq.t_wall + e[1][0] * d0 + e[1][1] * d1,
    ))
}
