use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitParams, StateVector};
use crate::error::{Error, Result};
use crate::integrate::step_rk4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LyapunovConfig {
    /// RK4 step (s).
    pub dt: f64,
    /// Total integration time (s).
    pub t_end: f64,
    /// Renormalisations before this time are not averaged (s).
    pub t_transient: f64,
    /// Initial separation along `v1` (V).
    pub d0: f64,
    /// Renormalisation interval; `None` uses `R C2`.
    pub renorm: Option<f64>,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self { dt: 1e-6, t_end: 0.5, t_transient: 0.1, d0: 1e-8, renorm: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Largest exponent (1/s).
    pub per_second: f64,
    /// Exponent in units of `1 / (R C2)`.
    pub dimensionless: f64,
    pub renormalisations: usize,
}

/// Largest Lyapunov exponent by the two-trajectory (Benettin) method.
///
/// Separation is measured on `(v1, v2, i_L / g)` so that all three
/// components are in volts.
pub fn largest_lyapunov(
    params: &CircuitParams,
    init: StateVector,
    cfg: &LyapunovConfig,
) -> Result<LyapunovEstimate> {
    if !(cfg.dt > 0.0 && cfg.d0 > 0.0 && cfg.t_end > cfg.t_transient && cfg.t_transient >= 0.0) {
        return Err(Error::InvalidConfig(format!("bad Lyapunov config {cfg:?}")));
    }
    let time_scale = params.time_scale();
    let natural = if time_scale.is_finite() { time_scale } else { (params.l * params.c2).sqrt() };
    let tau = cfg.renorm.unwrap_or(natural);
    let per_block = ((tau / cfg.dt).round() as usize).max(1);
    let tau = per_block as f64 * cfg.dt;
    let blocks = (cfg.t_end / tau).floor() as usize;
    let current_unit = if params.g > 0.0 { 1.0 / params.g } else { (params.l / params.c2).sqrt() };
    let v_limit = 1e3 * params.voltage_scale();

    let dist = |a: &StateVector, b: &StateVector| {
        let d = *a - *b;
        (d.v1 * d.v1 + d.v2 * d.v2 + (d.i_l * current_unit).powi(2)).sqrt()
    };

    let mut main = init;
    let mut shadow = init + StateVector::new(cfg.d0, 0.0, 0.0);
    let mut sum = 0.0;
    let mut count = 0usize;
    for block in 1..=blocks {
        for _ in 0..per_block {
            let t = block as f64 * tau;
            main = step_rk4(params, &main, cfg.dt).ok_or(Error::Diverged { t })?;
            shadow = step_rk4(params, &shadow, cfg.dt).ok_or(Error::Diverged { t })?;
        }
        let t = block as f64 * tau;
        if main.v1.abs().max(main.v2.abs()) > v_limit {
            return Err(Error::Diverged { t });
        }
        let d = dist(&shadow, &main);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Diverged { t });
        }
        if t > cfg.t_transient {
            sum += (d / cfg.d0).ln();
            count += 1;
        }
        shadow = main + (shadow - main) * (cfg.d0 / d);
    }
    if count == 0 {
        return Err(Error::InvalidConfig("no renormalisation after the transient".into()));
    }
    let per_second = sum / (count as f64 * tau);
    Ok(LyapunovEstimate { per_second, dimensionless: per_second * time_scale, renormalisations: count })
}
