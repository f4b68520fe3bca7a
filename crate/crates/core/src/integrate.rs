//! Time integration of the circuit equations.
//!
//! Both integrators watch the device's safe operating window on `v1` and
//! stop when the state runs away past 1e3 times its natural scale.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitParams, StateVector};
use crate::error::{Error, Result};

/// Runaway threshold in multiples of the natural scales.
const DIVERGENCE_FACTOR: f64 = 1e3;
/// Smallest step the adaptive controller may take.
const MIN_STEP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Fixed { dt: f64 },
    Adaptive { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoaPolicy {
    Warn,
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub method: Method,
    pub t_end: f64,
    pub t_transient: f64,
    pub record_stride: usize,
    pub soa_policy: SoaPolicy,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            method: Method::Fixed { dt: 1e-6 },
            t_end: 0.5,
            t_transient: 0.1,
            record_stride: 1,
            soa_policy: SoaPolicy::Warn,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
            }
            Method::Adaptive { abs_tol, rel_tol } if !(abs_tol > 0.0 && rel_tol > 0.0) => {
                return Err(Error::InvalidConfig(format!(
                    "tolerances must be positive, got abs {abs_tol} rel {rel_tol}"
                )));
            }
            _ => {}
        }
        if !(self.t_transient >= 0.0 && self.t_transient < self.t_end && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= t_transient < t_end, got {} and {}",
                self.t_transient, self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SoaLow,
    SoaHigh,
    Diverged,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SoaLow => "soa_low",
            Self::SoaHigh => "soa_high",
            Self::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    /// `v1` at the event (V); for divergence, the largest scaled magnitude.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub events: Vec<Event>,
    /// Accepted integration steps, including the discarded transient.
    pub steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Diverged)
    }

    pub fn soa_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind != EventKind::Diverged)
    }

    pub fn v1(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.v1).collect()
    }

    pub fn last(&self) -> Option<(f64, StateVector)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// `t_s,v1_V,v2_V,iL_A`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "t_s,v1_V,v2_V,iL_A")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{:e},{:e},{:e},{:e}", t, s.v1, s.v2, s.i_l)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `t_s,kind,value`
    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "t_s,kind,value")?;
        for e in &self.events {
            writeln!(w, "{:e},{},{:e}", e.t, e.kind.as_str(), e.value)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One classical Runge-Kutta step. `None` if the result is not finite.
pub fn step_rk4(params: &CircuitParams, s: &StateVector, dt: f64) -> Option<StateVector> {
    let k1 = params.vector_field(s);
    let k2 = params.vector_field(&(*s + k1 * (0.5 * dt)));
    let k3 = params.vector_field(&(*s + k2 * (0.5 * dt)));
    let k4 = params.vector_field(&(*s + k3 * dt));
    let next = *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    next.is_finite().then_some(next)
}

/// Tracks window crossings, runaway and what gets recorded.
struct Monitor<'a> {
    params: &'a CircuitParams,
    cfg: &'a IntegrationConfig,
    v_limit: f64,
    i_limit: f64,
    outside: bool,
    since_record: usize,
    traj: Trajectory,
}

enum Flow {
    Continue,
    Stop,
}

impl<'a> Monitor<'a> {
    fn new(params: &'a CircuitParams, cfg: &'a IntegrationConfig, init: &StateVector) -> Self {
        let i_scale = if params.g > 0.0 {
            params.current_scale()
        } else {
            params.device.v_max * (params.c2 / params.l).sqrt()
        };
        let mut m = Self {
            params,
            cfg,
            v_limit: DIVERGENCE_FACTOR * params.voltage_scale(),
            i_limit: DIVERGENCE_FACTOR * i_scale,
            outside: false,
            since_record: 0,
            traj: Trajectory::default(),
        };
        if cfg.t_transient == 0.0 {
            m.traj.times.push(0.0);
            m.traj.states.push(*init);
            m.since_record = 0;
        } else {
            m.since_record = cfg.record_stride - 1;
        }
        // an initial state already outside the window counts as a crossing
        if let Flow::Stop = m.check_window(0.0, init) {
            m.outside = true;
        }
        m
    }

    fn check_window(&mut self, t: f64, s: &StateVector) -> Flow {
        let dev = &self.params.device;
        let kind = if s.v1 < dev.v_min {
            Some(EventKind::SoaLow)
        } else if s.v1 > dev.v_max {
            Some(EventKind::SoaHigh)
        } else {
            None
        };
        match kind {
            Some(kind) if !self.outside => {
                self.outside = true;
                self.traj.events.push(Event { t, kind, value: s.v1 });
                if self.cfg.soa_policy == SoaPolicy::Abort {
                    return Flow::Stop;
                }
            }
            Some(_) => {}
            None => self.outside = false,
        }
        Flow::Continue
    }

    /// Handles an accepted step ending at `t` in state `s`.
    fn accept(&mut self, t: f64, s: Option<StateVector>) -> Flow {
        self.traj.steps += 1;
        let Some(s) = s else {
            self.traj.events.push(Event { t, kind: EventKind::Diverged, value: f64::INFINITY });
            return Flow::Stop;
        };
        let runaway = (s.v1.abs().max(s.v2.abs()) / self.v_limit).max(s.i_l.abs() / self.i_limit);
        if runaway > 1.0 {
            self.record(t, s, true);
            self.traj.events.push(Event { t, kind: EventKind::Diverged, value: runaway * DIVERGENCE_FACTOR });
            return Flow::Stop;
        }
        let flow = self.check_window(t, &s);
        self.record(t, s, matches!(flow, Flow::Stop));
        flow
    }

    fn record(&mut self, t: f64, s: StateVector, force: bool) {
        if t < self.cfg.t_transient {
            return;
        }
        self.since_record += 1;
        if self.since_record >= self.cfg.record_stride || force {
            self.since_record = 0;
            if self.traj.times.last().is_none_or(|last| t > *last) {
                self.traj.times.push(t);
                self.traj.states.push(s);
            }
        }
    }
}

/// Integrates with the configured method.
pub fn integrate(params: &CircuitParams, init: StateVector, cfg: &IntegrationConfig) -> Result<Trajectory> {
    match cfg.method {
        Method::Fixed { dt } => integrate_fixed(params, init, cfg, dt),
        Method::Adaptive { .. } => integrate_adaptive(params, init, cfg),
    }
}

fn check_init(init: &StateVector) -> Result<()> {
    if init.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("initial state is not finite: {init:?}")))
    }
}

fn integrate_fixed(
    params: &CircuitParams,
    init: StateVector,
    cfg: &IntegrationConfig,
    dt: f64,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_init(&init)?;
    let mut mon = Monitor::new(params, cfg, &init);
    if mon.outside && cfg.soa_policy == SoaPolicy::Abort {
        return Ok(mon.traj);
    }
    let n = (cfg.t_end / dt - 1e-9).ceil().max(1.0) as u64;
    let mut t = 0.0;
    let mut s = init;
    for k in 1..=n {
        let t_next = if k == n { cfg.t_end } else { (k as f64 * dt).min(cfg.t_end) };
        let next = step_rk4(params, &s, t_next - t);
        t = t_next;
        if let Flow::Stop = mon.accept(t, next) {
            break;
        }
        s = next.expect("accept stops on non-finite state");
    }
    Ok(mon.traj)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Embedded Dormand-Prince 5(4) integration with a standard controller.
///
/// `abs_tol` applies to the voltages directly and to `i_L` through `R`,
/// i.e. the inductor current is compared as the voltage `i_L / g`.
pub fn integrate_adaptive(
    params: &CircuitParams,
    init: StateVector,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_init(&init)?;
    let Method::Adaptive { abs_tol, rel_tol } = cfg.method else {
        return Err(Error::InvalidConfig("adaptive integration needs tolerances".into()));
    };
    let i_abs = if params.g > 0.0 { abs_tol * params.g } else { abs_tol * (params.c2 / params.l).sqrt() };
    let atol = [abs_tol, abs_tol, i_abs];

    let mut mon = Monitor::new(params, cfg, &init);
    if mon.outside && cfg.soa_policy == SoaPolicy::Abort {
        return Ok(mon.traj);
    }

    let mut t = 0.0;
    let mut y = init.to_array();
    let mut h = (1e-3 * params.time_scale()).min(cfg.t_end);
    let mut k = [[0.0f64; 3]; 7];
    k[0] = params.vector_field(&init).to_array();

    while t < cfg.t_end {
        if t + h > cfg.t_end {
            h = cfg.t_end - t;
        }
        for stage in 1..7 {
            let mut ys = y;
            for (prev, a) in A[stage].iter().enumerate().take(stage) {
                for d in 0..3 {
                    ys[d] += h * a * k[prev][d];
                }
            }
            debug_assert!(C[stage] > 0.0);
            k[stage] = params.vector_field(&StateVector::from_array(ys)).to_array();
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..3 {
            let mut e = 0.0;
            for st in 0..7 {
                y5[d] += h * B5[st] * k[st][d];
                e += h * (B5[st] - B4[st]) * k[st][d];
            }
            let sc = atol[d] + rel_tol * y[d].abs().max(y5[d].abs());
            err = err.max((e / sc).abs());
        }

        if !err.is_finite() {
            h *= 0.2;
        } else if err <= 1.0 {
            let t_new = if t + h >= cfg.t_end { cfg.t_end } else { t + h };
            let next = StateVector::from_array(y5);
            let next = next.is_finite().then_some(next);
            if let Flow::Stop = mon.accept(t_new, next) {
                break;
            }
            t = t_new;
            y = y5;
            k[0] = k[6];
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            continue;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h < MIN_STEP {
            return Err(Error::StepUnderflow { t, dt: h });
        }
    }
    Ok(mon.traj)
}
