//! Bifurcation sweeps over the programmed resistance.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{ClassifyConfig, TrajectoryClass, TrajectoryLabel};
use super::lyapunov::LyapunovConfig;
use super::perturb::{derive_seed, perturb};
use super::run_point;
use crate::circuit::{CircuitParams, StateVector};
use crate::design::{design_circuit, DesignSpec};
use crate::device::StateTable;
use crate::error::{Error, Result};
use crate::integrate::IntegrationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Components designed once at the reference state; only the device changes.
    #[default]
    Fixed,
    /// Components redesigned for every state.
    Redesign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub mode: SweepMode,
    /// State the fixed components are designed for; defaults to the
    /// highest-resistance table row.
    pub reference_r_prog: Option<f64>,
    pub spec: DesignSpec,
    pub init: StateVector,
    pub integration: IntegrationConfig,
    /// `None` skips the exponent and classifies on extrema alone.
    pub lyapunov: Option<LyapunovConfig>,
    pub classify: ClassifyConfig,
    /// Log-spread of the per-point coefficient variability.
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub r_prog: f64,
    /// Local extrema of `v1` (V).
    pub extrema: Vec<f64>,
    pub class: TrajectoryClass,
    pub seed: u64,
    pub soa_events: usize,
    /// Why the point could not be simulated, if it could not.
    pub failure: Option<String>,
}

impl SweepPoint {
    pub fn span(&self) -> Option<f64> {
        let lo = self.extrema.iter().copied().reduce(f64::min)?;
        let hi = self.extrema.iter().copied().reduce(f64::max)?;
        Some(hi - lo)
    }
}

/// `n` log-spaced resistances from `r_min` to `r_max` inclusive.
pub fn log_space(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![r_min];
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|k| match k {
            0 => r_min,
            _ if k == n - 1 => r_max,
            _ => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Runs every sweep point (in parallel) and returns them ordered by `r_prog`.
pub fn sweep(table: &StateTable, cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if cfg.n_points == 0 {
        return Err(Error::InvalidInput("sweep needs at least one point".into()));
    }
    if !(cfg.r_min > 0.0 && cfg.r_max >= cfg.r_min && cfg.r_max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad resistance range [{}, {}]", cfg.r_min, cfg.r_max)));
    }
    cfg.integration.validate()?;

    let reference = match cfg.mode {
        SweepMode::Fixed => {
            let r_ref =
                cfg.reference_r_prog.unwrap_or_else(|| table.states()[table.states().len() - 1].r_prog);
            let report = design_circuit(&table.state_at(r_ref)?, &cfg.spec)?;
            Some(report.params)
        }
        SweepMode::Redesign => None,
    };

    let rs = log_space(cfg.r_min, cfg.r_max, cfg.n_points);
    let points = rs
        .par_iter()
        .enumerate()
        .map(|(k, &r)| {
            let seed = derive_seed(cfg.seed, k as u64);
            match point_params(table, cfg, reference.as_ref(), r, seed) {
                Ok(params) => simulate(&params, cfg, r, seed),
                Err(e) => failed(r, seed, e.to_string()),
            }
        })
        .collect();
    Ok(points)
}

fn point_params(
    table: &StateTable,
    cfg: &SweepConfig,
    reference: Option<&CircuitParams>,
    r: f64,
    seed: u64,
) -> Result<CircuitParams> {
    let mut state = table.state_at(r)?;
    state.poly = perturb(&state.poly, cfg.sigma, seed)?;
    match reference {
        Some(p) => Ok(CircuitParams { device: state.poly, ..*p }),
        None => Ok(design_circuit(&state, &cfg.spec)?.params),
    }
}

fn simulate(params: &CircuitParams, cfg: &SweepConfig, r: f64, seed: u64) -> SweepPoint {
    match run_point(params, cfg.init, &cfg.integration, cfg.lyapunov.as_ref(), &cfg.classify) {
        Ok(run) => SweepPoint {
            r_prog: r,
            extrema: run.extrema.iter().map(|e| e.value).collect(),
            class: run.class,
            seed,
            soa_events: run.trajectory.soa_events().count(),
            failure: None,
        },
        Err(e) => failed(r, seed, e.to_string()),
    }
}

fn failed(r: f64, seed: u64, why: String) -> SweepPoint {
    SweepPoint {
        r_prog: r,
        extrema: Vec::new(),
        class: TrajectoryClass {
            label: TrajectoryLabel::Inconclusive,
            scroll_side: super::classify::ScrollSide::None,
            lambda1: None,
            lambda1_dimensionless: None,
            n_extrema_clusters: 0,
        },
        seed,
        soa_events: 0,
        failure: Some(why),
    }
}

/// `r_prog_ohm,extremum_v1_V,class`, one row per extremum.
pub fn write_bifurcation_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "r_prog_ohm,extremum_v1_V,class")?;
    for p in points {
        for v in &p.extrema {
            writeln!(w, "{:e},{:e},{}", p.r_prog, v, p.class.label)?;
        }
    }
    w.flush()?;
    Ok(())
}
