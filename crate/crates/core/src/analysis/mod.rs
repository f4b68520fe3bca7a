//! Post-processing of simulated trajectories.

pub mod classify;
pub mod extrema;
pub mod lyapunov;
pub mod perturb;
pub mod sweep;

pub use classify::{classify, ClassifyConfig, ScrollSide, TrajectoryClass, TrajectoryLabel};
pub use extrema::{local_extrema, Extremum, ExtremumKind};
pub use lyapunov::{largest_lyapunov, LyapunovConfig, LyapunovEstimate};
pub use perturb::perturb;
pub use sweep::{sweep, SweepConfig, SweepMode, SweepPoint};

use crate::circuit::{CircuitParams, EquilibriumPoint, StateVector};
use crate::error::Result;
use crate::integrate::{integrate, IntegrationConfig, Trajectory};

/// Everything produced by simulating one circuit.
#[derive(Debug, Clone)]
pub struct PointRun {
    pub trajectory: Trajectory,
    pub equilibria: Vec<EquilibriumPoint>,
    pub extrema: Vec<Extremum>,
    pub lyapunov: Option<LyapunovEstimate>,
    pub class: TrajectoryClass,
}

/// Integrate, estimate the exponent when asked, and classify.
///
/// A failed exponent estimate (e.g. runaway shadow) is not fatal; the
/// classifier then works from the extrema alone.
pub fn run_point(
    params: &CircuitParams,
    init: StateVector,
    integration: &IntegrationConfig,
    lyapunov: Option<&LyapunovConfig>,
    cfg: &ClassifyConfig,
) -> Result<PointRun> {
    let trajectory = integrate(params, init, integration)?;
    let equilibria = params.find_equilibria();
    let lyap = match lyapunov {
        Some(lc) if !trajectory.diverged() => largest_lyapunov(params, init, lc).ok(),
        _ => None,
    };
    let class = classify(&trajectory, &equilibria, params.time_scale(), lyap.map(|l| l.per_second), cfg);
    let extrema = local_extrema(&trajectory.times, &trajectory.v1());
    Ok(PointRun { trajectory, equilibria, extrema, lyapunov: lyap, class })
}
