//! Experiment configuration: one TOML document drives every command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ClassifyConfig, LyapunovConfig, SweepMode};
use crate::circuit::{CircuitParams, StateVector};
use crate::design::DesignSpec;
use crate::device::{read_state_table, DeviceState, StateTable};
use crate::error::{Error, Result};
use crate::integrate::{IntegrationConfig, Method, SoaPolicy};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "MEMCHUA_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub device: DeviceSection,
    pub design: DesignSpec,
    /// Explicit components; when present they replace the designed values.
    pub circuit: Option<CircuitSection>,
    pub integration: IntegrationSection,
    pub init: StateVector,
    pub lyapunov: LyapunovSection,
    pub classify: ClassifyConfig,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            out_dir: PathBuf::from("out"),
            device: DeviceSection::default(),
            design: DesignSpec::default(),
            circuit: None,
            integration: IntegrationSection::default(),
            init: StateVector::new(0.1, 0.0, 0.0),
            lyapunov: LyapunovSection::default(),
            classify: ClassifyConfig::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSection {
    /// CSV state table; the 1/R scaling law around the reference state when absent.
    pub state_table: Option<PathBuf>,
    /// Programmed resistance to design/simulate at; defaults to the
    /// highest-resistance table row.
    pub r_prog: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    /// Coupling resistance (ohm).
    pub r: f64,
    /// Negative-impedance magnitude (ohm).
    pub r_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationSection {
    pub method: MethodKind,
    pub dt: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub t_end: f64,
    pub t_transient: f64,
    pub record_stride: usize,
    pub soa_policy: SoaPolicy,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        Self {
            method: MethodKind::Fixed,
            dt: 1e-6,
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            t_end: 0.5,
            t_transient: 0.1,
            record_stride: 1,
            soa_policy: SoaPolicy::Warn,
        }
    }
}

impl IntegrationSection {
    pub fn to_config(&self) -> IntegrationConfig {
        let method = match self.method {
            MethodKind::Fixed => Method::Fixed { dt: self.dt },
            MethodKind::Adaptive => Method::Adaptive { abs_tol: self.abs_tol, rel_tol: self.rel_tol },
        };
        IntegrationConfig {
            method,
            t_end: self.t_end,
            t_transient: self.t_transient,
            record_stride: self.record_stride,
            soa_policy: self.soa_policy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovSection {
    pub enabled: bool,
    pub d0: f64,
    /// Renormalisation interval (s); `R C2` when absent.
    pub renorm: Option<f64>,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        Self { enabled: true, d0: 1e-8, renorm: None }
    }
}

impl LyapunovSection {
    /// Exponent settings aligned with the integration window. Adaptive runs
    /// still use a fixed 1 us RK4 step for the two-trajectory estimate.
    pub fn to_config(&self, integ: &IntegrationSection) -> Option<LyapunovConfig> {
        self.enabled.then_some(LyapunovConfig {
            dt: match integ.method {
                MethodKind::Fixed => integ.dt,
                MethodKind::Adaptive => 1e-6,
            },
            t_end: integ.t_end,
            t_transient: integ.t_transient,
            d0: self.d0,
            renorm: self.renorm,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Absolute bounds (ohm); when absent, factors times the reference `r_prog`.
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub r_min_factor: f64,
    pub r_max_factor: f64,
    pub n_points: usize,
    pub mode: SweepMode,
    /// Log-spread of per-point coefficient variability.
    pub sigma: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            r_min_factor: 0.2,
            r_max_factor: 1.5,
            n_points: 32,
            mode: SweepMode::Fixed,
            sigma: 0.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            Error::Parse { line, msg: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(table), Some(dir)) = (&cfg.device.state_table, path.parent()) {
            if table.is_relative() {
                cfg.device.state_table = Some(dir.join(table));
            }
        }
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.design.validate()?;
        self.integration.to_config().validate()?;
        let c = &self.classify;
        let positive = [c.visit_fraction, c.cluster_fraction, c.lambda_periodic, c.fixed_point_eps]
            .iter()
            .all(|x| *x > 0.0);
        if !positive || c.max_periodic_clusters == 0 {
            return Err(Error::InvalidInput("classification thresholds must be positive".into()));
        }
        if !(self.sweep.sigma >= 0.0) || self.sweep.n_points == 0 {
            return Err(Error::InvalidInput("sweep needs n_points >= 1 and sigma >= 0".into()));
        }
        if !self.init.is_finite() {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        Ok(())
    }

    fn check_files(&self) -> Result<()> {
        if let Some(p) = &self.device.state_table {
            if !p.is_file() {
                return Err(Error::InvalidInput(format!("state table {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn state_table(&self) -> Result<StateTable> {
        match &self.device.state_table {
            Some(p) => read_state_table(std::fs::File::open(p)?),
            None => Ok(StateTable::scaling_law()),
        }
    }

    pub fn reference_r_prog(&self, table: &StateTable) -> f64 {
        self.device.r_prog.unwrap_or_else(|| table.states()[table.states().len() - 1].r_prog)
    }

    pub fn device_state(&self, table: &StateTable) -> Result<DeviceState> {
        table.state_at(self.reference_r_prog(table))
    }

    /// Explicit components with the given device, if configured.
    pub fn explicit_circuit(&self, state: &DeviceState) -> Option<Result<CircuitParams>> {
        self.circuit.map(|c| CircuitParams::new(c.c1, c.c2, c.l, 1.0 / c.r, 1.0 / c.r_n, state.poly))
    }

    pub fn sweep_range(&self, table: &StateTable) -> (f64, f64) {
        let r_ref = self.reference_r_prog(table);
        (
            self.sweep.r_min.unwrap_or(self.sweep.r_min_factor * r_ref),
            self.sweep.r_max.unwrap_or(self.sweep.r_max_factor * r_ref),
        )
    }
}
