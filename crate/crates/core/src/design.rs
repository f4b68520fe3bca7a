//! Component design from a programmed device state.
//!
//! The coupling conductance fixes the outer equilibria at `±v_eq`, the
//! negative conductance zeroes the Jacobian trace at the origin, and the
//! reactive parts are chosen from the dimensionless `alpha`, `beta` pair.

use serde::{Deserialize, Serialize};

use crate::circuit::{classify_stability, CircuitParams, EquilibriumLabel, StateVector};
use crate::device::{DevicePoly, DeviceState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSpec {
    /// Target `v1` of the positive outer equilibrium (V).
    pub v_eq: f64,
    pub c1: f64,
    /// `C2 / C1`.
    pub alpha: f64,
    /// `R^2 C2 / L`.
    pub beta: f64,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self { v_eq: 0.9, c1: 10e-9, alpha: 10.0, beta: 14.22 }
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.v_eq, self.c1, self.alpha, self.beta].iter().all(|x| x.is_finite() && *x > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("design spec values must be positive: {self:?}")))
        }
    }
}

/// Coupling conductance `G = alpha (i_M(v_eq)/v_eq - p1)`.
///
/// Uses the memristor current, not the full block current.
pub fn design_g(poly: &DevicePoly, spec: &DesignSpec) -> Result<f64> {
    spec.validate()?;
    let excess = poly.current(spec.v_eq) / spec.v_eq - poly.p1();
    let g = spec.alpha * excess;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InfeasibleG { v_eq: spec.v_eq, excess });
    }
    Ok(g)
}

/// Negative conductance that makes the Jacobian trace vanish at the origin.
pub fn design_gn(g: f64, c1: f64, c2: f64, p1: f64) -> f64 {
    g + (c1 / c2) * g + p1
}

/// `(C2, L)` from `alpha` and `beta`.
pub fn design_reactive(c1: f64, g: f64, spec: &DesignSpec) -> (f64, f64) {
    let c2 = spec.alpha * c1;
    let l = c2 / (spec.beta * g * g);
    (c2, l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub params: CircuitParams,
    pub r: f64,
    pub r_n: f64,
    pub checks: Vec<DesignCheck>,
}

impl DesignReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &DesignCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Full design chain with post-design validation.
///
/// Returns an error only when no circuit can be produced; a circuit that
/// fails a validation is returned with the failing check recorded.
pub fn design_circuit(state: &DeviceState, spec: &DesignSpec) -> Result<DesignReport> {
    spec.validate()?;
    if spec.v_eq >= state.v_set_mag {
        return Err(Error::SafeWindow { v_eq: spec.v_eq, v_set_mag: state.v_set_mag });
    }
    let poly = &state.poly;
    let g = design_g(poly, spec)?;
    let (c2, l) = design_reactive(spec.c1, g, spec);
    let g_n = design_gn(g, spec.c1, c2, poly.p1());
    let params = CircuitParams::new(spec.c1, c2, l, g, g_n, *poly)?;
    let checks = validate(&params);
    Ok(DesignReport { params, r: 1.0 / g, r_n: 1.0 / g_n, checks })
}

fn validate(params: &CircuitParams) -> Vec<DesignCheck> {
    let mut checks = Vec::new();

    let margin = params.device.p1() - params.g_n + params.g;
    checks.push(DesignCheck {
        name: "existence",
        passed: params.existence_condition(),
        value: margin,
        detail: "p1 - g_n + g < 0".into(),
    });

    let j = params.jacobian(&StateVector::ZERO);
    let trace = j[0][0] + j[1][1] + j[2][2];
    let rel = trace.abs() / (params.g / params.c1);
    checks.push(DesignCheck {
        name: "trace-at-origin",
        passed: rel < 1e-9,
        value: trace,
        detail: format!("|tr J(P0)| / (g/c1) = {rel:.3e}"),
    });

    let eq = params.find_equilibria();
    checks.push(DesignCheck {
        name: "three-equilibria",
        passed: eq.len() == 3,
        value: eq.len() as f64,
        detail: eq
            .iter()
            .map(|e| format!("{}={:.6}", e.label.as_str(), e.state.v1))
            .collect::<Vec<_>>()
            .join(" "),
    });

    let unstable = eq.iter().filter(|e| classify_stability(e).unstable).count();
    checks.push(DesignCheck {
        name: "all-unstable",
        passed: unstable == eq.len() && eq.len() == 3,
        value: unstable as f64,
        detail: format!("{unstable} of {} equilibria unstable", eq.len()),
    });

    let outer: Vec<_> = eq.iter().filter(|e| e.label != EquilibriumLabel::Origin).collect();
    let inside = outer.iter().filter(|e| params.device.contains(e.state.v1)).count();
    checks.push(DesignCheck {
        name: "outer-in-window",
        passed: outer.len() == 2 && inside == 2,
        value: inside as f64,
        detail: format!("window [{}, {}] V", params.device.v_min, params.device.v_max),
    });

    checks
}
