//! Trajectory taxonomy: fixed point, periodic orbit, single- or
//! double-scroll attractor, or divergence.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::extrema::local_extrema;
use crate::circuit::{EquilibriumLabel, EquilibriumPoint};
use crate::integrate::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLabel {
    FixedPoint,
    Periodic,
    SingleScroll,
    DoubleScroll,
    Diverged,
    /// Not enough data to decide.
    Inconclusive,
}

impl TrajectoryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FixedPoint => "fixed_point",
            Self::Periodic => "periodic",
            Self::SingleScroll => "single_scroll",
            Self::DoubleScroll => "double_scroll",
            Self::Diverged => "diverged",
            Self::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for TrajectoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScrollSide {
    Positive,
    Negative,
    Both,
    None,
}

impl ScrollSide {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Positive => "positive",
            Self::Negative => "negative",
            Self::Both => "both",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryClass {
    pub label: TrajectoryLabel,
    pub scroll_side: ScrollSide,
    /// Largest Lyapunov exponent (1/s), when it was computed.
    pub lambda1: Option<f64>,
    /// `lambda1 * R C2`.
    pub lambda1_dimensionless: Option<f64>,
    pub n_extrema_clusters: usize,
}

impl TrajectoryClass {
    fn bare(label: TrajectoryLabel) -> Self {
        Self {
            label,
            scroll_side: ScrollSide::None,
            lambda1: None,
            lambda1_dimensionless: None,
            n_extrema_clusters: 0,
        }
    }

    /// Plain-text summary, one `key = value` per line.
    pub fn summary(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), |v| format!("{v:e}"));
        format!(
            "label = \"{}\"\nscroll_side = \"{}\"\nlambda1_per_s = {}\nlambda1_dimensionless = {}\nn_extrema_clusters = {}\n",
            self.label,
            self.scroll_side.as_str(),
            opt(self.lambda1),
            opt(self.lambda1_dimensionless),
            self.n_extrema_clusters
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    /// Visit radius as a fraction of `|v1(P+)|`.
    pub visit_fraction: f64,
    /// Extremum cluster width as a fraction of the observed `v1` span.
    pub cluster_fraction: f64,
    pub max_periodic_clusters: usize,
    /// Dimensionless exponent below which a trajectory may be periodic.
    pub lambda_periodic: f64,
    /// Fixed-point capture radius (V).
    pub fixed_point_eps: f64,
    pub min_samples: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            visit_fraction: 0.3,
            cluster_fraction: 0.01,
            max_periodic_clusters: 8,
            lambda_periodic: 0.01,
            fixed_point_eps: 1e-4,
            min_samples: 16,
        }
    }
}

/// Number of groups when sorted values are split into runs no wider than `width`.
pub fn count_clusters(values: &[f64], width: f64) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut n = 0;
    let mut start = f64::NEG_INFINITY;
    for x in v {
        if n == 0 || x - start > width {
            n += 1;
            start = x;
        }
    }
    n
}

/// Visit radius derived from the equilibria: `fraction * |v1(P+)|`, or the
/// largest outer `|v1|` when there is no positive point.
pub fn visit_radius(equilibria: &[EquilibriumPoint], fraction: f64) -> Option<f64> {
    let pos = equilibria.iter().find(|e| e.label == EquilibriumLabel::Positive);
    let reference = match pos {
        Some(p) => p.state.v1.abs(),
        None => equilibria
            .iter()
            .filter(|e| e.label != EquilibriumLabel::Origin)
            .map(|e| e.state.v1.abs())
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))?,
    };
    Some(fraction * reference)
}

fn settled_at(e: &EquilibriumPoint) -> TrajectoryClass {
    let side = match e.label {
        EquilibriumLabel::Positive => ScrollSide::Positive,
        EquilibriumLabel::Negative => ScrollSide::Negative,
        EquilibriumLabel::Origin => ScrollSide::None,
    };
    TrajectoryClass { scroll_side: side, ..TrajectoryClass::bare(TrajectoryLabel::FixedPoint) }
}

/// Classifies a trajectory whose transient has already been discarded.
///
/// `time_scale` is `R C2`; `lambda1` (1/s) is optional, and when absent the
/// periodic test relies on the extremum clusters alone.
pub fn classify(
    traj: &Trajectory,
    equilibria: &[EquilibriumPoint],
    time_scale: f64,
    lambda1: Option<f64>,
    cfg: &ClassifyConfig,
) -> TrajectoryClass {
    if traj.diverged() {
        return TrajectoryClass::bare(TrajectoryLabel::Diverged);
    }
    if traj.len() < cfg.min_samples.max(3) {
        return TrajectoryClass::bare(TrajectoryLabel::Inconclusive);
    }
    let lambda_dimless = lambda1.map(|l| l * time_scale);
    let with_lambda = |mut c: TrajectoryClass| {
        c.lambda1 = lambda1;
        c.lambda1_dimensionless = lambda_dimless;
        c
    };

    let n = traj.len();
    let end = traj.states[n - 1];
    let voltage_dist = |s: &crate::StateVector, e: &EquilibriumPoint| {
        (s.v1 - e.state.v1).abs().max((s.v2 - e.state.v2).abs())
    };
    // envelope of the distance over a slice of the record
    let envelope = |from: usize, to: usize, e: &EquilibriumPoint| {
        traj.states[from..to].iter().map(|s| voltage_dist(s, e)).fold(0.0, f64::max)
    };
    let tenth = (n / 10).max(1);
    let nearest = equilibria.iter().min_by(|a, b| voltage_dist(&end, a).total_cmp(&voltage_dist(&end, b)));
    let converging = nearest.map(|e| {
        let shrinking = envelope(n - tenth, n, e) <= envelope(4 * n / 10, 4 * n / 10 + tenth, e);
        (e, shrinking)
    });
    if let Some((e, true)) = converging {
        if voltage_dist(&end, e) < cfg.fixed_point_eps {
            return with_lambda(settled_at(e));
        }
    }

    // a negative largest exponent means the attractor is an equilibrium the
    // trajectory has not reached yet
    if let (Some(l), Some((e, true))) = (lambda_dimless, converging) {
        if l < -cfg.lambda_periodic {
            return with_lambda(settled_at(e));
        }
    }

    let v1 = traj.v1();
    let r_vis = visit_radius(equilibria, cfg.visit_fraction).unwrap_or(0.0);
    let visited = |label: EquilibriumLabel| {
        equilibria
            .iter()
            .filter(|e| e.label == label)
            .any(|e| v1.iter().any(|v| (v - e.state.v1).abs() < r_vis))
    };
    let (pos, neg) = (visited(EquilibriumLabel::Positive), visited(EquilibriumLabel::Negative));
    let side = match (pos, neg) {
        (true, true) => ScrollSide::Both,
        (true, false) => ScrollSide::Positive,
        (false, true) => ScrollSide::Negative,
        (false, false) => ScrollSide::None,
    };

    let extrema = local_extrema(&traj.times, &v1);
    if extrema.len() < 2 {
        // still drifting towards something; too slow to call
        return with_lambda(TrajectoryClass {
            scroll_side: side,
            ..TrajectoryClass::bare(TrajectoryLabel::Inconclusive)
        });
    }
    let (lo, hi) = v1.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
    let values: Vec<f64> = extrema.iter().map(|e| e.value).collect();
    let clusters = count_clusters(&values, cfg.cluster_fraction * (hi - lo));

    let regular = lambda_dimless.is_none_or(|l| l < cfg.lambda_periodic);
    let label = if clusters <= cfg.max_periodic_clusters && regular {
        TrajectoryLabel::Periodic
    } else if side == ScrollSide::Both {
        TrajectoryLabel::DoubleScroll
    } else {
        TrajectoryLabel::SingleScroll
    };
    with_lambda(TrajectoryClass {
        label,
        scroll_side: side,
        lambda1,
        lambda1_dimensionless: lambda_dimless,
        n_extrema_clusters: clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::StateVector;
    use crate::integrate::{Event, EventKind};
    use num_complex::Complex64;

    fn eq(v1: f64, label: EquilibriumLabel) -> EquilibriumPoint {
        EquilibriumPoint {
            state: StateVector::new(v1, 0.0, 0.0),
            label,
            eigenvalues: [Complex64::new(1.0, 0.0); 3],
            stable: false,
            in_window: true,
        }
    }

    fn three() -> Vec<EquilibriumPoint> {
        vec![
            eq(0.0, EquilibriumLabel::Origin),
            eq(-0.75, EquilibriumLabel::Negative),
            eq(0.9, EquilibriumLabel::Positive),
        ]
    }

    fn synthetic(f: impl Fn(f64) -> f64, n: usize) -> Trajectory {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 1e-5).collect();
        let states = times.iter().map(|t| StateVector::new(f(*t), 0.0, 0.0)).collect();
        Trajectory { times, states, events: Vec::new(), steps: n }
    }

    #[test]
    fn harmonic_around_positive_is_periodic() {
        let tr = synthetic(|t| 0.9 + 0.2 * (2.0 * std::f64::consts::PI * 200.0 * t).sin(), 20_000);
        let c = classify(&tr, &three(), 7.6e-4, None, &ClassifyConfig::default());
        assert_eq!(c.label, TrajectoryLabel::Periodic);
        assert_eq!(c.scroll_side, ScrollSide::Positive);
        assert_eq!(c.n_extrema_clusters, 2);
        // a positive exponent vetoes periodicity
        let c = classify(&tr, &three(), 7.6e-4, Some(1000.0), &ClassifyConfig::default());
        assert_eq!(c.label, TrajectoryLabel::SingleScroll);
    }

    #[test]
    fn diverged_short_and_fixed() {
        let mut tr = synthetic(|_| 0.9, 100);
        let c = classify(&tr, &three(), 1e-3, None, &ClassifyConfig::default());
        assert_eq!(c.label, TrajectoryLabel::FixedPoint);
        assert_eq!(c.scroll_side, ScrollSide::Positive);
        tr.events.push(Event { t: 0.0, kind: EventKind::Diverged, value: 1e9 });
        assert_eq!(
            classify(&tr, &three(), 1e-3, None, &ClassifyConfig::default()).label,
            TrajectoryLabel::Diverged
        );
        let short = synthetic(|t| t, 5);
        assert_eq!(
            classify(&short, &three(), 1e-3, None, &ClassifyConfig::default()).label,
            TrajectoryLabel::Inconclusive
        );
    }

    #[test]
    fn damped_spiral_with_negative_exponent_is_fixed() {
        let tr = synthetic(
            |t| 0.9 + 0.3 * (-50.0 * t).exp() * (2.0 * std::f64::consts::PI * 300.0 * t).sin(),
            20_000,
        );
        let c = classify(&tr, &three(), 7.6e-4, Some(-100.0), &ClassifyConfig::default());
        assert_eq!(c.label, TrajectoryLabel::FixedPoint);
        assert_eq!(c.scroll_side, ScrollSide::Positive);
    }

    #[test]
    fn moving_away_is_not_fixed() {
        // within eps of P0 but growing
        let tr = synthetic(|t| 1e-9 * (t * 1e4).exp(), 200);
        let c = classify(&tr, &three(), 1e-3, None, &ClassifyConfig::default());
        assert_ne!(c.label, TrajectoryLabel::FixedPoint);
    }

    #[test]
    fn broadband_switching_is_double_scroll() {
        // incommensurate tones spanning both equilibria
        let tr = synthetic(
            |t| {
                0.1 + 0.8 * (2100.0 * t).sin()
                    + 0.35 * (2100.0 * std::f64::consts::SQRT_2 * t).sin()
                    + 0.2 * (777.0 * std::f64::consts::E * t).sin()
            },
            200_000,
        );
        let c = classify(&tr, &three(), 7.6e-4, Some(200.0), &ClassifyConfig::default());
        assert!(c.n_extrema_clusters > 8);
        assert_eq!(c.label, TrajectoryLabel::DoubleScroll);
        assert_eq!(c.scroll_side, ScrollSide::Both);
    }

    #[test]
    fn clusters() {
        assert_eq!(count_clusters(&[], 0.1), 0);
        assert_eq!(count_clusters(&[1.0, 1.05, 1.2, -1.0], 0.1), 3);
        // chained points do not merge past the width
        let ramp: Vec<f64> = (0..100).map(|k| k as f64 * 0.01).collect();
        assert_eq!(count_clusters(&ramp, 0.1), 10);
    }

    #[test]
    fn summary_format() {
        let c = TrajectoryClass {
            label: TrajectoryLabel::DoubleScroll,
            scroll_side: ScrollSide::Both,
            lambda1: Some(400.0),
            lambda1_dimensionless: Some(0.3),
            n_extrema_clusters: 40,
        };
        assert_eq!(
            c.summary(),
            "label = \"double_scroll\"\nscroll_side = \"both\"\nlambda1_per_s = 4e2\nlambda1_dimensionless = 3e-1\nn_extrema_clusters = 40\n"
        );
    }
}
