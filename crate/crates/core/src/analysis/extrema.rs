use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Strict local maxima and minima of a sampled signal.
///
/// Runs of equal samples are treated as one plateau located at its time
/// midpoint. Isolated extrema are refined with the parabola through the
/// three bracketing samples.
pub fn local_extrema(times: &[f64], values: &[f64]) -> Vec<Extremum> {
    assert_eq!(times.len(), values.len(), "times and values differ in length");
    if values.len() < 3 {
        return Vec::new();
    }

    // (first index, last index) of each run of equal values
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] != values[start] {
            runs.push((start, i - 1));
            start = i;
        }
    }

    let mut out = Vec::new();
    for w in runs.windows(3) {
        let (prev, (a, b), next) = (w[0], w[1], w[2]);
        let v = values[a];
        let (before, after) = (values[prev.1], values[next.0]);
        let kind = if v > before && v > after {
            ExtremumKind::Max
        } else if v < before && v < after {
            ExtremumKind::Min
        } else {
            continue;
        };
        let (time, value) = if a == b {
            parabola_vertex([times[a - 1], times[a], times[a + 1]], [values[a - 1], values[a], values[a + 1]])
        } else {
            (0.5 * (times[a] + times[b]), v)
        };
        out.push(Extremum { time, value, kind });
    }
    out
}

fn parabola_vertex(t: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    // shift to the middle sample for conditioning
    let (h0, h2) = (t[0] - t[1], t[2] - t[1]);
    let s0 = (y[0] - y[1]) / h0;
    let s2 = (y[2] - y[1]) / h2;
    let a = (s2 - s0) / (h2 - h0);
    let b = s0 - a * h0;
    if a == 0.0 || !a.is_finite() {
        return (t[1], y[1]);
    }
    let x = (-b / (2.0 * a)).clamp(h0, h2);
    (t[1] + x, y[1] + b * x + a * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize, periods: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        // phase offset so no sample lands on an extremum exactly
        let v = t.iter().map(|x| (2.0 * PI * periods * x + 0.3).sin()).collect();
        (t, v)
    }

    #[test]
    fn sine_extrema() {
        let (t, v) = sine(1000, 3.0);
        let ex = local_extrema(&t, &v);
        let maxima: Vec<_> = ex.iter().filter(|e| e.kind == ExtremumKind::Max).collect();
        let minima: Vec<_> = ex.iter().filter(|e| e.kind == ExtremumKind::Min).collect();
        assert_eq!(maxima.len(), 3);
        assert_eq!(minima.len(), 3);
        for e in &ex {
            assert!((e.value.abs() - 1.0).abs() < 1e-4, "{e:?}");
        }
        assert!(ex.windows(2).all(|w| w[0].kind != w[1].kind));
    }

    #[test]
    fn refinement_error_is_quadratic_in_spacing() {
        let err = |n| {
            let (t, v) = sine(n, 3.0);
            local_extrema(&t, &v).iter().map(|e| (e.value.abs() - 1.0).abs()).fold(0.0, f64::max)
        };
        let coarse = err(200);
        let fine = err(400);
        // O(h^2) or better
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn constant_and_short() {
        assert!(local_extrema(&[0.0, 1.0, 2.0, 3.0], &[5.0; 4]).is_empty());
        assert!(local_extrema(&[0.0, 1.0], &[0.0, 1.0]).is_empty());
    }

    #[test]
    fn plateau_midpoint() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0];
        let ex = local_extrema(&t, &v);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].time, 3.0);
        assert_eq!(ex[0].value, 2.0);
        // a step is not an extremum
        assert!(local_extrema(&t, &[0.0, 1.0, 1.0, 2.0, 2.0, 3.0]).is_empty());
    }
}
