//! Static I-V model of the programmed memristor.
//!
//! In a high-resistance state the device current is a fifth-order polynomial
//! in the applied voltage with no constant term. A [`StateTable`] holds one
//! fitted polynomial per programmed resistance so the circuit can be retuned
//! by moving along the table.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this the scaled least-squares system is treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Programming read voltage used to define `r_prog`.
pub const READ_VOLTAGE: f64 = 0.1;

/// Fifth-order I-V polynomial `i = p1 v + p2 v^2 + ... + p5 v^5` together
/// with the voltage window it is valid in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevicePoly {
    /// Coefficients p1..p5 (A/V^k).
    pub coeffs: [f64; 5],
    /// Lower bound, `-|V_SET|`.
    pub v_min: f64,
    /// Upper bound, `V_STOP`.
    pub v_max: f64,
}

impl DevicePoly {
    pub fn new(coeffs: [f64; 5], v_min: f64, v_max: f64) -> Result<Self> {
        if !(v_min < 0.0 && v_max > 0.0) {
            return Err(Error::InvalidInput(format!(
                "device window must straddle zero, got [{v_min}, {v_max}]"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(Self { coeffs, v_min, v_max })
    }

    /// Coefficients fitted for the state programmed with `V_STOP = 2.6 V`,
    /// with the window lower bound at -1.2 V.
    pub fn reference() -> Self {
        Self { coeffs: [1.91e-6, 3.11e-7, 1.91e-5, -5.20e-6, 1.77e-6], v_min: -1.2, v_max: 2.6 }
    }

    pub fn p1(&self) -> f64 {
        self.coeffs[0]
    }

    /// Memristor current at `v`. Horner form, factored so `current(0) == 0`.
    pub fn current(&self, v: f64) -> f64 {
        let [p1, p2, p3, p4, p5] = self.coeffs;
        v * (p1 + v * (p2 + v * (p3 + v * (p4 + v * p5))))
    }

    /// Differential conductance `di/dv`.
    pub fn conductance(&self, v: f64) -> f64 {
        let [p1, p2, p3, p4, p5] = self.coeffs;
        p1 + v * (2.0 * p2 + v * (3.0 * p3 + v * (4.0 * p4 + v * 5.0 * p5)))
    }

    /// Low-voltage conductance estimate, i.e. `p1`.
    pub fn small_signal_conductance(&self) -> f64 {
        self.coeffs[0]
    }

    /// Multiplies every coefficient by `s`; the window is unchanged.
    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.map(|c| c * s), ..*self }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.v_min && v <= self.v_max
    }

    /// Resistance seen at the programming read voltage.
    pub fn read_resistance(&self) -> f64 {
        READ_VOLTAGE / self.current(READ_VOLTAGE)
    }
}

pub fn eval_current(poly: &DevicePoly, v: f64) -> f64 {
    poly.current(v)
}

pub fn small_signal_conductance(poly: &DevicePoly) -> f64 {
    poly.small_signal_conductance()
}

/// One programmed high-resistance state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    /// Resistance read at 0.1 V after programming (ohm).
    pub r_prog: f64,
    /// Magnitude of the SET threshold (V).
    pub v_set_mag: f64,
    /// Maximum RESET voltage (V).
    pub v_stop: f64,
    pub poly: DevicePoly,
}

impl DeviceState {
    /// Builds a state; the polynomial window is set from `v_set_mag` and `v_stop`.
    pub fn new(r_prog: f64, v_set_mag: f64, v_stop: f64, coeffs: [f64; 5]) -> Result<Self> {
        if !(r_prog > 0.0) {
            return Err(Error::NonPositiveResistance(r_prog));
        }
        if !(v_set_mag > 0.0 && v_stop > 0.0) {
            return Err(Error::InvalidInput(format!(
                "v_set_mag and v_stop must be positive, got {v_set_mag} and {v_stop}"
            )));
        }
        let poly = DevicePoly::new(coeffs, -v_set_mag, v_stop)?;
        Ok(Self { r_prog, v_set_mag, v_stop, poly })
    }

    /// The reference state (`V_STOP = 2.6 V`, |V_SET| = 1.2 V). `r_prog` is
    /// the polynomial's own resistance at the read voltage.
    pub fn reference() -> Self {
        let poly = DevicePoly::reference();
        Self { r_prog: poly.read_resistance(), v_set_mag: -poly.v_min, v_stop: poly.v_max, poly }
    }

    /// Default fit window, `[-0.9 |V_SET|, V_STOP]`.
    pub fn fit_window(&self) -> (f64, f64) {
        (-0.9 * self.v_set_mag, self.v_stop)
    }
}

/// Measured current at an applied voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvSample {
    pub v: f64,
    pub i: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub samples_used: usize,
    pub residual_rms: f64,
    pub max_abs_residual: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
}

/// Least-squares fit of the five coefficients over basis `{v, ..., v^5}`.
///
/// Only samples inside `window` are used. Columns are normalised before
/// solving through an SVD so the returned condition number is meaningful.
pub fn fit_poly(samples: &[IvSample], window: (f64, f64)) -> Result<(DevicePoly, FitReport)> {
    let (v_min, v_max) = window;
    if samples.iter().any(|s| !s.v.is_finite() || !s.i.is_finite()) {
        return Err(Error::InvalidInput("non-finite I-V sample".into()));
    }
    let used: Vec<IvSample> = samples.iter().copied().filter(|s| s.v >= v_min && s.v <= v_max).collect();

    let mut distinct: Vec<f64> = used.iter().map(|s| s.v).filter(|v| *v != 0.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::Underdetermined { distinct: distinct.len() });
    }

    let n = used.len();
    let mut a = DMatrix::<f64>::from_fn(n, 5, |r, c| used[r].v.powi(c as i32 + 1));
    let b = DVector::<f64>::from_iterator(n, used.iter().map(|s| s.i));

    let mut scale = [0.0; 5];
    for (c, sc) in scale.iter_mut().enumerate() {
        let norm = a.column(c).norm();
        *sc = norm;
        a.column_mut(c).scale_mut(1.0 / norm);
    }

    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let x =
        svd.solve(&b, 0.0).map_err(|e| Error::InvalidInput(format!("least-squares solve failed: {e}")))?;

    let mut coeffs = [0.0; 5];
    for c in 0..5 {
        coeffs[c] = x[c] / scale[c];
    }
    let poly = DevicePoly::new(coeffs, v_min, v_max)?;

    let residuals: Vec<f64> = used.iter().map(|s| s.i - poly.current(s.v)).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let max_abs_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));

    Ok((poly, FitReport { samples_used: n, residual_rms, max_abs_residual, condition }))
}

/// Programmed states sorted by strictly increasing `r_prog`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTable {
    states: Vec<DeviceState>,
}

impl StateTable {
    pub fn new(mut states: Vec<DeviceState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("state table needs at least one entry".into()));
        }
        states.sort_by(|a, b| a.r_prog.total_cmp(&b.r_prog));
        if states.windows(2).any(|w| w[0].r_prog >= w[1].r_prog) {
            return Err(Error::InvalidInput("duplicate r_prog in state table".into()));
        }
        Ok(Self { states })
    }

    /// Single-row table anchored at [`DeviceState::reference`]; every other
    /// resistance is reached through the 1/R scaling law.
    pub fn scaling_law() -> Self {
        Self { states: vec![DeviceState::reference()] }
    }

    pub fn states(&self) -> &[DeviceState] {
        &self.states
    }

    /// Device state at `r_prog`.
    ///
    /// Exact rows are returned unchanged. Between rows the coefficients and
    /// thresholds are interpolated linearly in `ln r`. Outside the table the
    /// nearest row is extrapolated with `p_i(r) = p_i(ref) r_ref / r`, keeping
    /// its thresholds.
    pub fn state_at(&self, r_prog: f64) -> Result<DeviceState> {
        if !(r_prog > 0.0) || !r_prog.is_finite() {
            return Err(Error::NonPositiveResistance(r_prog));
        }
        let first = &self.states[0];
        let last = &self.states[self.states.len() - 1];
        if let Some(s) = self.states.iter().find(|s| s.r_prog == r_prog) {
            return Ok(*s);
        }
        if r_prog < first.r_prog || r_prog > last.r_prog {
            let anchor = if r_prog < first.r_prog { first } else { last };
            let poly = anchor.poly.scaled(anchor.r_prog / r_prog);
            return Ok(DeviceState { r_prog, poly, ..*anchor });
        }
        let hi = self.states.partition_point(|s| s.r_prog < r_prog);
        let (a, b) = (&self.states[hi - 1], &self.states[hi]);
        let t = (r_prog.ln() - a.r_prog.ln()) / (b.r_prog.ln() - a.r_prog.ln());
        let lerp = |x: f64, y: f64| x + t * (y - x);
        let mut coeffs = [0.0; 5];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = lerp(a.poly.coeffs[k], b.poly.coeffs[k]);
        }
        DeviceState::new(r_prog, lerp(a.v_set_mag, b.v_set_mag), lerp(a.v_stop, b.v_stop), coeffs)
    }
}

pub const IV_HEADER: [&str; 2] = ["voltage_V", "current_A"];
pub const STATE_HEADER: [&str; 8] = ["r_prog_ohm", "v_set_V", "v_stop_V", "p1", "p2", "p3", "p4", "p5"];

fn check_header(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_error(e, 1))?;
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse { line: 1, msg: "empty file".into() });
    }
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::Parse { line, msg: e.to_string() }
}

fn parse_field(record: &csv::StringRecord, idx: usize, line: u64) -> Result<f64> {
    let raw =
        record.get(idx).ok_or_else(|| Error::Parse { line, msg: format!("missing column {}", idx + 1) })?;
    let v: f64 =
        raw.trim().parse().map_err(|_| Error::Parse { line, msg: format!("`{raw}` is not a number") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite value `{raw}`") });
    }
    Ok(v)
}

fn records<R: Read>(input: R, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(&mut reader, header)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let vals = (0..header.len()).map(|k| parse_field(&rec, k, line)).collect::<Result<_>>()?;
        rows.push((line, vals));
    }
    Ok(rows)
}

/// Reads `voltage_V,current_A` samples.
pub fn read_iv_csv<R: Read>(input: R) -> Result<Vec<IvSample>> {
    Ok(records(input, &IV_HEADER)?.into_iter().map(|(_, r)| IvSample { v: r[0], i: r[1] }).collect())
}

pub fn write_iv_csv<W: Write>(out: W, samples: &[IvSample]) -> Result<()> {
    let mut w = out;
    writeln!(w, "{}", IV_HEADER.join(","))?;
    for s in samples {
        writeln!(w, "{:e},{:e}", s.v, s.i)?;
    }
    Ok(())
}

/// Reads a state table. `v_set_V` may be given with either sign.
pub fn read_state_table<R: Read>(input: R) -> Result<StateTable> {
    let rows = records(input, &STATE_HEADER)?;
    if rows.is_empty() {
        return Err(Error::Parse { line: 2, msg: "state table has no rows".into() });
    }
    let mut states = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let st = DeviceState::new(r[0], r[1].abs(), r[2], [r[3], r[4], r[5], r[6], r[7]])
            .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        states.push(st);
    }
    StateTable::new(states)
}

pub fn write_state_table<W: Write>(out: W, states: &[DeviceState]) -> Result<()> {
    let mut w = out;
    writeln!(w, "{}", STATE_HEADER.join(","))?;
    for s in states {
        let [p1, p2, p3, p4, p5] = s.poly.coeffs;
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.r_prog, s.v_set_mag, s.v_stop, p1, p2, p3, p4, p5
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Term-by-term evaluation, independent of the Horner path.
    fn naive(c: &[f64; 5], v: f64) -> f64 {
        c.iter().enumerate().map(|(k, p)| p * v.powi(k as i32 + 1)).sum()
    }

    #[test]
    fn current_matches_term_by_term() {
        let p = DevicePoly::reference();
        assert_eq!(p.current(0.0), 0.0);
        let at_pos = naive(&p.coeffs, 0.9);
        let at_neg = naive(&p.coeffs, -0.9);
        assert!((at_pos - 1.35283e-5).abs() < 1e-9);
        assert!((at_neg + 1.98479e-5).abs() < 1e-9);
        assert!((p.current(0.9) - 1.35283e-5).abs() < 1e-9);
        assert!((p.current(-0.9) + 1.98479e-5).abs() < 1e-9);
        assert!((p.current(0.9) - at_pos).abs() < 1e-18);
    }

    #[test]
    fn conductance_matches_finite_difference() {
        let p = DevicePoly::reference();
        for v in [-1.0, -0.3, 0.0, 0.5, 1.7] {
            let h = 1e-6;
            let fd = (p.current(v + h) - p.current(v - h)) / (2.0 * h);
            assert!((p.conductance(v) - fd).abs() < 1e-9 * p.conductance(v).abs().max(1e-6));
        }
    }

    #[test]
    fn small_signal_is_p1() {
        assert_eq!(small_signal_conductance(&DevicePoly::reference()), 1.91e-6);
        let zero = DevicePoly::new([0.0; 5], -1.0, 1.0).unwrap();
        assert_eq!(zero.small_signal_conductance(), 0.0);
        assert_eq!(DevicePoly::reference().scaled(3.0).small_signal_conductance(), 3.0 * 1.91e-6);
    }

    #[test]
    fn window_must_straddle_zero() {
        assert!(DevicePoly::new([0.0; 5], 0.1, 1.0).is_err());
        assert!(DevicePoly::new([0.0; 5], -1.0, 0.0).is_err());
    }

    #[test]
    fn reference_read_resistance() {
        let st = DeviceState::reference();
        // 0.1 / i(0.1) with the reference coefficients
        assert!((st.r_prog - 470_128.7).abs() < 0.1, "{}", st.r_prog);
        assert_eq!(st.poly.v_min, -1.2);
    }

    fn synthetic(n: usize, lo: f64, hi: f64) -> Vec<IvSample> {
        let p = DevicePoly::reference();
        (0..n)
            .map(|k| {
                let v = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                IvSample { v, i: naive(&p.coeffs, v) }
            })
            .collect()
    }

    #[test]
    fn fit_recovers_reference() {
        let (fit, rep) = fit_poly(&synthetic(50, -0.9, 2.6), (-0.9, 2.6)).unwrap();
        for (got, want) in fit.coeffs.iter().zip(DevicePoly::reference().coeffs) {
            assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(rep.residual_rms < 1e-15);
        assert_eq!(rep.samples_used, 50);
    }

    #[test]
    fn fit_zero_target() {
        let samples: Vec<_> = (1..20).map(|k| IvSample { v: k as f64 * 0.1, i: 0.0 }).collect();
        let (fit, rep) = fit_poly(&samples, (-1.0, 2.0)).unwrap();
        assert!(fit.coeffs.iter().all(|c| *c == 0.0));
        assert_eq!(rep.residual_rms, 0.0);
        assert_eq!(rep.max_abs_residual, 0.0);
    }

    #[test]
    fn fit_underdetermined() {
        let s = synthetic(3, 0.1, 1.0);
        assert!(matches!(fit_poly(&s, (-1.0, 2.0)), Err(Error::Underdetermined { distinct: 3 })));
        // repeated voltages and zero do not count
        let mut s = synthetic(4, 0.1, 1.0);
        s.push(s[0]);
        s.push(IvSample { v: 0.0, i: 0.0 });
        assert!(matches!(fit_poly(&s, (-1.0, 2.0)), Err(Error::Underdetermined { distinct: 4 })));
    }

    #[test]
    fn fit_ignores_out_of_window() {
        let mut s = synthetic(40, -0.9, 2.6);
        s.push(IvSample { v: -2.0, i: 1.0 });
        let (_, rep) = fit_poly(&s, (-0.9, 2.6)).unwrap();
        assert_eq!(rep.samples_used, 40);
    }

    #[test]
    fn fit_singular_cluster() {
        // five distinct voltages squeezed into 1e-9 V: numerically rank deficient
        let s: Vec<_> = (0..5).map(|k| IvSample { v: 1.0 + k as f64 * 1e-10, i: 1e-6 }).collect();
        assert!(matches!(fit_poly(&s, (-1.0, 2.0)), Err(Error::Singular { .. })));
    }

    fn two_row_table() -> StateTable {
        StateTable::new(vec![
            DeviceState::new(1e5, 0.8, 2.0, [1e-5, 0.0, 2e-5, 0.0, 1e-6]).unwrap(),
            DeviceState::new(1e6, 1.4, 2.7, [1e-6, 1e-7, 1e-5, -1e-6, 1e-6]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn state_at_exact_rows_and_identity() {
        let t = two_row_table();
        assert_eq!(t.state_at(1e5).unwrap(), t.states()[0]);
        assert_eq!(t.state_at(1e6).unwrap(), t.states()[1]);
        let single = StateTable::scaling_law();
        let r = single.states()[0].r_prog;
        assert_eq!(single.state_at(r).unwrap(), single.states()[0]);
    }

    #[test]
    fn state_at_scaling_law() {
        let single = StateTable::scaling_law();
        let anchor = single.states()[0];
        let half = single.state_at(anchor.r_prog / 2.0).unwrap();
        for (h, a) in half.poly.coeffs.iter().zip(anchor.poly.coeffs) {
            assert!((h - 2.0 * a).abs() <= 1e-15 * a.abs());
        }
        assert_eq!(half.v_set_mag, anchor.v_set_mag);
        // above the range the nearest (last) row anchors the extrapolation
        let t = two_row_table();
        let s = t.state_at(2e6).unwrap();
        assert_eq!(s.v_set_mag, 1.4);
        assert!((s.poly.coeffs[2] - 0.5e-5).abs() < 1e-20);
    }

    #[test]
    fn state_at_log_midpoint() {
        let t = two_row_table();
        let mid = t.state_at((1e5f64 * 1e6).sqrt()).unwrap();
        assert!((mid.v_set_mag - 1.1).abs() < 1e-12);
        assert!((mid.poly.coeffs[0] - 5.5e-6).abs() < 1e-18);
        assert_eq!(mid.poly.v_min, -mid.v_set_mag);
    }

    #[test]
    fn state_at_rejects_nonpositive() {
        let t = StateTable::scaling_law();
        assert!(matches!(t.state_at(0.0), Err(Error::NonPositiveResistance(_))));
        assert!(t.state_at(-5.0).is_err());
    }

    #[test]
    fn table_csv_roundtrip() {
        let t = two_row_table();
        let mut buf = Vec::new();
        write_state_table(&mut buf, t.states()).unwrap();
        let back = read_state_table(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn iv_csv_errors_carry_line() {
        let bad = "voltage_V,current_A\n0.1,1e-7\n0.2,abc\n";
        match read_iv_csv(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_iv_csv("".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_iv_csv("v,i\n1,2\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linear_in_coefficients(
                c in prop::array::uniform5(-1e-4f64..1e-4),
                s in -10.0f64..10.0,
                v in -3.0f64..3.0,
            ) {
                let p = DevicePoly::new(c, -3.0, 3.0).unwrap();
                let lhs = p.scaled(s).current(v);
                let rhs = s * p.current(v);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-15));
                prop_assert_eq!(p.current(0.0), 0.0);
            }

            #[test]
            fn fit_roundtrip(
                c in prop::array::uniform5(prop_oneof![-1e-4f64..-1e-7, 1e-7f64..1e-4]),
                n in 5usize..60,
            ) {
                let truth = DevicePoly::new(c, -1.0, 2.0).unwrap();
                let samples: Vec<_> = (0..n)
                    .map(|k| {
                        let v = -1.0 + 3.0 * (k as f64 + 0.5) / n as f64;
                        IvSample { v, i: naive(&c, v) }
                    })
                    .collect();
                let (fit, _) = fit_poly(&samples, (-1.0, 2.0)).unwrap();
                for (g, w) in fit.coeffs.iter().zip(truth.coeffs) {
                    prop_assert!(((g - w) / w).abs() < 1e-8, "{} vs {}", g, w);
                }
            }
        }
    }
}
