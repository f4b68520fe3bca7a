//! The memristor-based Chua's circuit as a three-dimensional vector field.
//!
//! The nonlinear block is the memristor in parallel with an ideal negative
//! conductance, so `i_R(v) = i_M(v) - g_n v`. State variables are the two
//! capacitor voltages and the inductor current.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DevicePoly;
use crate::error::{Error, Result};

/// Grid size of the sign-change scan used to bracket equilibria.
const SCAN_POINTS: usize = 4096;
/// Roots closer than this to the origin are folded into `P0`.
const ORIGIN_MERGE: f64 = 1e-9;
/// Relative real-part tolerance used when declaring instability.
const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    /// Coupling conductance, `1/R`.
    pub g: f64,
    /// Negative-impedance conductance, `1/R_N`.
    pub g_n: f64,
    pub device: DevicePoly,
}

impl CircuitParams {
    pub fn new(c1: f64, c2: f64, l: f64, g: f64, g_n: f64, device: DevicePoly) -> Result<Self> {
        let reactive = [c1, c2, l].iter().all(|x| x.is_finite() && *x > 0.0);
        let resistive = [g, g_n].iter().all(|x| x.is_finite() && *x >= 0.0);
        if !(reactive && resistive) {
            return Err(Error::InvalidInput(format!(
                "need positive c1, c2, l and non-negative g, g_n: c1={c1} c2={c2} l={l} g={g} g_n={g_n}"
            )));
        }
        Ok(Self { c1, c2, l, g, g_n, device })
    }

    /// `R C2`, the time unit of the dimensionless Chua equations.
    pub fn time_scale(&self) -> f64 {
        self.c2 / self.g
    }

    pub fn alpha(&self) -> f64 {
        self.c2 / self.c1
    }

    pub fn beta(&self) -> f64 {
        self.c2 / (self.g * self.g * self.l)
    }

    /// Characteristic voltage, the larger end of the device window.
    pub fn voltage_scale(&self) -> f64 {
        self.device.v_max.max(-self.device.v_min)
    }

    /// Characteristic inductor current, `g v_max`.
    pub fn current_scale(&self) -> f64 {
        self.g * self.device.v_max
    }

    /// `i_R(v) = i_M(v) - g_n v`.
    pub fn nonlinear_current(&self, v: f64) -> f64 {
        self.device.current(v) - self.g_n * v
    }

    /// `d i_R / dv`.
    pub fn nonlinear_conductance(&self, v: f64) -> f64 {
        self.device.conductance(v) - self.g_n
    }

    /// Outer equilibria exist iff `p1 - g_n < -g`.
    pub fn existence_condition(&self) -> bool {
        self.device.p1() - self.g_n < -self.g
    }

    pub fn vector_field(&self, s: &StateVector) -> StateVector {
        StateVector {
            v1: ((s.v2 - s.v1) * self.g - self.nonlinear_current(s.v1)) / self.c1,
            v2: ((s.v1 - s.v2) * self.g + s.i_l) / self.c2,
            i_l: -s.v2 / self.l,
        }
    }

    /// Row-major Jacobian of [`Self::vector_field`]. Only entry (0,0) depends on the state.
    pub fn jacobian(&self, s: &StateVector) -> [[f64; 3]; 3] {
        [
            [(-self.g - self.nonlinear_conductance(s.v1)) / self.c1, self.g / self.c1, 0.0],
            [self.g / self.c2, -self.g / self.c2, 1.0 / self.c2],
            [0.0, -1.0 / self.l, 0.0],
        ]
    }

    /// Equilibrium residual `i_R(v) + g v`.
    pub fn equilibrium_residual(&self, v: f64) -> f64 {
        self.nonlinear_current(v) + self.g * v
    }

    /// Equilibrium residual divided by `v`: the quartic
    /// `p5 v^4 + p4 v^3 + p3 v^2 + p2 v + (p1 + g - g_n)`.
    fn deflated_residual(&self, v: f64) -> f64 {
        let [p1, p2, p3, p4, p5] = self.device.coeffs;
        (p1 + self.g - self.g_n) + v * (p2 + v * (p3 + v * (p4 + v * p5)))
    }

    /// All equilibria, origin first, then the outer points by increasing `v1`.
    pub fn find_equilibria(&self) -> Vec<EquilibriumPoint> {
        let width = self.device.v_max - self.device.v_min;
        let lo = self.device.v_min - 0.1 * width;
        let hi = self.device.v_max + 0.1 * width;

        let mut roots: Vec<f64> = Vec::new();
        let grid = |k: usize| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64;
        let mut a = lo;
        let mut fa = self.deflated_residual(a);
        for k in 1..SCAN_POINTS {
            let b = grid(k);
            let fb = self.deflated_residual(b);
            if fa == 0.0 {
                roots.push(a);
            } else if fa * fb < 0.0 {
                roots.push(self.refine_root(a, b, fa));
            }
            a = b;
            fa = fb;
        }
        if fa == 0.0 {
            roots.push(a);
        }

        let mut points = vec![self.equilibrium_at(0.0, EquilibriumLabel::Origin)];
        for v in roots {
            if v.abs() < ORIGIN_MERGE {
                continue;
            }
            let label = if v > 0.0 { EquilibriumLabel::Positive } else { EquilibriumLabel::Negative };
            points.push(self.equilibrium_at(v, label));
        }
        points
    }

    fn refine_root(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        while b - a > 1e-14 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.deflated_residual(m);
            if fm == 0.0 {
                return m;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        let v = 0.5 * (a + b);
        // one Newton polish on the undeflated residual
        let slope = self.nonlinear_conductance(v) + self.g;
        let polished = if slope != 0.0 { v - self.equilibrium_residual(v) / slope } else { v };
        if polished.is_finite()
            && (polished - v).abs() < 1e-10
            && self.equilibrium_residual(polished).abs() <= self.equilibrium_residual(v).abs()
        {
            polished
        } else {
            v
        }
    }

    fn equilibrium_at(&self, v1: f64, label: EquilibriumLabel) -> EquilibriumPoint {
        let state = StateVector { v1, v2: 0.0, i_l: -self.g * v1 };
        let eigenvalues = eigenvalues_3x3(&self.jacobian(&state));
        let stable = !classify_eigenvalues(&eigenvalues).unstable;
        EquilibriumPoint { state, label, eigenvalues, stable, in_window: self.device.contains(v1) }
    }
}

pub fn nonlinear_current(params: &CircuitParams, v: f64) -> f64 {
    params.nonlinear_current(v)
}

pub fn existence_condition(params: &CircuitParams) -> bool {
    params.existence_condition()
}

pub fn vector_field(params: &CircuitParams, s: &StateVector) -> StateVector {
    params.vector_field(s)
}

pub fn jacobian(params: &CircuitParams, s: &StateVector) -> [[f64; 3]; 3] {
    params.jacobian(s)
}

pub fn find_equilibria(params: &CircuitParams) -> Vec<EquilibriumPoint> {
    params.find_equilibria()
}

/// `(v1, v2, i_L)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub v1: f64,
    pub v2: f64,
    pub i_l: f64,
}

impl StateVector {
    pub const ZERO: Self = Self { v1: 0.0, v2: 0.0, i_l: 0.0 };

    pub fn new(v1: f64, v2: f64, i_l: f64) -> Self {
        Self { v1, v2, i_l }
    }

    pub fn is_finite(&self) -> bool {
        self.v1.is_finite() && self.v2.is_finite() && self.i_l.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v1, self.v2, self.i_l]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { v1: a[0], v2: a[1], i_l: a[2] }
    }
}

impl Add for StateVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { v1: self.v1 + o.v1, v2: self.v2 + o.v2, i_l: self.i_l + o.i_l }
    }
}

impl Sub for StateVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { v1: self.v1 - o.v1, v2: self.v2 - o.v2, i_l: self.i_l - o.i_l }
    }
}

impl Mul<f64> for StateVector {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self { v1: self.v1 * k, v2: self.v2 * k, i_l: self.i_l * k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    #[serde(rename = "P0")]
    Origin,
    #[serde(rename = "P+")]
    Positive,
    #[serde(rename = "P-")]
    Negative,
}

impl EquilibriumLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Origin => "P0",
            Self::Positive => "P+",
            Self::Negative => "P-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub state: StateVector,
    pub label: EquilibriumLabel,
    pub eigenvalues: [Complex64; 3],
    pub stable: bool,
    /// False when the root lies in the padding outside the device window.
    pub in_window: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub unstable: bool,
    /// One real eigenvalue plus a complex pair whose real parts have opposite signs.
    pub saddle_focus: bool,
}

pub fn classify_stability(eq: &EquilibriumPoint) -> StabilityVerdict {
    classify_eigenvalues(&eq.eigenvalues)
}

fn classify_eigenvalues(ev: &[Complex64; 3]) -> StabilityVerdict {
    let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = STABILITY_TOL * radius;
    let unstable = ev.iter().any(|z| z.re > tol);

    let complex: Vec<&Complex64> = ev.iter().filter(|z| z.im.abs() > tol).collect();
    let saddle_focus = complex.len() == 2 && {
        let real = ev.iter().find(|z| z.im.abs() <= tol).map(|z| z.re);
        real.is_some_and(|r| r * complex[0].re < 0.0)
    };
    StabilityVerdict { unstable, saddle_focus }
}

/// Eigenvalues of a real 3x3 matrix via its characteristic polynomial.
/// The real root comes first, then the remaining pair.
pub fn eigenvalues_3x3(m: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    solve_cubic(-tr, minors, -det)
}

/// Roots of `x^3 + a x^2 + b x + c`.
///
/// A real root is bracketed by the Cauchy bound and bisected, polished by
/// Newton, and the remaining quadratic is solved in cancellation-free form.
pub fn solve_cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = |x: f64| ((x + a) * x + b) * x + c;
    let dp = |x: f64| (3.0 * x + 2.0 * a) * x + b;

    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let (mut lo, mut hi) = (-bound, bound);
    let mut flo = p(lo);
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dp(r);
        if d == 0.0 {
            break;
        }
        let next = r - p(r) / d;
        if !next.is_finite() || p(next).abs() >= p(r).abs() {
            break;
        }
        r = next;
    }

    // x^2 + qb x + qc after dividing out (x - r), then a complex Newton polish
    let qb = a + r;
    let qc = b + r * qb;
    let disc = qb * qb - 4.0 * qc;
    let mut pair = if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (qb + if qb >= 0.0 { s } else { -s });
        if q == 0.0 {
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [Complex64::new(q, 0.0), Complex64::new(qc / q, 0.0)]
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * qb, im), Complex64::new(-0.5 * qb, -im)]
    };
    let pz = |z: Complex64| ((z + a) * z + b) * z + c;
    let dpz = |z: Complex64| (z * 3.0 + 2.0 * a) * z + b;
    for z in pair.iter_mut() {
        for _ in 0..2 {
            let d = dpz(*z);
            if d.norm() == 0.0 {
                break;
            }
            let next = *z - pz(*z) / d;
            if !(next.re.is_finite() && next.im.is_finite()) || pz(next).norm() >= pz(*z).norm() {
                break;
            }
            *z = next;
        }
    }
    if pair[0].im != 0.0 && pair[1].im != 0.0 {
        // keep the pair exactly conjugate
        pair[1] = pair[0].conj();
    }
    [Complex64::new(r, 0.0), pair[0], pair[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    fn designed() -> CircuitParams {
        // closed-form design from the reference coefficients at v_eq = 0.9 V
        let dev = DevicePoly::reference();
        let c1 = 10e-9;
        let c2 = 10.0 * c1;
        let g = 10.0 * (dev.current(0.9) / 0.9 - dev.p1());
        let l = c2 / (14.22 * g * g);
        let g_n = g + c1 / c2 * g + dev.p1();
        CircuitParams::new(c1, c2, l, g, g_n, dev).unwrap()
    }

    fn odd_cubic(excess: f64) -> CircuitParams {
        let dev = DevicePoly::new([0.0, 0.0, 1e-5, 0.0, 0.0], -1.2, 2.6).unwrap();
        let g = 1e-4;
        CircuitParams::new(1e-8, 1e-7, 0.4, g, g + excess, dev).unwrap()
    }

    /// Sign-change scan on the undeflated residual with plain bisection.
    fn oracle_roots(p: &CircuitParams) -> Vec<f64> {
        let f = |v: f64| p.equilibrium_residual(v);
        let n = 20_000;
        let (lo, hi) = (-1.6, 3.0);
        let mut out = Vec::new();
        for k in 0..n {
            let mut a = lo + (hi - lo) * k as f64 / n as f64;
            let mut b = lo + (hi - lo) * (k + 1) as f64 / n as f64;
            if a.abs() < 1e-3 || b.abs() < 1e-3 {
                continue;
            }
            if f(a) * f(b) < 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(a) * f(m) <= 0.0 {
                        b = m
                    } else {
                        a = m
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        out
    }

    #[test]
    fn nonlinear_block() {
        let p = designed();
        assert_eq!(p.nonlinear_current(0.0), 0.0);
        let mut table = p;
        table.g_n = 1.0 / 6856.0;
        let i = table.nonlinear_current(0.9);
        assert!((i + 1.1775e-4).abs() < 0.005 * 1.1775e-4, "{i}");
        let i_des = p.nonlinear_current(0.9);
        assert!((i_des + p.g * 0.9).abs() < 0.005 * p.g * 0.9);
        assert_eq!(p.nonlinear_conductance(0.0), p.device.p1() - p.g_n);
    }

    #[test]
    fn existence() {
        let dev = DevicePoly::reference();
        let table = CircuitParams::new(1e-8, 1e-7, 0.41, 1.0 / 7643.0, 1.0 / 6856.0, dev).unwrap();
        assert!(table.existence_condition());
        let mut p = table;
        p.g_n = 1e-300;
        assert!(!p.existence_condition());
        let p1 = dev.p1();
        p.g_n = p.g + p1;
        assert!(!p.existence_condition());
    }

    #[test]
    fn field_basics() {
        let p = designed();
        assert_eq!(p.vector_field(&StateVector::ZERO), StateVector::ZERO);
        let f = p.vector_field(&StateVector::new(0.0, 1.0, 0.0));
        assert_eq!(f, StateVector::new(p.g / p.c1, -p.g / p.c2, -1.0 / p.l));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = designed();
        for s in [
            StateVector::new(0.0, 0.0, 0.0),
            StateVector::new(0.9, 0.01, -1e-4),
            StateVector::new(-0.6, 0.2, 3e-5),
            StateVector::new(1.1, -0.1, 1e-4),
        ] {
            let j = p.jacobian(&s);
            let steps = [1e-6, 1e-6, 1e-6 * p.g];
            for col in 0..3 {
                let mut plus = s.to_array();
                let mut minus = s.to_array();
                plus[col] += steps[col];
                minus[col] -= steps[col];
                let fp = p.vector_field(&StateVector::from_array(plus)).to_array();
                let fm = p.vector_field(&StateVector::from_array(minus)).to_array();
                for row in 0..3 {
                    let fd = (fp[row] - fm[row]) / (2.0 * steps[col]);
                    let scale = j[row][col].abs().max(1e-30);
                    assert!(
                        (fd - j[row][col]).abs() <= 1e-5 * scale,
                        "({row},{col}): {fd} vs {}",
                        j[row][col]
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_structure() {
        let p = designed();
        let a = p.jacobian(&StateVector::new(0.2, 0.0, 0.0));
        let b = p.jacobian(&StateVector::new(-0.7, 0.3, 1e-4));
        for r in 0..3 {
            for c in 0..3 {
                if (r, c) != (0, 0) {
                    assert_eq!(a[r][c], b[r][c]);
                }
            }
        }
        let j0 = p.jacobian(&StateVector::ZERO);
        let tr = j0[0][0] + j0[1][1] + j0[2][2];
        assert!(tr.abs() < 1e-12 * p.g / p.c1, "{tr}");
    }

    #[test]
    fn designed_equilibria() {
        let p = designed();
        let eq = p.find_equilibria();
        assert_eq!(eq.len(), 3);
        assert_eq!(eq[0].label, EquilibriumLabel::Origin);
        assert_eq!(eq[0].state.v1, 0.0);
        let oracle = oracle_roots(&p);
        assert_eq!(oracle.len(), 2);
        let neg = eq.iter().find(|e| e.label == EquilibriumLabel::Negative).unwrap();
        let pos = eq.iter().find(|e| e.label == EquilibriumLabel::Positive).unwrap();
        assert!((pos.state.v1 - 0.9).abs() < 0.005);
        assert!((neg.state.v1 + 0.741).abs() < 0.015);
        assert!((pos.state.v1 - oracle[1]).abs() < 1e-10);
        assert!((neg.state.v1 - oracle[0]).abs() < 1e-10);
        for e in &eq {
            assert!(p.equilibrium_residual(e.state.v1).abs() < 1e-12);
            assert_eq!(e.state.v2, 0.0);
            assert_eq!(e.state.i_l, -p.g * e.state.v1);
            let f = p.vector_field(&e.state);
            assert!(f.v1.abs() < 1e-9 * p.g * 0.9 / p.c1);
            assert!(f.v2.abs() < 1e-9 * p.g * 0.9 / p.c2);
            assert!(f.i_l.abs() < 1e-9 * 0.9 / p.l);
            assert!(e.in_window);
        }
    }

    #[test]
    fn designed_equilibria_unstable() {
        let p = designed();
        for e in p.find_equilibria() {
            let v = classify_stability(&e);
            assert!(v.unstable, "{:?}", e.label);
            assert!(!e.stable);
            assert!(v.saddle_focus, "{:?} {:?}", e.label, e.eigenvalues);
        }
    }

    #[test]
    fn odd_cubic_roots_mirror() {
        let p = odd_cubic(8.1e-6);
        let eq = p.find_equilibria();
        assert_eq!(eq.len(), 3);
        assert!((eq[1].state.v1 + 0.9).abs() < 1e-12);
        assert!((eq[2].state.v1 - 0.9).abs() < 1e-12);
        assert!((eq[1].state.v1 + eq[2].state.v1).abs() < 1e-13);
        let none = odd_cubic(-1e-6).find_equilibria();
        assert_eq!(none.len(), 1);
        assert_eq!(none[0].label, EquilibriumLabel::Origin);
    }

    #[test]
    fn linear_rlc_is_stable() {
        let dev = DevicePoly::new([0.0; 5], -1.0, 1.0).unwrap();
        let mut p = CircuitParams::new(1e-8, 1e-7, 0.4, 1e-4, 1.0, dev).unwrap();
        p.g_n = 0.0;
        let eq = p.find_equilibria();
        assert_eq!(eq.len(), 1);
        assert!(eq[0].stable);
        assert!(eq[0].eigenvalues.iter().all(|z| z.re < 0.0));
    }

    #[test]
    fn out_of_window_root_flagged() {
        // roots at +-1.1 V against a [-1.0, 1.0] window
        let dev = DevicePoly::new([0.0, 0.0, 1e-5, 0.0, 0.0], -1.0, 1.0).unwrap();
        let g = 1e-4;
        let p = CircuitParams::new(1e-8, 1e-7, 0.4, g, g + 1.21e-5, dev).unwrap();
        let eq = p.find_equilibria();
        assert_eq!(eq.len(), 3);
        assert!(eq[1..].iter().all(|e| !e.in_window));
    }

    fn nalgebra_eigs(m: &[[f64; 3]; 3]) -> Vec<Complex64> {
        let mat = Matrix3::from_fn(|r, c| m[r][c]);
        let mut v: Vec<Complex64> = mat.complex_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn eigenvalues_agree_with_nalgebra() {
        let p = designed();
        for e in p.find_equilibria() {
            let j = p.jacobian(&e.state);
            let mut ours = e.eigenvalues.to_vec();
            ours.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            let theirs = nalgebra_eigs(&j);
            let radius = theirs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).norm() < 1e-8 * radius, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn cubic_known_roots() {
        // (x - 1)(x - 2)(x + 3) = x^3 - 7x + 6
        let mut r: Vec<f64> = solve_cubic(0.0, -7.0, 6.0).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (g, w) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((g - w).abs() < 1e-12);
        }
        // (x + 1)(x^2 + 4) = x^3 + x^2 + 4x + 4
        let z = solve_cubic(1.0, 4.0, 4.0);
        assert!((z[0].re + 1.0).abs() < 1e-12);
        assert!((z[1].im.abs() - 2.0).abs() < 1e-12);
        // triple root at zero
        assert!(solve_cubic(0.0, 0.0, 0.0).iter().all(|z| z.norm() < 1e-12));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cubic_matches_nalgebra(m in prop::array::uniform3(prop::array::uniform3(-50.0f64..50.0))) {
                let mut ours = eigenvalues_3x3(&m).to_vec();
                ours.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                let theirs = nalgebra_eigs(&m);
                let radius = theirs.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for (a, b) in ours.iter().zip(&theirs) {
                    // repeated roots are only determined to sqrt(eps)
                    prop_assert!((a - b).norm() < 1e-6 * radius, "{} vs {}", a, b);
                }
            }
        }
    }
}
