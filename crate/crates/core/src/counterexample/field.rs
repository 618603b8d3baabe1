//! Evaluation of `u` and its coefficients in band-local coordinates.
//!
//! On band `n` write `t = t_n + s r_n` with `s ∈ [0, 1]` and
//! `g_n = q_n + z_n s r_n`. With `k_n = z_n^{1/2m}`, the gauged modes are
//!
//! ```text
//! e^{g_n} v_n     = cos(k_n x1)
//! e^{g_n} w_n     = e^{J(s) p_n} cos(k_n x2)
//! e^{g_n} v_{n+1} = e^{-p_n s} cos(k_{n+1} x1)
//! ```
//!
//! so that `ũ = A ṽ_n + B w̃_n + C ṽ_{n+1}` and `e^{g_n} ∂_t u = ∂_t ũ - z_n ũ`.
//! The prefix `t < t_1` is band 1 at negative `s`, where `A = 1` and the
//! other cutoffs vanish.

use serde::Serialize;

use super::cutoffs::{Cutoff, CutoffSet};
use super::plan::SequencePlan;
use crate::error::{Error, Result};

/// Largest `|log10|` of an absolute value.
pub const REPRESENTABLE_LOG10: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVariant {
    /// `Ł = ∂_t + (-1)^m (∂_{x1}^{2m} + l ∂_{x2}^{2m})`.
    PlusL,
    /// `Ł = ∂_t + (-1)^m (∂_{x1}^{2m} - l ∂_{x2}^{2m})`.
    MinusL,
}

impl SignVariant {
    fn sign(self) -> f64 {
        match self {
            SignVariant::PlusL => 1.0,
            SignVariant::MinusL => -1.0,
        }
    }
}

impl std::str::FromStr for SignVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus_l" => Ok(SignVariant::PlusL),
            "minus_l" => Ok(SignVariant::MinusL),
            _ => Err(Error::Domain(format!("sign must be plus_l or minus_l, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// True values; fails when they leave the f64 range.
    Absolute,
    /// Values times `e^{g_n + shift}`.
    Band { shift: f64 },
    /// Band gauge shifted per point so the largest active mode prefactor is 1.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Location {
    Prefix,
    Band { n: usize, s: f64 },
    Terminal,
}

impl Location {
    pub fn band(&self) -> usize {
        match self {
            Location::Prefix => 0,
            Location::Band { n, .. } => *n,
            Location::Terminal => usize::MAX,
        }
    }
}

/// `u` and its derivatives, all multiplied by `e^{log_gauge}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldValue {
    pub location: Location,
    pub log_gauge: f64,
    pub u: f64,
    pub dt_u: f64,
    pub dx1_u: f64,
    pub dx2_u: f64,
    pub d2m_x1_u: f64,
    pub d2m_x2_u: f64,
    /// `e^{log_gauge} Łu` for each variant, free of the `z_n` cancellation.
    pub lu_plus: f64,
    pub lu_minus: f64,
    pub l: f64,
}

impl FieldValue {
    fn zero(location: Location) -> Self {
        FieldValue {
            location,
            log_gauge: 0.0,
            u: 0.0,
            dt_u: 0.0,
            dx1_u: 0.0,
            dx2_u: 0.0,
            d2m_x1_u: 0.0,
            d2m_x2_u: 0.0,
            lu_plus: 0.0,
            lu_minus: 0.0,
            l: 1.0,
        }
    }

    /// `log10 |u|`; `-inf` where `u = 0`.
    pub fn log10_abs_u(&self) -> f64 {
        (self.u.abs().ln() - self.log_gauge) / std::f64::consts::LN_10
    }

    pub fn lu(&self, sign: SignVariant) -> f64 {
        match sign {
            SignVariant::PlusL => self.lu_plus,
            SignVariant::MinusL => self.lu_minus,
        }
    }
}

/// `l, b₁, b₂, c` and the residual of `Łu + b·∇u + cu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerOrder {
    pub l: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    /// Gauged `Łu` from the mode decomposition.
    pub lu: f64,
    /// Gauged `Łu` assembled from the derivative outputs.
    pub lu_direct: f64,
    pub residual: f64,
    /// `|residual|` over the sum of magnitudes of its terms.
    pub residual_rel: f64,
    /// `u = ∇u = 0`; `b` and `c` are set to 0.
    pub degenerate: bool,
    pub log_gauge: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleField {
    pub plan: SequencePlan,
    pub cutoffs: CutoffSet,
}

struct Mode {
    cut: f64,
    dcut: f64,
    /// `ln` of the gauged prefactor.
    log_pre: f64,
    /// `d/dt` of `log_pre`.
    rate: f64,
    freq: f64,
    /// `∂^{2m}` eigenvalue magnitude `k^{2m} = z`.
    z: f64,
    on_x2: bool,
    /// `Ł` applied to the gauged mode, over the mode, per variant.
    defect_plus: f64,
    defect_minus: f64,
}

impl CounterexampleField {
    pub fn new(plan: SequencePlan, cutoffs: CutoffSet) -> Self {
        CounterexampleField { plan, cutoffs }
    }

    /// Band-local coordinates of `t`.
    pub fn locate(&self, t: f64) -> Result<Location> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
        }
        if t == 1.0 {
            return Ok(Location::Terminal);
        }
        let starts = &self.plan.band_start;
        if t < starts[0] {
            return Ok(Location::Prefix);
        }
        let i = starts.partition_point(|&b| b <= t) - 1;
        if i >= self.plan.n_max {
            return Err(Error::Domain(format!(
                "t = {t} lies past the last computed band (N = {})",
                self.plan.n_max
            )));
        }
        let s = (t - starts[i]) / self.plan.r[i];
        Ok(Location::Band { n: i + 1, s })
    }

    /// `(n, s)` used by the band formulas.
    fn band_coords(&self, loc: Location, t: f64) -> (usize, f64) {
        match loc {
            Location::Prefix => (1, (t - self.plan.band_start[0]) / self.plan.r[0]),
            Location::Band { n, s } => (n, s),
            Location::Terminal => unreachable!(),
        }
    }

    /// `l = 1 - J'(s) Δz_n / z_n`, the coefficient making `w_n` a solution.
    pub fn l_band(&self, n: usize, s: f64) -> f64 {
        let jp = self.cutoffs.derivative(Cutoff::J, s, 1);
        if jp == 0.0 {
            return 1.0;
        }
        1.0 - jp * SequencePlan::at(&self.plan.dz, n) / SequencePlan::at(&self.plan.z, n)
    }

    pub fn l_at(&self, t: f64) -> Result<f64> {
        match self.locate(t)? {
            Location::Band { n, s } => Ok(self.l_band(n, s)),
            _ => Ok(1.0),
        }
    }

    fn modes(&self, n: usize, s: f64) -> ([Mode; 3], f64) {
        let plan = &self.plan;
        let i = n - 1;
        let (z, z1, dz, p, r) = (plan.z[i], plan.z[i + 1], plan.dz[i], plan.p[i], plan.r[i]);
        let [(a, da), (b, db), (c, dc), (j, dj)] = self.cutoffs.first_order(s);
        let l = if dj == 0.0 { 1.0 } else { 1.0 - dj * dz / z };
        let w_rate = dj * dz;
        let k = plan.frequency(n);
        let k1 = plan.frequency(n + 1);
        let modes = [
            Mode {
                cut: a,
                dcut: da / r,
                log_pre: 0.0,
                rate: 0.0,
                freq: k,
                z,
                on_x2: false,
                defect_plus: 0.0,
                defect_minus: 0.0,
            },
            Mode {
                cut: b,
                dcut: db / r,
                log_pre: j * p,
                rate: w_rate,
                freq: k,
                z,
                on_x2: true,
                defect_plus: 0.0,
                defect_minus: 2.0 * (w_rate - z),
            },
            Mode {
                cut: c,
                dcut: dc / r,
                log_pre: -p * s,
                rate: -dz,
                freq: k1,
                z: z1,
                on_x2: false,
                // -Δz - z_n + z_{n+1}, exact in integers
                defect_plus: z1 - z - dz,
                defect_minus: z1 - z - dz,
            },
        ];
        (modes, l)
    }

    /// `u` and derivatives at band-local `(n, s)`.
    pub fn eval_band(&self, n: usize, s: f64, x: (f64, f64), gauge: Gauge) -> Result<FieldValue> {
        if n == 0 || n > self.plan.n_max {
            return Err(Error::Domain(format!("band {n} outside 1..={}", self.plan.n_max)));
        }
        let loc = if s < 0.0 && n == 1 {
            Location::Prefix
        } else {
            Location::Band { n, s }
        };
        self.eval_at(loc, n, s, x, gauge)
    }

    pub fn eval_solution(&self, t: f64, x: (f64, f64), gauge: Gauge) -> Result<FieldValue> {
        let loc = self.locate(t)?;
        if loc == Location::Terminal {
            return Ok(FieldValue::zero(loc));
        }
        let (n, s) = self.band_coords(loc, t);
        self.eval_at(loc, n, s, x, gauge)
    }

    fn eval_at(&self, loc: Location, n: usize, s: f64, x: (f64, f64), gauge: Gauge) -> Result<FieldValue> {
        let plan = &self.plan;
        let i = n - 1;
        let (modes, l) = self.modes(n, s);
        let active = |m: &Mode| m.cut != 0.0 || m.dcut != 0.0;
        let g = plan.q[i] + plan.z[i] * s * plan.r[i];
        let top = modes
            .iter()
            .filter(|m| active(m))
            .map(|m| m.log_pre)
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = match gauge {
            Gauge::Band { shift } => shift,
            Gauge::Normalized => -top,
            Gauge::Absolute => {
                let log10 = (top - g) / std::f64::consts::LN_10;
                if log10.abs() > REPRESENTABLE_LOG10 {
                    return Err(Error::Unrepresentable { log10 });
                }
                -g
            }
        };
        let even = if plan.m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut out = FieldValue::zero(loc);
        out.log_gauge = g + shift;
        out.l = l;
        let zn = plan.z[i];
        let mut dt_gauged = 0.0;
        for m in modes.iter().filter(|m| active(m)) {
            let pre = (m.log_pre + shift).exp();
            let xv = if m.on_x2 { x.1 } else { x.0 };
            let (sin, cos) = (m.freq * xv).sin_cos();
            let mode = pre * cos;
            out.u += m.cut * mode;
            dt_gauged += (m.dcut + m.cut * m.rate) * mode;
            let dx = -m.cut * pre * m.freq * sin;
            let d2m = even * m.cut * m.z * mode;
            if m.on_x2 {
                out.dx2_u += dx;
                out.d2m_x2_u += d2m;
            } else {
                out.dx1_u += dx;
                out.d2m_x1_u += d2m;
            }
            out.lu_plus += (m.dcut + m.cut * m.defect_plus) * mode;
            out.lu_minus += (m.dcut + m.cut * m.defect_minus) * mode;
        }
        out.dt_u = dt_gauged - zn * out.u;
        Ok(out)
    }

    /// `∂_t` of the gauged `ũ` at fixed band gauge, for derivative checks.
    pub fn gauged_time_derivative(v: &FieldValue, z_n: f64) -> f64 {
        v.dt_u + z_n * v.u
    }

    pub fn lower_order(&self, v: &FieldValue, sign: SignVariant) -> LowerOrder {
        let lu = v.lu(sign);
        let even = if self.plan.m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let sg = sign.sign();
        let lu_direct = v.dt_u + even * (v.d2m_x1_u + sg * v.l * v.d2m_x2_u);
        let den = v.u * v.u + v.dx1_u * v.dx1_u + v.dx2_u * v.dx2_u;
        let degenerate = !(den > 0.0);
        let (b1, b2, c) = if degenerate {
            (0.0, 0.0, 0.0)
        } else {
            let f = -lu / den;
            (f * v.dx1_u, f * v.dx2_u, f * v.u)
        };
        let parts = [
            lu_direct,
            b1 * v.dx1_u,
            b2 * v.dx2_u,
            c * v.u,
        ];
        let residual: f64 = parts.iter().sum();
        let scale = v.dt_u.abs()
            + v.d2m_x1_u.abs()
            + (v.l * v.d2m_x2_u).abs()
            + parts[1..].iter().map(|p| p.abs()).sum::<f64>();
        LowerOrder {
            l: v.l,
            b1,
            b2,
            c,
            lu,
            lu_direct,
            residual,
            residual_rel: if scale > 0.0 { residual.abs() / scale } else { 0.0 },
            degenerate,
            log_gauge: v.log_gauge,
        }
    }

    pub fn eval_lower_order(&self, t: f64, x: (f64, f64), sign: SignVariant) -> Result<LowerOrder> {
        let v = self.eval_solution(t, x, Gauge::Normalized)?;
        Ok(self.lower_order(&v, sign))
    }

    /// As [`eval_lower_order`](Self::eval_lower_order), failing where `u = ∇u = 0`.
    pub fn eval_lower_order_strict(&self, t: f64, x: (f64, f64), sign: SignVariant) -> Result<LowerOrder> {
        let lo = self.eval_lower_order(t, x, sign)?;
        if lo.degenerate {
            return Err(Error::Degenerate { t, x1: x.0, x2: x.1 });
        }
        Ok(lo)
    }

    /// CSV of `u` and the coefficients on `times × xs × xs`. `gauged` marks rows
    /// whose absolute `u` is outside the f64 range; `log10_abs_u` stays exact.
    pub fn grid_csv(&self, times: &[f64], xs: &[f64], sign: SignVariant) -> Result<String> {
        let mut out = String::from("t,x1,x2,band,log10_abs_u,sign_u,l,b1,b2,c,gauged\n");
        for &t in times {
            for &x1 in xs {
                for &x2 in xs {
                    let (v, gauged) = match self.eval_solution(t, (x1, x2), Gauge::Absolute) {
                        Err(Error::Unrepresentable { .. }) => {
                            (self.eval_solution(t, (x1, x2), Gauge::Normalized)?, true)
                        }
                        other => (other?, false),
                    };
                    let lo = self.lower_order(&v, sign);
                    let band = match v.location {
                        Location::Prefix => "prefix".to_string(),
                        Location::Band { n, .. } => n.to_string(),
                        Location::Terminal => "terminal".to_string(),
                    };
                    out.push_str(&format!(
                        "{t:.16e},{x1:.16e},{x2:.16e},{band},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                        v.log10_abs_u(),
                        if v.u > 0.0 { 1 } else if v.u < 0.0 { -1 } else { 0 },
                        lo.l,
                        lo.b1,
                        lo.b2,
                        lo.c,
                        gauged
                    ));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::cutoffs::build_cutoffs;
    use crate::counterexample::plan::{build_sequences, K0Choice};
    use crate::modulus::ModulusSpec;

    fn field(k0: K0Choice) -> CounterexampleField {
        let cut = build_cutoffs(1);
        let plan = build_sequences(&ModulusSpec::power(0.5).unwrap(), k0, 20, 1, &cut).unwrap();
        CounterexampleField::new(plan, cut)
    }

    #[test]
    fn anchors_are_exact() {
        let f = field(K0Choice::Auto);
        let t1 = f.plan.band_start[0];
        let v = f.eval_solution(t1, (0.0, 0.0), Gauge::Absolute).unwrap();
        assert_eq!(v.u, 1.0);
        let v = f.eval_solution(1.0, (0.3, -2.0), Gauge::Absolute).unwrap();
        assert_eq!((v.u, v.dt_u, v.dx1_u, v.dx2_u), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(f.l_at(1.0).unwrap(), 1.0);
        assert_eq!(f.l_at(0.5).unwrap(), 1.0);
    }

    #[test]
    fn prefix_is_first_mode() {
        let f = field(K0Choice::Fixed(10));
        let t1 = f.plan.band_start[0];
        let t = t1 - 1e-3;
        let v = f.eval_solution(t, (0.4, 0.0), Gauge::Absolute).unwrap();
        let z1 = f.plan.z[0];
        let k1 = z1.sqrt();
        let exact = (z1 * 1e-3).exp() * (k1 * 0.4).cos();
        assert!((v.u - exact).abs() < 1e-9 * exact.abs(), "{} vs {exact}", v.u);
        assert_eq!(v.location, Location::Prefix);
        let f = field(K0Choice::Auto);
        assert!(matches!(
            f.eval_solution(0.0, (0.0, 0.0), Gauge::Absolute),
            Err(Error::Unrepresentable { .. })
        ));
    }

    #[test]
    fn band_boundaries_match_in_common_gauge() {
        let f = field(K0Choice::Fixed(10));
        for n in 1..f.plan.n_max {
            for x in [(0.0, 0.0), (0.3, 0.7), (-1.1, 2.0)] {
                let left = f.eval_band(n, 1.0, x, Gauge::Normalized).unwrap();
                let right = f.eval_band(n + 1, 0.0, x, Gauge::Normalized).unwrap();
                let rescale = (right.log_gauge - left.log_gauge).exp();
                let lu = left.u * rescale;
                assert!((lu - right.u).abs() <= 1e-12 * right.u.abs().max(1e-300), "n={n}: {lu} vs {}", right.u);
                assert_eq!(left.l, 1.0);
                assert_eq!(right.l, 1.0);
            }
        }
    }

    #[test]
    fn residual_vanishes_for_both_variants() {
        let f = field(K0Choice::Auto);
        for n in [1, 5, 20] {
            for s in [0.05, 0.18, 0.22, 0.3, 0.4, 0.7] {
                let v = f.eval_band(n, s, (0.37, -1.3), Gauge::Normalized).unwrap();
                for sign in [SignVariant::PlusL, SignVariant::MinusL] {
                    let lo = f.lower_order(&v, sign);
                    assert!(!lo.degenerate);
                    assert!(lo.residual_rel < 1e-12, "n={n} s={s} {sign:?}: {lo:?}");
                }
            }
        }
    }

    #[test]
    fn w_mode_solves_plus_operator() {
        let f = field(K0Choice::Fixed(10));
        // on [1/6, 1/5] only A and B are active and A' = B' = 0
        let v = f.eval_band(3, 0.18, (0.2, 0.9), Gauge::Normalized).unwrap();
        assert_eq!(v.lu_plus, 0.0);
        assert!(v.lu_minus != 0.0);
    }

    #[test]
    fn gauge_shift_invariance() {
        let f = field(K0Choice::Auto);
        for (n, s) in [(1, 0.21), (2, 0.45), (7, 0.6), (12, 0.9)] {
            let a = f.eval_band(n, s, (0.1, 0.2), Gauge::Normalized).unwrap();
            let b = f.eval_band(n, s, (0.1, 0.2), Gauge::Band { shift: -150.0 }).unwrap();
            for sign in [SignVariant::PlusL, SignVariant::MinusL] {
                let la = f.lower_order(&a, sign);
                let lb = f.lower_order(&b, sign);
                for (x, y) in [(la.l, lb.l), (la.b1, lb.b1), (la.b2, lb.b2), (la.c, lb.c)] {
                    assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300), "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let f = field(K0Choice::Fixed(10));
        let gauge = Gauge::Band { shift: 0.0 };
        for (n, s) in [(2, 0.21), (4, 0.3), (5, 0.7)] {
            let r = f.plan.r[n - 1];
            let z = f.plan.z[n - 1];
            let at = |s: f64| f.eval_band(n, s, (0.3, 0.1), gauge).unwrap().u;
            let h = 1e-4;
            let fd = (-at(s + 2.0 * h) + 8.0 * at(s + h) - 8.0 * at(s - h) + at(s - 2.0 * h)) / (12.0 * h * r);
            let v = f.eval_band(n, s, (0.3, 0.1), gauge).unwrap();
            let d = CounterexampleField::gauged_time_derivative(&v, z);
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(v.u.abs()), "{fd} vs {d}");
        }
    }
}
