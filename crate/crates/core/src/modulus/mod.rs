//! Moduli of continuity and the Osgood dichotomy.
//!
//! A modulus is a concave, strictly increasing `μ: [0,1] → [0,1]` with
//! `μ(0) = 0`. Everything that integrates `1/μ` near the origin works in
//! the logarithmic variable `u = -ln s`, where
//!
//! ```text
//! ∫_ε^1 ds / μ(s) = ∫_0^{ln(1/ε)} g(u) du,   g(u) = e^{-u} / μ(e^{-u}),
//! ```
//!
//! and `ln μ(e^{-u})` is evaluated in closed form for the named families so
//! that arbitrarily deep tails never underflow.

mod empirical;

pub use empirical::{
    concave_envelope, empirical_modulus, sliding_oscillation, ConcaveEnvelope, EmpiricalModulus,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Piecewise-linear tabulated modulus. Nodes span `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    nodes: Vec<(f64, f64)>,
}

impl Table {
    /// Accepts any finite node list with strictly increasing abscissae from
    /// 0 to 1. Shape properties (monotonicity, concavity, `μ(0)=0`) are left
    /// to [`validate_modulus`].
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidModulus("table needs at least two nodes".into()));
        }
        if nodes.iter().any(|(t, m)| !t.is_finite() || !m.is_finite()) {
            return Err(Error::InvalidModulus("table entries must be finite".into()));
        }
        if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidModulus(
                "table abscissae must be strictly increasing".into(),
            ));
        }
        if nodes[0].0 != 0.0 || nodes[nodes.len() - 1].0 != 1.0 {
            return Err(Error::InvalidModulus("table must span [0, 1]".into()));
        }
        Ok(Table { nodes })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    fn eval(&self, tau: f64) -> f64 {
        let i = self.nodes.partition_point(|&(t, _)| t <= tau);
        if i == 0 {
            return self.nodes[0].1;
        }
        if i >= self.nodes.len() {
            return self.nodes[self.nodes.len() - 1].1;
        }
        let (t0, m0) = self.nodes[i - 1];
        let (t1, m1) = self.nodes[i];
        m0 + (m1 - m0) * (tau - t0) / (t1 - t0)
    }

    fn first_interior(&self) -> f64 {
        self.nodes[1].0
    }
}

/// A modulus of continuity, either a named analytic family or a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusJson", into = "ModulusJson")]
pub enum ModulusSpec {
    /// `μ(τ) = τ` (Lipschitz).
    Linear,
    /// `μ(τ) = τ^α`, `0 < α ≤ 1` (Hölder).
    Power { alpha: f64 },
    /// `μ(τ) = τ(1 - ln τ)`: concave, increasing, `μ(1) = 1`, and
    /// asymptotic to `τ|ln τ|` at the origin.
    LogLinear,
    Table(Table),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModulusJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<[f64; 2]>>,
}

impl TryFrom<ModulusJson> for ModulusSpec {
    type Error = Error;

    fn try_from(j: ModulusJson) -> Result<Self> {
        match j.kind.as_str() {
            "linear" => Ok(ModulusSpec::Linear),
            "loglinear" => Ok(ModulusSpec::LogLinear),
            "power" => {
                let alpha = j
                    .alpha
                    .ok_or_else(|| Error::InvalidModulus("power modulus needs alpha".into()))?;
                ModulusSpec::power(alpha)
            }
            "table" => {
                let rows = j
                    .table
                    .ok_or_else(|| Error::InvalidModulus("table modulus needs table".into()))?;
                ModulusSpec::table(rows.into_iter().map(|[t, m]| (t, m)).collect())
            }
            other => Err(Error::InvalidModulus(format!("unknown kind {other:?}"))),
        }
    }
}

impl From<ModulusSpec> for ModulusJson {
    fn from(m: ModulusSpec) -> Self {
        match m {
            ModulusSpec::Linear => ModulusJson {
                kind: "linear".into(),
                alpha: None,
                table: None,
            },
            ModulusSpec::LogLinear => ModulusJson {
                kind: "loglinear".into(),
                alpha: None,
                table: None,
            },
            ModulusSpec::Power { alpha } => ModulusJson {
                kind: "power".into(),
                alpha: Some(alpha),
                table: None,
            },
            ModulusSpec::Table(t) => ModulusJson {
                kind: "table".into(),
                alpha: None,
                table: Some(t.nodes.iter().map(|&(a, b)| [a, b]).collect()),
            },
        }
    }
}

impl ModulusSpec {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidModulus(format!(
                "power exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(ModulusSpec::Power { alpha })
    }

    pub fn table(nodes: Vec<(f64, f64)>) -> Result<Self> {
        Table::new(nodes).map(ModulusSpec::Table)
    }

    /// Tabulates `mu` at the given abscissae (which must include 0 and 1).
    pub fn sampled_from(mu: &ModulusSpec, taus: &[f64]) -> Result<Self> {
        let nodes = taus.iter().map(|&t| (t, mu.value(t))).collect();
        ModulusSpec::table(nodes)
    }

    /// Parses the command-line shorthand `family[:param]`.
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f, Some(p)),
            None => (s, None),
        };
        match (family, param) {
            ("linear", None) => Ok(ModulusSpec::Linear),
            ("loglinear", None) => Ok(ModulusSpec::LogLinear),
            ("power", Some(p)) => {
                let alpha = p
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidModulus(format!("bad exponent {p:?}: {e}")))?;
                ModulusSpec::power(alpha)
            }
            _ => Err(Error::InvalidModulus(format!("unknown modulus {s:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ModulusSpec::Linear => "linear".into(),
            ModulusSpec::LogLinear => "loglinear".into(),
            ModulusSpec::Power { alpha } => format!("power:{alpha}"),
            ModulusSpec::Table(t) => format!("table[{}]", t.nodes.len()),
        }
    }

    /// `μ(τ)` without the domain check; `τ` is clamped into `[0, 1]`.
    pub fn value(&self, tau: f64) -> f64 {
        let tau = tau.clamp(0.0, 1.0);
        match self {
            ModulusSpec::Linear => tau,
            ModulusSpec::Power { alpha } => tau.powf(*alpha),
            ModulusSpec::LogLinear => {
                if tau == 0.0 {
                    0.0
                } else {
                    tau * (1.0 - tau.ln())
                }
            }
            ModulusSpec::Table(t) => t.eval(tau),
        }
    }

    /// `ln μ(e^{-u})` for `u ≥ 0`, exact in the deep tail.
    pub fn ln_mu_neglog(&self, u: f64) -> f64 {
        match self {
            ModulusSpec::Linear => -u,
            ModulusSpec::Power { alpha } => -alpha * u,
            ModulusSpec::LogLinear => -u + u.ln_1p(),
            ModulusSpec::Table(t) => {
                let u1 = -t.first_interior().ln();
                if u >= u1 {
                    let (t0, m0) = t.nodes[0];
                    let (t1, m1) = t.nodes[1];
                    let slope = (m1 - m0) / (t1 - t0);
                    if m0 == 0.0 {
                        slope.ln() - u
                    } else {
                        (m0 + slope * (-u).exp()).ln()
                    }
                } else {
                    t.eval((-u).exp()).ln()
                }
            }
        }
    }

    /// The integrand `g(u) = e^{-u} / μ(e^{-u})` of `∫ ds/μ(s)` in log form.
    pub fn log_integrand(&self, u: f64) -> f64 {
        (-u - self.ln_mu_neglog(u)).exp()
    }

    /// Kinks of [`ModulusSpec::log_integrand`] (table nodes) inside `(u0, u1)`.
    fn log_breakpoints(&self, u0: f64, u1: f64) -> Vec<f64> {
        let mut pts = vec![u0];
        if let ModulusSpec::Table(t) = self {
            let mut inner: Vec<f64> = t
                .nodes
                .iter()
                .filter(|(tau, _)| *tau > 0.0 && *tau < 1.0)
                .map(|(tau, _)| -tau.ln())
                .filter(|&u| u > u0 && u < u1)
                .collect();
            inner.sort_by(f64::total_cmp);
            pts.extend(inner);
        }
        pts.push(u1);
        pts
    }

    /// `∫_{u0}^{u1} g(u) du`, i.e. `∫_{e^{-u1}}^{e^{-u0}} ds/μ(s)`.
    pub fn log_integral(&self, u0: f64, u1: f64) -> f64 {
        if u1 == u0 {
            return 0.0;
        }
        let (lo, hi, sign) = if u1 > u0 { (u0, u1, 1.0) } else { (u1, u0, -1.0) };
        let tol = Tolerance {
            abs: 1e-300,
            rel: 1e-13,
            max_subdivisions: 4000,
        };
        let pts = self.log_breakpoints(lo, hi);
        let total: f64 = pts
            .windows(2)
            .map(|w| quad::integrate(|u| self.log_integrand(u), w[0], w[1], tol).value)
            .sum();
        sign * total
    }

    /// `∫_{u0}^{u1} du / μ(e^{-u})`.
    ///
    /// With `u = ln Φ'`, this is the increment of the Carleman weight `Φ`.
    pub fn log_integral_recip(&self, u0: f64, u1: f64) -> f64 {
        if u1 == u0 {
            return 0.0;
        }
        let (lo, hi, sign) = if u1 > u0 { (u0, u1, 1.0) } else { (u1, u0, -1.0) };
        let tol = Tolerance {
            abs: 1e-300,
            rel: 1e-13,
            max_subdivisions: 4000,
        };
        let pts = self.log_breakpoints(lo, hi);
        let total: f64 = pts
            .windows(2)
            .map(|w| quad::integrate(|u| (-self.ln_mu_neglog(u)).exp(), w[0], w[1], tol).value)
            .sum();
        sign * total
    }

    /// `∫_0^{e^{-u0}} ds/μ(s)`, or `None` when it diverges.
    ///
    /// Integrates over chunks of doubling length in `u`. Convergence is
    /// declared once chunk increments shrink geometrically and the
    /// extrapolated remainder is below `1e-9` of the running sum; divergence
    /// once the chunks reach length `2^20` without that happening.
    pub fn tail_integral(&self, u0: f64) -> Option<f64> {
        let mut sum = 0.0;
        let mut prev: Option<f64> = None;
        let mut shrinking = 0usize;
        let mut start = u0;
        for k in 0..=20 {
            let len = (1u64 << k) as f64;
            let d = self.log_integral(start, start + len);
            start += len;
            sum += d;
            if !sum.is_finite() {
                return None;
            }
            if d <= 1e-16 * sum {
                return Some(sum);
            }
            if let Some(p) = prev {
                let q = d / p;
                if q <= 0.75 {
                    shrinking += 1;
                } else {
                    shrinking = 0;
                }
                if shrinking >= 3 {
                    let rest = d * q / (1.0 - q);
                    if rest <= 1e-9 * sum {
                        return Some(sum + rest);
                    }
                }
            }
            prev = Some(d);
        }
        None
    }

    /// Closed-form Osgood classification for the named families.
    pub fn symbolic_osgood(&self) -> Option<bool> {
        match self {
            ModulusSpec::Linear | ModulusSpec::LogLinear => Some(true),
            ModulusSpec::Power { alpha } => Some(*alpha >= 1.0),
            ModulusSpec::Table(_) => None,
        }
    }
}

/// `μ(τ)` with the domain check.
pub fn eval_modulus(spec: &ModulusSpec, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("modulus argument {tau} outside [0, 1]")));
    }
    Ok(spec.value(tau))
}

/// Grids used by [`validate_modulus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    /// Points of the uniform grid on `[0, 1]`.
    pub grid_points: usize,
    /// Points of the geometric grid on `[1, s_max]`.
    pub geometric_points: usize,
    pub s_max: f64,
    pub tol: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            grid_points: 1000,
            geometric_points: 200,
            s_max: 1e6,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    /// Grid point(s) witnessing the failure.
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

impl CheckEntry {
    fn pass(name: &str, detail: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            passed: true,
            witness: None,
            detail: detail.into(),
        }
    }

    fn fail(name: &str, witness: Vec<f64>, detail: impl Into<String>) -> Self {
        CheckEntry {
            name: name.into(),
            passed: false,
            witness: Some(witness),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub modulus: String,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn validate_modulus(spec: &ModulusSpec, cfg: &ValidationConfig) -> ValidationReport {
    let n = cfg.grid_points.max(2);
    let grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| spec.value(t)).collect();
    let mut checks = Vec::new();

    let mu0 = spec.value(0.0);
    checks.push(if mu0 == 0.0 {
        CheckEntry::pass("zero_at_origin", "mu(0) = 0")
    } else {
        CheckEntry::fail("zero_at_origin", vec![0.0], format!("mu(0) = {mu0}"))
    });

    checks.push(
        match (1..n).find(|&i| vals[i] <= vals[i - 1]) {
            None => CheckEntry::pass("strictly_increasing", format!("{n}-point grid")),
            Some(i) => CheckEntry::fail(
                "strictly_increasing",
                vec![grid[i - 1], grid[i]],
                format!("mu({}) = {} <= mu({}) = {}", grid[i], vals[i], grid[i - 1], vals[i - 1]),
            ),
        },
    );

    let mu1 = spec.value(1.0);
    checks.push(if mu1 <= 1.0 {
        CheckEntry::pass("bounded_by_one", format!("mu(1) = {mu1}"))
    } else {
        CheckEntry::fail("bounded_by_one", vec![1.0], format!("mu(1) = {mu1}"))
    });

    let mut concave = CheckEntry::pass("concave_midpoint", format!("all pairs of the {n}-point grid"));
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            let mid = 0.5 * (grid[i] + grid[j]);
            let lhs = spec.value(mid);
            let rhs = 0.5 * (vals[i] + vals[j]);
            if lhs < rhs - cfg.tol {
                concave = CheckEntry::fail(
                    "concave_midpoint",
                    vec![grid[i], mid, grid[j]],
                    format!("mu({mid}) = {lhs} < {rhs}"),
                );
                break 'outer;
            }
        }
    }
    checks.push(concave);

    let m = cfg.geometric_points.max(2);
    let ratio = cfg.s_max.ln() / (m - 1) as f64;
    let sgrid: Vec<f64> = (0..m).map(|i| (ratio * i as f64).exp()).collect();
    let h: Vec<f64> = sgrid.iter().map(|&s| s * s * spec.value(1.0 / s)).collect();
    checks.push(
        match (1..m).find(|&i| h[i] < h[i - 1] - cfg.tol * h[i - 1].abs()) {
            None => CheckEntry::pass(
                "s2_mu_inv_nondecreasing",
                format!("geometric grid on [1, {}]", cfg.s_max),
            ),
            Some(i) => CheckEntry::fail(
                "s2_mu_inv_nondecreasing",
                vec![sgrid[i - 1], sgrid[i]],
                format!("s^2 mu(1/s) drops from {} to {}", h[i - 1], h[i]),
            ),
        },
    );

    ValidationReport {
        modulus: spec.label(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// `I(ε) = ∫_ε^1 ds / μ(s)`.
pub fn osgood_integral(spec: &ModulusSpec, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("lower limit {eps} outside (0, 1)")));
    }
    Ok(spec.log_integral(0.0, -eps.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OsgoodClass {
    Osgood,
    NonOsgood,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictMethod {
    #[serde(rename = "symbolic")]
    Symbolic,
    #[serde(rename = "numeric-trend")]
    NumericTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OsgoodVerdict {
    pub class: OsgoodClass,
    /// `(ε, I(ε))` on `ε = 10^{-1}, 10^{-2}, …`.
    pub integral_trace: Vec<(f64, f64)>,
    pub method: VerdictMethod,
}

/// Decade increments above this floor, sustained over the last
/// [`TREND_DECADES`] decades, classify a tabulated modulus as Osgood.
pub const TREND_DIVERGENT_FLOOR: f64 = 0.05;
/// Decade increments all below this ceiling classify it as non-Osgood.
pub const TREND_CONVERGENT_CEILING: f64 = 1e-4;
pub const TREND_DECADES: usize = 5;

pub fn classify_osgood(spec: &ModulusSpec) -> OsgoodVerdict {
    let decades = match spec {
        ModulusSpec::Table(t) => {
            // reach well past the first node, where the table is linear
            let depth = (-t.first_interior().log10()).ceil() as usize + 2 * TREND_DECADES;
            depth.clamp(12, 300)
        }
        _ => 12,
    };
    let ln10 = std::f64::consts::LN_10;
    let mut trace = Vec::with_capacity(decades);
    let mut increments = Vec::with_capacity(decades);
    let mut acc = 0.0;
    for k in 1..=decades {
        let d = spec.log_integral((k - 1) as f64 * ln10, k as f64 * ln10);
        acc += d;
        increments.push(d);
        trace.push((10f64.powi(-(k as i32)), acc));
    }
    if let Some(osgood) = spec.symbolic_osgood() {
        return OsgoodVerdict {
            class: if osgood {
                OsgoodClass::Osgood
            } else {
                OsgoodClass::NonOsgood
            },
            integral_trace: trace,
            method: VerdictMethod::Symbolic,
        };
    }
    let last = &increments[increments.len() - TREND_DECADES..];
    let class = if last.iter().all(|&d| d > TREND_DIVERGENT_FLOOR) {
        OsgoodClass::Osgood
    } else if last.iter().all(|&d| d < TREND_CONVERGENT_CEILING) {
        OsgoodClass::NonOsgood
    } else {
        OsgoodClass::Undetermined
    };
    OsgoodVerdict {
        class,
        integral_trace: trace,
        method: VerdictMethod::NumericTrend,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_modulus(&ModulusSpec::Linear, 0.0).unwrap(), 0.0);
        let sqrt = ModulusSpec::power(0.5).unwrap();
        assert_eq!(eval_modulus(&sqrt, 0.25).unwrap(), 0.5);
        assert_eq!(eval_modulus(&ModulusSpec::LogLinear, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_outside_unit_interval() {
        assert!(matches!(
            eval_modulus(&ModulusSpec::Linear, 1.5),
            Err(Error::Domain(_))
        ));
        assert!(eval_modulus(&ModulusSpec::Linear, -1e-9).is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let t = ModulusSpec::table(vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        assert!((t.value(0.25) - 0.4).abs() < 1e-15);
        assert!((t.value(0.75) - 0.9).abs() < 1e-15);
        assert!(ModulusSpec::table(vec![(0.0, 0.0), (0.5, 0.8)]).is_err());
        assert!(ModulusSpec::table(vec![(0.0, 0.0), (0.5, 0.8), (0.5, 0.9), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn validation_examples() {
        let cfg = ValidationConfig::default();
        assert!(validate_modulus(&ModulusSpec::Linear, &cfg).passed);
        assert!(validate_modulus(&ModulusSpec::power(0.5).unwrap(), &cfg).passed);
        assert!(validate_modulus(&ModulusSpec::LogLinear, &cfg).passed);

        let bad = ModulusSpec::table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).unwrap();
        let rep = validate_modulus(&bad, &cfg);
        assert!(!rep.passed);
        let c = rep.check("concave_midpoint").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness.as_ref().unwrap().len(), 3);
        assert!(rep.check("strictly_increasing").unwrap().passed);
    }

    #[test]
    fn osgood_integral_closed_forms() {
        let i = osgood_integral(&ModulusSpec::Linear, 0.1).unwrap();
        assert!(rel(i, 10f64.ln()) < 1e-10);
        let i = osgood_integral(&ModulusSpec::power(0.5).unwrap(), 0.01).unwrap();
        assert!(rel(i, 1.8) < 1e-10);
        // 1/ε = e gives log(1 + log e) = log 2
        let i = osgood_integral(&ModulusSpec::LogLinear, (-1.0f64).exp()).unwrap();
        assert!(rel(i, 2f64.ln()) < 1e-10);
        assert!(osgood_integral(&ModulusSpec::Linear, 0.0).is_err());
        assert!(osgood_integral(&ModulusSpec::Linear, 1.0).is_err());
    }

    #[test]
    fn classification_of_named_families() {
        assert_eq!(classify_osgood(&ModulusSpec::Linear).class, OsgoodClass::Osgood);
        assert_eq!(classify_osgood(&ModulusSpec::LogLinear).class, OsgoodClass::Osgood);
        for a in [0.25, 0.5, 0.75] {
            let v = classify_osgood(&ModulusSpec::power(a).unwrap());
            assert_eq!(v.class, OsgoodClass::NonOsgood);
            assert_eq!(v.method, VerdictMethod::Symbolic);
            assert_eq!(v.integral_trace.len(), 12);
        }
    }

    #[test]
    fn tabulated_linear_tail_is_osgood_by_trend() {
        let taus = [0.0, 1e-3, 0.01, 0.1, 0.5, 1.0];
        let t = ModulusSpec::sampled_from(&ModulusSpec::LogLinear, &taus).unwrap();
        let v = classify_osgood(&t);
        assert_eq!(v.method, VerdictMethod::NumericTrend);
        assert_eq!(v.class, OsgoodClass::Osgood);
    }

    #[test]
    fn steep_table_is_undetermined() {
        // first-segment slope 1000: decade increments ln(10)/1000 sit between thresholds
        let t = ModulusSpec::table(vec![(0.0, 0.0), (1e-4, 0.1), (1.0, 1.0)]).unwrap();
        assert_eq!(classify_osgood(&t).class, OsgoodClass::Undetermined);
    }

    #[test]
    fn tail_integral_dichotomy() {
        assert!(ModulusSpec::Linear.tail_integral(0.0).is_none());
        assert!(ModulusSpec::LogLinear.tail_integral(0.0).is_none());
        let t = ModulusSpec::power(0.5).unwrap().tail_integral(0.0).unwrap();
        assert!(rel(t, 2.0) < 1e-8, "{t}");
        let t = ModulusSpec::power(0.75).unwrap().tail_integral(0.0).unwrap();
        assert!(rel(t, 4.0) < 1e-8, "{t}");
    }

    #[test]
    fn log_form_matches_direct_evaluation() {
        for spec in [
            ModulusSpec::Linear,
            ModulusSpec::LogLinear,
            ModulusSpec::power(0.3).unwrap(),
            ModulusSpec::table(vec![(0.0, 0.0), (0.2, 0.5), (1.0, 1.0)]).unwrap(),
        ] {
            for u in [0.0f64, 0.5, 1.0, 3.0, 10.0] {
                let direct = spec.value((-u).exp()).ln();
                assert!((spec.ln_mu_neglog(u) - direct).abs() < 1e-12, "{spec:?} u={u}");
            }
        }
    }

    #[test]
    fn json_schema_round_trip() {
        let j = r#"{"kind":"power","alpha":0.5}"#;
        let m: ModulusSpec = serde_json::from_str(j).unwrap();
        assert_eq!(m, ModulusSpec::Power { alpha: 0.5 });
        assert_eq!(serde_json::to_string(&m).unwrap(), j);
        let t: ModulusSpec =
            serde_json::from_str(r#"{"kind":"table","table":[[0,0],[0.5,0.7],[1,1]]}"#).unwrap();
        assert!(matches!(t, ModulusSpec::Table(_)));
        assert!(serde_json::from_str::<ModulusSpec>(r#"{"kind":"power"}"#).is_err());
        assert!(serde_json::from_str::<ModulusSpec>(r#"{"kind":"cubic"}"#).is_err());
    }

    #[test]
    fn shorthand_parsing() {
        assert_eq!(ModulusSpec::parse_shorthand("linear").unwrap(), ModulusSpec::Linear);
        assert_eq!(
            ModulusSpec::parse_shorthand("power:0.25").unwrap(),
            ModulusSpec::Power { alpha: 0.25 }
        );
        assert!(ModulusSpec::parse_shorthand("power").is_err());
        assert!(ModulusSpec::parse_shorthand("power:2").is_err());
    }
}
