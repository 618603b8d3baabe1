//! Time-dependent constant-coefficient operators
//! `∂_t + Σ_{|α| ≤ 2m} i^{|α|} ρ_α(t) ∂_x^α` through their Fourier symbols.
//!
//! The reduced symbols are
//!
//! ```text
//! ρ_k(t, ξ) = (-1)^k Σ_{|α|=k} ρ_α(t) ξ^α / |ξ|^k,     σ(t, ξ) = Σ_k ρ_k(t, ξ) |ξ|^k.
//! ```

use std::collections::BTreeSet;
use std::sync::OnceLock;

use exmex::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulus::{empirical_modulus, ModulusSpec};
use crate::quad::{integrate, Tolerance};

/// Points at which a path is probed for finiteness when it is built.
const PATH_PROBES: usize = 1001;

/// A real coefficient `t ↦ ρ_α(t)` on `[0, T]`.
#[derive(Debug, Clone)]
pub enum TimePath {
    Const(f64),
    /// Expression in the single variable `t`.
    Expr { source: String, expr: FlatEx<f64> },
    /// Piecewise-linear interpolation, constant beyond the end nodes.
    Table(Vec<(f64, f64)>),
}

impl PartialEq for TimePath {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TimePath::Const(a), TimePath::Const(b)) => a == b,
            (TimePath::Expr { source: a, .. }, TimePath::Expr { source: b, .. }) => a == b,
            (TimePath::Table(a), TimePath::Table(b)) => a == b,
            _ => false,
        }
    }
}

impl TimePath {
    pub fn expr(source: &str) -> Result<Self> {
        let expr = exmex::parse::<f64>(source)
            .map_err(|e| Error::InvalidPath(format!("cannot parse '{source}': {e}")))?;
        if let Some(v) = expr.var_names().iter().find(|v| v.as_str() != "t") {
            return Err(Error::InvalidPath(format!(
                "'{source}' uses variable '{v}'; only 't' is allowed"
            )));
        }
        Ok(TimePath::Expr {
            source: source.to_string(),
            expr,
        })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPath("table path needs at least one point".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidPath("table path has a non-finite entry".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidPath("table times must be strictly increasing".into()));
        }
        Ok(TimePath::Table(points))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimePath::Const(c) => *c,
            TimePath::Expr { expr, .. } => {
                let vars: &[f64] = if expr.var_names().is_empty() { &[] } else { &[t] };
                expr.eval(vars).unwrap_or(f64::NAN)
            }
            TimePath::Table(points) => {
                let i = points.partition_point(|p| p.0 <= t);
                if i == 0 {
                    return points[0].1;
                }
                if i == points.len() {
                    return points[i - 1].1;
                }
                let (t0, v0) = points[i - 1];
                let (t1, v1) = points[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Interior points where the path may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            TimePath::Table(points) => points.iter().map(|p| p.0).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
enum PathJson {
    Const { value: f64 },
    Expr { expr: String },
    Table { points: Vec<(f64, f64)> },
}

impl TryFrom<PathJson> for TimePath {
    type Error = Error;
    fn try_from(j: PathJson) -> Result<Self> {
        match j {
            PathJson::Const { value } if value.is_finite() => Ok(TimePath::Const(value)),
            PathJson::Const { value } => Err(Error::InvalidPath(format!("constant {value}"))),
            PathJson::Expr { expr } => TimePath::expr(&expr),
            PathJson::Table { points } => TimePath::table(points),
        }
    }
}

impl From<&TimePath> for PathJson {
    fn from(p: &TimePath) -> Self {
        match p {
            TimePath::Const(value) => PathJson::Const { value: *value },
            TimePath::Expr { source, .. } => PathJson::Expr {
                expr: source.clone(),
            },
            TimePath::Table(points) => PathJson::Table {
                points: points.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub alpha: Vec<u32>,
    pub path: TimePath,
}

impl Coefficient {
    pub fn order(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }
}

/// The coefficients `ρ_α` of an operator of order `2m` in `n` space
/// dimensions on the horizon `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath {
    pub n: usize,
    pub m: usize,
    pub horizon: f64,
    pub coeffs: Vec<Coefficient>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientJson {
    alpha: Vec<u32>,
    path: PathJson,
}

#[derive(Serialize, Deserialize)]
struct CoefficientPathJson {
    n: usize,
    m: usize,
    #[serde(rename = "T")]
    horizon: f64,
    coeffs: Vec<CoefficientJson>,
}

impl Serialize for CoefficientPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoefficientPathJson {
            n: self.n,
            m: self.m,
            horizon: self.horizon,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| CoefficientJson {
                    alpha: c.alpha.clone(),
                    path: PathJson::from(&c.path),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefficientPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CoefficientPathJson::deserialize(d)?;
        let coeffs = j
            .coeffs
            .into_iter()
            .map(|c| {
                Ok(Coefficient {
                    alpha: c.alpha,
                    path: TimePath::try_from(c.path)?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        CoefficientPath::new(j.n, j.m, j.horizon, coeffs).map_err(serde::de::Error::custom)
    }
}

impl CoefficientPath {
    pub fn new(n: usize, m: usize, horizon: f64, coeffs: Vec<Coefficient>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidPath("n and m must be at least 1".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidPath(format!("horizon {horizon} must be positive")));
        }
        let mut seen = BTreeSet::new();
        for c in &coeffs {
            if c.alpha.len() != n {
                return Err(Error::InvalidPath(format!(
                    "multi-index {:?} has length {}, expected {n}",
                    c.alpha,
                    c.alpha.len()
                )));
            }
            if c.order() > 2 * m {
                return Err(Error::InvalidPath(format!(
                    "multi-index {:?} exceeds order {}",
                    c.alpha,
                    2 * m
                )));
            }
            if !seen.insert(c.alpha.clone()) {
                return Err(Error::InvalidPath(format!("multi-index {:?} repeated", c.alpha)));
            }
            for i in 0..PATH_PROBES {
                let t = horizon * i as f64 / (PATH_PROBES - 1) as f64;
                let v = c.path.eval(t);
                if !v.is_finite() {
                    return Err(Error::InvalidPath(format!(
                        "coefficient {:?} is {v} at t = {t}",
                        c.alpha
                    )));
                }
            }
        }
        Ok(CoefficientPath {
            n,
            m,
            horizon,
            coeffs,
        })
    }

    /// Parses the JSON form. Syntax errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let prefix = "invalid coefficient path: ";
            Error::InvalidPath(msg.strip_prefix(prefix).unwrap_or(&msg).to_string())
        })
    }

    /// `∂_t - Δ` in `n` dimensions with `m = 1`.
    pub fn heat(n: usize, horizon: f64) -> Self {
        let coeffs = (0..n)
            .map(|j| {
                let mut alpha = vec![0; n];
                alpha[j] = 2;
                Coefficient {
                    alpha,
                    path: TimePath::Const(1.0),
                }
            })
            .collect();
        CoefficientPath::new(n, 1, horizon, coeffs).expect("heat operator is valid")
    }

    /// Orders `k` carrying at least one coefficient.
    pub fn present_orders(&self) -> BTreeSet<usize> {
        self.coeffs.iter().map(Coefficient::order).collect()
    }

    /// `ρ_k(t, ω)` for a unit vector `ω`, with `t` clamped to `[0, T]`.
    pub fn reduced(&self, t: f64, omega: &[f64], k: usize) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        let sum: f64 = self
            .coeffs
            .iter()
            .filter(|c| c.order() == k)
            .map(|c| c.path.eval(t) * monomial(&c.alpha, omega))
            .sum();
        if k.is_multiple_of(2) {
            sum
        } else {
            -sum
        }
    }

    /// `σ(t, ξ)` with `t` clamped to `[0, T]`.
    pub fn symbol(&self, t: f64, xi: &[f64]) -> f64 {
        let t = t.clamp(0.0, self.horizon);
        self.coeffs
            .iter()
            .map(|c| {
                let v = c.path.eval(t) * monomial(&c.alpha, xi);
                if c.order() % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .sum()
    }

    /// Breakpoints of all coefficient paths inside `(0, T)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .coeffs
            .iter()
            .flat_map(|c| c.path.breakpoints())
            .filter(|&t| t > 0.0 && t < self.horizon)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n {
            return Err(Error::Domain(format!(
                "frequency has dimension {}, operator has {}",
                xi.len(),
                self.n
            )));
        }
        Ok(())
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }
}

fn monomial(alpha: &[u32], xi: &[f64]) -> f64 {
    alpha.iter().zip(xi).map(|(&a, &x)| x.powi(a as i32)).product()
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(xi: &[f64]) -> Result<Vec<f64>> {
    let r = norm(xi);
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain("reduced symbols are undefined at xi = 0".into()));
    }
    Ok(xi.iter().map(|x| x / r).collect())
}

pub fn rho_k(path: &CoefficientPath, t: f64, xi: &[f64], k: usize) -> Result<f64> {
    path.check_xi(xi)?;
    path.check_t(t)?;
    if k > 2 * path.m {
        return Err(Error::Domain(format!("order {k} exceeds {}", 2 * path.m)));
    }
    Ok(path.reduced(t, &unit(xi)?, k))
}

pub fn sigma(path: &CoefficientPath, t: f64, xi: &[f64]) -> Result<f64> {
    path.check_xi(xi)?;
    path.check_t(t)?;
    Ok(path.symbol(t, xi))
}

/// Sampling of `[0, T] × S^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub t_points: usize,
    /// Directions on the unit sphere; ignored for `n = 1`, where `±1` is exact.
    pub directions: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            t_points: 201,
            directions: 64,
            seed: 0,
        }
    }
}

impl SampleConfig {
    pub fn times(&self, horizon: f64) -> Vec<f64> {
        let n = self.t_points.max(2);
        (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
    }

    /// Axes and their negatives, then evenly spaced angles (`n = 2`) or
    /// seeded Gaussian directions (`n ≥ 3`).
    pub fn directions(&self, n: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[j] = s;
                out.push(e);
            }
        }
        if n == 1 {
            return out;
        }
        if n == 2 {
            for i in 0..self.directions {
                let a = std::f64::consts::TAU * i as f64 / self.directions as f64;
                out.push(vec![a.cos(), a.sin()]);
            }
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.directions {
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    // Box-Muller
                    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = rng.gen();
                    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect();
            if let Ok(w) = unit(&v) {
                out.push(w);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityData {
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "Lambda0")]
    pub lambda0: f64,
}

pub fn ellipticity_constants(path: &CoefficientPath, cfg: &SampleConfig) -> Result<EllipticityData> {
    let top = 2 * path.m;
    let lower: Vec<usize> = path.present_orders().into_iter().filter(|&k| k < top).collect();
    let mut lambda = 1.0f64;
    for t in cfg.times(path.horizon) {
        for omega in cfg.directions(path.n) {
            let lead = path.reduced(t, &omega, top);
            if !(lead > 0.0) || !lead.is_finite() {
                return Err(Error::Ellipticity {
                    t,
                    xi: omega,
                    detail: format!("principal symbol rho_{top} = {lead}"),
                });
            }
            lambda = lambda.max(lead).max(1.0 / lead);
            for &k in &lower {
                let v = path.reduced(t, &omega, k);
                if !v.is_finite() {
                    return Err(Error::Ellipticity {
                        t,
                        xi: omega,
                        detail: format!("rho_{k} = {v}"),
                    });
                }
                lambda = lambda.max(v.abs());
            }
        }
    }
    if !lambda.is_finite() {
        return Err(Error::Ellipticity {
            t: f64::NAN,
            xi: Vec::new(),
            detail: "unbounded samples".into(),
        });
    }
    // Λ Σ_{k<2m} R^{k-2m} ≤ 1/(2Λ) is monotone in R.
    let holds = |r: f64| {
        lambda * lower.iter().map(|&k| r.powi(k as i32 - top as i32)).sum::<f64>()
            <= 0.5 / lambda
    };
    let n0 = if holds(1.0) {
        1.0
    } else {
        let mut hi = 2.0;
        while !holds(hi) {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(EllipticityData {
        lambda,
        n0,
        lambda0: 2.0 * lambda,
    })
}

/// `ε_k = |ξ|^{-k}` for `|ξ| ≥ N0`, else `N0^{-k}`.
pub fn epsilon_schedule(xi: &[f64], n0: f64, k: i32) -> Result<f64> {
    if !(n0 >= 1.0) {
        return Err(Error::Domain(format!("N0 = {n0} must be at least 1")));
    }
    let r = norm(xi);
    Ok(if r >= n0 { r.powi(-k) } else { n0.powi(-k) })
}

/// The bump `φ(s) = Z exp(-1/(1-4s²))` supported in `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub normalization: f64,
}

impl Kernel {
    pub fn standard() -> &'static Kernel {
        static K: OnceLock<Kernel> = OnceLock::new();
        K.get_or_init(|| {
            let raw = integrate(shape, -0.5, 0.5, Tolerance::tight()).value;
            Kernel {
                normalization: 1.0 / raw,
            }
        })
    }

    pub fn value(&self, s: f64) -> f64 {
        self.normalization * shape(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let d = 1.0 - 4.0 * s * s;
        if d <= 0.0 {
            return 0.0;
        }
        self.value(s) * (-8.0 * s / (d * d))
    }

    pub fn mass(&self) -> f64 {
        integrate(|s| self.value(s), -0.5, 0.5, Tolerance::tight()).value
    }

    /// `∫|φ'| = 2 φ(0)` for a unimodal even bump.
    pub fn derivative_l1(&self) -> f64 {
        2.0 * self.value(0.0)
    }
}

fn shape(s: f64) -> f64 {
    let d = 1.0 - 4.0 * s * s;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

const MOLLIFY_TOL: Tolerance = Tolerance {
    abs: 1e-14,
    rel: 1e-12,
    max_subdivisions: 4000,
};

/// `ρ_k(·, ω)` convolved with `φ_ε`, extended by its endpoint values.
#[derive(Debug, Clone, Copy)]
pub struct MollifiedPath<'a> {
    pub source: &'a CoefficientPath,
    pub kernel: &'static Kernel,
    pub epsilon: f64,
}

impl<'a> MollifiedPath<'a> {
    pub fn new(source: &'a CoefficientPath, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon = {epsilon} must be positive")));
        }
        Ok(MollifiedPath {
            source,
            kernel: Kernel::standard(),
            epsilon,
        })
    }

    /// Nodes in `u ∈ (-1/2, 1/2)` where `s = t - εu` hits a kink.
    fn pieces(&self, t: f64) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = std::iter::once(0.0)
            .chain(self.source.breakpoints())
            .chain(std::iter::once(self.source.horizon))
            .map(|s| (t - s) / self.epsilon)
            .filter(|&u| u > -0.5 && u < 0.5)
            .collect();
        cuts.push(-0.5);
        cuts.push(0.5);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn convolve(&self, t: f64, omega: &[f64], k: usize, weight: impl Fn(f64) -> f64) -> f64 {
        self.pieces(t)
            .into_iter()
            .map(|(a, b)| {
                integrate(
                    |u| self.source.reduced(t - self.epsilon * u, omega, k) * weight(u),
                    a,
                    b,
                    MOLLIFY_TOL,
                )
                .value
            })
            .sum()
    }

    pub fn value(&self, t: f64, omega: &[f64], k: usize) -> f64 {
        self.convolve(t, omega, k, |u| self.kernel.value(u))
    }

    /// Time derivative `ρ'_{k,ε}(t, ω)`.
    pub fn derivative(&self, t: f64, omega: &[f64], k: usize) -> f64 {
        self.convolve(t, omega, k, |u| self.kernel.derivative(u)) / self.epsilon
    }
}

pub fn mollify_path(path: &CoefficientPath, k: usize, epsilon: f64, t: f64, xi: &[f64]) -> Result<f64> {
    path.check_xi(xi)?;
    if k > 2 * path.m {
        return Err(Error::Domain(format!("order {k} exceeds {}", 2 * path.m)));
    }
    let omega = unit(xi)?;
    Ok(MollifiedPath::new(path, epsilon)?.value(t, &omega, k))
}

/// Location of the largest measured ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsWitness {
    pub k: usize,
    pub t: f64,
    pub xi: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `sup |ρ_{k,ε} - ρ_k| / μ(ε)`.
    pub r1: f64,
    /// `sup |ρ'_{k,ε}| ε / μ(ε)`.
    pub r2: f64,
    /// Empirical `C^μ` seminorm of the reduced symbols on the samples.
    pub seminorm: f64,
    /// `∫|φ'|`.
    pub derivative_factor: f64,
    pub epsilons: Vec<f64>,
    pub r1_witness: Option<BoundsWitness>,
    pub r2_witness: Option<BoundsWitness>,
    pub passed: bool,
}

/// Slack on `r₁ ≤ K` covering quadrature error.
pub const BOUNDS_SLACK: f64 = 1e-9;

pub fn mollifier_bounds_check(
    path: &CoefficientPath,
    mu: &ModulusSpec,
    epsilons: &[f64],
    cfg: &SampleConfig,
) -> Result<BoundsReport> {
    let times = cfg.times(path.horizon);
    let directions = cfg.directions(path.n);
    let orders = path.present_orders();
    let mut seminorm = 0.0f64;
    for &k in &orders {
        for omega in &directions {
            let samples: Vec<(f64, Vec<f64>)> = times
                .iter()
                .map(|&t| (t, vec![path.reduced(t, omega, k)]))
                .collect();
            seminorm = seminorm.max(empirical_modulus(&samples)?.seminorm(mu));
        }
    }
    let kernel = Kernel::standard();
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    let mut r1_witness = None;
    let mut r2_witness = None;
    for &eps in epsilons {
        let moll = MollifiedPath::new(path, eps)?;
        let scale = mu.value(eps.min(1.0));
        for &k in &orders {
            for omega in &directions {
                for &t in &times {
                    let witness = || BoundsWitness {
                        k,
                        t,
                        xi: omega.clone(),
                        epsilon: eps,
                    };
                    let d1 = (moll.value(t, omega, k) - path.reduced(t, omega, k)).abs() / scale;
                    if d1 > r1 {
                        r1 = d1;
                        r1_witness = Some(witness());
                    }
                    let d2 = moll.derivative(t, omega, k).abs() * eps / scale;
                    if d2 > r2 {
                        r2 = d2;
                        r2_witness = Some(witness());
                    }
                }
            }
        }
    }
    let derivative_factor = kernel.derivative_l1();
    let passed = r1 <= seminorm + BOUNDS_SLACK
        && r2 <= seminorm * derivative_factor + BOUNDS_SLACK;
    Ok(BoundsReport {
        r1,
        r2,
        seminorm,
        derivative_factor,
        epsilons: epsilons.to_vec(),
        r1_witness,
        r2_witness,
        passed,
    })
}
