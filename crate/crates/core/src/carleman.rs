//! Single-mode checks of the weighted parabolic energy identity.
//!
//! For `v̂(t)` supported in `[0, T/2)` and `ψ(t) = Φ'(γ(T-t))`,
//!
//! ```text
//! ∫|v̂' - (σ-ψ)v̂|² = ∫|v̂'|² + ∫(σ-ψ)²|v̂|² + γ∫Φ''(γ(T-t))|v̂|² - 2Re∫v̂'σ v̄̂ + [ψ|v̂|²]_0^{T/2}
//! ```
//!
//! and the bracket vanishes exactly when `v̂(0) = 0`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, CompositeGauss, Tolerance};
use crate::symbol::CoefficientPath;
use crate::weight::{weight_slopes, WeightFunction};

const EVOLVE_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-13,
    max_subdivisions: 4000,
};

/// `û0 exp(-∫_{t0}^{t1} σ(s, ξ) ds)`; `t1 < t0` runs backwards.
pub fn evolve_mode(path: &CoefficientPath, xi: &[f64], u0: Complex64, t0: f64, t1: f64) -> Result<Complex64> {
    if xi.len() != path.n {
        return Err(Error::Domain(format!("frequency has dimension {}, operator has {}", xi.len(), path.n)));
    }
    for t in [t0, t1] {
        if !(0.0..=path.horizon).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", path.horizon)));
        }
    }
    let (lo, hi, sign) = if t0 <= t1 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
    let mut cuts = vec![lo];
    cuts.extend(path.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    let integral: f64 = cuts
        .windows(2)
        .map(|w| integrate(|s| path.symbol(s, xi), w[0], w[1], EVOLVE_TOL).value)
        .sum();
    Ok(u0 * (-sign * integral).exp())
}

/// Time envelope of a [`ModeProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `sin²(πt/t_c)`: vanishes at both ends.
    Vanishing,
    /// `cos²(πt/(2t_c))`: equals 1 at `t = 0`.
    BoundaryViolating,
}

/// `v̂(t) = E(t) Σ_j c_j e^{ijπt/t_c}` on `[0, t_c)`, zero afterwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeProfile {
    pub xi: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub cutoff: f64,
    pub envelope: Envelope,
}

impl ModeProfile {
    pub fn new(xi: Vec<f64>, coeffs: Vec<Complex64>, cutoff: f64, envelope: Envelope) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Precondition(format!("profile cutoff {cutoff} must be positive")));
        }
        Ok(ModeProfile {
            xi,
            coeffs,
            cutoff,
            envelope,
        })
    }

    pub fn zero(xi: Vec<f64>, cutoff: f64) -> Self {
        ModeProfile {
            xi,
            coeffs: Vec::new(),
            cutoff,
            envelope: Envelope::Vanishing,
        }
    }

    /// Random admissible profile supported in `[0, half_horizon)`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, half_horizon: f64) -> Self {
        let xi = (0..n)
            .map(|_| {
                let r: f64 = rng.gen_range(0.5..3.0);
                if rng.gen_bool(0.5) {
                    r
                } else {
                    -r
                }
            })
            .collect();
        let terms = rng.gen_range(1..=4);
        let coeffs = (0..terms)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let cutoff = half_horizon * rng.gen_range(0.5..0.9);
        ModeProfile {
            xi,
            coeffs,
            cutoff,
            envelope: Envelope::Vanishing,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    fn envelope_at(&self, t: f64) -> (f64, f64) {
        match self.envelope {
            Envelope::Vanishing => {
                let a = std::f64::consts::PI / self.cutoff;
                ((a * t).sin().powi(2), a * (2.0 * a * t).sin())
            }
            Envelope::BoundaryViolating => {
                let b = std::f64::consts::FRAC_PI_2 / self.cutoff;
                ((b * t).cos().powi(2), -b * (2.0 * b * t).sin())
            }
        }
    }

    /// `(v̂(t), v̂'(t))`.
    pub fn eval(&self, t: f64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        if t >= self.cutoff || t < 0.0 {
            return (zero, zero);
        }
        let w = std::f64::consts::PI / self.cutoff;
        let (mut s, mut ds) = (zero, zero);
        for (j, c) in self.coeffs.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, j as f64 * w * t);
            s += c * phase;
            ds += c * phase * Complex64::new(0.0, j as f64 * w);
        }
        let (e, de) = self.envelope_at(t);
        (s * e, s * de + ds * e)
    }
}

/// Both sides of the energy identity for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionResult {
    /// `Ξ = ∫|v̂' - (σ-ψ)v̂|²`.
    pub lhs: f64,
    /// `∫|v̂'|²`.
    pub term_i: f64,
    /// `∫(σ-ψ)²|v̂|²`.
    pub term_ii: f64,
    /// `γ∫Φ''|v̂|²`.
    pub term_iii: f64,
    /// `-2Re∫v̂'σ v̄̂`.
    pub term_iv: f64,
    pub term_iii_iv: f64,
    /// `[ψ|v̂|²]_0^{T/2}`.
    pub boundary: f64,
    pub rel_error: f64,
    /// Relative error once the boundary term is added to the right side.
    pub corrected_rel_error: f64,
    pub panels: usize,
    pub converged: bool,
    pub passed: bool,
}

pub const DECOMPOSITION_TOL: f64 = 1e-6;

pub fn decomposition_check(
    path: &CoefficientPath,
    w: &WeightFunction,
    gamma: f64,
    profile: &ModeProfile,
    quad: &CompositeGauss,
) -> Result<DecompositionResult> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("gamma = {gamma} must be positive")));
    }
    if profile.xi.len() != path.n {
        return Err(Error::Domain(format!(
            "profile frequency has dimension {}, operator has {}",
            profile.xi.len(),
            path.n
        )));
    }
    let half = 0.5 * path.horizon;
    if profile.cutoff >= half {
        return Err(Error::Precondition(format!(
            "profile support [0, {}) does not end before T/2 = {half}",
            profile.cutoff
        )));
    }
    let (psi_start, _) = weight_slopes(w, gamma * path.horizon)?;
    let mut cuts = vec![0.0];
    cuts.extend(path.breakpoints().into_iter().filter(|&b| b < profile.cutoff));
    cuts.push(profile.cutoff);
    let pieces: Vec<(f64, f64)> = cuts.windows(2).map(|c| (c[0], c[1])).collect();
    let xi = &profile.xi;
    let est = quad.integrate(
        |t| {
            let (v, dv) = profile.eval(t);
            let sigma = path.symbol(t, xi);
            let (psi, curv) = weight_slopes(w, gamma * (path.horizon - t)).unwrap_or((f64::NAN, f64::NAN));
            let v2 = v.norm_sqr();
            [
                (dv - v * (sigma - psi)).norm_sqr(),
                dv.norm_sqr(),
                (sigma - psi).powi(2) * v2,
                gamma * curv * v2,
                -2.0 * (dv * sigma * v.conj()).re,
            ]
        },
        &pieces,
    );
    let [lhs, term_i, term_ii, term_iii, term_iv] = est.values;
    let boundary = -psi_start * profile.eval(0.0).0.norm_sqr();
    let sum = term_i + term_ii + term_iii + term_iv;
    let scale = lhs.abs().max(1.0);
    let rel_error = (lhs - sum).abs() / scale;
    let corrected_rel_error = (lhs - sum - boundary).abs() / scale;
    Ok(DecompositionResult {
        lhs,
        term_i,
        term_ii,
        term_iii,
        term_iv,
        term_iii_iv: term_iii + term_iv,
        boundary,
        rel_error,
        corrected_rel_error,
        panels: est.panels,
        converged: est.converged,
        passed: rel_error <= DECOMPOSITION_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum ScanStatus {
    Ok,
    /// Zero profile: the ratio is `0/0`.
    Skipped,
    DomainError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub profile_id: usize,
    pub gamma: f64,
    pub lhs: f64,
    /// `γ^{1/2} ∫(|ξ|^{2m}+1)|v̂|²`.
    pub rhs_weighted: f64,
    pub ratio: f64,
    pub status: ScanStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// `(γ, min ratio over profiles)`, `None` when no profile was evaluated.
    pub min_ratio: Vec<(f64, Option<f64>)>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("profile_id,gamma,lhs,rhs_weighted,ratio\n");
        for r in self.rows.iter().filter(|r| r.status == ScanStatus::Ok) {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.profile_id, r.gamma, r.lhs, r.rhs_weighted, r.ratio
            ));
        }
        out
    }
}

fn scan_one(
    path: &CoefficientPath,
    w: &WeightFunction,
    id: usize,
    profile: &ModeProfile,
    gamma: f64,
    quad: &CompositeGauss,
) -> ScanRow {
    let row = |lhs, rhs_weighted, ratio, status| ScanRow {
        profile_id: id,
        gamma,
        lhs,
        rhs_weighted,
        ratio,
        status,
    };
    if profile.is_zero() {
        return row(0.0, 0.0, f64::NAN, ScanStatus::Skipped);
    }
    let d = match decomposition_check(path, w, gamma, profile, quad) {
        Ok(d) => d,
        Err(e) => return row(f64::NAN, f64::NAN, f64::NAN, ScanStatus::DomainError(e.to_string())),
    };
    let r2m = profile.xi.iter().map(|x| x * x).sum::<f64>().powi(path.m as i32);
    let mass = quad
        .integrate(|t| [profile.eval(t).0.norm_sqr()], &[(0.0, profile.cutoff)])
        .values[0];
    let rhs = gamma.sqrt() * (r2m + 1.0) * mass;
    row(d.lhs, rhs, d.lhs / rhs, ScanStatus::Ok)
}

/// Evaluates every `(profile, γ)` pair in parallel; rows are in
/// profile-major order.
pub fn ratio_scan(
    path: &CoefficientPath,
    w: &WeightFunction,
    profiles: &[ModeProfile],
    gammas: &[f64],
    quad: &CompositeGauss,
) -> ScanTable {
    let jobs: Vec<(usize, f64)> = (0..profiles.len())
        .flat_map(|i| gammas.iter().map(move |&g| (i, g)))
        .collect();
    let rows: Vec<ScanRow> = jobs
        .par_iter()
        .map(|&(i, g)| scan_one(path, w, i, &profiles[i], g, quad))
        .collect();
    let min_ratio = gammas
        .iter()
        .map(|&g| {
            let min = rows
                .iter()
                .filter(|r| r.gamma == g && r.status == ScanStatus::Ok)
                .map(|r| r.ratio)
                .reduce(f64::min);
            (g, min)
        })
        .collect();
    ScanTable { rows, min_ratio }
}
