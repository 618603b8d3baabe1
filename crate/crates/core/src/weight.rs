//! The Carleman weight `Φ` built from a modulus `μ`.
//!
//! `Φ` solves `Φ'' = μ(1/Φ') (Φ')²` with `Φ(0) = 0`, `Φ'(0) = 1`:
//!
//! ```text
//! η(t) = ∫_{1/t}^1 ds/μ(s)  (t ≥ 1),    Φ(τ) = ∫_0^τ η^{-1}(r) dr.
//! ```
//!
//! Everything is parametrized by `L = ln Φ'`. Then `τ = η(e^L) = H(L)` with
//! `H(L) = ∫_0^L g`, `g(u) = e^{-u}/μ(e^{-u})`, and substituting `r = H(u)`
//! in the integral for `Φ` gives `Φ = ∫_0^L du/μ(e^{-u})`. Both integrals are
//! tabulated on a uniform `L` grid (a geometric grid in `t`) and refined
//! locally by quadrature, with no ODE stepping anywhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::{classify_osgood, validate_modulus, ModulusSpec, OsgoodClass, ValidationConfig};

/// Largest `L = ln Φ'` for which `Φ'` and `Φ''` stay finite in f64.
const MAX_LOG_SLOPE: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightConfig {
    /// Upper end of the geometric `t` grid for the `η` table.
    pub t_max: f64,
    pub points: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        // nodes every 0.05 in `ln Φ'` up to the overflow limit
        WeightConfig {
            t_max: MAX_LOG_SLOPE.exp(),
            points: 14_001,
        }
    }
}

/// One tabulated point of the weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightNode {
    /// `ln t = ln Φ'(τ)`.
    pub log_t: f64,
    /// `τ = η(t)`.
    pub tau: f64,
    pub phi: f64,
    pub dphi: f64,
    /// `Φ''` from the right-hand side of the ODE.
    pub d2phi: f64,
    /// `Φ''` as a finite difference of `Φ'` over neighbouring nodes.
    pub d2phi_fd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub mu: ModulusSpec,
    pub nodes: Vec<WeightNode>,
    /// `lim_{t→∞} η(t)`; `None` when infinite. Tables classified non-Osgood
    /// use `η` at the overflow limit of `Φ'`.
    pub eta_sup: Option<f64>,
    /// Finite end of the domain of `Φ` (equal to `eta_sup`).
    pub blow_up_time: Option<f64>,
}

/// `(Φ, Φ', Φ'')` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValue {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
}

/// `η(t) = ∫_{1/t}^1 ds/μ(s)`.
pub fn eta(mu: &ModulusSpec, t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::Domain(format!("eta needs t >= 1, got {t}")));
    }
    if t == 1.0 {
        return Ok(0.0);
    }
    Ok(mu.log_integral(0.0, t.ln()))
}

/// The unique `t ≥ 1` with `η(t) = r`.
pub fn eta_inverse(w: &WeightFunction, r: f64) -> Result<f64> {
    let (log_t, _) = w.solve(r)?;
    if log_t > MAX_LOG_SLOPE {
        return Err(Error::Overflow { tau: r });
    }
    Ok(log_t.exp())
}

/// Builds the weight for a validated modulus.
pub fn build_weight(mu: &ModulusSpec, cfg: &WeightConfig) -> Result<WeightFunction> {
    let report = validate_modulus(mu, &ValidationConfig::default());
    if !report.passed {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        return Err(Error::InvalidModulus(format!(
            "{} fails {}",
            mu.label(),
            failed.join(", ")
        )));
    }
    if !(cfg.t_max > 1.0) || cfg.points < 3 {
        return Err(Error::Domain("weight grid needs t_max > 1 and >= 3 points".into()));
    }
    let l_max = cfg.t_max.ln();
    let n = cfg.points;
    let logs: Vec<f64> = (0..n).map(|i| l_max * i as f64 / (n - 1) as f64).collect();
    let mut taus = vec![0.0; n];
    let mut phis = vec![0.0; n];
    for i in 1..n {
        taus[i] = taus[i - 1] + mu.log_integral(logs[i - 1], logs[i]);
        phis[i] = phis[i - 1] + mu.log_integral_recip(logs[i - 1], logs[i]);
    }
    let mut nodes: Vec<WeightNode> = (0..n)
        .map(|i| WeightNode {
            log_t: logs[i],
            tau: taus[i],
            phi: phis[i],
            dphi: logs[i].exp(),
            d2phi: ode_rhs(mu, logs[i]),
            d2phi_fd: f64::NAN,
        })
        .collect();
    for i in 0..n {
        let (a, b) = match i {
            0 => (0, 1),
            _ if i == n - 1 => (n - 2, n - 1),
            _ => (i - 1, i + 1),
        };
        nodes[i].d2phi_fd = (nodes[b].dphi - nodes[a].dphi) / (nodes[b].tau - nodes[a].tau);
    }
    let eta_sup = match mu.tail_integral(0.0) {
        // a table classified non-Osgood blows up numerically where Φ' overflows
        None if matches!(mu, ModulusSpec::Table(_)) && classify_osgood(mu).class == OsgoodClass::NonOsgood => {
            Some(nodes[n - 1].tau)
        }
        sup => sup,
    };
    Ok(WeightFunction {
        mu: mu.clone(),
        nodes,
        eta_sup,
        blow_up_time: eta_sup,
    })
}

/// `μ(1/Φ') (Φ')²` at `Φ' = e^L`, in log space.
fn ode_rhs(mu: &ModulusSpec, log_t: f64) -> f64 {
    (mu.ln_mu_neglog(log_t) + 2.0 * log_t).exp()
}

impl WeightFunction {
    /// Solves `H(L) = τ` for `L = ln Φ'`, returning `L` and `Φ(τ)`.
    fn locate(&self, tau: f64) -> Result<(f64, f64)> {
        let (log_t, lo) = self.solve(tau)?;
        Ok((log_t, lo.phi + self.mu.log_integral_recip(lo.log_t, log_t)))
    }

    /// Solves `H(L) = τ`, returning `L` and the node at or below it.
    fn solve(&self, tau: f64) -> Result<(f64, WeightNode)> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("weight argument {tau} is negative")));
        }
        if let Some(sup) = self.eta_sup {
            if tau >= sup {
                return Err(Error::BlowUpExceeded {
                    requested: tau,
                    eta_sup: sup,
                });
            }
        }
        let last = self.nodes[self.nodes.len() - 1];
        let (lo, hi) = if tau <= last.tau {
            let i = self.nodes.partition_point(|n| n.tau <= tau);
            let i = i.clamp(1, self.nodes.len() - 1);
            (self.nodes[i - 1], self.nodes[i])
        } else {
            self.march(tau, last)?
        };
        if tau == lo.tau {
            return Ok((lo.log_t, lo));
        }
        Ok((self.solve_in_bracket(tau, &lo, &hi), lo))
    }

    /// Extends past the table in unit steps of `L` until `τ` is bracketed.
    fn march(&self, tau: f64, mut node: WeightNode) -> Result<(WeightNode, WeightNode)> {
        loop {
            if node.log_t >= MAX_LOG_SLOPE {
                return Err(Error::Overflow { tau });
            }
            let next_log = node.log_t + 1.0;
            let next = WeightNode {
                log_t: next_log,
                tau: node.tau + self.mu.log_integral(node.log_t, next_log),
                phi: node.phi + self.mu.log_integral_recip(node.log_t, next_log),
                dphi: f64::NAN,
                d2phi: f64::NAN,
                d2phi_fd: f64::NAN,
            };
            if next.tau >= tau {
                return Ok((node, next));
            }
            node = next;
        }
    }

    /// Safeguarded Newton on `H(L) - τ` inside `[lo.log_t, hi.log_t]`.
    fn solve_in_bracket(&self, tau: f64, lo: &WeightNode, hi: &WeightNode) -> f64 {
        let (mut a, mut b) = (lo.log_t, hi.log_t);
        let span = hi.tau - lo.tau;
        let mut x = if span > 0.0 {
            a + (b - a) * (tau - lo.tau) / span
        } else {
            0.5 * (a + b)
        };
        for _ in 0..80 {
            let f = lo.tau + self.mu.log_integral(lo.log_t, x) - tau;
            if f == 0.0 {
                return x;
            }
            if f > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let slope = self.mu.log_integrand(x);
            let mut next = x - f / slope;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || b - a <= 1e-15 * b.abs().max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }
}

/// `(Φ(τ), Φ'(τ), Φ''(τ))`.
pub fn weight_eval(w: &WeightFunction, tau: f64) -> Result<WeightValue> {
    let (log_t, phi) = w.locate(tau)?;
    if log_t > MAX_LOG_SLOPE {
        return Err(Error::Overflow { tau });
    }
    Ok(WeightValue {
        phi,
        dphi: log_t.exp(),
        d2phi: ode_rhs(&w.mu, log_t),
    })
}

/// `(Φ'(τ), Φ''(τ))`, skipping the quadrature for `Φ`.
pub fn weight_slopes(w: &WeightFunction, tau: f64) -> Result<(f64, f64)> {
    let (log_t, _) = w.solve(tau)?;
    if log_t > MAX_LOG_SLOPE {
        return Err(Error::Overflow { tau });
    }
    Ok((log_t.exp(), ode_rhs(&w.mu, log_t)))
}

/// Writes `(τ, Φ, Φ', Φ'')` on `grid` as CSV with a header row.
///
/// Grid points outside the domain are skipped.
pub fn weight_csv(w: &WeightFunction, grid: &[f64]) -> String {
    let mut out = String::from("tau,phi,dphi,d2phi\n");
    for &tau in grid {
        if let Ok(v) = weight_eval(w, tau) {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                tau, v.phi, v.dphi, v.d2phi
            ));
        }
    }
    out
}

/// Acceptance bound on the relative ODE residual.
pub const ODE_RESIDUAL_TOL: f64 = 1e-6;
/// Slack allowed in the monotonicity of `Φ'` and `Φ''`.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightReport {
    pub modulus: String,
    pub points: usize,
    /// Grid points outside the domain of `Φ`.
    pub skipped: usize,
    /// `max |Φ'' - μ(1/Φ')(Φ')²| / max(1, Φ'')`, with `Φ''` differentiated
    /// numerically from `Φ'`.
    pub max_ode_residual: f64,
    /// Smallest grid point after which `Φ'' ≥ 1` holds on the rest of the grid.
    pub tau1: Option<f64>,
    pub dphi_monotone: bool,
    pub d2phi_monotone: bool,
    /// `max |η(Φ'(τ)) - τ|` with `η` integrated from scratch.
    pub max_eta_roundtrip: f64,
    pub blow_up_time: Option<f64>,
    pub osgood_class: OsgoodClass,
    /// Finite blow-up exactly when the modulus is non-Osgood.
    pub dichotomy_consistent: bool,
    pub passed: bool,
}

/// Richardson-extrapolated derivative of `τ ↦ Φ'(τ)`.
fn numeric_d2phi(w: &WeightFunction, tau: f64, ode: &WeightValue) -> Option<f64> {
    let local = ode.dphi / ode.d2phi;
    let room = w.blow_up_time.map_or(f64::INFINITY, |b| b - tau);
    let dphi = |t: f64| weight_eval(w, t).ok().map(|v| v.dphi);
    let central_h = 1e-3 * local.min(1.0).min(0.5 * room);
    if tau >= 2.0 * central_h {
        let d = |h: f64| Some((dphi(tau + h)? - dphi(tau - h)?) / (2.0 * h));
        let coarse = d(central_h)?;
        let fine = d(0.5 * central_h)?;
        return Some((4.0 * fine - coarse) / 3.0);
    }
    let h = 1e-3 * local.min(1.0).min(0.25 * room);
    let f0 = ode.dphi;
    let d = |h: f64| Some((-3.0 * f0 + 4.0 * dphi(tau + h)? - dphi(tau + 2.0 * h)?) / (2.0 * h));
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Some((4.0 * fine - coarse) / 3.0)
}

pub fn verify_weight(w: &WeightFunction, grid: &[f64]) -> WeightReport {
    let verdict = classify_osgood(&w.mu);
    let dichotomy_consistent =
        w.blow_up_time.is_some() == (verdict.class == OsgoodClass::NonOsgood);
    let mut values = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    let mut max_res = 0.0f64;
    let mut max_eta = 0.0f64;
    for &tau in grid {
        let Ok(v) = weight_eval(w, tau) else {
            skipped += 1;
            continue;
        };
        match numeric_d2phi(w, tau, &v) {
            Some(fd) => {
                let res = (fd - v.d2phi).abs() / v.d2phi.max(1.0);
                max_res = max_res.max(res);
            }
            None => max_res = f64::INFINITY,
        }
        let back = eta(&w.mu, v.dphi).unwrap_or(f64::NAN);
        max_eta = max_eta.max((back - tau).abs());
        values.push((tau, v));
    }
    let dphi_monotone = values
        .windows(2)
        .all(|p| p[1].1.dphi >= p[0].1.dphi * (1.0 - MONOTONE_SLACK));
    let d2phi_monotone = values
        .windows(2)
        .all(|p| p[1].1.d2phi >= p[0].1.d2phi * (1.0 - MONOTONE_SLACK));
    let mut tau1 = None;
    for &(tau, v) in values.iter().rev() {
        if v.d2phi >= 1.0 {
            tau1 = Some(tau);
        } else {
            break;
        }
    }
    let passed = max_res <= ODE_RESIDUAL_TOL
        && max_eta <= ODE_RESIDUAL_TOL
        && dphi_monotone
        && d2phi_monotone
        && dichotomy_consistent;
    WeightReport {
        modulus: w.mu.label(),
        points: values.len(),
        skipped,
        max_ode_residual: max_res,
        tau1,
        dphi_monotone,
        d2phi_monotone,
        max_eta_roundtrip: max_eta,
        blow_up_time: w.blow_up_time,
        osgood_class: verdict.class,
        dichotomy_consistent,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn small() -> WeightConfig {
        WeightConfig {
            t_max: 1e9,
            points: 200,
        }
    }

    #[test]
    fn eta_examples() {
        let lin = ModulusSpec::Linear;
        assert_eq!(eta(&lin, 1.0).unwrap(), 0.0);
        assert!(rel(eta(&lin, 10.0).unwrap(), 10f64.ln()) < 1e-10);
        let sqrt = ModulusSpec::power(0.5).unwrap();
        assert!(rel(eta(&sqrt, 4.0).unwrap(), 1.0) < 1e-10);
        assert!(matches!(eta(&lin, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn eta_inverse_examples() {
        let w = build_weight(&ModulusSpec::Linear, &small()).unwrap();
        assert!(rel(eta_inverse(&w, 1.0).unwrap(), std::f64::consts::E) < 1e-10);
        assert_eq!(eta_inverse(&w, 0.0).unwrap(), 1.0);
        let w = build_weight(&ModulusSpec::power(0.5).unwrap(), &small()).unwrap();
        assert!(rel(eta_inverse(&w, 1.0).unwrap(), 4.0) < 1e-10);
        match eta_inverse(&w, 2.5) {
            Err(Error::BlowUpExceeded { eta_sup, .. }) => assert!((eta_sup - 2.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn initial_conditions() {
        for mu in [ModulusSpec::Linear, ModulusSpec::LogLinear, ModulusSpec::power(0.25).unwrap()] {
            let w = build_weight(&mu, &small()).unwrap();
            let v = weight_eval(&w, 0.0).unwrap();
            assert_eq!(v.phi, 0.0);
            assert_eq!(v.dphi, 1.0);
            assert!((v.d2phi - mu.value(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_weight_is_shifted_exponential() {
        let w = build_weight(&ModulusSpec::Linear, &small()).unwrap();
        for tau in [0.5, 1.0, 2.0] {
            let v = weight_eval(&w, tau).unwrap();
            assert!(rel(v.phi, tau.exp() - 1.0) < 1e-10);
            assert!(rel(v.dphi, tau.exp()) < 1e-10);
            assert!(rel(v.d2phi, tau.exp()) < 1e-10);
        }
        assert!(w.blow_up_time.is_none());
    }

    #[test]
    fn sqrt_weight_blows_up_at_two() {
        let w = build_weight(&ModulusSpec::power(0.5).unwrap(), &small()).unwrap();
        assert!((w.blow_up_time.unwrap() - 2.0).abs() < 1e-6);
        let v = weight_eval(&w, 1.0).unwrap();
        assert!(rel(v.phi, 2.0) < 1e-10);
        let v = weight_eval(&w, 1.9).unwrap();
        assert!(rel(v.phi, 38.0) < 1e-9);
        assert!(rel(v.dphi, 400.0) < 1e-9);
        assert!(weight_eval(&w, 2.0).is_err());
    }

    #[test]
    fn loglinear_slope_at_one() {
        let w = build_weight(&ModulusSpec::LogLinear, &small()).unwrap();
        let v = weight_eval(&w, 1.0).unwrap();
        assert!(rel(v.dphi, (std::f64::consts::E - 1.0).exp()) < 1e-10);
        // past the table: L = e^4 - 1 ≈ 53.6 > ln(1e9)
        let v = weight_eval(&w, 4.0).unwrap();
        assert!(rel(v.dphi.ln(), 4f64.exp() - 1.0) < 1e-12);
    }

    #[test]
    fn report_examples() {
        let w = build_weight(&ModulusSpec::Linear, &small()).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let r = verify_weight(&w, &grid);
        assert!(r.passed, "{r:?}");
        assert!(r.max_ode_residual <= 1e-6);
        assert_eq!(r.tau1, Some(0.0));

        let w = build_weight(&ModulusSpec::power(0.5).unwrap(), &small()).unwrap();
        let r = verify_weight(&w, &grid);
        assert!((r.blow_up_time.unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(r.osgood_class, OsgoodClass::NonOsgood);
        assert!(r.dichotomy_consistent);
        assert_eq!(r.skipped, 30);

        let r = verify_weight(&w, &[]);
        assert_eq!(r.points, 0);
        assert!(r.passed);
    }

    #[test]
    fn invalid_modulus_is_rejected() {
        let bad = ModulusSpec::table(vec![(0.0, 0.0), (0.5, 0.2), (1.0, 1.0)]).unwrap();
        assert!(matches!(build_weight(&bad, &small()), Err(Error::InvalidModulus(_))));
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let w = build_weight(&ModulusSpec::Linear, &small()).unwrap();
        let csv = weight_csv(&w, &[0.0, 1.0]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("tau,phi,dphi,d2phi"));
        lines.next();
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert!(rel(row[1], std::f64::consts::E - 1.0) < 1e-12);
    }

    #[test]
    fn table_fd_tracks_ode_rhs() {
        let w = build_weight(&ModulusSpec::power(0.75).unwrap(), &WeightConfig::default()).unwrap();
        // near blow-up the τ increments fall to the rounding level of τ
        for k in w.nodes.windows(3) {
            if k[2].tau - k[0].tau < 1e-8 * k[2].tau {
                continue;
            }
            let n = &k[1];
            assert!(rel(n.d2phi_fd, n.d2phi) < 1e-3, "{n:?}");
        }
    }
}
