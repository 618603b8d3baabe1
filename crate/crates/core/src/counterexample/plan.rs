use serde::Serialize;

use super::cutoffs::CutoffSet;
use crate::error::{Error, Result};
use crate::modulus::{classify_osgood, ModulusSpec, OsgoodClass};

/// Largest `k0` tried by the automatic search.
pub const K0_SEARCH_LIMIT: u64 = 10_000_000;
/// Terms summed directly past `N + 1` before the Euler–Maclaurin remainder.
const TAIL_DIRECT_TERMS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum K0Choice {
    Auto,
    Fixed(u64),
}

impl std::str::FromStr for K0Choice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(K0Choice::Auto);
        }
        s.parse::<u64>()
            .ok()
            .filter(|&k| k >= 1)
            .map(K0Choice::Fixed)
            .ok_or_else(|| Error::Domain(format!("k0 must be a positive integer or 'auto', got '{s}'")))
    }
}

/// The sequences `a, z, r, q, p` for one modulus and offset `k0`.
///
/// Index `i` holds the term `n = i + 1`. `a`, `r`, `p`, `q`, `dz`, and
/// `band_start` run to `n = N + 1`, `z` to `n = N + 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePlan {
    pub mu: ModulusSpec,
    pub k0: u64,
    pub n_max: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub z: Vec<f64>,
    /// `z_{n+1} - z_n = 3x² + 3x + 1`, `x = n + k0`, exact in f64.
    pub dz: Vec<f64>,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// `t_n = 1 + a_n` rounded once; band `n` is `[t_n, t_{n+1}]`.
    pub band_start: Vec<f64>,
    /// `|a_{N+1}|`, the bound on the neglected tail.
    pub tail: f64,
    /// Constraint that fixed `k0` in the automatic search.
    pub binding: Option<String>,
}

/// `1 / (x² μ(1/x))`.
fn term(mu: &ModulusSpec, x: f64) -> f64 {
    1.0 / (x * x * mu.value(1.0 / x))
}

/// `Σ_{j ≥ first} term(j + k0)`.
fn tail_sum(mu: &ModulusSpec, k0: u64, first: u64) -> Result<f64> {
    let start = (first + k0) as f64;
    let direct: f64 = (0..TAIL_DIRECT_TERMS)
        .rev()
        .map(|i| term(mu, start + i as f64))
        .sum();
    let x = start + TAIL_DIRECT_TERMS as f64;
    // ∫_x^∞ term = ∫_0^{1/x} dy/μ(y)
    let integral = mu.tail_integral(x.ln()).ok_or_else(|| {
        Error::InadmissibleModulus(format!("{}: ∫ ds/μ(s) diverges at 0", mu.label()))
    })?;
    let f = term(mu, x);
    let df = 0.5 * (term(mu, x + 1.0) - term(mu, x - 1.0));
    Ok(direct + integral + 0.5 * f - df / 12.0)
}

/// `(3x² + 3x + 1) / x³`, the quantity `p_n r_n^{-1} z_n^{-1}` at `x = n + k0`.
fn slope_ratio(x: f64) -> f64 {
    (3.0 * x * x + 3.0 * x + 1.0) / (x * x * x)
}

/// First violated `k0` constraint, if any.
fn k0_violation(mu: &ModulusSpec, k0: u64, bound: f64) -> Result<Option<&'static str>> {
    if slope_ratio((1 + k0) as f64) > bound {
        return Ok(Some("parabolicity at n = 1"));
    }
    if tail_sum(mu, k0, 1)? >= 1.0 {
        return Ok(Some("a_1 > -1"));
    }
    Ok(None)
}

/// Smallest `k0` meeting the parabolicity bound at `n = 1` and `a_1 > -1`. Both
/// quantities are monotone in `k0` and the bound is monotone in `n`, so this
/// certifies every `n`.
pub fn auto_k0(mu: &ModulusSpec, cutoffs: &CutoffSet) -> Result<(u64, String)> {
    let sup = cutoffs.sup_j1();
    let bound = if sup > 0.0 { 0.5 / sup } else { f64::INFINITY };
    if k0_violation(mu, 1, bound)?.is_none() {
        return Ok((1, "none: k0 = 1 already admissible".into()));
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while k0_violation(mu, hi, bound)?.is_some() {
        lo = hi;
        hi *= 2;
        if lo >= K0_SEARCH_LIMIT {
            return Err(Error::SearchFailure {
                limit: K0_SEARCH_LIMIT,
            });
        }
        hi = hi.min(K0_SEARCH_LIMIT);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if k0_violation(mu, mid, bound)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let binding = k0_violation(mu, lo, bound)?.unwrap_or("none");
    Ok((hi, binding.to_string()))
}

pub fn build_sequences(
    mu: &ModulusSpec,
    k0: K0Choice,
    n_max: usize,
    m: usize,
    cutoffs: &CutoffSet,
) -> Result<SequencePlan> {
    if n_max < 3 {
        return Err(Error::Domain(format!("N = {n_max} must be at least 3")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let verdict = classify_osgood(mu);
    if verdict.class != OsgoodClass::NonOsgood {
        return Err(Error::InadmissibleModulus(format!(
            "{} is classified {:?}; the defining series diverges",
            mu.label(),
            verdict.class
        )));
    }
    let (k0, binding) = match k0 {
        K0Choice::Fixed(k) => (k, None),
        K0Choice::Auto => {
            let (k, b) = auto_k0(mu, cutoffs)?;
            (k, Some(b))
        }
    };
    let count = n_max + 1;
    let x = |n: usize| (n as u64 + k0) as f64;
    let r: Vec<f64> = (1..=count).map(|n| term(mu, x(n))).collect();
    let z: Vec<f64> = (1..=count + 1).map(|n| x(n).powi(3)).collect();
    let dz: Vec<f64> = (1..=count)
        .map(|n| {
            let v = x(n);
            3.0 * v * v + 3.0 * v + 1.0
        })
        .collect();
    let tail = tail_sum(mu, k0, count as u64 + 1)?;
    let mut a = vec![0.0; count];
    a[count - 1] = -tail - r[count - 1];
    for i in (0..count - 1).rev() {
        a[i] = a[i + 1] - r[i];
    }
    let p: Vec<f64> = dz.iter().zip(&r).map(|(d, r)| d * r).collect();
    let mut q = vec![0.0; count];
    for i in 1..count {
        q[i] = q[i - 1] + z[i] * r[i - 1];
    }
    let band_start = a.iter().map(|a| 1.0 + a).collect();
    Ok(SequencePlan {
        mu: mu.clone(),
        k0,
        n_max,
        m,
        a,
        z,
        dz,
        r,
        q,
        p,
        band_start,
        tail,
        binding,
    })
}

impl SequencePlan {
    /// Term `n` (1-based) of a stored sequence.
    pub fn at(seq: &[f64], n: usize) -> f64 {
        seq[n - 1]
    }

    /// Frequency `z_n^{1/2m}`.
    pub fn frequency(&self, n: usize) -> f64 {
        Self::at(&self.z, n).powf(1.0 / (2 * self.m) as f64)
    }

    /// `t_{N+1}`, the end of the last band.
    pub fn last_time(&self) -> f64 {
        self.band_start[self.n_max]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::cutoffs::build_cutoffs;

    fn sqrt_mu() -> ModulusSpec {
        ModulusSpec::power(0.5).unwrap()
    }

    #[test]
    fn sequence_examples() {
        let cut = build_cutoffs(1);
        let plan = build_sequences(&sqrt_mu(), K0Choice::Fixed(10), 20, 1, &cut).unwrap();
        assert!((plan.r[0] - 11f64.powf(-1.5)).abs() < 1e-15);
        assert!((plan.r[0] - 0.027410).abs() < 1e-6);
        assert_eq!(plan.z[0], 1331.0);
        assert_eq!(plan.dz[0], 397.0);
        assert!((plan.p[0] - 397.0 * 11f64.powf(-1.5)).abs() < 1e-12);
        assert!((plan.p[0] - 10.882).abs() < 1e-3);
        assert_eq!(plan.q[0], 0.0);
        assert!((plan.q[1] - 1728.0 * plan.r[0]).abs() < 1e-12);
        for i in 0..plan.a.len() - 1 {
            assert!(plan.a[i] < plan.a[i + 1]);
        }
    }

    #[test]
    fn tail_matches_long_direct_sum() {
        // Σ_{j ≥ 1} (j + 10)^{-3/2} by 4e6 direct terms plus its own integral tail
        let mu = sqrt_mu();
        let big = 4_000_000u64;
        let direct: f64 = (1..big).rev().map(|j| ((j + 10) as f64).powf(-1.5)).sum();
        let x = (big + 10) as f64;
        let oracle = direct + 2.0 / x.sqrt() + 0.5 * x.powf(-1.5) + 1.5 * x.powf(-2.5) / 12.0;
        let got = tail_sum(&mu, 10, 1).unwrap();
        assert!((got - oracle).abs() < 1e-10 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn osgood_modulus_is_rejected() {
        let cut = build_cutoffs(1);
        assert!(matches!(
            build_sequences(&ModulusSpec::Linear, K0Choice::Fixed(10), 10, 1, &cut),
            Err(Error::InadmissibleModulus(_))
        ));
    }

    #[test]
    fn auto_k0_is_minimal() {
        let cut = build_cutoffs(1);
        let (k0, binding) = auto_k0(&sqrt_mu(), &cut).unwrap();
        let bound = 0.5 / cut.sup_j1();
        assert!(slope_ratio((k0 + 1) as f64) <= bound);
        assert!(slope_ratio(k0 as f64) > bound);
        assert!(binding.contains("parabolicity"), "{binding}");
        assert!((1400..1500).contains(&k0), "{k0}");
    }

    #[test]
    fn k0_parsing() {
        assert_eq!("auto".parse::<K0Choice>().unwrap(), K0Choice::Auto);
        assert_eq!("12".parse::<K0Choice>().unwrap(), K0Choice::Fixed(12));
        assert!("0".parse::<K0Choice>().is_err());
        assert!("x".parse::<K0Choice>().is_err());
    }
}
