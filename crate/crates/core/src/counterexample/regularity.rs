use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cutoffs::Cutoff;
use super::field::{CounterexampleField, Gauge, SignVariant};
use super::plan::{build_sequences, K0Choice, SequencePlan};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityConfig {
    /// Seeded phase probes per band, in addition to the origin. A phase `φ`
    /// probes `x = φ / k_n` on band `n`.
    pub x_points: usize,
    /// Uniform `s` points per band, endpoints included.
    pub s_points: usize,
    pub seed: u64,
    /// Bands in the plan used for the Hölder scan of `l`.
    pub sharpness_n: usize,
    /// Samples of `l` on each of the two `J'` transitions of a band.
    pub sharpness_samples: usize,
    /// Trailing dyadic levels over which the two trends are required.
    pub levels: usize,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig {
            x_points: 8,
            s_points: 41,
            seed: 0,
            sharpness_n: 50_000,
            sharpness_samples: 100,
            levels: 5,
        }
    }
}

pub const QUANTITIES: [&str; 12] = [
    "b1", "b2", "c", "dt_b1", "dt_b2", "dt_c", "dx1_b1", "dx1_b2", "dx1_c", "dx2_b1", "dx2_b2", "dx2_c",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityTrend {
    pub name: String,
    /// Sup over the probe grid of each band in [`CoefficientBounds::bands`].
    pub sups: Vec<f64>,
    pub n_star: usize,
    pub bounded: bool,
    /// Least-squares slope of `ln sup` against `ln n` from `n*` on; `None` with
    /// fewer than two positive sups there. A maximum at the last band is not
    /// decaying.
    pub slope: Option<f64>,
    pub decaying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientBounds {
    pub bands: Vec<usize>,
    pub quantities: Vec<QuantityTrend>,
    pub degenerate_points: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessLevel {
    pub tau: f64,
    /// Empirical modulus `μ(l, τ)`.
    pub oscillation: f64,
    /// `μ(l, τ) / μ(τ)`.
    pub ratio_modulus: f64,
    /// `μ(l, τ) / τ`.
    pub ratio_lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sharpness {
    pub k0: u64,
    pub n_max: usize,
    pub samples: usize,
    pub l_min: f64,
    pub l_max: f64,
    /// Dyadic levels in `[r_N / 16, r_1 / 64]`, decreasing.
    pub levels: Vec<SharpnessLevel>,
    /// `μ(l, τ) / μ(τ)` finite and non-increasing over the trailing levels.
    pub modulus_bounded: bool,
    /// `μ(l, τ) / τ` strictly increasing over the trailing levels.
    pub lipschitz_divergent: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessRow {
    pub n: usize,
    /// `ln |u(t_n, 0)|`.
    pub log_u: f64,
    pub minus_q: f64,
    /// Absolute-mode `ln |u|` where representable.
    pub log_u_absolute: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flatness {
    pub rows: Vec<FlatnessRow>,
    pub max_deviation: f64,
    /// `-q_n` strictly decreasing.
    pub decreasing: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub sign: SignVariant,
    pub coefficient_bounds: CoefficientBounds,
    pub sharpness: Sharpness,
    pub flatness: Flatness,
    pub passed: bool,
}

/// `{1, 1.5, 2, 3, 5, 7} × 10^k` rounded, capped at and including `n_max`.
pub fn probe_bands(n_max: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut scale = 1usize;
    'outer: loop {
        for f in [10, 15, 20, 30, 50, 70] {
            let n = f * scale / 10;
            if n > n_max {
                break 'outer;
            }
            if out.last() != Some(&n) {
                out.push(n);
            }
        }
        scale *= 10;
    }
    for n in [3, 4] {
        if n <= n_max && !out.contains(&n) {
            out.push(n);
        }
    }
    if !out.contains(&n_max) {
        out.push(n_max);
    }
    out.sort_unstable();
    out
}

fn coefficients(field: &CounterexampleField, n: usize, s: f64, x: (f64, f64), sign: SignVariant) -> Result<Option<[f64; 3]>> {
    let v = field.eval_band(n, s, x, Gauge::Normalized)?;
    let lo = field.lower_order(&v, sign);
    Ok((!lo.degenerate).then_some([lo.b1, lo.b2, lo.c]))
}

/// Sups of the twelve quantities on band `n`, plus the degenerate count.
fn band_sups(field: &CounterexampleField, n: usize, phases: &[(f64, f64)], cfg: &RegularityConfig, sign: SignVariant) -> Result<([f64; 12], usize)> {
    let plan = &field.plan;
    let k = plan.frequency(n);
    let xs: Vec<(f64, f64)> = phases.iter().map(|p| (p.0 / k, p.1 / k)).collect();
    let hs = 1e-4;
    let ht = hs * plan.r[n - 1];
    let hx = 1e-4 / plan.frequency(n + 1);
    let mut sups = [0.0f64; 12];
    let mut degenerate = 0;
    let steps = cfg.s_points.max(2) - 1;
    for j in 0..=steps {
        let s = j as f64 / steps as f64;
        for &x in &xs {
            let Some(base) = coefficients(field, n, s, x, sign)? else {
                degenerate += 1;
                continue;
            };
            let probes = [
                ((s + hs, x), (s - hs, x), 2.0 * ht),
                ((s, (x.0 + hx, x.1)), (s, (x.0 - hx, x.1)), 2.0 * hx),
                ((s, (x.0, x.1 + hx)), (s, (x.0, x.1 - hx)), 2.0 * hx),
            ];
            for (k, v) in base.iter().enumerate() {
                sups[k] = sups[k].max(v.abs());
            }
            for (d, (plus, minus, width)) in probes.iter().enumerate() {
                let (Some(p), Some(m)) = (
                    coefficients(field, n, plus.0, plus.1, sign)?,
                    coefficients(field, n, minus.0, minus.1, sign)?,
                ) else {
                    continue;
                };
                for k in 0..3 {
                    let slot = &mut sups[3 + 3 * d + k];
                    *slot = slot.max(((p[k] - m[k]) / width).abs());
                }
            }
        }
    }
    Ok((sups, degenerate))
}

fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn coefficient_bounds(field: &CounterexampleField, cfg: &RegularityConfig, sign: SignVariant) -> Result<CoefficientBounds> {
    let bands = probe_bands(field.plan.n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut xs = vec![(0.0, 0.0)];
    for _ in 0..cfg.x_points {
        let tau = std::f64::consts::TAU;
        xs.push((rng.gen_range(0.0..tau), rng.gen_range(0.0..tau)));
    }
    let per_band: Vec<([f64; 12], usize)> = bands
        .par_iter()
        .map(|&n| band_sups(field, n, &xs, cfg, sign))
        .collect::<Result<_>>()?;
    let degenerate_points = per_band.iter().map(|b| b.1).sum();
    let quantities: Vec<QuantityTrend> = QUANTITIES
        .iter()
        .enumerate()
        .map(|(q, name)| {
            let sups: Vec<f64> = per_band.iter().map(|b| b.0[q]).collect();
            let bounded = sups.iter().all(|v| v.is_finite());
            let star = sups
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
                .0;
            let tail: Vec<(f64, f64)> = (star..bands.len())
                .filter(|&i| sups[i] > 0.0)
                .map(|i| ((bands[i] as f64).ln(), sups[i].ln()))
                .collect();
            let slope = log_slope(&tail);
            QuantityTrend {
                name: name.to_string(),
                n_star: bands[star],
                bounded,
                decaying: bounded
                    && (star + 1 < bands.len() || sups[star] == 0.0)
                    && slope.is_none_or(|s| s <= 0.0),
                slope,
                sups,
            }
        })
        .collect();
    let passed = quantities.iter().all(|q| q.bounded && q.decaying);
    Ok(CoefficientBounds {
        bands,
        quantities,
        degenerate_points,
        passed,
    })
}

/// Streaming `sup |f(t) - f(t')|` over `|t - t'| ≤ τ` for increasing `t`.
struct Window {
    tau: f64,
    max: VecDeque<(f64, f64)>,
    min: VecDeque<(f64, f64)>,
    best: f64,
}

impl Window {
    fn new(tau: f64) -> Self {
        Window {
            tau,
            max: VecDeque::new(),
            min: VecDeque::new(),
            best: 0.0,
        }
    }

    fn push(&mut self, t: f64, v: f64) {
        while self.max.back().is_some_and(|b| b.1 <= v) {
            self.max.pop_back();
        }
        self.max.push_back((t, v));
        while self.min.back().is_some_and(|b| b.1 >= v) {
            self.min.pop_back();
        }
        self.min.push_back((t, v));
        while self.max.front().is_some_and(|f| t - f.0 > self.tau) {
            self.max.pop_front();
        }
        while self.min.front().is_some_and(|f| t - f.0 > self.tau) {
            self.min.pop_front();
        }
        self.best = self.best.max(self.max[0].1 - self.min[0].1);
    }
}

/// Empirical modulus of `l` on a plan with many bands.
///
/// Time is measured as `t - 1 = a_n + s r_n` to keep resolution near 1. `l`
/// equals 1 off the `J'` transitions, so each band is sampled at `s = 0`
/// and on `[1/6, 1/5] ∪ [1/3, 1/2]`.
pub fn sharpness(plan: &SequencePlan, field: &CounterexampleField, cfg: &RegularityConfig) -> Result<Sharpness> {
    let big;
    let plan = if plan.n_max >= cfg.sharpness_n {
        plan
    } else {
        big = build_sequences(&plan.mu, K0Choice::Fixed(plan.k0), cfg.sharpness_n, plan.m, &field.cutoffs)?;
        &big
    };
    let n_max = plan.n_max;
    let hi = plan.r[0] / 64.0;
    let lo = plan.r[n_max - 1] / 16.0;
    let taus: Vec<f64> = (0..200)
        .map(|k| 0.5f64.powi(k))
        .filter(|&t| t <= hi && t >= lo)
        .collect();
    let mut windows: Vec<Window> = taus.iter().map(|&t| Window::new(t)).collect();
    let k = cfg.sharpness_samples.max(2);
    let mut local = Vec::with_capacity(2 * k + 1);
    for j in 0..k {
        local.push(1.0 / 6.0 + (0.2 - 1.0 / 6.0) * j as f64 / (k - 1) as f64);
    }
    for j in 0..k {
        local.push(1.0 / 3.0 + (0.5 - 1.0 / 3.0) * j as f64 / (k - 1) as f64);
    }
    let jp: Vec<f64> = local.iter().map(|&s| field.cutoffs.derivative(Cutoff::J, s, 1)).collect();
    let (mut l_min, mut l_max) = (1.0f64, 1.0f64);
    let mut samples = 0usize;
    for i in 0..n_max {
        let (a, r, ratio) = (plan.a[i], plan.r[i], plan.dz[i] / plan.z[i]);
        for w in windows.iter_mut() {
            w.push(a, 1.0);
        }
        for (&s, &d) in local.iter().zip(&jp) {
            let l = if d == 0.0 { 1.0 } else { 1.0 - d * ratio };
            l_min = l_min.min(l);
            l_max = l_max.max(l);
            let t = a + s * r;
            for w in windows.iter_mut() {
                w.push(t, l);
            }
        }
        samples += local.len() + 1;
    }
    let levels: Vec<SharpnessLevel> = windows
        .iter()
        .map(|w| SharpnessLevel {
            tau: w.tau,
            oscillation: w.best,
            ratio_modulus: w.best / plan.mu.value(w.tau),
            ratio_lipschitz: w.best / w.tau,
        })
        .collect();
    let enough = levels.len() >= cfg.levels.max(2);
    let trailing = &levels[levels.len().saturating_sub(cfg.levels)..];
    let modulus_bounded = enough
        && trailing.iter().all(|l| l.ratio_modulus.is_finite())
        && trailing.windows(2).all(|w| w[1].ratio_modulus <= w[0].ratio_modulus);
    let lipschitz_divergent = enough && trailing.windows(2).all(|w| w[1].ratio_lipschitz > w[0].ratio_lipschitz);
    Ok(Sharpness {
        k0: plan.k0,
        n_max,
        samples,
        l_min,
        l_max,
        levels,
        modulus_bounded,
        lipschitz_divergent,
        passed: modulus_bounded && lipschitz_divergent,
    })
}

pub fn flatness(field: &CounterexampleField) -> Result<Flatness> {
    let plan = &field.plan;
    let mut rows = vec![];
    let mut max_deviation = 0.0f64;
    for n in 1..=plan.n_max {
        let v = field.eval_band(n, 0.0, (0.0, 0.0), Gauge::Normalized)?;
        let log_u = v.u.abs().ln() - v.log_gauge;
        let minus_q = -plan.q[n - 1];
        let log_u_absolute = field
            .eval_band(n, 0.0, (0.0, 0.0), Gauge::Absolute)
            .ok()
            .map(|a| a.u.abs().ln());
        max_deviation = max_deviation.max((log_u - minus_q).abs());
        if let Some(a) = log_u_absolute {
            max_deviation = max_deviation.max((a - minus_q).abs());
        }
        rows.push(FlatnessRow {
            n,
            log_u,
            minus_q,
            log_u_absolute,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].minus_q < w[0].minus_q);
    Ok(Flatness {
        passed: max_deviation == 0.0 && decreasing,
        rows,
        max_deviation,
        decreasing,
    })
}

pub fn regularity_report(field: &CounterexampleField, cfg: &RegularityConfig, sign: SignVariant) -> Result<RegularityReport> {
    let coefficient_bounds = coefficient_bounds(field, cfg, sign)?;
    let sharpness = sharpness(&field.plan, field, cfg)?;
    let flatness = flatness(field)?;
    Ok(RegularityReport {
        sign,
        passed: coefficient_bounds.passed && sharpness.passed && flatness.passed,
        coefficient_bounds,
        sharpness,
        flatness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::cutoffs::{build_cutoffs, CutoffSet};
    use crate::modulus::ModulusSpec;

    fn field(n: usize, flat: bool) -> CounterexampleField {
        let cut = CutoffSet::new(1, flat);
        let k0 = if flat { K0Choice::Fixed(1441) } else { K0Choice::Auto };
        let plan = build_sequences(&ModulusSpec::power(0.5).unwrap(), k0, n, 1, &build_cutoffs(1)).unwrap();
        CounterexampleField::new(plan, cut)
    }

    #[test]
    fn probe_band_list() {
        assert_eq!(probe_bands(50), vec![1, 2, 3, 4, 5, 7, 10, 15, 20, 30, 50]);
        assert_eq!(probe_bands(12), vec![1, 2, 3, 4, 5, 7, 10, 12]);
    }

    #[test]
    fn window_matches_brute_force() {
        let t: Vec<f64> = (0..300).map(|i| i as f64 * 0.01 + (i as f64).sin().abs() * 0.004).collect();
        let v: Vec<f64> = t.iter().map(|x| (9.0 * x).sin()).collect();
        for tau in [0.005, 0.05, 0.4] {
            let mut w = Window::new(tau);
            for (a, b) in t.iter().zip(&v) {
                w.push(*a, *b);
            }
            let brute = crate::modulus::sliding_oscillation(&t, &v, &[tau])[0];
            assert_eq!(w.best, brute);
        }
    }

    #[test]
    fn plus_variant_coefficients_decay() {
        let f = field(50, false);
        let b = coefficient_bounds(&f, &RegularityConfig::default(), SignVariant::PlusL).unwrap();
        assert!(b.passed, "{b:#?}");
        let m = coefficient_bounds(&f, &RegularityConfig::default(), SignVariant::MinusL).unwrap();
        assert!(!m.passed);
    }

    #[test]
    fn flatness_is_exact() {
        let f = field(30, false);
        let fl = flatness(&f).unwrap();
        assert!(fl.passed, "{fl:#?}");
        assert_eq!(fl.rows[0].log_u_absolute, Some(0.0));
    }

    #[test]
    fn flat_j_has_no_oscillation() {
        let f = field(200, true);
        let cfg = RegularityConfig {
            sharpness_n: 5000,
            levels: 1,
            ..Default::default()
        };
        let s = sharpness(&f.plan, &f, &cfg).unwrap();
        assert!(!s.levels.is_empty());
        assert!(s.levels.iter().all(|l| l.oscillation == 0.0), "{s:#?}");
        assert!(!s.lipschitz_divergent);
        assert_eq!((s.l_min, s.l_max), (1.0, 1.0));
    }
}
