use std::collections::VecDeque;

use serde::Serialize;

use super::ModulusSpec;
use crate::error::{Error, Result};

/// Discrete modulus of continuity `τ ↦ sup_{|t-s| ≤ τ} ‖f(t) - f(s)‖` of a
/// sampled vector-valued function.
///
/// `gaps[0] = 0` with `values[0] = 0`; the remaining entries are the
/// distinct pairwise gaps not exceeding 1, each carrying the running
/// supremum, so `values` is nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalModulus {
    pub interval: (f64, f64),
    pub gaps: Vec<f64>,
    pub values: Vec<f64>,
    /// True when the sampled interval is longer than 1 and gaps above 1 were
    /// discarded.
    pub clamped: bool,
}

const GAP_MERGE_REL: f64 = 1e-9;

impl EmpiricalModulus {
    /// `μ(f, τ)` for `τ ∈ [0, 1]`. Beyond the largest sampled gap this is
    /// the total oscillation.
    pub fn value(&self, tau: f64) -> f64 {
        let slack = GAP_MERGE_REL * tau.abs().max(1e-300);
        let i = self.gaps.partition_point(|&g| g <= tau + slack);
        if i == 0 {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    pub fn total_oscillation(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// `sup_{0<|t-s|≤1} ‖f(t)-f(s)‖ / μ(|t-s|)` for a reference modulus.
    pub fn seminorm(&self, mu: &ModulusSpec) -> f64 {
        self.gaps
            .iter()
            .zip(&self.values)
            .skip(1)
            .map(|(&g, &v)| v / mu.value(g))
            .fold(0.0, f64::max)
    }

    /// First pair of gaps violating `μ(τ₁+τ₂) ≤ μ(τ₁) + μ(τ₂) + tol`.
    pub fn subadditivity_violation(&self, tol: f64) -> Option<(f64, f64)> {
        let max_gap = *self.gaps.last()?;
        for (i, &g1) in self.gaps.iter().enumerate().skip(1) {
            for (j, &g2) in self.gaps.iter().enumerate().skip(i) {
                let s = g1 + g2;
                if s > max_gap * (1.0 + GAP_MERGE_REL) {
                    break;
                }
                if self.value(s) > self.values[i] + self.values[j] + tol {
                    return Some((g1, g2));
                }
            }
        }
        None
    }

    pub fn is_subadditive(&self, tol: f64) -> bool {
        self.subadditivity_violation(tol).is_none()
    }
}

/// Exact discrete modulus of `samples` at every distinct pairwise gap.
///
/// Samples must have strictly increasing times. Gaps closer than a relative
/// `1e-9` are merged, so uniform grids produce one entry per lag.
pub fn empirical_modulus(samples: &[(f64, Vec<f64>)]) -> Result<EmpiricalModulus> {
    if samples.len() < 2 {
        return Err(Error::Domain("empirical modulus needs at least two samples".into()));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("sample times must be strictly increasing".into()));
    }
    let dim = samples[0].1.len();
    if samples.iter().any(|(_, v)| v.len() != dim) {
        return Err(Error::Domain("sample vectors must share one dimension".into()));
    }
    let t_min = samples[0].0;
    let t_max = samples[samples.len() - 1].0;
    let mut pairs = Vec::with_capacity(samples.len() * (samples.len() - 1) / 2);
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let gap = samples[j].0 - samples[i].0;
            if gap > 1.0 {
                break;
            }
            let dist = samples[i]
                .1
                .iter()
                .zip(&samples[j].1)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            pairs.push((gap, dist));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut gaps = vec![0.0];
    let mut values = vec![0.0];
    let mut running = 0.0f64;
    let mut cluster_start = f64::NAN;
    for (gap, dist) in pairs {
        running = running.max(dist);
        if !cluster_start.is_nan() && gap - cluster_start <= GAP_MERGE_REL * cluster_start {
            let last = gaps.len() - 1;
            gaps[last] = gap;
            values[last] = running;
        } else {
            cluster_start = gap;
            gaps.push(gap);
            values.push(running);
        }
    }
    Ok(EmpiricalModulus {
        interval: (t_min, t_max),
        gaps,
        values,
        clamped: t_max - t_min > 1.0,
    })
}

/// `sup { |f_i - f_j| : |t_i - t_j| ≤ τ }` for scalar samples, one value per
/// requested `τ`, in `O(n)` per lag via monotone deques.
pub fn sliding_oscillation(times: &[f64], values: &[f64], taus: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    taus.iter()
        .map(|&tau| {
            let mut best = 0.0f64;
            let mut maxq: VecDeque<usize> = VecDeque::new();
            let mut minq: VecDeque<usize> = VecDeque::new();
            let mut lo = 0usize;
            for hi in 0..times.len() {
                while times[hi] - times[lo] > tau {
                    lo += 1;
                }
                while maxq.back().is_some_and(|&k| values[k] <= values[hi]) {
                    maxq.pop_back();
                }
                maxq.push_back(hi);
                while minq.back().is_some_and(|&k| values[k] >= values[hi]) {
                    minq.pop_back();
                }
                minq.push_back(hi);
                while maxq.front().is_some_and(|&k| k < lo) {
                    maxq.pop_front();
                }
                while minq.front().is_some_and(|&k| k < lo) {
                    minq.pop_front();
                }
                let spread = values[maxq[0]] - values[minq[0]];
                best = best.max(spread);
            }
            best
        })
        .collect()
}

/// Least concave majorant of an empirical modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcaveEnvelope {
    /// Hull vertices in the empirical modulus' own units.
    pub knots: Vec<(f64, f64)>,
    /// Value of the majorant at `τ = 1`; the normalized table divides by it.
    pub scale: f64,
    pub invertible: bool,
    /// The majorant rescaled to `[0,1] → [0,1]`, as a table modulus.
    #[serde(skip)]
    pub modulus: ModulusSpec,
}

impl ConcaveEnvelope {
    /// The majorant in the original (unscaled) units.
    pub fn value(&self, tau: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&(t, _)| t <= tau);
        if i == 0 {
            return k[0].1;
        }
        if i >= k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, m0) = k[i - 1];
        let (t1, m1) = k[i];
        m0 + (m1 - m0) * (tau - t0) / (t1 - t0)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper convex hull of the points `(gap, μ(f, gap))`, extended flat to
/// `τ = 1` when the sampled gaps stop short of it.
pub fn concave_envelope(emp: &EmpiricalModulus) -> ConcaveEnvelope {
    let mut points: Vec<(f64, f64)> = emp.gaps.iter().copied().zip(emp.values.iter().copied()).collect();
    if points.first().map(|p| p.0) != Some(0.0) {
        points.insert(0, (0.0, 0.0));
    }
    let last_gap = points[points.len() - 1].0;
    if last_gap < 1.0 {
        points.push((1.0, emp.total_oscillation()));
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let scale = hull[hull.len() - 1].1;
    let invertible = scale > 0.0;
    let nodes: Vec<(f64, f64)> = if invertible {
        hull.iter().map(|&(t, m)| (t, m / scale)).collect()
    } else {
        vec![(0.0, 0.0), (1.0, 0.0)]
    };
    let modulus = ModulusSpec::table(nodes).expect("hull abscissae span [0, 1] and increase");
    ConcaveEnvelope {
        knots: hull,
        scale,
        invertible,
        modulus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, Vec<f64>)> {
        (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (t, vec![f(t)])
            })
            .collect()
    }

    /// Least concave majorant by brute force over all chords.
    fn brute_majorant(points: &[(f64, f64)], x: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for &(xi, yi) in points {
            if xi == x {
                best = best.max(yi);
            }
            for &(xj, yj) in points {
                if xi < x && x < xj {
                    best = best.max(yi + (yj - yi) * (x - xi) / (xj - xi));
                }
            }
        }
        best
    }

    #[test]
    fn identity_has_modulus_tau() {
        let emp = empirical_modulus(&uniform(50, |t| t)).unwrap();
        assert_eq!(emp.gaps.len(), 51);
        for (g, v) in emp.gaps.iter().zip(&emp.values) {
            assert!((g - v).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_has_zero_modulus() {
        let emp = empirical_modulus(&uniform(20, |_| 3.0)).unwrap();
        assert!(emp.values.iter().all(|&v| v == 0.0));
        let env = concave_envelope(&emp);
        assert!(!env.invertible);
    }

    #[test]
    fn sqrt_modulus_is_attained_from_origin() {
        let emp = empirical_modulus(&uniform(400, f64::sqrt)).unwrap();
        for k in [1usize, 7, 100, 400] {
            let tau = k as f64 / 400.0;
            assert!((emp.value(tau) - tau.sqrt()).abs() < 1e-12);
        }
        assert!(emp.is_subadditive(1e-12));
    }

    #[test]
    fn too_few_samples_is_an_error() {
        assert!(empirical_modulus(&[(0.0, vec![1.0])]).is_err());
        assert!(empirical_modulus(&[(0.0, vec![1.0]), (0.0, vec![2.0])]).is_err());
    }

    #[test]
    fn long_intervals_clamp_gaps_at_one() {
        let samples: Vec<_> = (0..=30).map(|i| (i as f64 * 0.1, vec![i as f64])).collect();
        let emp = empirical_modulus(&samples).unwrap();
        assert!(emp.clamped);
        assert!(*emp.gaps.last().unwrap() <= 1.0 + 1e-12);
        assert!((emp.total_oscillation() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn envelope_of_four_points_matches_brute_force() {
        let emp = EmpiricalModulus {
            interval: (0.0, 1.0),
            gaps: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            values: vec![0.0, 0.1, 0.8, 1.0],
            clamped: false,
        };
        let env = concave_envelope(&emp);
        let pts: Vec<_> = emp.gaps.iter().copied().zip(emp.values.iter().copied()).collect();
        let oracle = brute_majorant(&pts, 1.0 / 3.0);
        assert!((oracle - 0.4).abs() < 1e-15);
        assert!((env.value(1.0 / 3.0) - oracle).abs() < 1e-15);
        assert_eq!(env.knots.len(), 3);
    }

    #[test]
    fn envelope_of_concave_data_is_identity() {
        let emp = empirical_modulus(&uniform(64, f64::sqrt)).unwrap();
        let env = concave_envelope(&emp);
        for (g, v) in emp.gaps.iter().zip(&emp.values) {
            assert!((env.value(*g) - v).abs() < 1e-12);
        }
        assert_eq!(env.scale, 1.0);
    }

    #[test]
    fn sliding_oscillation_agrees_with_pairs() {
        let times: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin().abs() * 0.01 + i as f64 * 0.005).collect();
        let mut times = times;
        times.sort_by(f64::total_cmp);
        let values: Vec<f64> = times.iter().map(|t| (17.0 * t).sin() + t * t).collect();
        let taus = [0.0, 0.003, 0.02, 0.3, 2.0];
        let fast = sliding_oscillation(&times, &values, &taus);
        for (k, &tau) in taus.iter().enumerate() {
            let mut brute = 0.0f64;
            for i in 0..times.len() {
                for j in i..times.len() {
                    if times[j] - times[i] <= tau {
                        brute = brute.max((values[j] - values[i]).abs());
                    }
                }
            }
            assert_eq!(fast[k], brute, "tau = {tau}");
        }
    }
}
