//! Quadrature primitives.
//!
//! Two families are provided:
//!
//! * [`integrate`]: globally adaptive Gauss–Kronrod (G7/K15) refinement.
//!   Used for every scalar integral whose integrand may carry a kink or an
//!   integrable endpoint singularity (moduli, weights, mollifiers).
//! * [`CompositeGauss`]: composite Gauss–Legendre with panel doubling on a
//!   list of smooth pieces, evaluating several integrands on shared nodes.
//!   The energy identity checks rely on this so both sides of an identity
//!   see identical nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

impl Tolerance {
    pub fn tight() -> Self {
        Tolerance {
            abs: 1e-15,
            rel: 1e-13,
            max_subdivisions: 8000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Adaptive G7/K15 integration of `f` over `[a, b]`.
///
/// Returns a negated estimate when `b < a`. The integrand is never
/// evaluated at the endpoints, so integrable endpoint singularities are
/// tolerated (at the cost of more subdivisions).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    if b < a {
        let e = integrate(f, b, a, tol);
        return Estimate {
            value: -e.value,
            ..e
        };
    }
    let first = kronrod15(&f, a, b);
    let mut evaluations = 15;
    let mut total = first.value;
    let mut err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let target = |v: f64| tol.abs.max(tol.rel * v.abs());
    while err > target(total) && heap.len() < tol.max_subdivisions {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            heap.push(worst);
            break;
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Estimate {
        value,
        error,
        evaluations,
        converged: error <= target(value),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The 64-point rule, built once.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre with panel doubling.
#[derive(Debug, Clone, Copy)]
pub struct CompositeGauss {
    /// Agreement required between two successive refinements, relative to
    /// the largest component.
    pub rel: f64,
    /// Absolute floor for that agreement.
    pub abs: f64,
    pub max_panels: usize,
}

impl Default for CompositeGauss {
    fn default() -> Self {
        CompositeGauss {
            rel: 1e-8,
            abs: 1e-15,
            max_panels: 1 << 12,
        }
    }
}

/// Outcome of a [`CompositeGauss`] run on a `K`-component integrand.
#[derive(Debug, Clone, Copy)]
pub struct CompositeEstimate<const K: usize> {
    pub values: [f64; K],
    pub panels: usize,
    pub converged: bool,
}

impl CompositeGauss {
    /// Integrates every component of `f` over the union of `pieces`.
    ///
    /// Each piece starts with one 64-node panel; the panel count per piece is
    /// doubled until every component agrees with the previous refinement.
    pub fn integrate<const K: usize, F>(&self, f: F, pieces: &[(f64, f64)]) -> CompositeEstimate<K>
    where
        F: Fn(f64) -> [f64; K],
    {
        let rule = GaussLegendre::order64();
        let mut panels = 1usize;
        let mut prev = self.sum(&f, pieces, rule, panels);
        loop {
            let next_panels = panels * 2;
            let next = self.sum(&f, pieces, rule, next_panels);
            // components share one scale: a vanishing term is judged against the largest
            let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let agree = prev
                .iter()
                .zip(next.iter())
                .all(|(a, b)| (a - b).abs() <= self.abs.max(self.rel * scale));
            panels = next_panels;
            if agree || panels >= self.max_panels {
                return CompositeEstimate {
                    values: next,
                    panels,
                    converged: agree,
                };
            }
            prev = next;
        }
    }

    fn sum<const K: usize, F>(
        &self,
        f: &F,
        pieces: &[(f64, f64)],
        rule: &GaussLegendre,
        panels: usize,
    ) -> [f64; K]
    where
        F: Fn(f64) -> [f64; K],
    {
        let mut acc = [0.0; K];
        for &(a, b) in pieces {
            let width = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + width * p as f64;
                let center = lo + 0.5 * width;
                let half = 0.5 * width;
                for (x, w) in rule.nodes.iter().zip(rule.weights.iter()) {
                    let v = f(center + half * x);
                    for k in 0..K {
                        acc[k] += w * half * v[k];
                    }
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let e = integrate(|x| x.powi(6) - 3.0 * x * x, -1.0, 2.0, Tolerance::default());
        let exact = (2f64.powi(7) + 1.0) / 7.0 - (8.0 + 1.0);
        assert!((e.value - exact).abs() < 1e-13);
        assert!(e.converged);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let e = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::default());
        assert!((e.value - 2.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn reversed_limits_negate() {
        let f = |x: f64| x.exp();
        let fwd = integrate(f, 0.0, 1.0, Tolerance::default()).value;
        let bwd = integrate(f, 1.0, 0.0, Tolerance::default()).value;
        assert_eq!(fwd, -bwd);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64] {
            let r = GaussLegendre::new(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
        }
        let r = GaussLegendre::new(5);
        // degree 9 is integrated exactly by 5 nodes
        let m: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn composite_gauss_shares_nodes_across_components() {
        let cg = CompositeGauss::default();
        let est = cg.integrate(|x| [x.sin(), x.cos()], &[(0.0, 1.0), (1.0, std::f64::consts::PI)]);
        assert!(est.converged);
        assert!((est.values[0] - 2.0).abs() < 1e-12);
        assert!(est.values[1].abs() < 1e-12);
    }
}
