use serde::Serialize;

use super::cutoffs::CutoffSet;
use super::plan::SequencePlan;

/// Exponents `α, β, γ` probed in the two decay conditions.
pub const PROBE_EXPONENTS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
/// Trailing terms whose increments must not be positive in the Hölder trend.
pub const TREND_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub id: String,
    pub passed: bool,
    /// First `n` at which the condition fails.
    pub witness: Option<usize>,
    /// Distance from the threshold; negative on failure.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub k0: u64,
    pub n_max: usize,
    pub sup_j1: f64,
    pub conditions: Vec<ConditionEntry>,
    pub passed: bool,
}

impl ConditionReport {
    pub fn get(&self, id: &str) -> Option<&ConditionEntry> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

fn entry(id: &str, witness: Option<usize>, margin: f64, detail: String) -> ConditionEntry {
    ConditionEntry {
        id: id.to_string(),
        passed: witness.is_none() && !margin.is_nan(),
        witness,
        margin,
        detail,
    }
}

/// `L(n) = lead(n) + α ln z_{n+1} + β ln p_n - γ ln r_n` for `n = 1..=N`.
fn log_profile(plan: &SequencePlan, lead: impl Fn(usize) -> f64, (al, be, ga): (f64, f64, f64)) -> Vec<f64> {
    (1..=plan.n_max)
        .map(|n| {
            let i = n - 1;
            lead(n) + al * plan.z[i + 1].ln() + be * plan.p[i].ln() - ga * plan.r[i].ln()
        })
        .collect()
}

fn probe_triples() -> Vec<(f64, f64, f64)> {
    let e = PROBE_EXPONENTS;
    let mut out = Vec::with_capacity(e.len().pow(3));
    for &a in &e {
        for &b in &e {
            for &g in &e {
                out.push((a, b, g));
            }
        }
    }
    out
}

/// Strict decrease of `L` from `n = 3` to `N` over all probe triples.
fn decay_condition(id: &str, plan: &SequencePlan, lead: impl Fn(usize) -> f64 + Copy, dominance: f64) -> ConditionEntry {
    let mut witness: Option<usize> = None;
    let mut margin = f64::INFINITY;
    let mut final_max = f64::NEG_INFINITY;
    for triple in probe_triples() {
        let l = log_profile(plan, lead, triple);
        final_max = final_max.max(l[l.len() - 1]);
        for n in 3..plan.n_max {
            let drop = l[n - 1] - l[n];
            margin = margin.min(drop);
            if drop <= 0.0 {
                witness = Some(witness.map_or(n, |w| w.min(n)));
            }
        }
    }
    entry(
        id,
        witness,
        margin,
        format!(
            "log-profile strictly decreasing on [3, N] for {} probe triples; max L(N) = {final_max:.6e}; dominance ratio {dominance:.6e}",
            PROBE_EXPONENTS.len().pow(3)
        ),
    )
}

pub fn check_conditions(plan: &SequencePlan, cutoffs: &CutoffSet) -> ConditionReport {
    let n = plan.n_max;
    let mut out = Vec::new();

    // a increasing in (-1, 0)
    let a = &plan.a;
    let mut w41 = None;
    if a[0] <= -1.0 {
        w41 = Some(1);
    }
    for i in 0..a.len() - 1 {
        if !(a[i] < a[i + 1]) && w41.is_none() {
            w41 = Some(i + 1);
        }
    }
    if !(a[a.len() - 1] < 0.0) && w41.is_none() {
        w41 = Some(a.len());
    }
    out.push(entry(
        "a_sequence",
        w41,
        (a[0] + 1.0).min(-a[a.len() - 1]),
        format!("a_1 = {:.12e}, tail |a_(N+1)| = {:.6e}", a[0], plan.tail),
    ));

    // z increasing from above 1
    let z = &plan.z;
    let mut w42 = if z[0] > 1.0 { None } else { Some(1) };
    for i in 0..z.len() - 1 {
        if !(z[i] < z[i + 1]) && w42.is_none() {
            w42 = Some(i + 1);
        }
    }
    out.push(entry("z_sequence", w42, z[0] - 1.0, format!("z_1 = {}, z_n = (n + k0)^3", z[0])));

    // p bounded below by 1
    let (imin, pmin) = plan.p[..n]
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &p)| if p < acc.1 { (i, p) } else { acc });
    let w43 = plan.p[..n].iter().position(|&p| !(p > 1.0)).map(|i| i + 1);
    out.push(entry(
        "p_sequence",
        w43,
        pmin - 1.0,
        format!(
            "min p_n = {pmin:.6e} at n = {}; p_n ≥ 3/μ(1/(n+k0)) ≥ 3 for n > N",
            imin + 1
        ),
    ));

    // l within [1/2, 3/2]
    let sup_j1 = cutoffs.sup_j1();
    let bound = if sup_j1 > 0.0 { 0.5 / sup_j1 } else { f64::INFINITY };
    let ratio: Vec<f64> = (0..n).map(|i| plan.p[i] / (plan.r[i] * plan.z[i])).collect();
    let sup = ratio.iter().cloned().fold(0.0, f64::max);
    let w45 = ratio.iter().position(|&v| v > bound).map(|i| i + 1);
    out.push(entry(
        "parabolicity",
        w45,
        bound - sup,
        format!("sup p_n/(r_n z_n) = {sup:.6e} vs 1/(2‖J'‖) = {bound:.6e}, ‖J'‖ = {sup_j1:.6e}"),
    ));

    // Hölder control of l
    let holder: Vec<f64> = (0..n).map(|i| ratio[i] / plan.mu.value(plan.r[i].min(1.0))).collect();
    let hsup = holder.iter().cloned().fold(0.0, f64::max);
    let start = n.saturating_sub(TREND_WINDOW + 1);
    let max_inc = holder[start..]
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let w46 = if !hsup.is_finite() {
        Some(1)
    } else {
        holder[start..].windows(2).position(|w| w[1] > w[0]).map(|i| start + i + 2)
    };
    out.push(entry(
        "holder_bound",
        w46,
        -max_inc,
        format!("sup p_n/(r_n z_n μ(r_n)) = {hsup:.6e}; largest increment over the last {TREND_WINDOW} terms {max_inc:.3e}"),
    ));

    // decay of the lower-order coefficients and their derivatives
    let last = n - 1;
    let dom44 = plan.q[last] / (2.0 * plan.p[last]);
    out.push(decay_condition("gauge_decay", plan, |k| -plan.q[k - 1] + 2.0 * plan.p[k - 1], dom44));
    let (top_a, top_b, top_g) = (5.0, 5.0, 5.0);
    let logs = top_a * plan.z[last + 1].ln() + top_b * plan.p[last].ln() - top_g * plan.r[last].ln();
    let dom47 = plan.p[last] / logs;
    out.push(decay_condition("smoothness_decay", plan, |k| -plan.p[k - 1], dom47));

    let order = ["a_sequence", "z_sequence", "p_sequence", "gauge_decay", "parabolicity", "holder_bound", "smoothness_decay"];
    out.sort_by_key(|c| order.iter().position(|o| *o == c.id));
    let passed = out.iter().all(|c| c.passed);
    ConditionReport {
        k0: plan.k0,
        n_max: n,
        sup_j1,
        conditions: out,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::cutoffs::build_cutoffs;
    use crate::counterexample::plan::{build_sequences, K0Choice};
    use crate::modulus::ModulusSpec;

    #[test]
    fn auto_plan_passes_everything() {
        let cut = build_cutoffs(1);
        let mu = ModulusSpec::power(0.5).unwrap();
        let plan = build_sequences(&mu, K0Choice::Auto, 50, 1, &cut).unwrap();
        let rep = check_conditions(&plan, &cut);
        assert!(rep.passed, "{rep:#?}");
        assert_eq!(rep.conditions.len(), 7);
    }

    #[test]
    fn small_k0_fails_parabolicity_at_one() {
        let cut = build_cutoffs(1);
        let mu = ModulusSpec::power(0.5).unwrap();
        let plan = build_sequences(&mu, K0Choice::Fixed(1), 50, 1, &cut).unwrap();
        let rep = check_conditions(&plan, &cut);
        let c = rep.get("parabolicity").unwrap();
        assert!(!c.passed);
        assert_eq!(c.witness, Some(1));
    }

    #[test]
    fn unit_triple_drops_fast() {
        let cut = build_cutoffs(1);
        let mu = ModulusSpec::power(0.5).unwrap();
        for k0 in [K0Choice::Fixed(10), K0Choice::Auto] {
            let plan = build_sequences(&mu, k0, 10, 1, &cut).unwrap();
            let l = log_profile(&plan, |k| -plan.q[k - 1] + 2.0 * plan.p[k - 1], (1.0, 1.0, 1.0));
            assert!(l[1] < l[0]);
            if k0 == K0Choice::Auto {
                assert!(l[1] < -1e3, "{}", l[1]);
            }
        }
    }
}
