use serde::Serialize;

use crate::jet::{Jet, JET_CAPACITY};

/// Points of the sup-norm grid on `[0, 1]`; every cutoff is constant outside.
const SUP_GRID: usize = 60_001;

/// `Σ(s) = e(s) / (e(s) + e(1-s))`, `e(s) = exp(-1/s)`, as
/// `1 / (1 + exp(1/s - 1/(1-s)))` with exact plateaus outside `(0, 1)`.
fn smooth_step(s: Jet) -> Jet {
    let order = s.order();
    let x = s.value();
    if x <= 0.0 {
        return Jet::constant(0.0, order);
    }
    if x >= 1.0 {
        return Jet::constant(1.0, order);
    }
    let one_minus = (-s).offset(1.0);
    let h = s.recip() - one_minus.recip();
    if h.value() > 700.0 {
        return Jet::constant(0.0, order);
    }
    if h.value() < -700.0 {
        return Jet::constant(1.0, order);
    }
    h.exp().offset(1.0).recip()
}

/// `Σ((s-a)/(b-a))`: 0 below `a`, 1 above `b`.
fn step(s: Jet, a: f64, b: f64) -> Jet {
    smooth_step(s.offset(-a).scale(1.0 / (b - a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cutoff {
    A,
    B,
    C,
    J,
}

impl Cutoff {
    pub const ALL: [Cutoff; 4] = [Cutoff::A, Cutoff::B, Cutoff::C, Cutoff::J];
}

/// The four band cutoffs with derivative evaluators up to `order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffSet {
    pub order: usize,
    /// `J ≡ -2`, giving a constant coefficient `l`.
    pub flat_j: bool,
    /// `sup_norms[c][k] = ‖c^{(k)}‖_∞` measured on a fine grid.
    pub sup_norms: [Vec<f64>; 4],
}

pub fn build_cutoffs(order: usize) -> CutoffSet {
    CutoffSet::new(order, false)
}

impl CutoffSet {
    pub fn new(order: usize, flat_j: bool) -> Self {
        let order = order.clamp(1, JET_CAPACITY - 1);
        let mut set = CutoffSet {
            order,
            flat_j,
            sup_norms: Default::default(),
        };
        let mut norms: [Vec<f64>; 4] = [vec![0.0; order + 1], vec![0.0; order + 1], vec![0.0; order + 1], vec![0.0; order + 1]];
        for i in 0..SUP_GRID {
            let s = i as f64 / (SUP_GRID - 1) as f64;
            for (c, row) in Cutoff::ALL.iter().zip(norms.iter_mut()) {
                let jet = set.jet(*c, s, order);
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot = slot.max(jet.derivative(k).abs());
                }
            }
        }
        set.sup_norms = norms;
        set
    }

    /// Taylor jet of a cutoff at `s` to the given order.
    pub fn jet(&self, c: Cutoff, s: f64, order: usize) -> Jet {
        let x = Jet::variable(s, order);
        match c {
            Cutoff::A => (-step(x, 0.2, 0.25)).offset(1.0),
            Cutoff::B => step(x, 0.0, 1.0 / 6.0) * (-step(x, 0.5, 1.0)).offset(1.0),
            Cutoff::C => step(x, 0.25, 1.0 / 3.0),
            Cutoff::J if self.flat_j => Jet::constant(-2.0, order),
            Cutoff::J => (step(x, 1.0 / 6.0, 0.2) * (-step(x, 1.0 / 3.0, 0.5)).offset(1.0))
                .scale(4.0)
                .offset(-2.0),
        }
    }

    pub fn value(&self, c: Cutoff, s: f64) -> f64 {
        self.jet(c, s, 0).value()
    }

    /// `c^{(k)}(s)`.
    pub fn derivative(&self, c: Cutoff, s: f64, k: usize) -> f64 {
        self.jet(c, s, k).derivative(k)
    }

    /// `(c(s), c'(s))` for all four cutoffs.
    pub fn first_order(&self, s: f64) -> [(f64, f64); 4] {
        Cutoff::ALL.map(|c| {
            let j = self.jet(c, s, 1);
            (j.value(), j.derivative(1))
        })
    }

    /// `‖J'‖_∞`.
    pub fn sup_j1(&self) -> f64 {
        self.sup_norms[3][1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_are_exact() {
        let set = build_cutoffs(3);
        for s in [-1.0, 0.0, 0.1, 0.2] {
            assert_eq!(set.value(Cutoff::A, s), 1.0);
        }
        for s in [0.25, 0.5, 1.0, 2.0] {
            assert_eq!(set.value(Cutoff::A, s), 0.0);
        }
        for s in [-0.5, 0.0, 1.0, 1.5] {
            assert_eq!(set.value(Cutoff::B, s), 0.0);
        }
        for s in [1.0 / 6.0, 0.3, 0.5] {
            assert_eq!(set.value(Cutoff::B, s), 1.0);
        }
        for s in [0.0, 0.25] {
            assert_eq!(set.value(Cutoff::C, s), 0.0);
        }
        for s in [1.0 / 3.0, 0.9, 1.0] {
            assert_eq!(set.value(Cutoff::C, s), 1.0);
        }
        for s in [0.0, 1.0 / 6.0, 0.5, 1.0] {
            assert_eq!(set.value(Cutoff::J, s), -2.0);
        }
        for s in [0.2, 0.25, 1.0 / 3.0] {
            assert_eq!(set.value(Cutoff::J, s), 2.0);
        }
        assert_eq!(set.derivative(Cutoff::J, 0.0, 1), 0.0);
        assert_eq!(set.derivative(Cutoff::J, 1.0, 1), 0.0);
    }

    #[test]
    fn bounds_and_sup_norms() {
        let set = build_cutoffs(2);
        for i in 0..=1000 {
            let s = -0.1 + 1.2 * i as f64 / 1000.0;
            for c in [Cutoff::A, Cutoff::B, Cutoff::C] {
                let v = set.value(c, s);
                assert!((0.0..=1.0).contains(&v));
            }
            let j = set.value(Cutoff::J, s);
            assert!((-2.0..=2.0).contains(&j));
        }
        // Σ'(1/2) = 2, stretched by 30 and scaled by 4
        assert!(set.sup_j1() >= 120.0);
        assert!((set.sup_j1() - 240.0).abs() < 1e-6, "{}", set.sup_j1());
    }

    #[test]
    fn jets_match_finite_differences() {
        let set = build_cutoffs(2);
        let h = 1e-7;
        for c in Cutoff::ALL {
            for s in [0.03, 0.17, 0.22, 0.3, 0.4, 0.7] {
                let fd = (set.value(c, s + h) - set.value(c, s - h)) / (2.0 * h);
                let d = set.derivative(c, s, 1);
                assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{c:?} {s}: {fd} vs {d}");
                let fd2 = (set.derivative(c, s + h, 1) - set.derivative(c, s - h, 1)) / (2.0 * h);
                let d2 = set.derivative(c, s, 2);
                assert!((fd2 - d2).abs() <= 1e-5 * d2.abs().max(1.0), "{c:?} {s}: {fd2} vs {d2}");
            }
        }
    }

    #[test]
    fn flat_variant() {
        let set = CutoffSet::new(1, true);
        assert_eq!(set.sup_j1(), 0.0);
        assert_eq!(set.value(Cutoff::J, 0.25), -2.0);
    }
}
