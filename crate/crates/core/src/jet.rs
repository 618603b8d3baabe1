//! Truncated Taylor series for forward-mode derivatives of any order up to
//! [`JET_CAPACITY`] - 1.
//!
//! A jet of order `d` at `x` stores `c[k] = f^{(k)}(x) / k!` for `k ≤ d`.

use std::ops::{Add, Mul, Neg, Sub};

pub const JET_CAPACITY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; JET_CAPACITY],
    order: usize,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order < JET_CAPACITY, "jet order {order} exceeds capacity");
        let mut c = [0.0; JET_CAPACITY];
        c[0] = value;
        Jet { c, order }
    }

    /// The identity function at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut j = Jet::constant(x, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient `f^{(k)}(x) / k!`.
    pub fn coefficient(&self, k: usize) -> f64 {
        if k <= self.order {
            self.c[k]
        } else {
            0.0
        }
    }

    /// `f^{(k)}(x)`.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coefficient(k) * fact
    }

    pub fn is_zero(&self) -> bool {
        self.c[..=self.order].iter().all(|&v| v == 0.0)
    }

    pub fn scale(mut self, a: f64) -> Self {
        for v in &mut self.c[..=self.order] {
            *v *= a;
        }
        self
    }

    pub fn offset(mut self, a: f64) -> Self {
        self.c[0] += a;
        self
    }

    pub fn exp(&self) -> Self {
        let mut out = Jet::constant(self.c[0].exp(), self.order);
        for k in 1..=self.order {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * out.c[k - j]).sum();
            out.c[k] = s / k as f64;
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut out = Jet::constant(1.0 / a0, self.order);
        for k in 1..=self.order {
            let s: f64 = (1..=k).map(|j| self.c[j] * out.c[k - j]).sum();
            out.c[k] = -s / a0;
        }
        out
    }

    pub fn div(&self, other: &Jet) -> Self {
        *self * other.recip()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        debug_assert_eq!(self.order, o.order);
        for k in 0..=self.order {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        debug_assert_eq!(self.order, o.order);
        let mut out = Jet::constant(0.0, self.order);
        for k in 0..=self.order {
            out.c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_affine() {
        let x = Jet::variable(0.3, 6).scale(2.0).exp();
        for k in 0..=6 {
            let exact = 2f64.powi(k as i32) * 0.6f64.exp();
            assert!((x.derivative(k) - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn reciprocal_matches_closed_form() {
        let x = 0.7;
        let r = Jet::variable(x, 5).recip();
        let mut fact = 1.0;
        for k in 0..=5 {
            if k > 0 {
                fact *= k as f64;
            }
            let exact = (-1f64).powi(k as i32) * fact / x.powi(k as i32 + 1);
            assert!((r.derivative(k) - exact).abs() < 1e-12 * exact.abs());
        }
    }

    #[test]
    fn product_rule() {
        let x = Jet::variable(1.2, 3);
        let f = x * x.exp();
        // (x e^x)'' = (x + 2) e^x
        assert!((f.derivative(2) - 3.2 * 1.2f64.exp()).abs() < 1e-12);
        assert_eq!(f.coefficient(4), 0.0);
    }
}
