//! Truncated Taylor series ("jets") used to differentiate curve formulas
//! exactly to a fixed order.
//!
//! A jet stores `f(a + s) = c[0] + c[1] s + ... + c[K] s^K`, so the k-th
//! derivative at `a` is `k! * c[k]`.

use std::ops::{Add, Mul, Neg, Sub};

/// Highest Taylor order carried by a [`Jet`].
pub const JET_ORDER: usize = 10;
const LEN: usize = JET_ORDER + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable `a + slope * s`.
    pub fn variable(a: f64, slope: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = a;
        c[1] = slope;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn coeffs(&self) -> &[f64; LEN] {
        &self.c
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * factorial(k)
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.c.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn add_const(mut self, v: f64) -> Self {
        self.c[0] += v;
        self
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        let mut b = [0.0; LEN];
        b[0] = 1.0 / a0;
        for k in 1..LEN {
            let s: f64 = (1..=k).map(|i| self.c[i] * b[k - i]).sum();
            b[k] = -s / a0;
        }
        Jet { c: b }
    }

    pub fn exp(&self) -> Self {
        let mut b = [0.0; LEN];
        b[0] = self.c[0].exp();
        for k in 1..LEN {
            let s: f64 = (1..=k).map(|i| i as f64 * self.c[i] * b[k - i]).sum();
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    /// Natural log; the value must be positive.
    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        let mut b = [0.0; LEN];
        b[0] = a0.ln();
        for k in 1..LEN {
            let s: f64 = (1..k).map(|i| i as f64 * b[i] * self.c[k - i]).sum();
            b[k] = (self.c[k] - s / k as f64) / a0;
        }
        Jet { c: b }
    }

    /// Real power; the value must be positive.
    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.c[0];
        let mut b = [0.0; LEN];
        b[0] = a0.powf(r);
        for k in 1..LEN {
            let s: f64 = (1..=k)
                .map(|i| (r * i as f64 - (k - i) as f64) * self.c[i] * b[k - i])
                .sum();
            b[k] = s / (k as f64 * a0);
        }
        Jet { c: b }
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = [0.0; LEN];
        let mut c = [0.0; LEN];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..LEN {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for i in 1..=k {
                let w = i as f64 * self.c[i];
                ss += w * c[k - i];
                cc += w * s[k - i];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    /// Evaluate a polynomial with ascending coefficients at this jet.
    pub fn poly(&self, coeffs: &[f64]) -> Self {
        let mut acc = Jet::constant(0.0);
        for &a in coeffs.iter().rev() {
            acc = (acc * *self).add_const(a);
        }
        acc
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
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
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            c[k] = (0..=k).map(|i| self.c[i] * rhs.c[k - i]).sum();
        }
        Jet { c }
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
