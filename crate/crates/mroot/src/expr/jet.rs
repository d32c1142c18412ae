//! Second-order forward-mode AD: values carried together with first and
//! second derivatives through elementary operations.

use std::ops::{Add, Mul, Neg, Sub};

/// Truncated second-order Taylor data of a scalar function at a point:
/// `(f, f', f'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    /// A constant: zero first and second derivatives.
    pub fn constant(c: f64) -> Self {
        Jet2 {
            value: c,
            d1: 0.0,
            d2: 0.0,
        }
    }

    /// The variable itself: derivative one, curvature zero.
    pub fn variable(x: f64) -> Self {
        Jet2 {
            value: x,
            d1: 1.0,
            d2: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Chain rule for a unary elementary `u(g)`: takes `u(g)`, `u'(g)`,
    /// `u''(g)` evaluated at `g = self.value`.
    fn chain(self, u: f64, du: f64, ddu: f64) -> Jet2 {
        Jet2 {
            value: u,
            d1: du * self.d1,
            d2: ddu * self.d1 * self.d1 + du * self.d2,
        }
    }

    pub fn exp(self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Natural logarithm. Caller must ensure `value > 0`.
    pub fn ln(self) -> Jet2 {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    /// Caller must ensure `value > 0`.
    pub fn sqrt(self) -> Jet2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn sin(self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    /// Integer power; valid for negative bases. Caller must ensure
    /// `value != 0` when `n < 0`.
    pub fn powi(self, n: i64) -> Jet2 {
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let v = self.value;
                let nf = n as f64;
                let d1 = nf * pow_int(v, n - 1) * self.d1;
                // n(n-1) v^(n-2); the coefficient is nonzero here since |n| >= 2
                let d2 = nf * (nf - 1.0) * pow_int(v, n - 2) * self.d1 * self.d1
                    + nf * pow_int(v, n - 1) * self.d2;
                Jet2 {
                    value: pow_int(v, n),
                    d1,
                    d2,
                }
            }
        }
    }

    /// Real constant power. Caller must ensure `value > 0`.
    pub fn powf_const(self, c: f64) -> Jet2 {
        let v = self.value;
        let vc = v.powf(c);
        let vcm1 = v.powf(c - 1.0);
        let vcm2 = v.powf(c - 2.0);
        Jet2 {
            value: vc,
            d1: c * vcm1 * self.d1,
            d2: c * (c - 1.0) * vcm2 * self.d1 * self.d1 + c * vcm1 * self.d2,
        }
    }

    /// Quotient rule. Caller must ensure `rhs.value != 0`.
    pub fn quotient(self, rhs: Jet2) -> Jet2 {
        let q = self.value / rhs.value;
        let q1 = (self.d1 - q * rhs.d1) / rhs.value;
        let q2 = (self.d2 - 2.0 * q1 * rhs.d1 - q * rhs.d2) / rhs.value;
        Jet2 {
            value: q,
            d1: q1,
            d2: q2,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            d1: self.d1 - rhs.d1,
            d2: self.d2 - rhs.d2,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value * rhs.value,
            d1: self.d1 * rhs.value + self.value * rhs.d1,
            d2: self.d2 * rhs.value + 2.0 * self.d1 * rhs.d1 + self.value * rhs.d2,
        }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2 {
            value: -self.value,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

/// Integer power of a float by binary exponentiation. `pow_int(0.0, 0) == 1`.
/// Negative exponents go through the reciprocal; the caller guards base 0.
pub fn pow_int(base: f64, n: i64) -> f64 {
    if n < 0 {
        return 1.0 / pow_int(base, -n);
    }
    let mut acc = 1.0;
    let mut b = base;
    let mut e = n as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}
