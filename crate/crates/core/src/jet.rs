//! Truncated bivariate Taylor arithmetic in `(r, z)`, used as the analytic
//! derivative channel of the profile library.
//!
//! A [`Jet`] stores the Taylor coefficients `c[i][j]` of `f(r0 + dr, z0 + dz)`
//! for `i + j <= 3`, together with the order up to which they are valid.
//! Evaluating a profile on jets seeded with [`Jet::var_r`] / [`Jet::var_z`]
//! yields exact derivatives through third order, which is what a velocity
//! built from a stream function needs for its Laplacian.

use std::ops::{Add, Div, Mul, Neg, Sub};

const MAX_ORDER: u8 = 3;
const LEN: usize = 10;

/// `(i, j)` exponent pair for each storage slot, ordered by total degree.
const POW: [(u8, u8); LEN] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn slot(i: u8, j: u8) -> usize {
    let d = (i + j) as usize;
    // slots of degree d start at d(d+1)/2 and list i descending
    d * (d + 1) / 2 + (d - i as usize)
}

const fn degree(k: usize) -> u8 {
    POW[k].0 + POW[k].1
}

/// Product table: (lhs slot, rhs slot, target slot) for every pair whose
/// degrees sum to at most three.
const PRODUCTS: [(u8, u8, u8); 35] = {
    let mut table = [(0u8, 0u8, 0u8); 35];
    let mut n = 0;
    let mut p = 0;
    while p < LEN {
        let mut q = 0;
        while q < LEN {
            if degree(p) + degree(q) <= MAX_ORDER {
                let t = slot(POW[p].0 + POW[q].0, POW[p].1 + POW[q].1);
                table[n] = (p as u8, q as u8, t as u8);
                n += 1;
            }
            q += 1;
        }
        p += 1;
    }
    table
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
    order: u8,
}

/// Value, gradient and Hessian of a scalar profile at a point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Derivs {
    pub v: f64,
    pub r: f64,
    pub z: f64,
    pub rr: f64,
    pub rz: f64,
    pub zz: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c, order: MAX_ORDER }
    }

    pub fn var_r(r: f64) -> Self {
        let mut j = Self::constant(r);
        j.c[slot(1, 0)] = 1.0;
        j
    }

    pub fn var_z(z: f64) -> Self {
        let mut j = Self::constant(z);
        j.c[slot(0, 1)] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Partial derivative `∂^{i+j} f / ∂r^i ∂z^j` at the expansion point.
    pub fn partial(&self, i: u8, j: u8) -> f64 {
        assert!(i + j <= self.order, "derivative order {} exceeds jet order {}", i + j, self.order);
        let fact = |n: u8| (1..=n as u32).product::<u32>() as f64;
        self.c[slot(i, j)] * fact(i) * fact(j)
    }

    pub fn derivs(&self) -> Derivs {
        let o = self.order;
        let get = |i: u8, j: u8| if i + j <= o { self.partial(i, j) } else { f64::NAN };
        Derivs {
            v: self.c[0],
            r: get(1, 0),
            z: get(0, 1),
            rr: get(2, 0),
            rz: get(1, 1),
            zz: get(0, 2),
        }
    }

    fn truncate(mut self) -> Self {
        for k in 0..LEN {
            if degree(k) > self.order {
                self.c[k] = 0.0;
            }
        }
        self
    }

    /// `∂/∂r`; the result is valid to one order less.
    pub fn d_dr(&self) -> Self {
        self.shift(true)
    }

    /// `∂/∂z`; the result is valid to one order less.
    pub fn d_dz(&self) -> Self {
        self.shift(false)
    }

    fn shift(&self, along_r: bool) -> Self {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let mut c = [0.0; LEN];
        for (k, &(i, j)) in POW.iter().enumerate() {
            if i + j < self.order {
                let (src, factor) = if along_r {
                    (slot(i + 1, j), (i + 1) as f64)
                } else {
                    (slot(i, j + 1), (j + 1) as f64)
                };
                c[k] = factor * self.c[src];
            }
        }
        Self { c, order: self.order - 1 }
    }

    /// `f(self)` for a univariate `f` with derivatives `d = [f, f', f'', f''']`
    /// at `self.value()`.
    pub fn compose(&self, d: [f64; 4]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = Self::constant(d[0]);
        for k in 1..LEN {
            out.c[k] = d[1] * h.c[k] + 0.5 * d[2] * h2.c[k] + d[3] / 6.0 * h3.c[k];
        }
        out.order = self.order;
        out.truncate()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut c = self.c;
        for k in 0..LEN {
            c[k] += rhs.c[k];
        }
        Jet { c, order: self.order.min(rhs.order) }.truncate()
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v = -*v;
        }
        Jet { c, order: self.order }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for &(p, q, t) in PRODUCTS.iter() {
            c[t as usize] += self.c[p as usize] * rhs.c[q as usize];
        }
        Jet { c, order: self.order.min(rhs.order) }.truncate()
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for v in &mut self.c {
            *v *= rhs;
        }
        self
    }
}

/// Scalar type that profiles are written against: plain `f64` for fast
/// evaluation and [`Jet`] for exact derivatives.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(&self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn recip(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn recip(self) -> Self {
        f64::recip(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

impl Real for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn re(&self) -> f64 {
        self.c[0]
    }
    fn exp(self) -> Self {
        let e = self.c[0].exp();
        self.compose([e, e, e, e])
    }
    fn ln(self) -> Self {
        let x = self.c[0];
        self.compose([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
    }
    fn sqrt(self) -> Self {
        self.powf(0.5)
    }
    fn recip(self) -> Self {
        let x = self.c[0];
        let i = 1.0 / x;
        self.compose([i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i])
    }
    fn powf(self, p: f64) -> Self {
        let x = self.c[0];
        let v = x.powf(p);
        self.compose([
            v,
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        ])
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet { c: Jet::constant(1.0).c, order: self.order },
            1 => self,
            2 => self * self,
            3 => self * self * self,
            _ => {
                let x = self.c[0];
                let p = n as f64;
                self.compose([
                    x.powi(n),
                    p * x.powi(n - 1),
                    p * (p - 1.0) * x.powi(n - 2),
                    p * (p - 1.0) * (p - 2.0) * x.powi(n - 3),
                ])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_cover_storage_once() {
        let mut seen = [false; LEN];
        for &(i, j) in POW.iter() {
            let s = slot(i, j);
            assert!(!seen[s]);
            seen[s] = true;
        }
        for (k, &(i, j)) in POW.iter().enumerate() {
            assert_eq!(slot(i, j), k);
        }
    }

    #[test]
    fn product_rule_matches_hand_derivatives() {
        // f = r^2 z at (2, 3): f_r = 2rz = 12, f_z = r^2 = 4, f_rr = 2z = 6, f_rz = 2r = 4, f_rrz = 2
        let r = Jet::var_r(2.0);
        let z = Jet::var_z(3.0);
        let f = r * r * z;
        assert_eq!(f.value(), 12.0);
        assert_eq!(f.partial(1, 0), 12.0);
        assert_eq!(f.partial(0, 1), 4.0);
        assert_eq!(f.partial(2, 0), 6.0);
        assert_eq!(f.partial(1, 1), 4.0);
        assert_eq!(f.partial(2, 1), 2.0);
        assert_eq!(f.partial(0, 2), 0.0);
    }

    #[test]
    fn exp_and_recip_third_derivatives() {
        // g = exp(-r^2) / z at (0.7, 1.3)
        let (r0, z0) = (0.7f64, 1.3f64);
        let g = (-(Jet::var_r(r0) * Jet::var_r(r0))).exp() / Jet::var_z(z0);
        let e = (-r0 * r0).exp();
        let grrr = e * (12.0 * r0 - 8.0 * r0.powi(3)) / z0;
        let grzz = e * (-2.0 * r0) * 2.0 / z0.powi(3);
        assert!((g.partial(3, 0) - grrr).abs() < 1e-13);
        assert!((g.partial(1, 2) - grzz).abs() < 1e-13);
    }

    #[test]
    fn differentiation_lowers_order() {
        let r = Jet::var_r(1.5);
        let f = r.powi(4);
        let d = f.d_dr();
        assert_eq!(d.order(), 2);
        assert!((d.value() - 4.0 * 1.5f64.powi(3)).abs() < 1e-14);
        assert!((d.partial(2, 0) - 24.0 * 1.5).abs() < 1e-13);
    }

    #[test]
    fn powf_matches_f64() {
        let x = Jet::var_r(2.5).powf(-1.5);
        assert!((x.value() - 2.5f64.powf(-1.5)).abs() < 1e-15);
        assert!((x.partial(1, 0) + 1.5 * 2.5f64.powf(-2.5)).abs() < 1e-15);
    }
}
