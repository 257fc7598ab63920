//! Bivariate truncated Taylor (jet) arithmetic.
//!
//! A [`Jet`] of order K at a point carries the scaled mixed partials
//! `coeffs(i,j) = d1^i d2^j f / (i! j!)` for all `i + j <= K`. Sums,
//! products, quotients and compositions with the elementary functions stay
//! inside the order-K truncation, so every derivative a differential
//! operator needs is exact up to round-off. Orders are runtime values:
//! chains of intertwining operators decide the depth per call.

mod series;
mod taylor1;

pub use taylor1::Taylor1;

use crate::error::{Error, Result};

/// Which coordinate a seed jet represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// Elementary function tags accepted by [`lift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Exp,
    Ln,
    Atan,
    Recip,
    PowI(i32),
    PowF(f64),
    /// |f|^a, sign resolved from the value at the expansion point.
    SignedPowF(f64),
}

/// Dense triangular bivariate jet. Row `i` stores `j = 0..=order-i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    point: (f64, f64),
    coeffs: Vec<f64>,
}

fn triangle_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

impl Jet {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + j <= self.order);
        i * (self.order + 1) - i * (i.saturating_sub(1)) / 2 + j
    }

    pub fn constant(point: (f64, f64), value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; triangle_len(order)];
        coeffs[0] = value;
        Jet { order, point, coeffs }
    }

    /// Jet of the coordinate function x1 or x2.
    pub fn variable(point: (f64, f64), axis: Axis, order: usize) -> Self {
        let value = match axis {
            Axis::X1 => point.0,
            Axis::X2 => point.1,
        };
        let mut jet = Jet::constant(point, value, order);
        if order >= 1 {
            match axis {
                Axis::X1 => {
                    let k = jet.idx(1, 0);
                    jet.coeffs[k] = 1.0;
                }
                Axis::X2 => {
                    let k = jet.idx(0, 1);
                    jet.coeffs[k] = 1.0;
                }
            }
        }
        jet
    }

    /// Embed a univariate expansion along the given axis: the function
    /// depends on one coordinate only, so cross derivatives are zero.
    pub fn from_taylor1(t: &Taylor1, axis: Axis, point: (f64, f64), order: usize) -> Self {
        debug_assert!(t.order() >= order);
        let mut jet = Jet::constant(point, 0.0, order);
        for d in 0..=order {
            let k = match axis {
                Axis::X1 => jet.idx(d, 0),
                Axis::X2 => jet.idx(0, d),
            };
            jet.coeffs[k] = t.coeff(d);
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> (f64, f64) {
        self.point
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[self.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// The mixed partial d1^i d2^j f at the point (coefficient times i! j!).
    pub fn extract(&self, i: usize, j: usize) -> Result<f64> {
        if i + j > self.order {
            return Err(Error::OrderExceeded { i, j, order: self.order });
        }
        let fi: f64 = (1..=i).map(|t| t as f64).product();
        let fj: f64 = (1..=j).map(|t| t as f64).product();
        Ok(self.coeff(i, j) * fi * fj)
    }

    /// Jet of d1^i d2^j f of order `order - i - j`.
    pub fn derivative(&self, i: usize, j: usize) -> Result<Jet> {
        if i + j > self.order {
            return Err(Error::OrderExceeded { i, j, order: self.order });
        }
        let k2 = self.order - i - j;
        let mut out = Jet::constant(self.point, 0.0, k2);
        for p in 0..=k2 {
            for q in 0..=k2 - p {
                // (p+i)!/p! * (q+j)!/q!
                let mut f = 1.0;
                for t in 1..=i {
                    f *= (p + t) as f64;
                }
                for t in 1..=j {
                    f *= (q + t) as f64;
                }
                let k = out.idx(p, q);
                out.coeffs[k] = self.coeff(p + i, q + j) * f;
            }
        }
        Ok(out)
    }

    /// Discard coefficients above order `k`. Lower coefficients are copied
    /// bit for bit.
    pub fn truncate(&self, k: usize) -> Jet {
        assert!(k <= self.order, "cannot truncate order {} jet to {}", self.order, k);
        let mut out = Jet::constant(self.point, 0.0, k);
        for i in 0..=k {
            for j in 0..=k - i {
                let t = out.idx(i, j);
                out.coeffs[t] = self.coeff(i, j);
            }
        }
        out
    }

    fn assert_compatible(&self, other: &Jet) {
        assert_eq!(self.order, other.order, "jet order mismatch");
        assert_eq!(self.point, other.point, "jet expansion point mismatch");
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Jet { order: self.order, point: self.point, coeffs }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Jet { order: self.order, point: self.point, coeffs }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            order: self.order,
            point: self.point,
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn shift_value(&self, dv: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += dv;
        out
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Jet {
        self.assert_compatible(other);
        let k = self.order;
        let mut out = Jet::constant(self.point, 0.0, k);
        for i1 in 0..=k {
            for j1 in 0..=k - i1 {
                let a = self.coeff(i1, j1);
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=k - i1 - j1 {
                    for j2 in 0..=k - i1 - j1 - i2 {
                        let t = out.idx(i1 + i2, j1 + j2);
                        out.coeffs[t] += a * other.coeff(i2, j2);
                    }
                }
            }
        }
        out
    }

    /// Truncated quotient, solved degree by degree.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.assert_compatible(other);
        if other.value() == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let k = self.order;
        let mut out = Jet::constant(self.point, 0.0, k);
        for d in 0..=k {
            for i in 0..=d {
                let j = d - i;
                let mut acc = self.coeff(i, j);
                for p in 0..=i {
                    for q in 0..=j {
                        if p == i && q == j {
                            continue;
                        }
                        acc -= out.coeff(p, q) * other.coeff(i - p, j - q);
                    }
                }
                let t = out.idx(i, j);
                out.coeffs[t] = acc / other.value();
            }
        }
        Ok(out)
    }

    /// Horner composition of a univariate coefficient table with
    /// `self - value`.
    fn compose(&self, table: &[f64]) -> Jet {
        let k = self.order;
        let mut dev = self.clone();
        dev.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.point, table[k], k);
        for t in (0..k).rev() {
            acc = acc.mul(&dev);
            acc.coeffs[0] += table[t];
        }
        acc
    }

    pub fn sinh(&self) -> Jet {
        self.compose(&series::sinh_table(self.value(), self.order))
    }

    pub fn cosh(&self) -> Jet {
        self.compose(&series::cosh_table(self.value(), self.order))
    }

    pub fn tanh(&self) -> Jet {
        self.compose(&series::tanh_table(self.value(), self.order))
    }

    pub fn coth(&self) -> Result<Jet> {
        Ok(self.compose(&series::coth_table(self.value(), self.order)?))
    }

    pub fn exp(&self) -> Jet {
        self.compose(&series::exp_table(self.value(), self.order))
    }

    pub fn ln(&self) -> Result<Jet> {
        Ok(self.compose(&series::ln_table(self.value(), self.order)?))
    }

    pub fn atan(&self) -> Jet {
        self.compose(&series::atan_table(self.value(), self.order))
    }

    pub fn powf(&self, a: f64) -> Result<Jet> {
        Ok(self.compose(&series::powf_table(self.value(), a, self.order)?))
    }

    pub fn recip(&self) -> Result<Jet> {
        Ok(self.compose(&series::recip_table(self.value(), self.order)?))
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut acc = Jet::constant(self.point, 1.0, self.order);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// |f|^a resolved by the sign of the value at the expansion point.
    /// Evaluation on the zero set is a pole of the signed power.
    pub fn signed_powf(&self, a: f64) -> Result<Jet> {
        let v = self.value();
        if v == 0.0 {
            return Err(Error::Pole("signed power on the zero set of its base".into()));
        }
        if v > 0.0 {
            self.powf(a)
        } else {
            self.neg().powf(a)
        }
    }
}

/// Arithmetic entry point keyed by operation name.
pub fn arith(op: ArithOp, lhs: &Jet, rhs: &Jet) -> Result<Jet> {
    match op {
        ArithOp::Add => Ok(lhs.add(rhs)),
        ArithOp::Sub => Ok(lhs.sub(rhs)),
        ArithOp::Mul => Ok(lhs.mul(rhs)),
        ArithOp::Div => lhs.div(rhs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Seed jet of a coordinate function (operation-style entry point).
pub fn seed_variable(point: (f64, f64), axis: Axis, order: usize) -> Jet {
    Jet::variable(point, axis, order)
}

/// Compose an elementary function with an inner jet.
pub fn lift(f: Elementary, arg: &Jet) -> Result<Jet> {
    match f {
        Elementary::Sinh => Ok(arg.sinh()),
        Elementary::Cosh => Ok(arg.cosh()),
        Elementary::Tanh => Ok(arg.tanh()),
        Elementary::Coth => arg.coth(),
        Elementary::Exp => Ok(arg.exp()),
        Elementary::Ln => arg.ln(),
        Elementary::Atan => Ok(arg.atan()),
        Elementary::Recip => arg.recip(),
        Elementary::PowI(n) => arg.powi(n),
        Elementary::PowF(a) => arg.powf(a),
        Elementary::SignedPowF(a) => arg.signed_powf(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn seed_examples() {
        let j = seed_variable((0.0, 0.0), Axis::X1, 2);
        assert_eq!(j.coeff(0, 0), 0.0);
        assert_eq!(j.coeff(1, 0), 1.0);
        assert_eq!(j.coeff(0, 1), 0.0);
        assert_eq!(j.coeff(2, 0), 0.0);
        assert_eq!(j.coeff(1, 1), 0.0);

        let j = seed_variable((3.0, -1.0), Axis::X2, 1);
        assert_eq!(j.value(), -1.0);
        assert_eq!(j.coeff(0, 1), 1.0);
        assert_eq!(j.coeff(1, 0), 0.0);

        let j = seed_variable((2.5, 4.0), Axis::X1, 0);
        assert_eq!(j.order(), 0);
        assert_eq!(j.value(), 2.5);
    }

    #[test]
    fn lift_sinh_along_x1() {
        let x = seed_variable((0.0, 0.7), Axis::X1, 3);
        let s = x.sinh();
        assert_relative_eq!(s.coeff(0, 0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(1, 0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.coeff(2, 0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.coeff(3, 0), 1.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn signed_power_matches_negated_base() {
        let pt = (0.4, -1.2);
        let x1 = seed_variable(pt, Axis::X1, 3);
        let x2 = seed_variable(pt, Axis::X2, 3);
        let f = x1.mul(&x2); // value -0.48 < 0
        let a = 0.7;
        let lhs = f.signed_powf(a).unwrap();
        let rhs = f.neg().powf(a).unwrap();
        assert_eq!(lhs, rhs);
        assert!(Jet::constant(pt, 0.0, 2).signed_powf(0.5).is_err());
    }

    #[test]
    fn tanh_derivative_identity() {
        // d/dx tanh = 1 - tanh^2, checked coefficient-wise
        let pt = (0.83, -0.31);
        let x = seed_variable(pt, Axis::X1, 4);
        let t = x.tanh();
        let dt = t.derivative(1, 0).unwrap();
        let one = Jet::constant(pt, 1.0, 3);
        let t3 = t.truncate(3);
        let rhs = one.sub(&t3.mul(&t3));
        for i in 0..=3 {
            for j in 0..=3 - i {
                assert_relative_eq!(dt.coeff(i, j), rhs.coeff(i, j), max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn mul_by_one_is_identity() {
        let pt = (1.3, 0.2);
        let j = seed_variable(pt, Axis::X1, 3).sinh().mul(&seed_variable(pt, Axis::X2, 3).cosh());
        let one = Jet::constant(pt, 1.0, 3);
        assert_eq!(j.mul(&one), j);
    }

    #[test]
    fn leibniz_in_first_slots() {
        let pt = (0.9, -0.5);
        let f = seed_variable(pt, Axis::X1, 2).sinh();
        let g = seed_variable(pt, Axis::X2, 2).exp();
        let fg = f.mul(&g);
        let d1 = fg.extract(1, 0).unwrap();
        let expect = f.extract(1, 0).unwrap() * g.value() + f.value() * g.extract(1, 0).unwrap();
        assert_relative_eq!(d1, expect, max_relative = 1e-13);
    }

    #[test]
    fn div_mul_round_trip() {
        let pt = (0.6, 1.1);
        let f = seed_variable(pt, Axis::X1, 4).sinh().add(&seed_variable(pt, Axis::X2, 4));
        let g = seed_variable(pt, Axis::X2, 4).cosh();
        let h = f.mul(&g).div(&g).unwrap();
        for i in 0..=4 {
            for j in 0..=4 - i {
                assert_relative_eq!(h.coeff(i, j), f.coeff(i, j), max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn extract_examples() {
        let j = seed_variable((0.2, 0.4), Axis::X1, 2);
        assert_eq!(j.extract(1, 0).unwrap(), 1.0);
        assert_eq!(j.extract(0, 0).unwrap(), 0.2);
        let s = seed_variable((0.0, 0.0), Axis::X1, 3).sinh();
        assert_relative_eq!(s.extract(3, 0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(matches!(s.extract(2, 2), Err(Error::OrderExceeded { .. })));
    }

    #[test]
    fn division_by_zero_value() {
        let pt = (0.0, 0.5);
        let num = Jet::constant(pt, 1.0, 2);
        let den = seed_variable(pt, Axis::X1, 2); // value 0
        assert!(matches!(num.div(&den), Err(Error::DivisionByZero)));
    }

    #[test]
    fn truncation_coherence_bit_exact() {
        let pt = (0.37, -0.81);
        for k in 0..=4usize {
            let lo = expr_at(pt, k);
            let hi = expr_at(pt, k + 1);
            for i in 0..=k {
                for j in 0..=k - i {
                    // bit-identical comparison
                    assert_eq!(lo.coeff(i, j).to_bits(), hi.coeff(i, j).to_bits(), "({i},{j}) at order {k}");
                }
            }
        }
    }

    fn expr_at(pt: (f64, f64), k: usize) -> Jet {
        let x1 = seed_variable(pt, Axis::X1, k);
        let x2 = seed_variable(pt, Axis::X2, k);
        let s = x1.sinh().mul(&x2.cosh());
        s.add(&x1.mul(&x2)).exp().div(&x2.cosh()).unwrap()
    }

    #[test]
    fn chain_rule_first_slot_all_lifts() {
        let pt = (0.52, -0.13);
        let g = seed_variable(pt, Axis::X1, 2)
            .sinh()
            .add(&seed_variable(pt, Axis::X2, 2))
            .add(&Jet::constant(pt, 1.7, 2));
        let g0 = g.value();
        let g1 = g.extract(1, 0).unwrap();
        let cases: Vec<(Elementary, f64)> = vec![
            (Elementary::Sinh, g0.cosh()),
            (Elementary::Cosh, g0.sinh()),
            (Elementary::Tanh, 1.0 - g0.tanh().powi(2)),
            (Elementary::Coth, 1.0 - (g0.cosh() / g0.sinh()).powi(2)),
            (Elementary::Exp, g0.exp()),
            (Elementary::Ln, 1.0 / g0),
            (Elementary::Atan, 1.0 / (1.0 + g0 * g0)),
            (Elementary::Recip, -1.0 / (g0 * g0)),
            (Elementary::PowI(3), 3.0 * g0 * g0),
            (Elementary::PowF(0.7), 0.7 * g0.powf(-0.3)),
            (Elementary::SignedPowF(0.7), 0.7 * g0.powf(-0.3)),
        ];
        for (tag, fprime) in cases {
            let lifted = lift(tag, &g).unwrap();
            assert_relative_eq!(
                lifted.extract(1, 0).unwrap(),
                fprime * g1,
                max_relative = 1e-11,
                epsilon = 1e-13
            );
        }
    }

    proptest! {
        #[test]
        fn prop_truncation_coherence(x in -1.2f64..1.2, y in -1.2f64..1.2, k in 0usize..5) {
            let lo = expr_at((x, y), k);
            let hi = expr_at((x, y), k + 1);
            for i in 0..=k {
                for j in 0..=k - i {
                    prop_assert_eq!(lo.coeff(i, j).to_bits(), hi.coeff(i, j).to_bits());
                }
            }
        }

        #[test]
        fn prop_product_rule(x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let pt = (x, y);
            let f = seed_variable(pt, Axis::X1, 2).sinh().add(&seed_variable(pt, Axis::X2, 2).cosh());
            let g = seed_variable(pt, Axis::X2, 2).atan().add(&Jet::constant(pt, 2.0, 2));
            let fg = f.mul(&g);
            let lhs = fg.extract(0, 1).unwrap();
            let rhs = f.extract(0, 1).unwrap() * g.value() + f.value() * g.extract(0, 1).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
}
