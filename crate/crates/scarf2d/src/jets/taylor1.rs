//! Univariate truncated Taylor expansions. These carry the one-dimensional
//! eigenfunction data; the bivariate [`super::Jet`] embeds them along either
//! axis.

use crate::error::{Error, Result};
use crate::jets::series;

/// Truncated Taylor expansion of a univariate function at `point`:
/// `coeffs[t] = f^(t)(point) / t!`, `t <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor1 {
    point: f64,
    coeffs: Vec<f64>,
}

impl Taylor1 {
    pub fn constant(point: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Taylor1 { point, coeffs }
    }

    /// The coordinate function x at `point`.
    pub fn variable(point: f64, order: usize) -> Self {
        let mut t = Self::constant(point, point, order);
        if order >= 1 {
            t.coeffs[1] = 1.0;
        }
        t
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn point(&self) -> f64 {
        self.point
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, t: usize) -> f64 {
        self.coeffs[t]
    }

    /// t-th derivative value (coefficient times t!).
    pub fn extract(&self, t: usize) -> Result<f64> {
        if t > self.order() {
            return Err(Error::OrderExceeded { i: t, j: 0, order: self.order() });
        }
        let fact: f64 = (1..=t).map(|j| j as f64).product();
        Ok(self.coeffs[t] * fact)
    }

    fn assert_compatible(&self, other: &Taylor1) {
        assert_eq!(self.order(), other.order(), "taylor order mismatch");
        assert_eq!(self.point, other.point, "taylor expansion point mismatch");
    }

    pub fn add(&self, other: &Taylor1) -> Taylor1 {
        self.assert_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Taylor1 { point: self.point, coeffs }
    }

    pub fn sub(&self, other: &Taylor1) -> Taylor1 {
        self.assert_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Taylor1 { point: self.point, coeffs }
    }

    pub fn scale(&self, s: f64) -> Taylor1 {
        Taylor1 { point: self.point, coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, other: &Taylor1) -> Taylor1 {
        self.assert_compatible(other);
        let k = self.order();
        let mut coeffs = vec![0.0; k + 1];
        for i in 0..=k {
            for j in 0..=k - i {
                coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        Taylor1 { point: self.point, coeffs }
    }

    pub fn div(&self, other: &Taylor1) -> Result<Taylor1> {
        self.assert_compatible(other);
        if other.coeffs[0] == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let k = self.order();
        let mut coeffs = vec![0.0; k + 1];
        for t in 0..=k {
            let mut acc = self.coeffs[t];
            for j in 0..t {
                acc -= coeffs[j] * other.coeffs[t - j];
            }
            coeffs[t] = acc / other.coeffs[0];
        }
        Ok(Taylor1 { point: self.point, coeffs })
    }

    /// Horner composition of a coefficient table with `self - value`.
    fn compose(&self, table: &[f64]) -> Taylor1 {
        let k = self.order();
        let mut dev = self.clone();
        dev.coeffs[0] = 0.0;
        let mut acc = Taylor1::constant(self.point, table[k], k);
        for t in (0..k).rev() {
            acc = acc.mul(&dev);
            acc.coeffs[0] += table[t];
        }
        acc
    }

    pub fn sinh(&self) -> Taylor1 {
        self.compose(&series::sinh_table(self.value(), self.order()))
    }

    pub fn cosh(&self) -> Taylor1 {
        self.compose(&series::cosh_table(self.value(), self.order()))
    }

    pub fn tanh(&self) -> Taylor1 {
        self.compose(&series::tanh_table(self.value(), self.order()))
    }

    pub fn coth(&self) -> Result<Taylor1> {
        Ok(self.compose(&series::coth_table(self.value(), self.order())?))
    }

    pub fn exp(&self) -> Taylor1 {
        self.compose(&series::exp_table(self.value(), self.order()))
    }

    pub fn ln(&self) -> Result<Taylor1> {
        Ok(self.compose(&series::ln_table(self.value(), self.order())?))
    }

    pub fn atan(&self) -> Taylor1 {
        self.compose(&series::atan_table(self.value(), self.order()))
    }

    pub fn powf(&self, a: f64) -> Result<Taylor1> {
        Ok(self.compose(&series::powf_table(self.value(), a, self.order())?))
    }

    pub fn recip(&self) -> Result<Taylor1> {
        Ok(self.compose(&series::recip_table(self.value(), self.order())?))
    }

    /// Evaluate a real polynomial (ascending coefficients) at this expansion.
    pub fn polyval(&self, poly: &[f64]) -> Taylor1 {
        let k = self.order();
        let mut acc = Taylor1::constant(self.point, *poly.last().unwrap_or(&0.0), k);
        for t in (0..poly.len().saturating_sub(1)).rev() {
            acc = acc.mul(self);
            acc.coeffs[0] += poly[t];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinh_series_at_origin() {
        let x = Taylor1::variable(0.0, 5);
        let s = x.sinh();
        let expect = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 1.0 / 120.0];
        for (t, e) in expect.iter().enumerate() {
            assert_relative_eq!(s.coeff(t), *e, max_relative = 1e-14, epsilon = 1e-15);
        }
    }

    #[test]
    fn division_round_trips() {
        let x = Taylor1::variable(0.7, 4);
        let f = x.sinh().mul(&x.exp());
        let g = x.cosh();
        let h = f.div(&g).unwrap().mul(&g);
        for t in 0..=4 {
            assert_relative_eq!(h.coeff(t), f.coeff(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn atan_of_sinh_derivative_is_sech() {
        // d/dx atan(sinh x) = 1/cosh x
        let x = Taylor1::variable(0.9, 3);
        let f = x.sinh().atan();
        assert_relative_eq!(f.extract(1).unwrap(), 1.0 / 0.9_f64.cosh(), max_relative = 1e-13);
    }

    #[test]
    fn polyval_matches_horner() {
        let x = Taylor1::variable(1.1, 2);
        let p = [2.0, -3.0, 0.5];
        let v = x.polyval(&p);
        let direct = 2.0 - 3.0 * 1.1 + 0.5 * 1.1 * 1.1;
        assert_relative_eq!(v.value(), direct, max_relative = 1e-14);
        assert_relative_eq!(v.extract(1).unwrap(), -3.0 + 1.1, max_relative = 1e-14);
    }
}
