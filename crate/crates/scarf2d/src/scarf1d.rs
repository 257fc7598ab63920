//! One-dimensional Scarf II building blocks: the potential, Jacobi
//! polynomials with complex conjugate parameters, and the bound-state
//! eigenfunctions eta_n with eigenvalues eps_n = -(b-n)^2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Taylor1;

/// Couplings of the two-dimensional model. `b` and `c` must be positive;
/// `b` is kept off the integers so that the bound-state condition n < b
/// never sits on the marginal case eps_n = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    a: f64,
    b: f64,
    c: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParams("couplings must be finite".into()));
        }
        if b <= 0.0 || c <= 0.0 {
            return Err(Error::InvalidParams(format!("b and c must be positive (got b = {b}, c = {c})")));
        }
        if b.fract() == 0.0 {
            return Err(Error::InvalidParams(format!(
                "b = {b} is an integer; the bound-state count n < b would be marginal (use with_integer_b to override)"
            )));
        }
        Ok(ModelParams { a, b, c })
    }

    /// Override for the non-integer restriction on `b`.
    pub fn with_integer_b(a: f64, b: f64, c: f64) -> Result<Self> {
        if b <= 0.0 || c <= 0.0 {
            return Err(Error::InvalidParams(format!("b and c must be positive (got b = {b}, c = {c})")));
        }
        Ok(ModelParams { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn shift_a(&self, da: f64) -> Self {
        ModelParams { a: self.a + da, ..*self }
    }

    pub fn shift_b(&self, db: f64) -> Result<Self> {
        let b = self.b + db;
        if b <= 0.0 {
            return Err(Error::InvalidParams(format!("shifted b = {b} is not positive")));
        }
        Ok(ModelParams { b, ..*self })
    }
}

/// Scarf II potential [c(2b+1) sinh x + (c^2 - b^2 - b)] / cosh^2 x.
pub fn potential(x: f64, b: f64, c: f64) -> f64 {
    let ch = x.cosh();
    (c * (2.0 * b + 1.0) * x.sinh() + (c * c - b * b - b)) / (ch * ch)
}

/// Same potential on a univariate expansion.
pub fn potential_taylor(x: &Taylor1, b: f64, c: f64) -> Taylor1 {
    let sh = x.sinh();
    let ch = x.cosh();
    let num = sh.scale(c * (2.0 * b + 1.0));
    let num = Taylor1::constant(x.point(), c * c - b * b - b, x.order()).add(&num);
    num.div(&ch.mul(&ch)).expect("cosh never vanishes on the real line")
}

/// Jacobi polynomial P_n^{(alpha,beta)}(z) by the three-term recurrence in
/// complex arithmetic.
pub fn jacobi(n: usize, alpha: Complex64, beta: Complex64, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut prev = one;
    let mut cur = (alpha - beta + (alpha + beta + 2.0) * z) * 0.5;
    for k in 1..n {
        let kf = k as f64;
        let apb = alpha + beta;
        let lead = 2.0 * (kf + 1.0) * (apb + kf + 1.0) * (apb + 2.0 * kf);
        if lead.norm() < 1e-12 * (kf + 1.0).powi(3) {
            return Err(Error::RecurrenceBreakdown { degree: k + 1 });
        }
        let mid = (apb + 2.0 * kf + 1.0)
            * ((apb + 2.0 * kf + 2.0) * (apb + 2.0 * kf) * z + alpha * alpha - beta * beta);
        let low = 2.0 * (alpha + kf) * (beta + kf) * (apb + 2.0 * kf + 2.0);
        let next = (mid * cur - low * prev) / lead;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Bound-state eigenvalue eps_n = -(b - n)^2, valid for n < b.
pub fn eigenvalue(n: usize, b: f64) -> Result<f64> {
    if (n as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n, b });
    }
    Ok(-(b - n as f64) * (b - n as f64))
}

/// Real coefficients of the phase-fixed polynomial
/// p_n(s) = i^{-n} P_n^{(gamma, gamma*)}(i s), gamma = -(b + ic + 1/2).
/// Rotating the recurrence by i^{-n} keeps every quantity real.
fn scarf_poly(n: usize, b: f64, c: f64) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    let mut prev = vec![1.0];
    let mut cur = vec![-c, (1.0 - 2.0 * b) / 2.0];
    for t in 1..n {
        let tf = t as f64;
        let lead = 2.0 * (tf + 1.0) * (tf - 2.0 * b) * (2.0 * tf - 2.0 * b - 1.0);
        let lin = (2.0 * tf - 2.0 * b) * (2.0 * tf - 2.0 * b + 1.0) * (2.0 * tf - 2.0 * b - 1.0);
        let con = (2.0 * tf - 2.0 * b) * 2.0 * c * (2.0 * b + 1.0);
        let low = 2.0 * ((tf - b - 0.5).powi(2) + c * c) * (2.0 * tf - 2.0 * b + 1.0);
        let mut next = vec![0.0; t + 2];
        for (j, cf) in cur.iter().enumerate() {
            next[j + 1] += lin * cf;
            next[j] += con * cf;
        }
        for (j, cf) in prev.iter().enumerate() {
            next[j] += low * cf;
        }
        for v in &mut next {
            *v /= lead;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// Closed-form bound-state eigenfunction of the 1D problem, phase-fixed to
/// real values:
/// eta_n(x) = (cosh x)^{-b} exp(-c atan(sinh x)) p_n(sinh x).
#[derive(Debug, Clone)]
pub struct Eigenfunction1D {
    n: usize,
    b: f64,
    c: f64,
    gamma: Complex64,
    beta_j: Complex64,
    poly: Vec<f64>,
}

impl Eigenfunction1D {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Jacobi parameter gamma = -(b + ic + 1/2).
    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    /// Conjugate Jacobi parameter (named apart from the shift coefficient
    /// beta used by the symmetry-operator algebra).
    pub fn beta_j(&self) -> Complex64 {
        self.beta_j
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    pub fn eigenvalue(&self) -> f64 {
        -(self.b - self.n as f64).powi(2)
    }

    /// Expansion of eta_n at x, any order.
    pub fn eval(&self, x: f64, order: usize) -> Taylor1 {
        let t = Taylor1::variable(x, order);
        let sh = t.sinh();
        let ch = t.cosh();
        let envelope = ch.powf(-self.b).expect("cosh is positive");
        let twist = sh.atan().scale(-self.c).exp();
        envelope.mul(&twist).mul(&sh.polyval(&self.poly))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x, 0).value()
    }
}

/// Construct eta_n for 0 <= n < b.
pub fn eigenfunction(n: usize, b: f64, c: f64) -> Result<Eigenfunction1D> {
    if (n as f64) >= b {
        return Err(Error::IndexOutOfBoundState { n, b });
    }
    let gamma = Complex64::new(-(b + 0.5), -c);
    Ok(Eigenfunction1D { n, b, c, gamma, beta_j: gamma.conj(), poly: scarf_poly(n, b, c) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn potential_values() {
        assert_relative_eq!(potential(0.0, 1.0, 1.0), -1.0, max_relative = 1e-14);
        assert!(potential(30.0, 4.5, 1.0).abs() < 1e-10);
        assert!(potential(-30.0, 4.5, 1.0).abs() < 1e-10);
        for &x in &[0.3, -1.7, 2.2] {
            assert_relative_eq!(
                potential(-x, 3.5, 0.8),
                potential(x, 3.5, -0.8),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn jacobi_degree_zero_and_one() {
        let g = Complex64::new(-5.0, -1.0);
        assert_eq!(jacobi(0, g, g.conj(), Complex64::new(0.3, 0.4)).unwrap(), Complex64::new(1.0, 0.0));

        let (b, c) = (4.5, 1.0);
        let gamma = Complex64::new(-(b + 0.5), -c);
        for &x in &[0.0f64, 0.9, -1.4] {
            let z = Complex64::new(0.0, x.sinh());
            let p1 = jacobi(1, gamma, gamma.conj(), z).unwrap();
            let expect = Complex64::new(0.0, (1.0 - 2.0 * b) * x.sinh() / 2.0 - c);
            assert_relative_eq!(p1.re, expect.re, epsilon = 1e-13);
            assert_relative_eq!(p1.im, expect.im, max_relative = 1e-13);
        }
    }

    #[test]
    fn jacobi_conjugation_parity() {
        // conj(P_n(iy)) = (-1)^n P_n(iy) for the conjugate-parameter pair;
        // b off the half-integers keeps the recurrence regular up to n = 5
        let (b, c) = (3.3, 0.7);
        let gamma = Complex64::new(-(b + 0.5), -c);
        for n in 0..6 {
            for &y in &[0.25, -1.3, 2.1] {
                let z = Complex64::new(0.0, y);
                let p = jacobi(n, gamma, gamma.conj(), z).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let defect = (p.conj() - sign * p).norm();
                assert!(defect <= 1e-11 * p.norm().max(1.0), "n={n} y={y}: defect {defect:e}");
            }
        }
    }

    #[test]
    fn jacobi_recurrence_breakdown_reported() {
        // alpha + beta = -2b - 1 with b = 1.5 makes the leading coefficient
        // vanish at degree 4
        let b = 1.5;
        let gamma = Complex64::new(-(b + 0.5), -1.0);
        let z = Complex64::new(0.0, 0.4);
        assert!(matches!(
            jacobi(4, gamma, gamma.conj(), z),
            Err(Error::RecurrenceBreakdown { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_relative_eq!(eigenvalue(0, 3.5).unwrap(), -12.25);
        assert_relative_eq!(eigenvalue(1, 3.0).unwrap(), -4.0);
        assert!(matches!(eigenvalue(4, 3.5), Err(Error::IndexOutOfBoundState { .. })));
    }

    #[test]
    fn eta0_at_origin_is_one() {
        let eta = eigenfunction(0, 4.5, 1.0).unwrap();
        assert_relative_eq!(eta.value(0.0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn phase_fixed_polynomial_matches_complex_jacobi() {
        let (b, c) = (4.5, 1.0);
        let gamma = Complex64::new(-(b + 0.5), -c);
        for n in 0..4 {
            let eta = eigenfunction(n, b, c).unwrap();
            for &x in &[0.0f64, 0.8, -1.6, 2.4] {
                let s = x.sinh();
                let p = jacobi(n, gamma, gamma.conj(), Complex64::new(0.0, s)).unwrap();
                let rot = Complex64::new(0.0, -1.0).powu(n as u32) * p;
                assert!(rot.im.abs() < 1e-10 * rot.re.abs().max(1.0), "imaginary residue at n={n}");
                let mut horner = 0.0;
                for &cf in eta.poly().iter().rev() {
                    horner = horner * s + cf;
                }
                assert_relative_eq!(horner, rot.re, max_relative = 1e-11, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn schrodinger_residual_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (b, c) = (4.5, 1.0);
        for n in 0..4 {
            let eta = eigenfunction(n, b, c).unwrap();
            let eps = eigenvalue(n, b).unwrap();
            for _ in 0..50 {
                let x: f64 = rng.gen_range(-5.0..5.0);
                let jet = eta.eval(x, 2);
                let resid = -jet.extract(2).unwrap() + potential(x, b, c) * jet.value() - eps * jet.value();
                assert!(
                    resid.abs() < 1e-10 * jet.value().abs().max(1.0),
                    "n={n} x={x} resid={resid:e}"
                );
            }
        }
    }

    #[test]
    fn oscillation_theorem_zero_count() {
        let (b, c) = (4.5, 1.0);
        for n in 0..4 {
            let eta = eigenfunction(n, b, c).unwrap();
            let grid = 10_000;
            let mut zeros = 0;
            let mut last = eta.value(-20.0);
            for t in 1..=grid {
                let x = -20.0 + 40.0 * t as f64 / grid as f64;
                let v = eta.value(x);
                if last != 0.0 && v != 0.0 && last.signum() != v.signum() {
                    zeros += 1;
                }
                last = v;
            }
            assert_eq!(zeros, n, "eta_{n} must have exactly {n} real zeros");
        }
    }

    #[test]
    fn asymptotic_log_slope() {
        let (b, c) = (4.5, 1.0);
        for n in 0..4 {
            let eta = eigenfunction(n, b, c).unwrap();
            for &x in &[15.0, -15.0] {
                let jet = eta.eval(x, 1);
                let slope = jet.extract(1).unwrap() / jet.value();
                let expect = (n as f64 - b) * x.signum();
                assert!(
                    (slope - expect).abs() < 0.05 * expect.abs(),
                    "n={n} x={x}: slope {slope} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 4.5, 1.0).is_ok());
        assert!(ModelParams::new(1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 4.5, 0.0).is_err());
        assert!(ModelParams::new(1.0, 4.0, 1.0).is_err());
        assert!(ModelParams::with_integer_b(1.0, 4.0, 1.0).is_ok());
        let p = ModelParams::new(1.0, 4.5, 1.0).unwrap();
        assert_eq!(p.shift_a(2.0).a(), 3.0);
        assert_eq!(p.shift_b(-1.0).unwrap().b(), 3.5);
        assert!(p.shift_b(-5.0).is_err());
    }
}
