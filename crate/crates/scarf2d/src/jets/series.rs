//! Taylor coefficient tables f^(t)(x0)/t! for the elementary functions the
//! model needs. Both the univariate and bivariate jet lifts compose these
//! tables with the inner jet by Horner evaluation.

use crate::error::{Error, Result};

pub(crate) fn exp_table(x0: f64, k: usize) -> Vec<f64> {
    let e = x0.exp();
    let mut t = Vec::with_capacity(k + 1);
    let mut fact = 1.0;
    t.push(e);
    for i in 1..=k {
        fact *= i as f64;
        t.push(e / fact);
    }
    t
}

pub(crate) fn sinh_table(x0: f64, k: usize) -> Vec<f64> {
    let (s, c) = (x0.sinh(), x0.cosh());
    let mut t = Vec::with_capacity(k + 1);
    let mut fact = 1.0;
    t.push(s);
    for i in 1..=k {
        fact *= i as f64;
        t.push(if i % 2 == 0 { s } else { c } / fact);
    }
    t
}

pub(crate) fn cosh_table(x0: f64, k: usize) -> Vec<f64> {
    let (s, c) = (x0.sinh(), x0.cosh());
    let mut t = Vec::with_capacity(k + 1);
    let mut fact = 1.0;
    t.push(c);
    for i in 1..=k {
        fact *= i as f64;
        t.push(if i % 2 == 0 { c } else { s } / fact);
    }
    t
}

/// Shared recurrence for tanh and coth: both satisfy y' = 1 - y^2, so the
/// coefficients follow from the Cauchy product of the series with itself.
fn ode_one_minus_square(y0: f64, k: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(k + 1);
    y.push(y0);
    for t in 0..k {
        let conv: f64 = (0..=t).map(|j| y[j] * y[t - j]).sum();
        if t == 0 {
            y.push(1.0 - conv);
        } else {
            y.push(-conv / (t as f64 + 1.0));
        }
    }
    y
}

pub(crate) fn tanh_table(x0: f64, k: usize) -> Vec<f64> {
    ode_one_minus_square(x0.tanh(), k)
}

pub(crate) fn coth_table(x0: f64, k: usize) -> Result<Vec<f64>> {
    if x0 == 0.0 {
        return Err(Error::Pole("coth at zero argument".into()));
    }
    Ok(ode_one_minus_square(x0.cosh() / x0.sinh(), k))
}

/// atan via term-wise integration of the series of 1/(1 + x^2) at x0.
pub(crate) fn atan_table(x0: f64, k: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(k + 1);
    t.push(x0.atan());
    if k == 0 {
        return t;
    }
    let d = [1.0 + x0 * x0, 2.0 * x0, 1.0];
    let mut w = Vec::with_capacity(k);
    w.push(1.0 / d[0]);
    for i in 1..k {
        let mut acc = d[1] * w[i - 1];
        if i >= 2 {
            acc += d[2] * w[i - 2];
        }
        w.push(-acc / d[0]);
    }
    for (i, wi) in w.iter().enumerate() {
        t.push(wi / (i as f64 + 1.0));
    }
    t
}

pub(crate) fn ln_table(x0: f64, k: usize) -> Result<Vec<f64>> {
    if x0 <= 0.0 {
        return Err(Error::Pole(format!("ln of non-positive value {x0}")));
    }
    let mut t = Vec::with_capacity(k + 1);
    t.push(x0.ln());
    let mut pw = 1.0;
    for i in 1..=k {
        pw *= x0;
        let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
        t.push(sign / (i as f64 * pw));
    }
    Ok(t)
}

/// Binomial series of x^a at x0 > 0.
pub(crate) fn powf_table(x0: f64, a: f64, k: usize) -> Result<Vec<f64>> {
    if x0 <= 0.0 {
        return Err(Error::Pole(format!("real power of non-positive value {x0}")));
    }
    let mut t = Vec::with_capacity(k + 1);
    t.push(x0.powf(a));
    for i in 1..=k {
        let prev = t[i - 1];
        t.push(prev * (a - (i as f64 - 1.0)) / (i as f64 * x0));
    }
    Ok(t)
}

pub(crate) fn recip_table(x0: f64, k: usize) -> Result<Vec<f64>> {
    if x0 == 0.0 {
        return Err(Error::Pole("reciprocal of zero".into()));
    }
    let mut t = Vec::with_capacity(k + 1);
    t.push(1.0 / x0);
    for i in 1..=k {
        let prev = t[i - 1];
        t.push(-prev / x0);
    }
    Ok(t)
}
