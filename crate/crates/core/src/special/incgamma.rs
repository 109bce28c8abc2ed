//! Incomplete gamma functions.
//!
//! `upper_incomplete_gamma` accepts any real order `s` for `x > 0`; negative
//! orders are reached by downward recurrence from `(0, 1]` for small `x` and
//! by the Legendre continued fraction otherwise.

use super::gamma::{gamma, ln_gamma, EULER_GAMMA};
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// Series for the regularized lower function P(s, x), s > 0.
fn p_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + s * x.ln() - ln_gamma(s)).exp()
}

/// Modified Lentz evaluation of the continued fraction for Γ(s, x)·e^x·x^{-s}.
fn cf_core(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = if b.abs() < FPMIN { 1.0 / FPMIN } else { 1.0 / b };
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Exponential integral E1(x) = Γ(0, x) for 0 < x < 1 (power series).
fn e1_small(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < EPS * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Regularized upper incomplete gamma Q(s, x) = Γ(s, x)/Γ(s), s > 0.
pub fn gamma_q(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("gamma_q requires s > 0, got {s}")));
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("gamma_q requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(if x < s + 1.0 {
        1.0 - p_series(s, x)
    } else {
        cf_core(s, x) * (-x + s * x.ln() - ln_gamma(s)).exp()
    })
}

/// Regularized lower incomplete gamma P(s, x), s > 0.
pub fn gamma_p(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("gamma_p requires s > 0, got {s}")));
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("gamma_p requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(if x < s + 1.0 {
        p_series(s, x)
    } else {
        1.0 - cf_core(s, x) * (-x + s * x.ln() - ln_gamma(s)).exp()
    })
}

/// Upper incomplete gamma Γ(s, x) (not regularized) for real `s`.
///
/// At `x = 0` only `s > 0` is accepted (the value is Γ(s)); for `x > 0`
/// every real order is valid.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() || s.is_nan() {
        return Err(Error::Domain(format!(
            "upper incomplete gamma requires x >= 0, got x = {x}"
        )));
    }
    if x == 0.0 {
        if s > 0.0 {
            return Ok(gamma(s));
        }
        return Err(Error::Domain(format!(
            "Γ(s, 0) diverges for s = {s} <= 0"
        )));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if s > 0.0 {
        if x < s + 1.0 {
            return Ok(gamma(s) * (1.0 - p_series(s, x)));
        }
        return Ok(cf_core(s, x) * (-x + s * x.ln()).exp());
    }
    if x >= 1.0 {
        return Ok(cf_core(s, x) * (-x + s * x.ln()).exp());
    }
    // s <= 0 and x < 1: start in (0, 1] (or at E1 for integer s) and step down.
    let steps = (-s).ceil();
    let mut order = s + steps;
    let mut value = if order == 0.0 {
        e1_small(x)
    } else {
        gamma(order) * (1.0 - p_series(order, x))
    };
    let ex = (-x).exp();
    let lx = x.ln();
    for _ in 0..steps as usize {
        let next = order - 1.0;
        value = (value - (next * lx).exp() * ex) / next;
        order = next;
    }
    Ok(value)
}
