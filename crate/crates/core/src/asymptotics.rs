//! Closed-form asymptotic expressions and the line-wise lower bound.
//!
//! Coefficients that are rational functions of `d` are kept as exact
//! [`Rational64`] values; only the final evaluation is in floating point.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::errg::exact_susceptibility;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda < T::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!("lambda must lie in [0, 1), got {lambda:?}")))
    }
}

fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// `1/(1-l) - (2l^2 - l^4) / (2(1-l)^4) / n`.
pub fn chi_formula<T: Real>(lambda: T, n: T) -> Result<T> {
    check_lambda(lambda)?;
    let q = T::one() - lambda;
    let l2 = lambda * lambda;
    Ok(q.recip() - (lit::<T>(2.0) * l2 - l2 * l2) / (lit::<T>(2.0) * q.powi(4)) / n)
}

/// `(1 - l)^-3`.
pub fn second_moment_formula<T: Real>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    Ok((T::one() - lambda).powi(-3))
}

/// `l^3 / (2(1-l)^2) / n`.
pub fn surplus_formula<T: Real>(lambda: T, n: T) -> Result<T> {
    check_lambda(lambda)?;
    Ok(lambda.powi(3) / (lit::<T>(2.0) * (T::one() - lambda).powi(2)) / n)
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::invalid(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// `(2d^2 - 1) / (2(d-1)^3)`.
pub fn chi_line_coefficient(d: usize) -> Result<Rational64> {
    check_dimension(d)?;
    let d = d as i64;
    Ok(Rational64::new(2 * d * d - 1, 2 * (d - 1).pow(3)))
}

/// Line susceptibility to second order:
/// `(1 - p(n-1))^-1 * (1 - c(d) / m)` with `c` from [`chi_line_coefficient`].
pub fn chi_line_formula(p: f64, d: usize, n: usize) -> Result<f64> {
    let c = chi_line_coefficient(d)?;
    let lambda = p * (n - 1) as f64;
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::invalid(format!("p(n-1) must lie in [0, 1), got {lambda}")));
    }
    let m = (d * (n - 1)) as f64;
    Ok((1.0 - c.to_f64().unwrap() / m) / (1.0 - lambda))
}

/// A truncated expansion in powers of `1/m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionValue {
    /// `(k, c_k)`: the term `c_k * m^-k`.
    pub terms: Vec<(u32, Rational64)>,
    pub m: u64,
    pub value: f64,
    pub error_order: String,
}

impl ExpansionValue {
    fn new(terms: Vec<(u32, Rational64)>, m: u64, error_order: &str) -> Self {
        let value = terms
            .iter()
            .map(|&(k, c)| c.to_f64().unwrap() * (m as f64).powi(-(k as i32)))
            .sum();
        Self { terms, m, value, error_order: error_order.to_string() }
    }

    /// Value of the single term `c_k m^-k`.
    pub fn term_value(&self, k: u32) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.0 == k)
            .map(|&(_, c)| c.to_f64().unwrap() * (self.m as f64).powi(-(k as i32)))
    }
}

/// `(2d^2 - 1) / (2(d-1)^2)`.
pub fn pc_second_coefficient(d: usize) -> Result<Rational64> {
    check_dimension(d)?;
    let d = d as i64;
    Ok(Rational64::new(2 * d * d - 1, 2 * (d - 1).pow(2)))
}

/// Critical point to second order, `1/m + c2(d)/m^2`.
pub fn pc_expansion(d: usize, n: usize) -> Result<ExpansionValue> {
    let c2 = pc_second_coefficient(d)?;
    if n < 2 {
        return Err(Error::invalid(format!("side length must be at least 2, got {n}")));
    }
    let m = (d * (n - 1)) as u64;
    Ok(ExpansionValue::new(
        vec![(1, Rational64::from_integer(1)), (2, c2)],
        m,
        "O(m^-3 + m^-1 V^-1/3)",
    ))
}

/// Leading coefficients of the doubly-connected and first ladder terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiCoefficients {
    /// Lower bound coefficient for `m * Pi0`: `(2d - 1) / (2(d-1)^2)`.
    pub pi0_lower: Rational64,
    /// Upper bound coefficient for `m * Pi1`: `(d^2 + d - 1) / (d-1)^2`.
    pub pi1_upper: Rational64,
}

pub fn pi_coefficients(d: usize) -> Result<PiCoefficients> {
    check_dimension(d)?;
    let d = d as i64;
    Ok(PiCoefficients {
        pi0_lower: Rational64::new(2 * d - 1, 2 * (d - 1).pow(2)),
        pi1_upper: Rational64::new(d * d + d - 1, (d - 1).pow(2)),
    })
}

/// Solves `m p = 1/(1 + pi_hat) + V^{-1/3} / theta` for `p`.
pub fn pc_from_pi<T: Real>(pi_hat: T, theta: T, m: T, volume: T) -> Result<T> {
    if !(theta > T::zero()) || !(m > T::zero()) || !(volume > T::zero()) {
        return Err(Error::invalid("theta, m and V must be positive"));
    }
    if !(pi_hat > -T::one()) {
        return Err(Error::invalid(format!("pi_hat must exceed -1, got {pi_hat:?}")));
    }
    Ok(((T::one() + pi_hat).recip() + volume.cbrt().recip() / theta) / m)
}

/// Mean total progeny of the line-cluster branching process:
/// `chi / (1 - (d-1)(chi - 1))`.
pub fn gw_mean_progeny<T: Real>(chi_line: T, d: usize) -> Result<T> {
    if chi_line < T::one() {
        return Err(Error::invalid(format!("line susceptibility below 1: {chi_line:?}")));
    }
    let denom = T::one() - T::from_count(d - 1) * (chi_line - T::one());
    if denom <= T::zero() {
        return Err(Error::NoSolution(format!(
            "branching process is not subcritical (denominator {denom:?})"
        )));
    }
    Ok(chi_line / denom)
}

/// Smallest `p` at which the dominating branching process reaches mean
/// progeny `theta V^{1/3}`, using the exact line susceptibility.
pub fn pl_lower_bound(d: usize, n: usize, theta: f64) -> Result<f64> {
    if d < 1 || n < 2 {
        return Err(Error::invalid(format!("need d >= 1 and n >= 2, got d={d}, n={n}")));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("theta must be positive, got {theta}")));
    }
    let volume = (n as f64).powi(d as i32);
    let target = theta * volume.cbrt();
    if target < 1.0 {
        return Err(Error::NoSolution(format!("target {target} is below chi(0) = 1")));
    }
    if target == 1.0 {
        return Ok(0.0);
    }
    // progeny as a function of p, infinite once the process is not subcritical
    let progeny = |p: f64| -> Result<f64> {
        let chi = exact_susceptibility(n, p)?;
        match gw_mean_progeny(chi, d) {
            Ok(v) => Ok(v),
            Err(Error::NoSolution(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut hi = (1.0 / (n - 1) as f64).min(1.0);
    while progeny(hi)? < target {
        if hi == 1.0 {
            return Err(Error::NoSolution(format!(
                "mean progeny stays below {target} for every p"
            )));
        }
        hi = (2.0 * hi).min(1.0);
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if progeny(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
