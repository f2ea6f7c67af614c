//! Scalar abstractions shared by the deterministic parts of the crate.
//!
//! Two layers are used. [`Scalar`] covers ordered fields, including exact
//! rationals, and is what the lumped random-walk chains, the brute-force ERRG
//! oracle and the closed-form expansions are written against. [`Real`] adds
//! the floating-point operations (logarithms, exponentials) needed by the
//! exploration-chain recursion and the diagram transforms.

use std::fmt::Debug;
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// An ordered field element: `f32`, `f64`, or an exact rational.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    fn from_count(n: usize) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy conversion used for reporting.
    fn approx_f64(&self) -> f64;

    fn pow_usize(&self, exp: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }
}

/// Floating-point scalar; also usable as an FFT sample type.
pub trait Real: Scalar + Float + FromPrimitive + Sum + Copy + rustfft::FftNum {}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_count(n: usize) -> Self {
                n as $t
            }
            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }
            fn approx_f64(&self) -> f64 {
                *self as f64
            }
        }
        impl Real for $t {}
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_count(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational64 {
    fn from_count(n: usize) -> Self {
        Rational64::from_integer(n as i64)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Binomial coefficient in the scalar field.
pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    let mut acc = S::one();
    for i in 0..k {
        acc = acc * S::from_count(n - i) / S::from_count(i + 1);
    }
    acc
}

/// `ln C(n, k)` via `ln_gamma`-free summation, stable for the sizes used here.
pub fn ln_binomial(table: &[f64], n: usize, k: usize) -> f64 {
    table[n] - table[k] - table[n - k]
}

/// Table of `ln k!` for `k = 0..=max`.
pub fn ln_factorial_table(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}
