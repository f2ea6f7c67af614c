use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub standard_error: f64,
    pub replicates: u64,
}

impl EstimateWithError {
    /// Mean and `sd / sqrt(n)` of the samples, summed in slice order.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 replicates, got {n}")));
        }
        let mut acc = Moments::default();
        for &x in samples {
            acc.push(x);
        }
        Ok(acc.estimate())
    }

    /// `(self - other) / sqrt(se1^2 + se2^2)`, zero when both are exact and equal.
    pub fn z_against(&self, other: &EstimateWithError) -> f64 {
        z_score(self.mean - other.mean, self.standard_error.hypot(other.standard_error))
    }

    /// `(self - value) / se`.
    pub fn z_against_value(&self, value: f64) -> f64 {
        z_score(self.mean - value, self.standard_error)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            standard_error: self.standard_error * factor.abs(),
            replicates: self.replicates,
        }
    }
}

pub(crate) fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Streaming mean/variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> EstimateWithError {
        EstimateWithError {
            mean: self.mean,
            standard_error: (self.variance() / self.count as f64).sqrt(),
            replicates: self.count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_constant_has_zero_error() {
        let e = EstimateWithError::from_samples(&[1.0; 10]).unwrap();
        assert_eq!((e.mean, e.standard_error, e.replicates), (1.0, 0.0, 10));
        assert_eq!(e.z_against_value(1.0), 0.0);
    }

    #[test]
    fn standard_error_matches_definition() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let e = EstimateWithError::from_samples(&xs).unwrap();
        let var: f64 = xs.iter().map(|x| (x - 2.5) * (x - 2.5)).sum::<f64>() / 3.0;
        assert!((e.standard_error - (var / 4.0).sqrt()).abs() < 1e-15);
        assert!(EstimateWithError::from_samples(&[1.0]).is_err());
    }
}
