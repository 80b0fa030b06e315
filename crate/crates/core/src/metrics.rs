//! Error-rate estimators.
//!
//! BER is `N_e / N` over classical bits; QBER is `N_e^q / N^q` over teleported
//! qubits; the channel error rate is the damaged fraction of transmitted
//! qubits. All three are counts in a [`MetricAccumulator`].

use std::ops::{Add, AddAssign};

use crate::{Error, Result};

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MetricAccumulator {
    pub n_total: u64,
    pub n_error: u64,
}

impl MetricAccumulator {
    pub fn new(n_error: u64, n_total: u64) -> Self {
        debug_assert!(n_error <= n_total);
        MetricAccumulator { n_total, n_error }
    }

    pub fn record(&mut self, is_error: bool) {
        self.n_total += 1;
        self.n_error += u64::from(is_error);
    }

    /// `n_error / n_total`, zero when empty.
    pub fn rate(&self) -> f64 {
        if self.n_total == 0 {
            0.0
        } else {
            self.n_error as f64 / self.n_total as f64
        }
    }

    /// Binomial standard error of [`rate`](Self::rate).
    pub fn sigma(&self) -> f64 {
        if self.n_total == 0 {
            return 0.0;
        }
        let p = self.rate();
        (p * (1.0 - p) / self.n_total as f64).sqrt()
    }

    /// Wilson score 95% interval.
    pub fn wilson_ci95(&self) -> (f64, f64) {
        wilson_interval(self.n_error, self.n_total, Z95)
    }
}

impl Add for MetricAccumulator {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        MetricAccumulator {
            n_total: self.n_total + rhs.n_total,
            n_error: self.n_error + rhs.n_error,
        }
    }
}

impl AddAssign for MetricAccumulator {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for MetricAccumulator {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

pub fn wilson_interval(errors: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == total { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Hamming distance between the two streams as a rate.
pub fn estimate_ber(sent: &[u8], received: &[u8]) -> Result<MetricAccumulator> {
    if sent.len() != received.len() {
        return Err(Error::domain(format!(
            "BER over streams of length {} and {}",
            sent.len(),
            received.len()
        )));
    }
    let errors = sent
        .iter()
        .zip(received)
        .filter(|(a, b)| (*a ^ *b) & 1 == 1)
        .count();
    Ok(MetricAccumulator::new(errors as u64, sent.len() as u64))
}
