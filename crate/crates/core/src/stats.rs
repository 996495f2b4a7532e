//! Bin averages, error bars and jackknife resampling.

use serde::{Deserialize, Serialize};

/// Per-bin means of one observable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub bins: Vec<f64>,
}

impl BinnedSeries {
    pub fn new(bins: Vec<f64>) -> Self {
        Self { bins }
    }

    /// Split a raw time series into `n_bins` equal bins (trailing remainder dropped).
    pub fn from_samples(samples: &[f64], n_bins: usize) -> Self {
        let per = samples.len() / n_bins.max(1);
        if per == 0 {
            return Self::default();
        }
        Self {
            bins: samples
                .chunks_exact(per)
                .take(n_bins)
                .map(|c| c.iter().sum::<f64>() / per as f64)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.bins.is_empty() {
            return f64::NAN;
        }
        self.bins.iter().sum::<f64>() / self.bins.len() as f64
    }

    /// `sqrt((⟨O²⟩ − ⟨O⟩²)/(N_b − 1))` over bins.
    pub fn error(&self) -> f64 {
        let nb = self.bins.len();
        if nb < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        let m2 = self.bins.iter().map(|b| b * b).sum::<f64>() / nb as f64;
        ((m2 - m * m).max(0.0) / (nb - 1) as f64).sqrt()
    }

    /// Concatenate bins of independent chains.
    pub fn merge(&mut self, other: &BinnedSeries) {
        self.bins.extend_from_slice(&other.bins);
    }

    /// Difference between first- and second-half bin means in units of its error.
    pub fn drift_sigma(&self) -> f64 {
        let h = self.bins.len() / 2;
        if h < 2 {
            return 0.0;
        }
        let a = BinnedSeries::new(self.bins[..h].to_vec());
        let b = BinnedSeries::new(self.bins[h..2 * h].to_vec());
        let err = (a.error().powi(2) + b.error().powi(2)).sqrt();
        let diff = (a.mean() - b.mean()).abs();
        if err > 0.0 {
            diff / err
        } else if diff > 1e-12 * (1.0 + a.mean().abs()) {
            f64::INFINITY
        } else {
            0.0
        }
    }

    /// Whether the series looks equilibrated (halves agree within 5σ).
    pub fn equilibrated(&self) -> bool {
        self.drift_sigma() <= 5.0
    }
}

/// Accumulates a stream of samples into a fixed number of bins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinAccumulator {
    per_bin: usize,
    current: f64,
    count: usize,
    bins: Vec<f64>,
}

impl BinAccumulator {
    pub fn new(per_bin: usize) -> Self {
        Self {
            per_bin: per_bin.max(1),
            current: 0.0,
            count: 0,
            bins: Vec::new(),
        }
    }

    pub fn push(&mut self, v: f64) {
        self.current += v;
        self.count += 1;
        if self.count == self.per_bin {
            self.bins.push(self.current / self.per_bin as f64);
            self.current = 0.0;
            self.count = 0;
        }
    }

    pub fn series(&self) -> BinnedSeries {
        BinnedSeries::new(self.bins.clone())
    }
}

/// Jackknife estimate `(mean, error)` of a statistic of the whole data set.
pub fn jackknife<T, F>(data: &[T], stat: F) -> (f64, f64)
where
    T: Clone,
    F: Fn(&[T]) -> f64,
{
    let n = data.len();
    let full = stat(data);
    if n < 2 {
        return (full, f64::NAN);
    }
    let mut leave: Vec<T> = Vec::with_capacity(n - 1);
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            leave.clear();
            leave.extend(data[..i].iter().cloned());
            leave.extend(data[i + 1..].iter().cloned());
            stat(&leave)
        })
        .collect();
    let m = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    (full, var.sqrt())
}
