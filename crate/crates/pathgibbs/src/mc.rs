//! Monte Carlo bookkeeping: value/stderr pairs, order-independent summation
//! and batch-means error bars for autocorrelated series.

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McValue {
    pub value: f64,
    pub stderr: f64,
}

impl McValue {
    pub fn exact(value: f64) -> McValue {
        McValue { value, stderr: 0.0 }
    }

    /// Sample mean and standard error of `samples`.
    pub fn from_samples(samples: &[f64]) -> McValue {
        let n = samples.len();
        if n == 0 {
            return McValue::exact(0.0);
        }
        let mean = pairwise_sum(samples) / n as f64;
        if n == 1 {
            return McValue {
                value: mean,
                stderr: 0.0,
            };
        }
        let sq: Vec<f64> = samples.iter().map(|s| (s - mean) * (s - mean)).collect();
        let var = pairwise_sum(&sq) / (n as f64 - 1.0);
        McValue {
            value: mean,
            stderr: (var / n as f64).sqrt(),
        }
    }

    pub fn scale(self, a: f64) -> McValue {
        McValue {
            value: a * self.value,
            stderr: a.abs() * self.stderr,
        }
    }

    /// Sum of independent estimates.
    pub fn add(self, other: McValue) -> McValue {
        McValue {
            value: self.value + other.value,
            stderr: (self.stderr * self.stderr + other.stderr * other.stderr).sqrt(),
        }
    }

    pub fn sub(self, other: McValue) -> McValue {
        self.add(other.scale(-1.0))
    }

    /// Whether `self` and `other` agree within `k` combined standard errors.
    pub fn agrees_with(self, other: McValue, k: f64) -> bool {
        let d = self.sub(other);
        d.value.abs() <= k * d.stderr.max(f64::EPSILON)
    }
}

/// Deterministic pairwise summation; independent of chunking and thread
/// count because the reduction tree is a function of the slice length only.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Mean of an autocorrelated series with a batch-means standard error.
///
/// The series is split into `n_batches` contiguous batches; the stderr is the
/// spread of the batch means. With fewer than two full batches the stderr
/// falls back to the i.i.d. formula.
pub fn batch_means(series: &[f64], n_batches: usize) -> McValue {
    let n = series.len();
    if n == 0 {
        return McValue::exact(0.0);
    }
    let b = n_batches.max(2);
    let batch_len = n / b;
    if batch_len < 1 {
        return McValue::from_samples(series);
    }
    let used = batch_len * b;
    let means: Vec<f64> = (0..b)
        .map(|i| pairwise_sum(&series[i * batch_len..(i + 1) * batch_len]) / batch_len as f64)
        .collect();
    let overall = pairwise_sum(&series[..used]) / used as f64;
    let sq: Vec<f64> = means
        .iter()
        .map(|m| (m - overall) * (m - overall))
        .collect();
    let var_means = pairwise_sum(&sq) / (b as f64 - 1.0);
    McValue {
        value: overall,
        stderr: (var_means / b as f64).sqrt(),
    }
}

/// Integrated autocorrelation time of `series`, by summing the empirical
/// autocorrelation function up to its first negative lag (initial positive
/// sequence window).
pub fn autocorr_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = pairwise_sum(series) / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0: f64 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..(n / 2) {
        let ck: f64 = (0..n - lag)
            .map(|i| centered[i] * centered[i + lag])
            .sum::<f64>()
            / n as f64;
        let rho = ck / c0;
        if rho <= 0.0 {
            break;
        }
        tau += 2.0 * rho;
    }
    tau
}
