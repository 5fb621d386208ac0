//! Order-fixed summary statistics.

/// Neumaier-compensated sum, evaluated left to right.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (divisor `k - 1`); 0 for a single sample.
    pub sd: f64,
    pub se: f64,
}

pub fn summarize(xs: &[f64]) -> Summary {
    assert!(!xs.is_empty(), "summary of an empty sample");
    let k = xs.len() as f64;
    let mean = compensated_sum(xs) / k;
    if xs.len() == 1 {
        return Summary { mean, sd: 0.0, se: 0.0 };
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let sd = (compensated_sum(&sq) / (k - 1.0)).sqrt();
    Summary {
        mean,
        sd,
        se: sd / k.sqrt(),
    }
}

/// `hits / total` as a frequency in `[0, 1]`.
pub fn frequency(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}
