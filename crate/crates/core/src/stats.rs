//! Monte Carlo summaries.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Estimate { mean, stderr: 0.0, n };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Estimate { mean, stderr: (var / n as f64).sqrt(), n }
    }

    /// Control-variate estimate of `E[y]` using `c` with known mean `c_mean`.
    pub fn with_control(ys: &[f64], cs: &[f64], c_mean: f64) -> Estimate {
        assert_eq!(ys.len(), cs.len(), "sample and control lengths differ");
        let n = ys.len();
        if n < 3 {
            return Estimate::from_samples(ys);
        }
        let my = ys.iter().sum::<f64>() / n as f64;
        let mc = cs.iter().sum::<f64>() / n as f64;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (y, c) in ys.iter().zip(cs) {
            sxy += (y - my) * (c - mc);
            sxx += (c - mc) * (c - mc);
        }
        let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let adjusted: Vec<f64> = ys.iter().zip(cs).map(|(y, c)| y - beta * (c - c_mean)).collect();
        let mut e = Estimate::from_samples(&adjusted);
        // one degree of freedom spent on beta
        e.stderr *= ((n - 1) as f64 / (n - 2) as f64).sqrt();
        e
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.mean + k * self.stderr
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.mean - k * self.stderr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_estimate() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn control_variate_removes_linear_noise() {
        let cs: Vec<f64> = (0..100).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
        let c_mean = 5.0;
        let ys: Vec<f64> = cs.iter().map(|c| 3.0 + 2.0 * (c - c_mean)).collect();
        let e = Estimate::with_control(&ys, &cs, c_mean);
        assert!((e.mean - 3.0).abs() < 1e-12);
        assert!(e.stderr < 1e-12);
    }
}
