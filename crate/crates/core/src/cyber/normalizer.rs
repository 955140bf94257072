use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};

const MIN_VARIANCE: f64 = 1e-12;

/// Streaming per-dimension mean and variance (Welford).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    count: u64,
    running_mean: Vec<f64>,
    running_sq_diff: Vec<f64>,
}

impl Normalizer {
    pub fn new(dim: usize) -> Self {
        Normalizer { count: 0, running_mean: vec![0.0; dim], running_sq_diff: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.running_mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_ready(&self) -> bool {
        self.count >= 2
    }

    pub fn clear(&mut self) {
        self.count = 0;
        self.running_mean.iter_mut().for_each(|m| *m = 0.0);
        self.running_sq_diff.iter_mut().for_each(|m| *m = 0.0);
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        dim_check("normalizer sample", self.dim(), x.len())?;
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.running_mean.iter_mut().zip(self.running_sq_diff.iter_mut()).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
        Ok(())
    }

    pub fn update<'a, I>(&mut self, batch: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut any = false;
        for x in batch {
            self.push(x)?;
            any = true;
        }
        if !any {
            return Err(Error::InvalidArgument("empty normalizer batch".into()));
        }
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.running_mean
    }

    /// Population variance (denominator = count).
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.dim()];
        }
        self.running_sq_diff.iter().map(|s| (s / self.count as f64).max(0.0)).collect()
    }

    /// Per-dimension divisor; 1 for degenerate dimensions.
    pub fn scale(&self) -> Vec<f64> {
        self.variance().into_iter().map(|v| if v < MIN_VARIANCE { 1.0 } else { v.sqrt() }).collect()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.running_mean).zip(self.scale()).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.running_mean).zip(self.scale()).map(|((v, m), s)| v * s + m).collect()
    }
}
