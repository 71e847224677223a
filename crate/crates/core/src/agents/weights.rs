use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Exponential weights over a `rows × cols` grid (a single row for plain
/// EXP4), kept as normalized log-probabilities.
///
/// Importance-weighted gains reach `1 − 1/p`, so naive exponentiation would
/// underflow; every update renormalizes in log space after subtracting the max.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    log_probs: Vec<f64>,
    probs: Vec<f64>,
}

impl WeightMatrix {
    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        let n = rows * cols;
        if n == 0 {
            return Err(Error::Config("weight matrix needs at least one entry".into()));
        }
        let p = 1.0 / n as f64;
        Ok(Self { rows, cols, log_probs: vec![libm::log(p); n], probs: vec![p; n] })
    }

    /// Weights proportional to `probs`; every entry must be positive.
    pub fn from_probs(rows: usize, cols: usize, probs: &[f64]) -> Result<Self> {
        if rows * cols == 0 || probs.len() != rows * cols {
            return Err(Error::Config(format!("need {} positive weights, got {}", rows * cols, probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Config(format!("weight {p} is not positive")));
        }
        let mut w = Self { rows, cols, log_probs: probs.iter().map(|p| libm::log(*p)).collect(), probs: vec![0.0; probs.len()] };
        w.renormalize()?;
        Ok(w)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sums(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.probs.chunks(self.cols).map(|r| r.iter().sum::<f64>()));
    }

    pub fn col_sums(&self, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.cols, 0.0);
        for r in self.probs.chunks(self.cols) {
            for (o, p) in out.iter_mut().zip(r) {
                *o += p;
            }
        }
    }

    /// `Q' ∝ exp(η Ŷ) Q` with `gains[k] = Ŷ_k`.
    pub fn update(&mut self, eta: f64, gains: impl Fn(usize) -> f64) -> Result<()> {
        for (k, lp) in self.log_probs.iter_mut().enumerate() {
            *lp += eta * gains(k);
        }
        self.renormalize()
    }

    fn renormalize(&mut self) -> Result<()> {
        let max = self.log_probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numeric(format!("log-weight maximum is {max}")));
        }
        let total: f64 = self.log_probs.iter().map(|lp| libm::exp(lp - max)).sum();
        let lse = max + libm::log(total);
        for (lp, p) in self.log_probs.iter_mut().zip(self.probs.iter_mut()) {
            *lp -= lse;
            if !lp.is_finite() {
                return Err(Error::Numeric(format!("log-weight became {lp}")));
            }
            *p = libm::exp(*lp);
        }
        Ok(())
    }

    /// Max absolute difference between the two probability grids.
    pub fn divergence(&self, other: &[f64]) -> f64 {
        self.probs.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_init_and_marginals() {
        let w = WeightMatrix::uniform(2, 3).unwrap();
        let mut rows = Vec::new();
        w.row_sums(&mut rows);
        assert!((rows[0] - 0.5).abs() < 1e-15 && (rows[1] - 0.5).abs() < 1e-15);
        let mut cols = Vec::new();
        w.col_sums(&mut cols);
        assert_eq!(cols.len(), 3);
        assert!(WeightMatrix::uniform(0, 3).is_err());
    }

    #[test]
    fn constant_gain_leaves_weights() {
        let mut w = WeightMatrix::uniform(1, 4).unwrap();
        w.update(0.3, |k| k as f64).unwrap();
        let before = w.probs().to_vec();
        w.update(0.7, |_| 1.0).unwrap();
        assert!(w.divergence(&before) < 1e-15);
    }

    #[test]
    fn huge_negative_gains_stay_finite() {
        let mut w = WeightMatrix::uniform(1, 3).unwrap();
        for _ in 0..100 {
            w.update(1.0, |k| if k == 0 { -1e6 } else { 1.0 }).unwrap();
        }
        let s: f64 = w.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(w.probs()[0], 0.0);
        assert!(w.log_probs().iter().all(|l| l.is_finite()));
    }
}
