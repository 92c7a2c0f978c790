//! Monotone cubic (Fritsch-Carlson) interpolation. Extrapolation beyond
//! the table is an error, never a guess.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Invalid("interpolation needs ≥ 2 matching samples".into()));
        }
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Invalid("abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                0.5 * (delta[i - 1] + delta[i])
            };
        }
        // Fritsch-Carlson clamp keeps the interpolant monotone per segment.
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
            } else {
                let a = m[i] / delta[i];
                let b = m[i + 1] / delta[i];
                let s = (a * a + b * b).sqrt();
                if s > 3.0 {
                    let t = 3.0 / s;
                    m[i] = t * a * delta[i];
                    m[i + 1] = t * b * delta[i];
                }
            }
        }
        Ok(Self { x, y, slope: m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, xq: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        if xq < lo || xq > hi {
            return Err(Error::Extrapolation { r: xq, lo, hi });
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&xq)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i - 1,
        };
        Ok(i)
    }

    pub fn eval(&self, xq: f64) -> Result<f64> {
        let i = self.segment(xq)?;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1])
    }

    pub fn derivative(&self, xq: f64) -> Result<f64> {
        let i = self.segment(xq)?;
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let t2 = t * t;
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        Ok(dh00 * self.y[i] + dh10 * self.slope[i] + dh01 * self.y[i + 1] + dh11 * self.slope[i + 1])
    }
}
