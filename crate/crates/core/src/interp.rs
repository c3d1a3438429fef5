//! Shape-preserving piecewise cubic Hermite interpolation.

use crate::scalar::lit;
use crate::{Error, Real, Result};

#[derive(Debug, Clone)]
pub struct MonotoneCubic<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> MonotoneCubic<T> {
    /// Needs at least two samples with strictly increasing abscissae.
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::InvalidInput("interpolation needs >= 2 paired samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        let n = x.len();
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
            return Ok(MonotoneCubic { x, y, d });
        }
        let two: T = lit(2.0);
        for i in 1..n - 1 {
            if del[i - 1] * del[i] > T::zero() {
                let w1 = two * h[i] + h[i - 1];
                let w2 = h[i] + two * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        d[0] = edge(h[0], h[1], del[0], del[1]);
        d[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        Ok(MonotoneCubic { x, y, d })
    }

    pub fn x_min(&self) -> T {
        self.x[0]
    }

    pub fn x_max(&self) -> T {
        self.x[self.x.len() - 1]
    }

    pub fn samples(&self) -> (&[T], &[T]) {
        (&self.x, &self.y)
    }

    /// Interpolated value; clamps to the end samples outside the range.
    pub fn eval(&self, t: T) -> T {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two: T = lit(2.0);
        let three: T = lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

// One-sided three-point slope, limited to preserve shape.
fn edge<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || del0 == T::zero() {
        T::zero()
    } else if del0.signum() != del1.signum() && d.abs() > (three * del0).abs() {
        three * del0
    } else {
        d
    }
}
