use crate::{Error, Result};

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant through
/// strictly increasing knots.
#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidParameter(
                "interpolation needs at least two matching knots".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "interpolation knots must increase strictly".into(),
            ));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes = vec![delta[0]; 2];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Inverse-CDF sampler for a tabulated density.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    inverse: Pchip,
}

impl InverseCdf {
    /// Build from density values on an increasing grid (trapezoidal CDF).
    pub fn from_density(xs: &[f64], density: &[f64]) -> Result<Self> {
        let n = xs.len();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (density[i].max(0.0) + density[i - 1].max(0.0)) * (xs[i] - xs[i - 1]);
        }
        let total = cdf[n - 1];
        if !(total > 0.0) {
            return Err(Error::ZeroNorm("density"));
        }
        let mut knots_f = Vec::with_capacity(n);
        let mut knots_x = Vec::with_capacity(n);
        for i in 0..n {
            let f = cdf[i] / total;
            if knots_f.last().is_none_or(|&last| f > last) {
                knots_f.push(f);
                knots_x.push(xs[i]);
            }
        }
        Ok(Self {
            inverse: Pchip::new(knots_f, knots_x)?,
        })
    }

    pub fn sample(&self, u: f64) -> f64 {
        self.inverse.eval(u)
    }
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic `d` for `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Tabulated CDF evaluated by linear interpolation of a fine trapezoidal sum.
pub struct TabulatedCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(xs: Vec<f64>, density: &[f64]) -> Self {
        let n = xs.len();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let total = cdf[n - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { xs, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 0.1, 0.9, 1.0];
        let p = Pchip::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).abs() < 1e-15);
        }
        let mut last = -1.0;
        for i in 0..=400 {
            let v = p.eval(i as f64 * 0.01);
            assert!(v >= last - 1e-15);
            last = v;
        }
        // flat segment stays flat
        assert!((p.eval(1.5) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&s, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
        assert!(ks_p_value(d, 1000) > 0.999);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
    }

    #[test]
    fn inverse_cdf_of_uniform_density() {
        let xs: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
        let inv = InverseCdf::from_density(&xs, &vec![1.0; 101]).unwrap();
        for u in [0.0, 0.25, 0.5, 0.9, 1.0] {
            assert!((inv.sample(u) - u).abs() < 1e-12);
        }
    }
}
