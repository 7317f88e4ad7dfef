use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
///
/// Beyond the last knot the interpolant continues linearly with its end
/// slope; below the first knot it continues linearly with the first slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    z: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(z: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if z.len() != values.len() {
            return Err(invalid(
                "table",
                format!("{} abscissae but {} values", z.len(), values.len()),
            ));
        }
        if z.len() < 2 {
            return Err(invalid("table", "needs at least two samples"));
        }
        if z.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("table", "samples must be finite"));
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("table", "abscissae must be strictly increasing"));
        }

        let n = z.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|k| (values[k + 1] - values[k]) / (z[k + 1] - z[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for k in 1..n - 1 {
            slopes[k] = if secant[k - 1] * secant[k] <= 0.0 {
                0.0
            } else {
                0.5 * (secant[k - 1] + secant[k])
            };
        }
        for k in 0..n - 1 {
            if secant[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / secant[k];
            let b = slopes[k + 1] / secant[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[k] = tau * a * secant[k];
                slopes[k + 1] = tau * b * secant[k];
            }
        }
        Ok(Self { z, values, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.z
    }

    pub fn sample_values(&self) -> &[f64] {
        &self.values
    }

    pub fn first_knot(&self) -> f64 {
        self.z[0]
    }

    pub fn last_knot(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    pub fn end_slope(&self) -> f64 {
        self.slopes[self.slopes.len() - 1]
    }

    fn interval(&self, x: f64) -> usize {
        match self.z.partition_point(|&k| k <= x) {
            0 => 0,
            i => (i - 1).min(self.z.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.z.len() - 1;
        if x <= self.z[0] {
            return self.values[0] + self.slopes[0] * (x - self.z[0]);
        }
        if x >= self.z[last] {
            return self.values[last] + self.slopes[last] * (x - self.z[last]);
        }
        let k = self.interval(x);
        let h = self.z[k + 1] - self.z[k];
        let s = (x - self.z[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k]
            + h10 * h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.slopes[k + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let last = self.z.len() - 1;
        if x <= self.z[0] {
            return self.slopes[0];
        }
        if x >= self.z[last] {
            return self.slopes[last];
        }
        let k = self.interval(x);
        let h = self.z[k + 1] - self.z[k];
        let s = (x - self.z[k]) / h;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        (d00 * self.values[k] + d01 * self.values[k + 1]) / h
            + d10 * self.slopes[k]
            + d11 * self.slopes[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_knots_and_lines() {
        let t = MonotoneCubic::new(vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 1.0, 2.0, 4.0]).unwrap();
        for (z, v) in [(0.0, 0.0), (0.5, 1.0), (1.0, 2.0), (2.0, 4.0), (0.7, 1.4), (3.0, 6.0)] {
            assert!((t.eval(z) - v).abs() < 1e-14, "{z}");
            assert!((t.derivative(z) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, f64::NAN], vec![0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn preserves_monotone_data(mut ys in proptest::collection::vec(0.0f64..1.0, 3..12)) {
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let zs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.1).collect();
            let t = MonotoneCubic::new(zs.clone(), ys).unwrap();
            let top = t.last_knot();
            let mut prev = t.eval(0.0);
            for i in 1..=500 {
                let v = t.eval(top * i as f64 / 500.0);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
