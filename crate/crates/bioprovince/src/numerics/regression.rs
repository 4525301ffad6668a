//! Ordinary least squares with a two-sided t-test on the slope.

use super::special::betainc;
use crate::error::{Error, Result};

/// A fitted simple linear regression `y = intercept + slope * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    pub t_stat: f64,
    /// Two-sided p-value for slope != 0 (t distribution, n-2 dof).
    pub p_value: f64,
    pub n_pairs: usize,
}

/// Fit `y ~ x` by ordinary least squares.
///
/// Requires at least 3 points and non-constant `x`. The p-value uses the
/// exact t tail via the regularized incomplete beta function.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<RegressionFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Numerics(format!(
            "regression: length mismatch {} vs {}",
            n,
            y.len()
        )));
    }
    if n < 3 {
        return Err(Error::Numerics(format!(
            "regression needs at least 3 points, got {n}"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerics("regression: non-finite input".into()));
    }
    let (min_x, max_x) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min_x == max_x {
        return Err(Error::Numerics("regression: constant x".into()));
    }

    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (y[i] - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut rss = 0.0;
    for i in 0..n {
        let resid = y[i] - (intercept + slope * x[i]);
        rss += resid * resid;
    }
    let dof = (n - 2) as f64;
    let se = (rss / dof / sxx).sqrt();

    let (t_stat, p_value) = if se == 0.0 {
        if slope == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(slope), 0.0)
        }
    } else {
        let t = slope / se;
        // two-sided: P(|T| > |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2)
        let p = betainc(dof / 2.0, 0.5, dof / (dof + t * t));
        (t, p.clamp(0.0, 1.0))
    };

    Ok(RegressionFit {
        slope,
        intercept,
        slope_std_err: se,
        t_stat,
        p_value,
        n_pairs: n,
    })
}
