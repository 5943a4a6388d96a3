use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// `P(X ≤ x)` for `X ~ χ²(df)`.
pub fn chi_square_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(0.5 * df, 0.5 * x)
    }
}

fn upper_tail(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * df, 0.5 * x)
    }
}

fn density(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 0.5 * df;
    ((a - 1.0) * x.ln() - 0.5 * x - a * 2f64.ln() - ln_gamma(a)).exp()
}

/// Inverse CDF of `χ²(df)` by safeguarded Newton iteration on the
/// regularized incomplete gamma function.
pub fn chi_square_quantile(prob: f64, df: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidInput(format!("probability {prob} outside (0, 1)")));
    }
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::InvalidInput(format!("degrees of freedom {df} must be positive")));
    }
    // Work on whichever tail keeps the target away from 1.
    let use_upper = prob > 0.5;
    let target = if use_upper { 1.0 - prob } else { prob };
    // g(x) is increasing in x in both cases
    let g = |x: f64| if use_upper { target - upper_tail(x, df) } else { chi_square_cdf(x, df) - target };

    let (mut lo, mut hi) = (0.0_f64, df.max(1.0));
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let f = density(x, df);
        let newton = if f > 0.0 { x - gx / f } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
