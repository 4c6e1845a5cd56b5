//! Ordinary least-squares line fits.

use crate::error::{Error, Result};

/// Result of a straight-line fit `y = slope·x + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Range of the abscissa actually used (in the original, untransformed units).
    pub window: (f64, f64),
    pub points: usize,
    /// Number of independent realizations behind the data, when known.
    pub realizations: Option<usize>,
    /// Standard error of the slope. Filled in by the bootstrap when available,
    /// otherwise the analytic OLS value.
    pub std_error: f64,
}

/// Least squares on `(x, y)` pairs. Needs at least two distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitReport> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least two distinct abscissae".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite value in fit data"));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("need at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let std_error = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitReport {
        slope,
        intercept,
        r_squared,
        window: (lo, hi),
        points: n,
        realizations: None,
        std_error,
    })
}

/// Fits `log y` against `log x` for points with `x` inside `window`
/// (inclusive). `window` of the report is in the original `x` units.
pub fn fit_log_log(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<FitReport> {
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (&x, &y) in xs.iter().zip(ys) {
        if x < window.0 || x > window.1 {
            continue;
        }
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::invalid(format!(
                "non-positive point ({x}, {y}) inside log-log window"
            )));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let mut report = linear_fit(&lx, &ly)?;
    report.window = (report.window.0.exp(), report.window.1.exp());
    Ok(report)
}
