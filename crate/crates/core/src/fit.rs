//! Shared least-squares helper for log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Result of a least-squares line fit on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub n_points: usize,
}

/// Least-squares line through `(ln x_i, ln y_i)`. Requires at least three
/// points with strictly positive coordinates.
pub fn fit_loglog(pairs: &[(f64, f64)]) -> Result<FitResult> {
    if pairs.len() < 3 {
        return Err(Error::argument(format!(
            "log-log fit needs at least 3 points, got {}",
            pairs.len()
        )));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::argument(format!(
                "log-log fit requires positive values, got ({x}, {y})"
            )));
        }
        xs.push(x.ln());
        ys.push(y.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::argument("log-log fit requires at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
        n_points: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let rows: Vec<(f64, f64)> =
            (1..=8).map(|k| ((1 << k) as f64, ((1 << k) as f64).powf(1.75))).collect();
        let fit = fit_loglog(&rows).unwrap();
        assert!((fit.slope - 1.75).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
    }

    #[test]
    fn constant_rows_have_zero_slope() {
        let rows = vec![(2.0, 3.0), (4.0, 3.0), (8.0, 3.0), (16.0, 3.0)];
        let fit = fit_loglog(&rows).unwrap();
        assert!(fit.slope.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_loglog(&[(1.0, 1.0), (2.0, 0.0), (3.0, 2.0)]).is_err());
    }
}
