//! Power-law fits for convergence studies.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `value(h) ≈ limit + constant · h^order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub order: f64,
    pub limit: f64,
    pub constant: f64,
    /// Root-mean-square misfit of the data.
    pub residual: f64,
}

/// Least-squares slope and intercept of `y` against `x`.
fn line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// For a fixed order the model is linear in `(limit, constant)`.
fn linear_part(h: &[f64], values: &[f64], order: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = h.iter().map(|h| h.powf(order)).collect();
    let (constant, limit) = line(&x, values);
    let ssr = x
        .iter()
        .zip(values)
        .map(|(x, v)| (limit + constant * x - v).powi(2))
        .sum();
    (limit, constant, ssr)
}

/// Fits `value ≈ limit + constant · h^order` to at least three points with
/// strictly monotone `h > 0`.
///
/// The starting order comes from the log of successive differences, which is
/// exact for geometric `h`; a golden-section search on the projected residual
/// then polishes it. For data indexed by degrees of freedom pass
/// `h = N^{-1/2}`.
pub fn fit_convergence(h: &[f64], values: &[f64]) -> Result<ConvergenceFit> {
    if h.len() != values.len() {
        return Err(Error::Fit(format!("{} parameters for {} values", h.len(), values.len())));
    }
    if h.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", h.len())));
    }
    if h.iter().chain(values).any(|v| !v.is_finite()) || h.iter().any(|&h| h <= 0.0) {
        return Err(Error::Fit("mesh parameters must be positive and data finite".into()));
    }
    let increasing = h.windows(2).all(|w| w[1] > w[0]);
    let decreasing = h.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::Fit("mesh parameter is not strictly monotone".into()));
    }

    let mut log_h = Vec::new();
    let mut log_d = Vec::new();
    for i in 0..h.len() - 1 {
        let d = (values[i] - values[i + 1]).abs();
        if d > 0.0 {
            log_h.push(h[i].ln());
            log_d.push(d.ln());
        }
    }
    let start = if log_h.len() >= 2 {
        let (slope, _) = line(&log_h, &log_d);
        if slope.is_finite() && slope > 0.0 { slope } else { 1.0 }
    } else if log_h.is_empty() {
        // Constant data.
        let v = values[0];
        return Ok(ConvergenceFit { order: 0.0, limit: v, constant: 0.0, residual: 0.0 });
    } else {
        1.0
    };

    let objective = |t: f64| linear_part(h, values, t).2;
    let (mut a, mut b) = ((0.5 * start).max(1e-3), 2.0 * start + 1.0);
    let best_start = objective(start);
    if best_start > 0.0 {
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (objective(c), objective(d));
        for _ in 0..200 {
            if (b - a).abs() <= 1e-13 * (1.0 + start) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = objective(d);
            }
        }
    }
    let polished = 0.5 * (a + b);
    let order = if best_start == 0.0 || objective(start) <= objective(polished) {
        start
    } else {
        polished
    };
    let (limit, constant, ssr) = linear_part(h, values, order);
    Ok(ConvergenceFit {
        order,
        limit,
        constant,
        residual: (ssr / h.len() as f64).sqrt(),
    })
}

/// `error ≈ coefficient · N^exponent` by least squares in log-log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub coefficient: f64,
}

pub fn fit_rate(dofs: &[f64], errors: &[f64]) -> Result<RateFit> {
    if dofs.len() != errors.len() || dofs.len() < 2 {
        return Err(Error::Fit(format!("need two or more (N, error) pairs, got {}", dofs.len())));
    }
    if dofs.iter().chain(errors).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Fit("rate fit needs positive finite data".into()));
    }
    let x: Vec<f64> = dofs.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let (exponent, intercept) = line(&x, &y);
    Ok(RateFit { exponent, coefficient: intercept.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_model_is_exact() {
        let h: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let v: Vec<f64> = h.iter().map(|h| 1.0 + h * h).collect();
        let fit = fit_convergence(&h, &v).unwrap();
        assert!((fit.order - 2.0).abs() < 1e-9);
        assert!((fit.limit - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fractional_order_on_four_sizes() {
        let h = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
        let v: Vec<f64> = h.iter().map(|h: &f64| 5.0 + 3.0 * h.powf(1.36)).collect();
        let fit = fit_convergence(&h, &v).unwrap();
        assert!((fit.order - 1.36).abs() < 1e-6);
        assert!((fit.limit - 5.0).abs() < 1e-9);
        assert!((fit.constant - 3.0).abs() < 1e-5);
    }

    #[test]
    fn non_geometric_sizes_are_polished() {
        let h = [0.3, 0.11, 0.07, 0.02, 0.013];
        let v: Vec<f64> = h.iter().map(|h: &f64| 2.0 - 0.7 * h.powf(1.7)).collect();
        let fit = fit_convergence(&h, &v).unwrap();
        assert!((fit.order - 1.7).abs() < 1e-6, "{}", fit.order);
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_convergence(&[0.1, 0.05], &[1.0, 1.0]).is_err());
        assert!(fit_convergence(&[0.1, 0.2, 0.05], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_convergence(&[0.1, 0.05, 0.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_rate(&[10.0], &[1.0]).is_err());
    }

    #[test]
    fn rate_of_exact_power_law() {
        let n = [100.0, 400.0, 1600.0, 6400.0];
        let e: Vec<f64> = n.iter().map(|n: &f64| 2.0 * n.powf(-0.73)).collect();
        let fit = fit_rate(&n, &e).unwrap();
        assert!((fit.exponent + 0.73).abs() < 1e-12);
        assert!((fit.coefficient - 2.0).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn recovers_synthetic_power_laws(t in 0.5f64..3.0, c in -10.0f64..10.0, l in -100.0f64..100.0) {
            prop_assume!(c.abs() > 0.1);
            let h = [0.1, 0.05, 0.025, 0.0125];
            let v: Vec<f64> = h.iter().map(|h: &f64| l + c * h.powf(t)).collect();
            let fit = fit_convergence(&h, &v).unwrap();
            prop_assert!((fit.order - t).abs() < 1e-6);
        }
    }
}
