//! Least-squares rate fits on log-log data.

/// Fitted slope of `log y` against `log x` and its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub r2: f64,
}

/// Ordinary least squares on `(log x, log y)` over the points where both are
/// positive and finite. `None` with fewer than two usable points.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite() && **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let rate = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Some(RateFit { rate, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_slope() {
        let f = fit_rate(&[0.25, 1.0 / 16.0], &[1.0, 0.25]).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-14);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn single_point_has_no_rate() {
        assert_eq!(fit_rate(&[0.5], &[1.0]), None);
        assert_eq!(fit_rate(&[0.5, 0.25], &[1.0, 0.0]), None);
    }

    #[test]
    fn noisy_fit_has_lower_r2() {
        let xs = [0.5, 0.25, 0.125, 0.0625];
        let ys = [1.0, 0.1, 0.5, 0.01];
        let f = fit_rate(&xs, &ys).unwrap();
        assert!(f.r2 < 0.9 && f.r2 > 0.0);
    }

    proptest! {
        #[test]
        fn recovers_power_laws(rate in -3.0f64..3.0, c in 0.1f64..10.0) {
            let xs = [0.5, 0.25, 0.125, 1.0 / 16.0, 1.0 / 32.0];
            let ys: Vec<f64> = xs.iter().map(|x: &f64| c * x.powf(rate)).collect();
            let f = fit_rate(&xs, &ys).unwrap();
            prop_assert!((f.rate - rate).abs() < 1e-10);
            prop_assert!(f.r2 > 1.0 - 1e-10);
        }
    }
}
