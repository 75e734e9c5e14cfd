//! Ordinary least-squares line fits, used for order-of-accuracy slopes and
//! the `1/n → 0` extrapolation of the convergence ratio.

/// Fitted `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line through `(x, y)` points. Needs two distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Slope of the least-squares line; panics on degenerate input.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    least_squares(points).expect("need two distinct abscissae").slope
}

/// Log-log slope of `errors` against `params`.
pub fn loglog_slope(params: &[f64], errors: &[f64]) -> f64 {
    let pts: Vec<_> = params
        .iter()
        .zip(errors)
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    least_squares_slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let pts: Vec<_> = (1..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let fit = least_squares(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(least_squares(&[(1.0, 2.0)]).is_none());
        assert!(least_squares(&[(1.0, 2.0), (1.0, 3.0)]).is_none());
    }

    #[test]
    fn power_law_slope() {
        let params = [0.1, 0.05, 0.025];
        let errs: Vec<_> = params.iter().map(|p: &f64| 7.0 * p.powi(4)).collect();
        assert!((loglog_slope(&params, &errs) - 4.0).abs() < 1e-12);
    }
}
