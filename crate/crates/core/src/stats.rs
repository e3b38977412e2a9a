/// `log(sinh r)` for `r > 0`, stable for large `r`.
pub(crate) fn log_sinh(r: f64) -> f64 {
    if r <= 0.0 {
        return f64::NEG_INFINITY;
    }
    r + (-(-2.0 * r).exp()).ln_1p() - std::f64::consts::LN_2
}

/// `log(exp(a) + exp(b))`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, log_add)
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Standard error of the slope.
    pub slope_err: f64,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let residual = (ss / n).sqrt();
    let slope_err = if xs.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, intercept, residual, slope_err }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sinh_matches_direct_formula() {
        for r in [0.01, 0.5, 3.0, 20.0] {
            assert!((log_sinh(r) - r.sinh().ln()).abs() < 1e-12);
        }
        assert!((log_sinh(800.0) - (800.0 - std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn exact_line_is_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }
}
