pub mod barycenter;
pub mod bcg;
pub mod entropy;
pub mod ghnet;
pub mod growth;
pub mod natural;
pub mod shortcut;

/// Up to six decimals with trailing zeros dropped: `1`, `2.828427`.
pub(crate) fn short(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub(crate) fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| short(*x)).collect::<Vec<_>>().join(", ")
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
