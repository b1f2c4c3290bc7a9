use serde::{Deserialize, Serialize};

/// Least-squares fit value ≈ c0 + c1·ln k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub c0: f64,
    pub c1: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// max(value) − min(value) over the fitted points.
    pub spread: f64,
}

pub fn log_fit(points: &[(f64, f64)]) -> LogFit {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c0 - c1 * x).powi(2)).sum();
    let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    LogFit { c0, c1, residual: (rss / n).sqrt(), spread: hi - lo }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_log_data() {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&k: &f64| (k, 2.0 - 0.5 * k.ln())).collect();
        let fit = log_fit(&pts);
        assert!((fit.c1 + 0.5).abs() < 1e-14 && (fit.c0 - 2.0).abs() < 1e-13);
        assert!(fit.residual < 1e-14);
    }
}
