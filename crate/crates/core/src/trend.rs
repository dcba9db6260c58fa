//! Numerical surrogates for "tends to zero" and "tends to infinity" along a
//! sequence: least-squares slopes of `log q` over the trailing half.

use serde::Serialize;

/// Thresholds for the trend rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendOptions {
    /// `-slope_threshold` or below means decay, `+slope_threshold` or above growth.
    pub slope_threshold: f64,
    /// Required ratio between first and last value.
    pub drop_factor: f64,
}

impl Default for TrendOptions {
    fn default() -> Self {
        Self { slope_threshold: 0.5, drop_factor: 10.0 }
    }
}

/// Fitted behaviour of a nonnegative quantity along a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend {
    /// Slope of `log q` against `log z` (or against `k` without abscissa);
    /// `None` when fewer than three trailing values are above the floor.
    pub slope: Option<f64>,
    pub first: f64,
    pub last: f64,
    pub trailing_min: f64,
    pub trailing_max: f64,
    /// Every trailing value is at or below the floor.
    pub negligible: bool,
    pub to_zero: bool,
    pub to_infinity: bool,
}

impl Trend {
    pub fn bounded(&self) -> bool {
        !self.to_infinity
    }

    pub fn bounded_away_from_zero(&self) -> bool {
        !self.to_zero && self.trailing_min > 0.0
    }
}

/// Start of the trailing half, keeping at least three points when possible.
pub fn trailing_start(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        (n / 2).min(n - 3)
    }
}

/// Fits the trend of `values` (taken in absolute value). Values at or below
/// `floor` count as zero and are left out of the fit.
pub fn fit_trend(values: &[f64], abscissa: Option<&[f64]>, floor: f64, opts: &TrendOptions) -> Trend {
    let n = values.len();
    let nan = Trend {
        slope: None,
        first: f64::NAN,
        last: f64::NAN,
        trailing_min: f64::NAN,
        trailing_max: f64::NAN,
        negligible: false,
        to_zero: false,
        to_infinity: false,
    };
    if n == 0 {
        return nan;
    }
    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let start = trailing_start(n);
    let tail = &abs[start..];
    let trailing_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let trailing_max = tail.iter().copied().fold(0.0, f64::max);
    let (first, last) = (abs[0], abs[n - 1]);
    let negligible = tail.iter().all(|&v| v <= floor);
    if negligible {
        return Trend { slope: None, first, last, trailing_min, trailing_max, negligible, to_zero: true, to_infinity: false };
    }
    if tail.iter().any(|v| !v.is_finite()) {
        let grows = tail.last().is_some_and(|v| v.is_infinite());
        return Trend { slope: None, first, last, trailing_min, trailing_max, negligible, to_zero: false, to_infinity: grows };
    }
    let pts: Vec<(f64, f64)> = (start..n)
        .filter(|&k| abs[k] > floor)
        .map(|k| (abscissa.map_or(k as f64, |z| z[k].ln()), abs[k].ln()))
        .collect();
    let slope = least_squares_slope(&pts);
    let (to_zero, to_infinity) = match slope {
        Some(s) => (
            s <= -opts.slope_threshold && (last <= floor || last < first / opts.drop_factor),
            s >= opts.slope_threshold && last > first * opts.drop_factor,
        ),
        None => (last <= floor, false),
    };
    Trend { slope, first, last, trailing_min, trailing_max, negligible, to_zero, to_infinity }
}

/// Convergence of a sequence of reals: its successive differences tend to
/// zero, or are negligible against `rel_floor` times the largest value.
pub fn fit_convergence(values: &[f64], abscissa: Option<&[f64]>, rel_floor: f64, opts: &TrendOptions) -> Trend {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let z: Option<Vec<f64>> = abscissa.map(|z| z[1..].to_vec());
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    fit_trend(&diffs, z.as_deref(), rel_floor * scale, opts)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
