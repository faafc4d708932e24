//! Classification of nonnegative series from finitely many terms.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesOptions {
    pub max_terms: usize,
    /// Summation stops once a term falls below this.
    pub cutoff: f64,
    /// Partial sums above this are divergent outright.
    pub threshold: f64,
    /// Dyadic block sums decaying more slowly than `m^slope` are divergent.
    pub slope_threshold: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { max_terms: 1_000_000, cutoff: 1e-15, threshold: 1e3, slope_threshold: -0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    pub n: usize,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub classification: Classification,
    pub method: String,
    pub terms: usize,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub partial_sum: f64,
    /// Extrapolated value; `inf` when divergent.
    #[serde(serialize_with = "crate::ext::serialize")]
    pub limit: f64,
    /// Partial sums at `n = 1, 2, 4, ...` and at the last term.
    pub partial_sums: Vec<PartialSum>,
    /// Log-log slope of the last dyadic block sums.
    #[serde(serialize_with = "crate::ext::serialize_opt")]
    pub slope: Option<f64>,
}

impl SeriesReport {
    pub fn is_divergent(&self) -> bool {
        self.classification == Classification::Divergent
    }
}

const SLOPE_BLOCKS: usize = 6;

/// Sums `terms` (nonnegative) and classifies the series.
pub fn classify_series(terms: impl IntoIterator<Item = Result<f64>>, opts: &SeriesOptions) -> Result<SeriesReport> {
    let mut sum = 0.0;
    let mut n = 0usize;
    let mut dyadic = vec![];
    let mut next = 1usize;
    let mut stop = "exhausted";
    for t in terms.into_iter() {
        let t = t?;
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidMeasure(format!("series term {t} at index {}", n + 1)));
        }
        n += 1;
        sum += t;
        if n == next {
            dyadic.push(PartialSum { n, sum });
            next *= 2;
        }
        if sum == f64::INFINITY {
            stop = "infinite-term";
            break;
        }
        if sum > opts.threshold {
            break;
        }
        if t < opts.cutoff {
            stop = "early-stop";
            break;
        }
        if n >= opts.max_terms {
            stop = "truncated";
            break;
        }
    }
    let mut partial_sums = dyadic.clone();
    if partial_sums.last().map(|p| p.n) != Some(n) {
        partial_sums.push(PartialSum { n, sum });
    }
    let report = |classification, method: String, limit, slope| SeriesReport {
        classification,
        method,
        terms: n,
        partial_sum: sum,
        limit,
        partial_sums: partial_sums.clone(),
        slope,
    };

    if stop == "infinite-term" || sum > opts.threshold {
        return Ok(report(Classification::Divergent, format!("partial sum above {}", opts.threshold), f64::INFINITY, None));
    }
    if stop != "truncated" {
        let how = if stop == "early-stop" { format!("terms below {}", opts.cutoff) } else { "finite sum".into() };
        return Ok(report(Classification::Convergent, how, sum, None));
    }

    // Blocks S_{2m} - S_m over dyadic m.
    let blocks: Vec<(f64, f64)> = dyadic
        .windows(2)
        .map(|w| (w[0].n as f64, w[1].sum - w[0].sum))
        .collect();
    let tail: Vec<(f64, f64)> = blocks.iter().rev().take(SLOPE_BLOCKS).rev().copied().collect();
    if tail.len() < 3 {
        return Ok(report(Classification::Convergent, "too few terms for a slope; partial sum".into(), sum, None));
    }
    if tail.iter().any(|b| b.1 <= 0.0) {
        return Ok(report(Classification::Convergent, "vanishing block sums".into(), sum, None));
    }
    let slope = log_slope(&tail);
    if slope >= opts.slope_threshold {
        return Ok(report(
            Classification::Divergent,
            format!("block-sum slope {slope:.3} >= {}", opts.slope_threshold),
            f64::INFINITY,
            Some(slope),
        ));
    }
    let k = dyadic.len();
    let (s0, s1, s2) = (dyadic[k - 3].sum, dyadic[k - 2].sum, dyadic[k - 1].sum);
    let denom = s2 - 2.0 * s1 + s0;
    let limit = if denom < 0.0 { s2 - (s2 - s1).powi(2) / denom } else { s2 };
    Ok(report(
        Classification::Convergent,
        format!("block-sum slope {slope:.3} < {}; Aitken on dyadic partial sums", opts.slope_threshold),
        limit.max(sum),
        Some(slope),
    ))
}

fn log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
