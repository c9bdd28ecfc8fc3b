//! Robust quantile machinery and the non-parametric statistics used by the
//! scoring pipeline and its validation suite.
//!
//! Conventions fixed here (and echoed into the run manifest):
//!
//! * quantiles use linear interpolation on `(n-1)p` ("type 7");
//! * the coefficient of variation defaults to the population standard
//!   deviation;
//! * the two-sample K-S p-value uses the asymptotic Kolmogorov series with
//!   effective sample size `na*nb/(na+nb)`, truncated at 100 terms.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Quantile summary of one supplier's standardised sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSet {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub n: usize,
}

impl QuantileSet {
    /// Compute the five working quantiles from an ascending-sorted sample.
    pub fn from_sorted(sample: &[f64]) -> Result<Self> {
        Ok(QuantileSet {
            q05: quantile(sample, 0.05)?,
            q25: quantile(sample, 0.25)?,
            q50: quantile(sample, 0.50)?,
            q75: quantile(sample, 0.75)?,
            q95: quantile(sample, 0.95)?,
            n: sample.len(),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q75 - self.q25
    }
}

/// Corpus-wide location/scale used to standardise every payment.
///
/// Computed over all cleaned payments, never per supplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalScale {
    /// Global median payment, GBP.
    pub median: f64,
    /// Global interquartile range `Q3 - Q1`, GBP.
    pub iqr: f64,
}

impl GlobalScale {
    /// Derive the global scale from an ascending-sorted list of cleaned
    /// payment amounts in GBP.
    pub fn from_sorted(amounts: &[f64]) -> Result<Self> {
        let median = quantile(amounts, 0.5)?;
        let iqr = quantile(amounts, 0.75)? - quantile(amounts, 0.25)?;
        Ok(GlobalScale { median, iqr })
    }

    /// Map a standardised value back to GBP.
    pub fn to_gbp(&self, standardised: f64) -> f64 {
        standardised * self.iqr + self.median
    }
}

/// Linear-interpolation quantile on an ascending-sorted sample:
/// `h = (n-1)p`, result `x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)])`.
pub fn quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Numerical("quantile of empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Numerical(format!("quantile p={p} outside [0,1]")));
    }
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[n - 1])
    }
}

/// `(amount - median) / iqr`. Negative outputs are valid (below-median
/// payments). A zero IQR means the corpus is degenerate and cannot anchor
/// a common reference frame.
pub fn robust_standardise(amount_gbp: f64, scale: &GlobalScale) -> Result<f64> {
    if scale.iqr <= 0.0 {
        return Err(Error::Config(format!(
            "degenerate corpus: global IQR must be positive, got {}",
            scale.iqr
        )));
    }
    Ok((amount_gbp - scale.median) / scale.iqr)
}

/// Bowley quartile skewness, in `[-1, 1]`; defined as 0 when `Q3 == Q1`.
pub fn bowley_skewness(q: &QuantileSet) -> f64 {
    let iqr = q.q75 - q.q25;
    if iqr != 0.0 {
        (q.q75 + q.q25 - 2.0 * q.q50) / iqr
    } else {
        0.0
    }
}

/// Epsilon-stabilised ratio of the 5-95% span to the interquartile span.
/// Nested quantile ranges guarantee `t_q >= 1`.
pub fn tail_ratio(q: &QuantileSet, eps: f64) -> f64 {
    ((q.q95 - q.q05) + eps) / ((q.q75 - q.q25) + eps)
}

/// Coefficient of variation `sigma / mu` on raw positive amounts.
///
/// `sample_sd = false` (the default) uses the population standard
/// deviation.
pub fn coefficient_of_variation(sample: &[f64], sample_sd: bool) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Numerical("CV of empty sample".into()));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::Numerical("CV undefined: sample mean is zero".into()));
    }
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    let denom = if sample_sd {
        if sample.len() < 2 {
            return Err(Error::Numerical("sample CV needs n >= 2".into()));
        }
        n - 1.0
    } else {
        n
    };
    Ok((ss / denom).sqrt() / mean)
}

/// Average ranks (1-based), ties receiving the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average of ranks i+1..=j+1
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling and a
/// two-sided p-value from the t approximation with `n - 2` degrees of
/// freedom.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::Numerical("spearman: unequal lengths".into()));
    }
    if x.len() < 3 {
        return Err(Error::Numerical("spearman: need at least 3 pairs".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Numerical(
            "spearman undefined: an input is entirely tied".into(),
        ));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = n - 2.0;
    let p = if 1.0 - rho * rho <= 0.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df)
            .map_err(|e| Error::Numerical(format!("t distribution: {e}")))?;
        (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
    };
    Ok((rho, p))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`,
/// truncated at 100 terms and clamped to `[0, 1]`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100u32 {
        let k2 = (k * k) as f64;
        let term = (-2.0 * k2 * lambda * lambda).exp();
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// The statistic is the supremum over pooled sample points of the absolute
/// ECDF difference. The p-value is asymptotic with effective sample size
/// `na*nb/(na+nb)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Numerical("ks_two_sample: empty sample".into()));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len(), sb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na || j < nb {
        let x = match (sa.get(i), sb.get(j)) {
            (Some(&av), Some(&bv)) => av.min(bv),
            (Some(&av), None) => av,
            (None, Some(&bv)) => bv,
            (None, None) => break,
        };
        while i < na && sa[i] <= x {
            i += 1;
        }
        while j < nb && sb[j] <= x {
            j += 1;
        }
        let diff = (i as f64 / na as f64 - j as f64 / nb as f64).abs();
        if diff > d {
            d = diff;
        }
    }
    let ne = (na as f64 * nb as f64) / (na + nb) as f64;
    let p = kolmogorov_sf(ne.sqrt() * d);
    Ok((d, p))
}

/// Lorenz curve points for spend concentration: suppliers sorted ascending
/// by spend, cumulative supplier share against cumulative spend share.
/// Starts at (0,0) and ends at (1,1).
pub fn lorenz_points(spend_by_supplier: &[f64]) -> Result<Vec<(f64, f64)>> {
    if spend_by_supplier.iter().any(|&s| s < 0.0) {
        return Err(Error::Numerical("lorenz: negative spend".into()));
    }
    let total: f64 = spend_by_supplier.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numerical("lorenz: zero total spend".into()));
    }
    let mut sorted = spend_by_supplier.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = sorted.len() as f64;
    let mut points = Vec::with_capacity(sorted.len() + 1);
    points.push((0.0, 0.0));
    let mut cum = 0.0;
    for (k, s) in sorted.iter().enumerate() {
        cum += s;
        points.push(((k + 1) as f64 / n, cum / total));
    }
    Ok(points)
}
