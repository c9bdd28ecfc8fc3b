//! Threshold-anchoring diagnostics: detect recurring payment levels from
//! the High-tier mixture centres, measure every centre's distance to its
//! nearest peak, and test the tier differential with label-permutation
//! and K-S comparisons.
//!
//! The unit of analysis is the mixture component: one observation per
//! retained component of every supplier, its mean mapped back to GBP.

use crate::error::{Error, Result};
use crate::phi::Tier;
use crate::stats;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Histogram, smoothing, peak, window, and permutation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchoringConfig {
    /// Histogram bin width, GBP.
    pub bin_width: f64,
    pub range_min: f64,
    pub range_max: f64,
    /// Gaussian smoother width in bins; the kernel is truncated at four
    /// sigma and renormalised.
    pub sigma_bins: f64,
    /// Peaks must have topographic prominence of at least this fraction
    /// of the maximum smoothed density.
    pub prominence_frac: f64,
    /// Peaks at or below this position are treated as near-zero boundary
    /// artefacts and dropped.
    pub min_peak_position: f64,
    /// Proximity windows as a percentage of the peak value.
    pub windows_pct: Vec<f64>,
    pub n_permutations: usize,
    pub permutation_seed: u64,
    /// Optional externally supplied peak list; when non-empty it replaces
    /// endogenous detection (for known threshold registers).
    pub exogenous_peaks: Vec<f64>,
    /// Report `(1 + count) / (1 + N)` p-values instead of raw proportions.
    pub add_one_p_values: bool,
}

impl Default for AnchoringConfig {
    fn default() -> Self {
        AnchoringConfig {
            bin_width: 100.0,
            range_min: 0.0,
            range_max: 30_000.0,
            sigma_bins: 4.0,
            prominence_frac: 0.04,
            min_peak_position: 300.0,
            windows_pct: vec![5.0, 10.0],
            n_permutations: 5000,
            permutation_seed: 0,
            exogenous_peaks: Vec::new(),
            add_one_p_values: false,
        }
    }
}

/// One retained mixture component, mapped back to currency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentreObservation {
    pub supplier: String,
    pub centre_gbp: f64,
    pub tier: Tier,
    pub weight: f64,
}

/// A centre with its unique nearest peak and relative distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentreDistance {
    pub supplier: String,
    pub centre_gbp: f64,
    pub tier: Tier,
    pub weight: f64,
    pub nearest_peak: f64,
    /// `100 * |centre - peak| / peak`.
    pub pct_distance: f64,
}

/// Gaussian-smoothed histogram counts over `[range_min, range_max]`.
/// Values outside the range are excluded; a value exactly at the upper
/// edge falls in the last bin. Bins are left-closed.
pub fn smoothed_histogram(values: &[f64], cfg: &AnchoringConfig) -> Result<Vec<f64>> {
    if cfg.bin_width <= 0.0 || cfg.range_max <= cfg.range_min {
        return Err(Error::Config("anchoring: invalid histogram range".into()));
    }
    let n_bins = ((cfg.range_max - cfg.range_min) / cfg.bin_width).ceil() as usize;
    let mut counts = vec![0.0f64; n_bins];
    let mut any = false;
    for &v in values {
        if v < cfg.range_min || v > cfg.range_max {
            continue;
        }
        let idx = (((v - cfg.range_min) / cfg.bin_width) as usize).min(n_bins - 1);
        counts[idx] += 1.0;
        any = true;
    }
    if !any {
        return Err(Error::Numerical("anchoring: no values inside histogram range".into()));
    }

    let sigma = cfg.sigma_bins;
    let radius = (4.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for t in -radius..=radius {
        kernel.push((-((t * t) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let kernel_sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= kernel_sum;
    }

    let mut smoothed = vec![0.0f64; n_bins];
    for (i, out) in smoothed.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (ki, w) in kernel.iter().enumerate() {
            let j = i as i64 + ki as i64 - radius;
            if j >= 0 && (j as usize) < n_bins {
                acc += w * counts[j as usize];
            }
        }
        *out = acc;
    }
    Ok(smoothed)
}

/// Bin centre of index `i`.
pub fn bin_centre(i: usize, cfg: &AnchoringConfig) -> f64 {
    cfg.range_min + (i as f64 + 0.5) * cfg.bin_width
}

/// Local maxima (plateaus resolved at their midpoint) with topographic
/// prominence: the peak height above the higher of the minima separating
/// it from higher terrain on each side, windows extending to the array
/// edges where no higher terrain exists.
fn peak_indices(density: &[f64]) -> Vec<(usize, f64)> {
    let n = density.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if density[i] > density[i - 1] {
            let mut j = i;
            while j + 1 < n && density[j + 1] == density[i] {
                j += 1;
            }
            if j + 1 < n && density[j + 1] < density[i] {
                peaks.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    peaks
        .into_iter()
        .map(|p| {
            let h = density[p];
            let mut left_min = f64::INFINITY;
            let mut k = p;
            while k > 0 {
                k -= 1;
                if density[k] > h {
                    break;
                }
                left_min = left_min.min(density[k]);
            }
            let mut right_min = f64::INFINITY;
            let mut k = p;
            while k + 1 < n {
                k += 1;
                if density[k] > h {
                    break;
                }
                right_min = right_min.min(density[k]);
            }
            (p, h - left_min.max(right_min).min(h))
        })
        .collect()
}

/// Detected peaks as bin centres, ascending. Empty output is allowed and
/// must be handled by the caller.
pub fn detect_peaks(density: &[f64], cfg: &AnchoringConfig) -> Vec<f64> {
    let max = density.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = cfg.prominence_frac * max;
    let mut peaks: Vec<f64> = peak_indices(density)
        .into_iter()
        .filter(|&(_, prom)| prom >= threshold)
        .map(|(i, _)| bin_centre(i, cfg))
        .filter(|&pos| pos > cfg.min_peak_position)
        .collect();
    peaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    peaks
}

/// Unique nearest peak for a centre: minimum absolute distance, ties
/// broken toward the smaller peak. Returns the peak and the distance as a
/// percentage of the peak value.
pub fn nearest_peak_distance(centre_gbp: f64, peaks: &[f64]) -> Result<(f64, f64)> {
    if peaks.is_empty() {
        return Err(Error::Numerical("nearest_peak_distance: empty peak set".into()));
    }
    let mut best = peaks[0];
    let mut best_d = (centre_gbp - peaks[0]).abs();
    for &p in &peaks[1..] {
        let d = (centre_gbp - p).abs();
        if d < best_d {
            best_d = d;
            best = p;
        }
    }
    Ok((best, 100.0 * best_d / best))
}

/// Result of one label-permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub window_pct: f64,
    /// Count of target-tier observations inside the window.
    pub observed: usize,
    pub n_target: usize,
    pub n_observations: usize,
    pub perm_mean: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
}

fn tier_rank(t: Tier) -> u8 {
    match t {
        Tier::High => 0,
        Tier::Moderate => 1,
        Tier::Low => 2,
    }
}

/// Permute tier labels over fixed proximity flags and count how often the
/// permuted target-tier proximate count reaches the observed one.
///
/// The observations are canonicalised (flags and label multiset sorted)
/// before permuting, and each iteration draws from its own seeded
/// substream, so the p-value is reproducible and invariant to both
/// observation order and thread count. Also returns the permuted counts
/// for null-distribution plots.
pub fn permutation_test(
    flags: &[bool],
    tiers: &[Tier],
    target: Tier,
    window_pct: f64,
    n_perm: usize,
    seed: u64,
    add_one: bool,
) -> Result<(PermutationResult, Vec<u32>)> {
    if flags.len() != tiers.len() {
        return Err(Error::Numerical("permutation_test: length mismatch".into()));
    }
    let n_target = tiers.iter().filter(|&&t| t == target).count();
    if n_target == 0 {
        return Err(Error::Numerical("permutation_test: target tier has no observations".into()));
    }
    let observed = flags.iter().zip(tiers).filter(|&(&f, &t)| f && t == target).count();

    let mut flags_sorted: Vec<bool> = flags.to_vec();
    flags_sorted.sort_by_key(|&f| !f); // proximate observations first
    let mut labels: Vec<Tier> = tiers.to_vec();
    labels.sort_by_key(|&t| tier_rank(t));

    let mut null_counts = Vec::with_capacity(n_perm);
    let mut exceed = 0usize;
    let mut sum = 0u64;
    for iter in 0..n_perm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + iter as u64);
        let mut permuted = labels.clone();
        permuted.shuffle(&mut rng);
        let count = flags_sorted
            .iter()
            .zip(&permuted)
            .filter(|&(&f, &t)| f && t == target)
            .count();
        if count >= observed {
            exceed += 1;
        }
        sum += count as u64;
        null_counts.push(count as u32);
    }
    let p_value = if add_one {
        (1 + exceed) as f64 / (1 + n_perm) as f64
    } else {
        exceed as f64 / n_perm as f64
    };
    Ok((
        PermutationResult {
            window_pct,
            observed,
            n_target,
            n_observations: flags.len(),
            perm_mean: sum as f64 / n_perm as f64,
            p_value,
            n_permutations: n_perm,
            seed,
        },
        null_counts,
    ))
}

/// Per-tier proximity proportion for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierProximity {
    pub tier: Tier,
    pub window_pct: f64,
    pub n_centres: usize,
    pub n_proximate: usize,
    pub proportion: f64,
}

/// Per-peak, per-tier breakdown for one window (nearest-peak assignment
/// partitions the centres).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakTierBreakdown {
    pub peak: f64,
    pub tier: Tier,
    pub window_pct: f64,
    pub n_nearest: usize,
    pub n_within: usize,
    pub proportion_within: f64,
}

/// Proportion of each tier's centres within each window, plus the
/// per-peak breakdown.
pub fn tier_proximity_table(
    distances: &[CentreDistance],
    peaks: &[f64],
    windows_pct: &[f64],
) -> (Vec<TierProximity>, Vec<PeakTierBreakdown>) {
    let tiers = [Tier::High, Tier::Moderate, Tier::Low];
    let mut proportions = Vec::new();
    let mut per_peak = Vec::new();
    for &window in windows_pct {
        for &tier in &tiers {
            let in_tier: Vec<&CentreDistance> =
                distances.iter().filter(|d| d.tier == tier).collect();
            let proximate = in_tier.iter().filter(|d| d.pct_distance <= window).count();
            proportions.push(TierProximity {
                tier,
                window_pct: window,
                n_centres: in_tier.len(),
                n_proximate: proximate,
                proportion: if in_tier.is_empty() {
                    0.0
                } else {
                    proximate as f64 / in_tier.len() as f64
                },
            });
            for &peak in peaks {
                let nearest: Vec<&&CentreDistance> =
                    in_tier.iter().filter(|d| d.nearest_peak == peak).collect();
                let within = nearest.iter().filter(|d| d.pct_distance <= window).count();
                per_peak.push(PeakTierBreakdown {
                    peak,
                    tier,
                    window_pct: window,
                    n_nearest: nearest.len(),
                    n_within: within,
                    proportion_within: if nearest.is_empty() {
                        0.0
                    } else {
                        within as f64 / nearest.len() as f64
                    },
                });
            }
        }
    }
    (proportions, per_peak)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsComparison {
    pub statistic: f64,
    pub p_value: f64,
    pub n_high: usize,
    pub n_low: usize,
}

/// Full anchoring analysis report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchoringReport {
    pub config: AnchoringConfig,
    /// "endogenous-high-tier" or "exogenous".
    pub peaks_source: String,
    pub peaks: Vec<f64>,
    pub n_centres: usize,
    pub distances: Vec<CentreDistance>,
    pub tier_proportions: Vec<TierProximity>,
    pub per_peak: Vec<PeakTierBreakdown>,
    pub permutations: Vec<PermutationResult>,
    /// High vs Low distance-to-peak distributions; Moderate is excluded,
    /// matching the published comparison.
    pub ks_high_vs_low: Option<KsComparison>,
    pub warnings: Vec<String>,
}

/// Permutation null counts per window, kept out of the JSON report and
/// written as plot data instead.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnchoringNulls {
    pub by_window: Vec<(f64, Vec<u32>)>,
}

/// Run the anchoring analysis: peaks from the High-tier centre
/// distribution (or the exogenous list), nearest-peak distances for all
/// tiers, per-window permutation tests targeting the High tier, and the
/// High-vs-Low K-S comparison.
pub fn run_anchoring(
    centres: &[CentreObservation],
    cfg: &AnchoringConfig,
) -> Result<(AnchoringReport, AnchoringNulls)> {
    let mut warnings = Vec::new();

    let (peaks, peaks_source) = if cfg.exogenous_peaks.is_empty() {
        let high_values: Vec<f64> = centres
            .iter()
            .filter(|c| c.tier == Tier::High)
            .map(|c| c.centre_gbp)
            .collect();
        let peaks = if high_values.is_empty() {
            warnings.push("no High-tier centres: peak detection skipped".into());
            Vec::new()
        } else {
            match smoothed_histogram(&high_values, cfg) {
                Ok(density) => detect_peaks(&density, cfg),
                Err(e) => {
                    warnings.push(format!("peak detection skipped: {e}"));
                    Vec::new()
                }
            }
        };
        (peaks, "endogenous-high-tier".to_string())
    } else {
        let mut peaks = cfg.exogenous_peaks.clone();
        peaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (peaks, "exogenous".to_string())
    };

    if peaks.is_empty() && cfg.exogenous_peaks.is_empty() {
        warnings.push("empty peak set: distance and permutation analyses skipped".into());
        return Ok((
            AnchoringReport {
                config: cfg.clone(),
                peaks_source,
                peaks,
                n_centres: centres.len(),
                distances: Vec::new(),
                tier_proportions: Vec::new(),
                per_peak: Vec::new(),
                permutations: Vec::new(),
                ks_high_vs_low: None,
                warnings,
            },
            AnchoringNulls::default(),
        ));
    }

    let mut distances = Vec::with_capacity(centres.len());
    for c in centres {
        let (peak, pct) = nearest_peak_distance(c.centre_gbp, &peaks)?;
        distances.push(CentreDistance {
            supplier: c.supplier.clone(),
            centre_gbp: c.centre_gbp,
            tier: c.tier,
            weight: c.weight,
            nearest_peak: peak,
            pct_distance: pct,
        });
    }

    let (tier_proportions, per_peak) = tier_proximity_table(&distances, &peaks, &cfg.windows_pct);

    let tiers: Vec<Tier> = distances.iter().map(|d| d.tier).collect();
    let mut permutations = Vec::new();
    let mut nulls = AnchoringNulls::default();
    for &window in &cfg.windows_pct {
        let flags: Vec<bool> = distances.iter().map(|d| d.pct_distance <= window).collect();
        match permutation_test(
            &flags,
            &tiers,
            Tier::High,
            window,
            cfg.n_permutations,
            cfg.permutation_seed,
            cfg.add_one_p_values,
        ) {
            Ok((result, null_counts)) => {
                permutations.push(result);
                nulls.by_window.push((window, null_counts));
            }
            Err(e) => warnings.push(format!("permutation test at {window}% skipped: {e}")),
        }
    }

    let high: Vec<f64> = distances
        .iter()
        .filter(|d| d.tier == Tier::High)
        .map(|d| d.pct_distance)
        .collect();
    let low: Vec<f64> = distances
        .iter()
        .filter(|d| d.tier == Tier::Low)
        .map(|d| d.pct_distance)
        .collect();
    let ks_high_vs_low = if !high.is_empty() && !low.is_empty() {
        let (statistic, p_value) = stats::ks_two_sample(&high, &low)?;
        Some(KsComparison { statistic, p_value, n_high: high.len(), n_low: low.len() })
    } else {
        warnings.push("K-S comparison skipped: a tier has no centres".into());
        None
    };

    Ok((
        AnchoringReport {
            config: cfg.clone(),
            peaks_source,
            peaks,
            n_centres: centres.len(),
            distances,
            tier_proportions,
            per_peak,
            permutations,
            ks_high_vs_low,
            warnings,
        },
        nulls,
    ))
}
