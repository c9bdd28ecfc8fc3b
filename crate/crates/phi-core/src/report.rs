//! Cohort-level aggregations built on top of the per-supplier scores:
//! the score report rows, sectoral tier table, cohort log-contribution
//! statistics, component correlation matrices, and the CV comparison.

use crate::error::Result;
use crate::ingest::PenceTotal;
use crate::phi::{PhiComponents, Tier};
use crate::stats;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One supplier's full report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub supplier: String,
    pub n_payments: u64,
    pub total_spend: PenceTotal,
    /// Modal directorate by row count, ties lexicographic.
    pub directorate: String,
    pub components: PhiComponents,
    pub percentile: f64,
    pub tier: Tier,
    /// Coefficient of variation on raw positive amounts.
    pub cv: f64,
    /// 1 = highest CV in the cohort.
    pub cv_rank: usize,
    /// 1 = highest score in the cohort.
    pub phi_rank: usize,
}

/// Descending ordinal ranks (1 = largest), ties broken by the paired key
/// so ranking is deterministic.
pub fn descending_ranks(values: &[f64], keys: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b].partial_cmp(&values[a]).unwrap().then_with(|| keys[a].cmp(&keys[b]))
    });
    let mut ranks = vec![0; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TierCounts {
    pub high: usize,
    pub moderate: usize,
    pub low: usize,
}

impl TierCounts {
    fn bump(&mut self, tier: Tier) {
        match tier {
            Tier::High => self.high += 1,
            Tier::Moderate => self.moderate += 1,
            Tier::Low => self.low += 1,
        }
    }
    pub fn total(&self) -> usize {
        self.high + self.moderate + self.low
    }
}

/// Tier counts per directorate; row sums equal directorate supplier
/// counts and the grand total equals the cohort size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectoralTable {
    pub rows: BTreeMap<String, TierCounts>,
    pub total: TierCounts,
}

pub fn sectoral_aggregate(rows: &[ScoreRow]) -> SectoralTable {
    let mut by_directorate: BTreeMap<String, TierCounts> = BTreeMap::new();
    let mut total = TierCounts::default();
    for row in rows {
        by_directorate.entry(row.directorate.clone()).or_default().bump(row.tier);
        total.bump(row.tier);
    }
    SectoralTable { rows: by_directorate, total }
}

/// Mean and median of `ln(X)` per component across the cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLogStats {
    pub component: String,
    pub mean_ln: f64,
    pub median_ln: f64,
}

pub fn cohort_contribution_stats(rows: &[ScoreRow]) -> Result<Vec<ComponentLogStats>> {
    let series: [(&str, Box<dyn Fn(&ScoreRow) -> f64>); 4] = [
        ("M", Box::new(|r| f64::from(r.components.modality).ln())),
        ("A", Box::new(|r| r.components.asymmetry.ln())),
        ("T", Box::new(|r| r.components.tail.ln())),
        ("D", Box::new(|r| r.components.dispersion.ln())),
    ];
    let mut out = Vec::with_capacity(4);
    for (label, extract) in series {
        let mut values: Vec<f64> = rows.iter().map(&extract).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        let median = stats::quantile(&values, 0.5)?;
        out.push(ComponentLogStats { component: label.into(), mean_ln: mean, median_ln: median });
    }
    Ok(out)
}

/// Pairwise Spearman matrix over the labelled series; `None` marks pairs
/// where the correlation is undefined (a series entirely tied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub rho: Vec<Vec<Option<f64>>>,
}

fn correlation_matrix(labels: &[&str], series: &[Vec<f64>]) -> CorrelationMatrix {
    let k = series.len();
    let mut rho = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            rho[i][j] = if i == j {
                Some(1.0)
            } else {
                stats::spearman_rho(&series[i], &series[j]).ok().map(|(r, _)| r)
            };
        }
    }
    CorrelationMatrix { labels: labels.iter().map(|s| s.to_string()).collect(), rho }
}

/// Spearman matrices of (M, A, T, D, PHI): one on component values, one
/// on log-contribution percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCorrelations {
    pub on_values: CorrelationMatrix,
    pub on_contributions: CorrelationMatrix,
}

pub fn component_correlations(rows: &[ScoreRow]) -> ComponentCorrelations {
    let labels = ["M", "A", "T", "D", "PHI"];
    let values: Vec<Vec<f64>> = vec![
        rows.iter().map(|r| f64::from(r.components.modality)).collect(),
        rows.iter().map(|r| r.components.asymmetry).collect(),
        rows.iter().map(|r| r.components.tail).collect(),
        rows.iter().map(|r| r.components.dispersion).collect(),
        rows.iter().map(|r| r.components.phi).collect(),
    ];
    let contributions: Vec<Vec<f64>> = vec![
        rows.iter().map(|r| r.components.contributions.modality).collect(),
        rows.iter().map(|r| r.components.contributions.asymmetry).collect(),
        rows.iter().map(|r| r.components.contributions.tail).collect(),
        rows.iter().map(|r| r.components.contributions.dispersion).collect(),
        rows.iter().map(|r| r.components.phi).collect(),
    ];
    ComponentCorrelations {
        on_values: correlation_matrix(&labels, &values),
        on_contributions: correlation_matrix(&labels, &contributions),
    }
}

/// Cohort-level Spearman between the CV baseline and the score. The
/// correlation is absent when it is undefined (fewer than three suppliers
/// or an entirely tied series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvComparison {
    pub spearman_rho: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
    /// Top suppliers by score, with both rank columns.
    pub top: Vec<ScoreRow>,
}

pub fn cv_comparison(rows: &[ScoreRow], top_k: usize) -> CvComparison {
    let cv: Vec<f64> = rows.iter().map(|r| r.cv).collect();
    let phi: Vec<f64> = rows.iter().map(|r| r.components.phi).collect();
    let rho_p = stats::spearman_rho(&cv, &phi).ok();
    let mut top: Vec<ScoreRow> = rows.to_vec();
    top.sort_by_key(|r| r.phi_rank);
    top.truncate(top_k);
    CvComparison {
        spearman_rho: rho_p.map(|(r, _)| r),
        p_value: rho_p.map(|(_, p)| p),
        n: rows.len(),
        top,
    }
}
