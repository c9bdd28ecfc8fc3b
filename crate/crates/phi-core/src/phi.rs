//! The heterogeneity index itself: the four structural components, the
//! multiplicative score, its exact log decomposition, percentile ranks,
//! and risk tiers.
//!
//! All components are computed on the supplier's robust-standardised
//! sample (the same units the mixture is fitted in). Every component is
//! at least one, so the product is at least one and the log decomposition
//! is well defined whenever the score exceeds one.

use crate::error::Result;
use crate::gmm::MixtureModel;
use crate::stats::{self, QuantileSet};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Scores within `1 + 1e-12` of one have no log signal to decompose.
pub const DEGENERATE_PHI_TOL: f64 = 1e-12;

/// Per-component shares of `ln(phi)`, in percent. They sum to 100 unless
/// the score is degenerate, in which case all are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub modality: f64,
    pub asymmetry: f64,
    pub tail: f64,
    pub dispersion: f64,
}

/// The four components, their product, and the log decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiComponents {
    /// Post-prune mixture component count `M`.
    pub modality: u32,
    /// `A = 1 + |a_q|`, in `[1, 2]`.
    pub asymmetry: f64,
    /// `T = 1 + |ln t_q|`, at least 1.
    pub tail: f64,
    /// `D = 1 + pi* s* + sum_{i != i*} pi_i s_i ln(1 + d_i)`, at least 1.
    pub dispersion: f64,
    /// `M * A * T * D`.
    pub phi: f64,
    pub contributions: Contributions,
    /// True when `phi <= 1 + 1e-12` and the decomposition is undefined.
    pub degenerate: bool,
}

/// `A = 1 + |a_q|` from Bowley quartile skewness.
pub fn asymmetry_component(q: &QuantileSet) -> f64 {
    1.0 + stats::bowley_skewness(q).abs()
}

/// `T = 1 + |ln t_q|`. The absolute value is inert for nested quantile
/// ranges (`t_q >= 1`) but kept as the definition is written.
pub fn tail_component(q: &QuantileSet, eps: f64) -> f64 {
    1.0 + stats::tail_ratio(q, eps).ln().abs()
}

/// Structural dispersion of the fitted regimes: the weighted spread of the
/// dominant component plus the log-damped, distance-weighted spread of
/// every secondary component.
pub fn dispersion_component(model: &MixtureModel) -> f64 {
    let dom = model.dominant_index();
    let mut d = 1.0 + model.weights[dom] * model.sds[dom];
    for i in 0..model.k() {
        if i == dom {
            continue;
        }
        let sep = (model.means[i] - model.means[dom]).abs();
        d += model.weights[i] * model.sds[i] * (1.0 + sep).ln();
    }
    d
}

/// Share of `ln(phi)` explained by one component value, in percent.
pub fn log_contribution_share(component: f64, phi: f64) -> f64 {
    100.0 * component.ln() / phi.ln()
}

/// Assemble the score from raw component values. This is the single place
/// the product and its decomposition are computed.
pub fn components_from_values(m: u32, a: f64, t: f64, d: f64) -> PhiComponents {
    let phi = m as f64 * a * t * d;
    let degenerate = phi <= 1.0 + DEGENERATE_PHI_TOL;
    let contributions = if degenerate {
        Contributions { modality: 0.0, asymmetry: 0.0, tail: 0.0, dispersion: 0.0 }
    } else {
        Contributions {
            modality: log_contribution_share(m as f64, phi),
            asymmetry: log_contribution_share(a, phi),
            tail: log_contribution_share(t, phi),
            dispersion: log_contribution_share(d, phi),
        }
    };
    PhiComponents { modality: m, asymmetry: a, tail: t, dispersion: d, phi, contributions, degenerate }
}

/// Score one supplier from its post-prune mixture and quantile summary,
/// both derived from the same standardised sample.
pub fn compute_phi(model: &MixtureModel, q: &QuantileSet, eps: f64) -> PhiComponents {
    components_from_values(
        model.k() as u32,
        asymmetry_component(q),
        tail_component(q, eps),
        dispersion_component(model),
    )
}

/// Percentile ranks on a 0-100 scale: `100 * rank / N` with average ranks
/// on ties, so the maximum score maps to 100.
pub fn percentile_ranks(scores: &[f64]) -> Vec<f64> {
    let n = scores.len() as f64;
    stats::average_ranks(scores).into_iter().map(|r| 100.0 * r / n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    Low,
    Moderate,
    High,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Low => "Low",
            Tier::Moderate => "Moderate",
            Tier::High => "High",
        })
    }
}

impl std::str::FromStr for Tier {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Tier, String> {
        match s {
            "Low" => Ok(Tier::Low),
            "Moderate" => Ok(Tier::Moderate),
            "High" => Ok(Tier::High),
            other => Err(format!("unknown tier {other:?}")),
        }
    }
}

/// Percentile cutoffs for tiering, defaulting to the 70th/90th.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TierCuts {
    pub low: f64,
    pub high: f64,
}

impl Default for TierCuts {
    fn default() -> Self {
        TierCuts { low: 70.0, high: 90.0 }
    }
}

/// One supplier's score, rank, and tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiScore {
    pub supplier: String,
    pub components: PhiComponents,
    pub percentile: f64,
    pub tier: Tier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierSummary {
    pub n_high: usize,
    pub n_moderate: usize,
    pub n_low: usize,
    /// Cohorts below ten suppliers are tiered Low across the board.
    pub degenerate_cohort: bool,
}

/// Map percentile cutoffs to whole supplier counts: the High tier takes
/// the top `round(N * (100 - high) / 100)` suppliers, High + Moderate the
/// top `round(N * (100 - low) / 100)`. Boundary ties resolve by score then
/// pseudonym.
pub fn assign_tiers(scores: &mut [PhiScore], cuts: TierCuts) -> Result<TierSummary> {
    let n = scores.len();
    if n == 0 {
        return Ok(TierSummary { n_high: 0, n_moderate: 0, n_low: 0, degenerate_cohort: true });
    }
    if n < 10 {
        for s in scores.iter_mut() {
            s.tier = Tier::Low;
        }
        return Ok(TierSummary { n_high: 0, n_moderate: 0, n_low: n, degenerate_cohort: true });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .components
            .phi
            .partial_cmp(&scores[a].components.phi)
            .unwrap()
            .then_with(|| scores[a].supplier.cmp(&scores[b].supplier))
    });

    let nf = n as f64;
    let n_high = ((nf * (100.0 - cuts.high) / 100.0).round() as usize).min(n);
    let n_mod_high = ((nf * (100.0 - cuts.low) / 100.0).round() as usize).clamp(n_high, n);
    for (pos, &idx) in order.iter().enumerate() {
        scores[idx].tier = if pos < n_high {
            Tier::High
        } else if pos < n_mod_high {
            Tier::Moderate
        } else {
            Tier::Low
        };
    }
    Ok(TierSummary {
        n_high,
        n_moderate: n_mod_high - n_high,
        n_low: n - n_mod_high,
        degenerate_cohort: false,
    })
}
