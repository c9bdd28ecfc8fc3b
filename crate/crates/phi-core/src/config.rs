//! Run configuration: one TOML file with every operational default as a
//! named key. All thresholds echo into the run manifest so reports carry
//! full provenance.

use crate::anchoring::AnchoringConfig;
use crate::error::{Error, Result};
use crate::gmm::EmConfig;
use crate::harmonise::MatchThresholds;
use crate::ingest::{ColumnMap, IngestConfig};
use crate::phi::TierCuts;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Quantile convention used throughout, echoed into the manifest.
pub const QUANTILE_RULE: &str = "linear interpolation on (n-1)p";
/// Histogram bin convention for the anchoring analysis.
pub const BIN_RULE: &str = "left-closed bins; the upper range edge falls in the last bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub path: PathBuf,
    pub delimiter: char,
    /// Date formats tried in order; dates are carried but unused by
    /// scoring.
    pub date_formats: Vec<String>,
    pub columns: ColumnMap,
}

impl Default for InputConfig {
    fn default() -> Self {
        let ingest = IngestConfig::default();
        InputConfig {
            path: PathBuf::new(),
            delimiter: ingest.delimiter,
            date_formats: ingest.date_formats,
            columns: ingest.columns,
        }
    }
}

impl InputConfig {
    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            delimiter: self.delimiter,
            date_formats: self.date_formats.clone(),
            columns: self.columns.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Volume filter: suppliers need at least this many cleaned payments.
    pub min_payments: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { min_payments: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmoniseConfig {
    pub tfidf_cosine_min: f64,
    pub token_set_ratio_min: u32,
    pub jaccard_min: f64,
    /// Strict lower bound for the ensemble mean.
    pub ensemble_min: f64,
    /// Legal-form aliases applied during normalisation.
    pub suffix_aliases: BTreeMap<String, String>,
    pub pseudonym_salt: String,
}

impl Default for HarmoniseConfig {
    fn default() -> Self {
        let t = MatchThresholds::default();
        HarmoniseConfig {
            tfidf_cosine_min: t.tfidf_cosine_min,
            token_set_ratio_min: t.token_set_ratio_min,
            jaccard_min: t.jaccard_min,
            ensemble_min: t.ensemble_min,
            suffix_aliases: crate::harmonise::default_suffix_table(),
            pseudonym_salt: "phi".into(),
        }
    }
}

impl HarmoniseConfig {
    pub fn thresholds(&self) -> MatchThresholds {
        MatchThresholds {
            tfidf_cosine_min: self.tfidf_cosine_min,
            token_set_ratio_min: self.token_set_ratio_min,
            jaccard_min: self.jaccard_min,
            ensemble_min: self.ensemble_min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhiConfig {
    /// Components below this weight are dropped after BIC selection.
    pub prune_weight: f64,
    /// Stabiliser in the tail ratio.
    pub eps: f64,
    pub tier_cut_low: f64,
    pub tier_cut_high: f64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { prune_weight: 0.05, eps: 1e-6, tier_cut_low: 70.0, tier_cut_high: 90.0 }
    }
}

impl PhiConfig {
    pub fn tier_cuts(&self) -> TierCuts {
        TierCuts { low: self.tier_cut_low, high: self.tier_cut_high }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    /// Use the n-1 (sample) standard deviation instead of the population
    /// one.
    pub sample_sd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Emit the per-supplier fit dump (JSON lines).
    pub fit_dump: bool,
    /// Emit static SVG plots alongside the plot-data CSVs.
    pub plots: bool,
    /// Rows in the CV comparison table.
    pub top_k: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("phi-out"), fit_dump: true, plots: false, top_k: 12 }
    }
}

/// The full run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputConfig,
    pub selection: SelectionConfig,
    pub harmonise: HarmoniseConfig,
    pub em: EmConfig,
    pub phi: PhiConfig,
    pub cv: CvConfig,
    pub anchoring: AnchoringConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config(msg));
        if self.selection.min_payments == 0 {
            return err("selection.min_payments must be at least 1".into());
        }
        let h = &self.harmonise;
        if !(0.0..=1.0).contains(&h.tfidf_cosine_min)
            || !(0.0..=1.0).contains(&h.jaccard_min)
            || !(-1.0..=1.0).contains(&h.ensemble_min)
            || h.token_set_ratio_min > 100
        {
            return err("harmonise thresholds out of range".into());
        }
        if self.em.tol <= 0.0 || self.em.max_iter == 0 || self.em.reg <= 0.0 || self.em.n_init == 0
        {
            return err("em settings must be positive".into());
        }
        let p = &self.phi;
        if !(0.0..0.25).contains(&p.prune_weight) {
            return err(format!("phi.prune_weight {} outside [0, 0.25)", p.prune_weight));
        }
        if p.eps <= 0.0 {
            return err("phi.eps must be positive".into());
        }
        if !(0.0 <= p.tier_cut_low && p.tier_cut_low <= p.tier_cut_high && p.tier_cut_high <= 100.0)
        {
            return err(format!(
                "tier cuts must satisfy 0 <= low <= high <= 100, got ({}, {})",
                p.tier_cut_low, p.tier_cut_high
            ));
        }
        let a = &self.anchoring;
        if a.bin_width <= 0.0 || a.range_max <= a.range_min || a.sigma_bins <= 0.0 {
            return err("anchoring histogram settings invalid".into());
        }
        if !(0.0..=1.0).contains(&a.prominence_frac) {
            return err("anchoring.prominence_frac outside [0, 1]".into());
        }
        if a.windows_pct.is_empty() || a.windows_pct.iter().any(|&w| w <= 0.0) {
            return err("anchoring.windows_pct must be non-empty and positive".into());
        }
        if a.n_permutations == 0 {
            return err("anchoring.n_permutations must be at least 1".into());
        }
        if self.output.top_k == 0 {
            return err("output.top_k must be at least 1".into());
        }
        Ok(())
    }

    /// Hash of the full configuration, embedded in every machine-readable
    /// output in place of timestamps.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    /// The default configuration rendered as TOML (used by
    /// `validate-config` output and the README example).
    pub fn example_toml() -> String {
        toml::to_string_pretty(&RunConfig::default()).expect("default config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_operational_values() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.selection.min_payments, 50);
        assert_eq!(cfg.harmonise.tfidf_cosine_min, 0.76);
        assert_eq!(cfg.harmonise.token_set_ratio_min, 77);
        assert_eq!(cfg.harmonise.jaccard_min, 0.36);
        assert_eq!(cfg.harmonise.ensemble_min, 0.66);
        assert_eq!(cfg.em.tol, 1e-3);
        assert_eq!(cfg.em.max_iter, 100);
        assert_eq!(cfg.em.seed, 0);
        assert_eq!(cfg.em.reg, 1e-6);
        assert_eq!(cfg.phi.prune_weight, 0.05);
        assert_eq!(cfg.phi.eps, 1e-6);
        assert_eq!((cfg.phi.tier_cut_low, cfg.phi.tier_cut_high), (70.0, 90.0));
        assert_eq!(cfg.anchoring.bin_width, 100.0);
        assert_eq!(cfg.anchoring.range_max, 30_000.0);
        assert_eq!(cfg.anchoring.sigma_bins, 4.0);
        assert_eq!(cfg.anchoring.prominence_frac, 0.04);
        assert_eq!(cfg.anchoring.min_peak_position, 300.0);
        assert_eq!(cfg.anchoring.n_permutations, 5000);
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip() {
        let text = RunConfig::example_toml();
        let parsed: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(parsed, RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("[phi]\nprune_wieght = 0.05\n").unwrap_err();
        assert!(err.to_string().contains("prune_wieght"));
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = RunConfig::default();
        cfg.phi.tier_cut_low = 95.0;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.anchoring.windows_pct = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.em.tol = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.config_hash(), b.config_hash());
        b.em.seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
