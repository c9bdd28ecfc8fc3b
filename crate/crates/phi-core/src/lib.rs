//! Batch scoring engine for the Payment Heterogeneity Index (PHI).
//!
//! PHI summarises the structure of a supplier's payment-amount distribution
//! as a multiplicative composite of four interpretable components:
//!
//! * modality `M` — number of retained Gaussian mixture components,
//! * asymmetry `A = 1 + |a_q|` — Bowley quartile skewness,
//! * tail behaviour `T = 1 + |ln t_q|` — outer-to-inner quantile span ratio,
//! * structural dispersion `D` — weighted within-regime spread of the
//!   dominant component plus log-damped separation of secondary regimes.
//!
//! The crate covers the full batch pipeline: CSV ingest and cleaning,
//! fuzzy supplier-identity harmonisation, global robust standardisation,
//! per-supplier mixture fitting with BIC selection, scoring, percentile
//! ranking and risk tiering, threshold-anchoring diagnostics (peak
//! detection, permutation tests, K-S comparison), a CV baseline, sectoral
//! aggregation, and a deterministic synthetic-cohort generator used as a
//! ground-truth oracle in the test suite.
//!
//! The `phi` binary exposes the pipeline as CLI subcommands; see the
//! crate README for usage.

pub mod anchoring;
pub mod config;
pub mod error;
pub mod gmm;
pub mod harmonise;
pub mod ingest;
pub mod phi;
pub mod pipeline;
pub mod plots;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
