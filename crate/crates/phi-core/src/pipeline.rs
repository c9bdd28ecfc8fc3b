//! End-to-end orchestration: ingest, harmonise, select, standardise, fit,
//! score, tier, and aggregate into a deterministic report bundle.
//!
//! Machine-readable outputs embed the config hash rather than timestamps;
//! re-running with the same inputs and configuration yields byte-identical
//! files regardless of thread count (per-supplier fits are independently
//! seeded and collected in supplier order).

use crate::anchoring::{self, AnchoringNulls, AnchoringReport, CentreObservation};
use crate::config::{RunConfig, BIN_RULE, QUANTILE_RULE};
use crate::error::{Error, Result};
use crate::gmm::{self, CandidateFit};
use crate::harmonise::{self, AuditRow};
use crate::ingest::{self, CorpusStats, PaymentRecord, PenceTotal, RejectedRow};
use crate::phi::{self, PhiScore, Tier, TierSummary};
use crate::report::{self, ComponentCorrelations, ComponentLogStats, CvComparison, ScoreRow, SectoralTable};
use crate::stats::{self, GlobalScale, QuantileSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Provenance header embedded in every machine-readable output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub config_hash: String,
    pub quantile_rule: String,
    pub bin_rule: String,
    pub config: RunConfig,
}

/// Per-supplier fit diagnostics (JSON lines dump).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDump {
    pub supplier: String,
    pub n: usize,
    pub candidates: Vec<CandidateFit>,
    pub converged: bool,
    pub weights: Vec<f64>,
    pub means_standardised: Vec<f64>,
    pub sds_standardised: Vec<f64>,
    pub means_gbp: Vec<f64>,
    pub sds_gbp: Vec<f64>,
}

/// Everything one `score` run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub manifest: RunManifest,
    pub corpus: CorpusStats,
    pub global_scale: GlobalScale,
    pub tier_summary: TierSummary,
    pub scores: Vec<ScoreRow>,
    pub audit: Vec<AuditRow>,
    pub rejects: Vec<RejectedRow>,
    pub lorenz: Vec<(f64, f64)>,
    pub sectoral: SectoralTable,
    pub contribution_stats: Vec<ComponentLogStats>,
    pub correlations: ComponentCorrelations,
    pub cv: CvComparison,
    pub centres: Vec<CentreObservation>,
    pub anchoring: AnchoringReport,
    pub fits: Vec<FitDump>,
    pub warnings: Vec<String>,
    /// Histogram of standardised cleaned amounts, truncated at the 99th
    /// percentile (plot data).
    pub standardised_hist: Vec<(f64, u64)>,
    /// Payment counts per analytic supplier (plot data).
    pub payment_counts: Vec<(String, u64)>,
    #[serde(skip)]
    pub anchoring_nulls: AnchoringNulls,
}

struct SupplierResult {
    supplier: String,
    n: u64,
    total_spend: PenceTotal,
    directorate: String,
    components: phi::PhiComponents,
    cv: f64,
    fit: FitDump,
    centres: Vec<(f64, f64)>, // (mean_standardised, weight)
}

fn modal_directorate(records: &[&PaymentRecord]) -> String {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        *counts.entry(r.directorate.as_str()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|(na, ca), (nb, cb)| ca.cmp(cb).then_with(|| nb.cmp(na)))
        .map(|(name, _)| name.to_string())
        .unwrap_or_default()
}

fn score_supplier(
    id: &str,
    records: &[&PaymentRecord],
    scale: &GlobalScale,
    cfg: &RunConfig,
) -> Result<SupplierResult> {
    let raw_gbp: Vec<f64> = records.iter().map(|r| r.amount.as_gbp_f64()).collect();
    let mut standardised: Vec<f64> = raw_gbp
        .iter()
        .map(|&a| stats::robust_standardise(a, scale))
        .collect::<Result<_>>()?;
    standardised.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let quantiles = QuantileSet::from_sorted(&standardised)?;
    let (model, candidates) =
        gmm::select_and_prune_with_candidates(&standardised, &cfg.em, cfg.phi.prune_weight)?;
    let components = phi::compute_phi(&model, &quantiles, cfg.phi.eps);
    let cv = stats::coefficient_of_variation(&raw_gbp, cfg.cv.sample_sd)?;

    let mut total = PenceTotal::default();
    for r in records {
        total.add(r.amount);
    }

    let fit = FitDump {
        supplier: id.to_string(),
        n: records.len(),
        candidates,
        converged: model.converged,
        weights: model.weights.clone(),
        means_standardised: model.means.clone(),
        sds_standardised: model.sds.clone(),
        means_gbp: model.means.iter().map(|&m| scale.to_gbp(m)).collect(),
        sds_gbp: model.sds.iter().map(|&s| s * scale.iqr).collect(),
    };
    let centres: Vec<(f64, f64)> =
        model.means.iter().zip(&model.weights).map(|(&m, &w)| (m, w)).collect();

    Ok(SupplierResult {
        supplier: id.to_string(),
        n: records.len() as u64,
        total_spend: total,
        directorate: modal_directorate(records),
        components,
        cv,
        fit,
        centres,
    })
}

/// Run the full scoring pipeline from one configuration.
pub fn run_pipeline(cfg: &RunConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut warnings = Vec::new();

    // ingest
    let outcome = ingest::parse_csv(&cfg.input.path, &cfg.input.ingest())?;
    if outcome.rows.is_empty() {
        return Err(Error::Ingest(format!(
            "no parseable data rows in {}",
            cfg.input.path.display()
        )));
    }
    let n_raw = outcome.rows.len() as u64;
    let rejects = outcome.rejects;
    let (clean, dropped) = ingest::filter_positive(outcome.rows);
    if clean.is_empty() {
        return Err(Error::Ingest("no positive-amount rows after cleaning".into()));
    }
    let mut corpus = CorpusStats::compute(n_raw, rejects.len() as u64, dropped, &clean);

    // harmonise
    let mut name_freq: BTreeMap<String, u64> = BTreeMap::new();
    for row in &clean {
        *name_freq.entry(row.creditor_name.clone()).or_insert(0) += 1;
    }
    let names: Vec<(String, u64)> = name_freq.into_iter().collect();
    let map = harmonise::build_canonical_map(
        &names,
        &cfg.harmonise.suffix_aliases,
        &cfg.harmonise.thresholds(),
        &cfg.harmonise.pseudonym_salt,
    )?;
    let audit = harmonise::audit_rows(&map);

    let records: Vec<PaymentRecord> = clean
        .iter()
        .map(|r| {
            let supplier_id = map
                .pseudonym_for_raw(&r.creditor_name)
                .ok_or_else(|| {
                    Error::Numerical(format!("no canonical id for {:?}", r.creditor_name))
                })?
                .to_string();
            Ok(PaymentRecord {
                supplier_raw: r.creditor_name.clone(),
                supplier_id,
                amount: r.net_amount,
                directorate: r.directorate.clone(),
                subjective_detail: r.subjective_detail.clone(),
            })
        })
        .collect::<Result<_>>()?;

    // volume selection
    let selected = ingest::select_high_volume(&records, cfg.selection.min_payments);
    if selected.is_empty() {
        return Err(Error::Ingest(format!(
            "selection: no supplier reaches {} payments",
            cfg.selection.min_payments
        )));
    }

    // global robust scale over all cleaned payments
    let mut all_gbp: Vec<f64> = clean.iter().map(|r| r.net_amount.as_gbp_f64()).collect();
    all_gbp.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = GlobalScale::from_sorted(&all_gbp)?;
    if scale.iqr <= 0.0 {
        return Err(Error::Config(
            "degenerate corpus: global IQR is zero, amounts cannot be standardised".into(),
        ));
    }

    let mut by_supplier: BTreeMap<&str, Vec<&PaymentRecord>> = BTreeMap::new();
    for r in &records {
        if selected.contains(&r.supplier_id) {
            by_supplier.entry(&r.supplier_id).or_default().push(r);
        }
    }

    let mut analytic_gbp: Vec<f64> = by_supplier
        .values()
        .flat_map(|rs| rs.iter().map(|r| r.amount.as_gbp_f64()))
        .collect();
    analytic_gbp.sort_by(|a, b| a.partial_cmp(b).unwrap());
    corpus.median_amount_analytic = Some(stats::quantile(&analytic_gbp, 0.5)?);

    // per-supplier fits, parallel across suppliers, collected in id order
    let supplier_ids: Vec<&str> = by_supplier.keys().copied().collect();
    let results: Vec<SupplierResult> = supplier_ids
        .par_iter()
        .map(|id| score_supplier(id, &by_supplier[id], &scale, cfg))
        .collect::<Result<_>>()?;

    // ranking and tiers
    let phi_values: Vec<f64> = results.iter().map(|r| r.components.phi).collect();
    let percentiles = phi::percentile_ranks(&phi_values);
    let mut phi_scores: Vec<PhiScore> = results
        .iter()
        .zip(&percentiles)
        .map(|(r, &p)| PhiScore {
            supplier: r.supplier.clone(),
            components: r.components,
            percentile: p,
            tier: Tier::Low,
        })
        .collect();
    let tier_summary = phi::assign_tiers(&mut phi_scores, cfg.phi.tier_cuts())?;
    if tier_summary.degenerate_cohort {
        warnings.push(format!(
            "cohort of {} suppliers is below the tiering minimum of 10: all assigned Low",
            results.len()
        ));
    }
    if results.iter().any(|r| !r.fit.converged) {
        let n = results.iter().filter(|r| !r.fit.converged).count();
        warnings.push(format!("{n} supplier fit(s) stopped at max_iter without meeting tol"));
    }

    let suppliers: Vec<String> = results.iter().map(|r| r.supplier.clone()).collect();
    let cv_values: Vec<f64> = results.iter().map(|r| r.cv).collect();
    let phi_ranks = report::descending_ranks(&phi_values, &suppliers);
    let cv_ranks = report::descending_ranks(&cv_values, &suppliers);

    let mut scores: Vec<ScoreRow> = results
        .iter()
        .enumerate()
        .map(|(i, r)| ScoreRow {
            supplier: r.supplier.clone(),
            n_payments: r.n,
            total_spend: r.total_spend,
            directorate: r.directorate.clone(),
            components: r.components,
            percentile: percentiles[i],
            tier: phi_scores[i].tier,
            cv: r.cv,
            cv_rank: cv_ranks[i],
            phi_rank: phi_ranks[i],
        })
        .collect();
    scores.sort_by_key(|r| r.phi_rank);

    // cohort aggregates
    let spends: Vec<f64> = results.iter().map(|r| r.total_spend.as_gbp_f64()).collect();
    let lorenz = stats::lorenz_points(&spends)?;
    let sectoral = report::sectoral_aggregate(&scores);
    let contribution_stats = report::cohort_contribution_stats(&scores)?;
    let correlations = report::component_correlations(&scores);
    let cv = report::cv_comparison(&scores, cfg.output.top_k);
    if cv.spearman_rho.is_none() {
        warnings.push("CV/score Spearman undefined for this cohort".into());
    }

    // anchoring over every retained mixture component
    let tier_of: BTreeMap<&str, Tier> =
        phi_scores.iter().map(|s| (s.supplier.as_str(), s.tier)).collect();
    let mut centres = Vec::new();
    for r in &results {
        for &(mean_std, weight) in &r.centres {
            centres.push(CentreObservation {
                supplier: r.supplier.clone(),
                centre_gbp: scale.to_gbp(mean_std),
                tier: tier_of[r.supplier.as_str()],
                weight,
            });
        }
    }
    let (anchoring, anchoring_nulls) = anchoring::run_anchoring(&centres, &cfg.anchoring)?;
    warnings.extend(anchoring.warnings.iter().cloned());

    // plot data: standardised histogram truncated at the 99th percentile
    let standardised: Vec<f64> = all_gbp
        .iter()
        .map(|&a| stats::robust_standardise(a, &scale))
        .collect::<Result<_>>()?;
    let q99 = stats::quantile(&standardised, 0.99)?;
    let lo = standardised[0];
    let n_bins = 80usize;
    let width = ((q99 - lo) / n_bins as f64).max(f64::MIN_POSITIVE);
    let mut hist = vec![0u64; n_bins];
    for &v in &standardised {
        if v > q99 {
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        hist[idx] += 1;
    }
    let standardised_hist: Vec<(f64, u64)> = hist
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c))
        .collect();

    let payment_counts: Vec<(String, u64)> =
        results.iter().map(|r| (r.supplier.clone(), r.n)).collect();

    let manifest = RunManifest {
        tool: format!("phi {}", env!("CARGO_PKG_VERSION")),
        config_hash: cfg.config_hash(),
        quantile_rule: QUANTILE_RULE.into(),
        bin_rule: BIN_RULE.into(),
        config: cfg.clone(),
    };

    Ok(ReportBundle {
        manifest,
        corpus,
        global_scale: scale,
        tier_summary,
        scores,
        audit,
        rejects,
        lorenz,
        sectoral,
        contribution_stats,
        correlations,
        cv,
        centres,
        anchoring,
        fits: results.into_iter().map(|r| r.fit).collect(),
        warnings,
        standardised_hist,
        payment_counts,
        anchoring_nulls,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn write_scores_csv(path: &Path, scores: &[ScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "supplier",
        "n_payments",
        "total_spend",
        "directorate",
        "modality",
        "asymmetry",
        "tail",
        "dispersion",
        "phi",
        "contrib_modality_pct",
        "contrib_asymmetry_pct",
        "contrib_tail_pct",
        "contrib_dispersion_pct",
        "degenerate",
        "percentile",
        "tier",
        "cv",
        "cv_rank",
        "phi_rank",
    ])?;
    for r in scores {
        let c = &r.components;
        w.write_record([
            r.supplier.clone(),
            r.n_payments.to_string(),
            r.total_spend.to_string(),
            r.directorate.clone(),
            c.modality.to_string(),
            fmt_f64(c.asymmetry),
            fmt_f64(c.tail),
            fmt_f64(c.dispersion),
            fmt_f64(c.phi),
            fmt_f64(c.contributions.modality),
            fmt_f64(c.contributions.asymmetry),
            fmt_f64(c.contributions.tail),
            fmt_f64(c.contributions.dispersion),
            c.degenerate.to_string(),
            fmt_f64(r.percentile),
            r.tier.to_string(),
            fmt_f64(r.cv),
            r.cv_rank.to_string(),
            r.phi_rank.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_summary(path: &Path, b: &ReportBundle) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let w = &mut f;
    writeln!(w, "{} run {}", b.manifest.tool, b.manifest.config_hash)?;
    writeln!(w, "every figure below is traceable to a machine-readable file in this bundle")?;
    writeln!(w)?;
    writeln!(w, "corpus (corpus_stats.json)")?;
    writeln!(w, "  parsed rows          {}", b.corpus.n_rows_raw)?;
    writeln!(w, "  rejected rows        {}", b.corpus.n_rows_rejected)?;
    writeln!(w, "  non-positive dropped {}", b.corpus.n_rows_dropped_nonpositive)?;
    writeln!(w, "  clean rows           {}", b.corpus.n_rows_clean)?;
    writeln!(w, "  raw creditor names   {}", b.corpus.n_raw_names)?;
    writeln!(w, "  canonical suppliers  {}", b.audit.iter().map(|a| &a.canonical_name).collect::<std::collections::BTreeSet<_>>().len())?;
    writeln!(w, "  total clean spend    {}", b.corpus.total_spend)?;
    if let (Some(median), Some(analytic)) = (b.corpus.median_amount, b.corpus.median_amount_analytic) {
        writeln!(w, "  median payment       {median} (clean) / {analytic} (analytic subsample)")?;
    }
    writeln!(w)?;
    writeln!(w, "global scale (run_manifest.json, scores.json)")?;
    writeln!(w, "  median {}  iqr {}", b.global_scale.median, b.global_scale.iqr)?;
    writeln!(w)?;
    writeln!(w, "cohort (scores.csv)")?;
    writeln!(w, "  analytic suppliers   {}", b.scores.len())?;
    writeln!(
        w,
        "  tiers                {} High / {} Moderate / {} Low",
        b.tier_summary.n_high, b.tier_summary.n_moderate, b.tier_summary.n_low
    )?;
    for row in b.scores.iter().take(5) {
        let c = &row.components;
        writeln!(
            w,
            "  #{:<2} {}  phi {:.3}  M {} A {:.3} T {:.3} D {:.3}  tier {}",
            row.phi_rank, row.supplier, c.phi, c.modality, c.asymmetry, c.tail, c.dispersion, row.tier
        )?;
    }
    writeln!(w)?;
    writeln!(w, "cv baseline (cv_comparison.json)")?;
    match (b.cv.spearman_rho, b.cv.p_value) {
        (Some(rho), Some(p)) => writeln!(w, "  spearman(cv, phi) = {rho:.3} (p = {p:.3e})")?,
        _ => writeln!(w, "  spearman(cv, phi) undefined for this cohort")?,
    }
    writeln!(w)?;
    writeln!(w, "anchoring (anchoring_report.json)")?;
    writeln!(w, "  peaks ({}): {:?}", b.anchoring.peaks_source, b.anchoring.peaks)?;
    for p in &b.anchoring.permutations {
        writeln!(
            w,
            "  +-{}% window: observed {} vs null mean {:.1}, p = {} (N = {}, seed {})",
            p.window_pct, p.observed, p.perm_mean, p.p_value, p.n_permutations, p.seed
        )?;
    }
    if let Some(ks) = &b.anchoring.ks_high_vs_low {
        writeln!(
            w,
            "  K-S High (n={}) vs Low (n={}): D = {:.3}, p = {:.3e}",
            ks.n_high, ks.n_low, ks.statistic, ks.p_value
        )?;
    }
    if !b.warnings.is_empty() {
        writeln!(w)?;
        writeln!(w, "warnings")?;
        for warning in &b.warnings {
            writeln!(w, "  {warning}")?;
        }
    }
    Ok(())
}

/// Write the bundle to `dir` (created if needed): JSON + CSV reports and
/// the plot-data series, one tidy file per headline figure.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let plot_dir = dir.join("plot_data");
    std::fs::create_dir_all(&plot_dir)?;

    write_json(&dir.join("run_manifest.json"), &bundle.manifest)?;
    write_json(&dir.join("corpus_stats.json"), &bundle.corpus)?;
    write_json(&dir.join("scores.json"), &bundle.scores)?;
    write_json(&dir.join("tier_summary.json"), &bundle.tier_summary)?;
    write_json(&dir.join("cohort_contributions.json"), &bundle.contribution_stats)?;
    write_json(&dir.join("component_spearman.json"), &bundle.correlations)?;
    write_json(&dir.join("cv_comparison.json"), &bundle.cv)?;
    write_json(&dir.join("anchoring_report.json"), &bundle.anchoring)?;

    write_scores_csv(&dir.join("scores.csv"), &bundle.scores)?;
    ingest::write_rejects(&dir.join("rejects.csv"), &bundle.rejects)?;

    let mut w = csv::Writer::from_path(dir.join("harmonisation_audit.csv"))?;
    w.write_record(["raw_name", "canonical_name", "pseudonym", "cluster_size"])?;
    for row in &bundle.audit {
        w.write_record([
            row.raw_name.clone(),
            row.canonical_name.clone(),
            row.pseudonym.clone(),
            row.cluster_size.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("sectoral_tiers.csv"))?;
    w.write_record(["directorate", "high", "moderate", "low", "total"])?;
    for (directorate, counts) in &bundle.sectoral.rows {
        w.write_record([
            directorate.clone(),
            counts.high.to_string(),
            counts.moderate.to_string(),
            counts.low.to_string(),
            counts.total().to_string(),
        ])?;
    }
    let t = &bundle.sectoral.total;
    w.write_record([
        "TOTAL".to_string(),
        t.high.to_string(),
        t.moderate.to_string(),
        t.low.to_string(),
        t.total().to_string(),
    ])?;
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("cv_comparison.csv"))?;
    w.write_record([
        "supplier", "modality", "asymmetry", "tail", "dispersion", "phi",
        "contrib_modality_pct", "contrib_asymmetry_pct", "contrib_tail_pct",
        "contrib_dispersion_pct", "cv", "cv_rank", "phi_rank",
    ])?;
    for r in &bundle.cv.top {
        let c = &r.components;
        w.write_record([
            r.supplier.clone(),
            c.modality.to_string(),
            fmt_f64(c.asymmetry),
            fmt_f64(c.tail),
            fmt_f64(c.dispersion),
            fmt_f64(c.phi),
            fmt_f64(c.contributions.modality),
            fmt_f64(c.contributions.asymmetry),
            fmt_f64(c.contributions.tail),
            fmt_f64(c.contributions.dispersion),
            fmt_f64(r.cv),
            r.cv_rank.to_string(),
            r.phi_rank.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("lorenz.csv"))?;
    w.write_record(["cum_supplier_share", "cum_spend_share"])?;
    for &(x, y) in &bundle.lorenz {
        w.write_record([fmt_f64(x), fmt_f64(y)])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("centres.csv"))?;
    w.write_record(["supplier", "tier", "weight", "centre_gbp"])?;
    for c in &bundle.centres {
        w.write_record([
            c.supplier.clone(),
            c.tier.to_string(),
            fmt_f64(c.weight),
            fmt_f64(c.centre_gbp),
        ])?;
    }
    w.flush()?;

    if bundle.manifest.config.output.fit_dump {
        let mut out = String::new();
        for fit in &bundle.fits {
            out.push_str(&serde_json::to_string(fit)?);
            out.push('\n');
        }
        std::fs::write(dir.join("fits.jsonl"), out)?;
    }

    write_plot_data(bundle, &plot_dir)?;
    write_summary(&dir.join("summary.txt"), bundle)?;
    Ok(())
}

fn write_plot_data(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("standardised_hist.csv"))?;
    w.write_record(["bin_centre", "count"])?;
    for &(centre, count) in &bundle.standardised_hist {
        w.write_record([fmt_f64(centre), count.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("payment_counts.csv"))?;
    w.write_record(["supplier", "n_payments"])?;
    for (supplier, n) in &bundle.payment_counts {
        w.write_record([supplier.clone(), n.to_string()])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("phi_distribution.csv"))?;
    w.write_record(["supplier", "phi", "percentile", "tier"])?;
    for r in &bundle.scores {
        w.write_record([
            r.supplier.clone(),
            fmt_f64(r.components.phi),
            fmt_f64(r.percentile),
            r.tier.to_string(),
        ])?;
    }
    w.flush()?;

    // scatter of centre position against the supplier's score
    let phi_of: BTreeMap<&str, f64> =
        bundle.scores.iter().map(|r| (r.supplier.as_str(), r.components.phi)).collect();
    let mut w = csv::Writer::from_path(dir.join("centre_scatter.csv"))?;
    w.write_record(["supplier", "centre_gbp", "phi", "tier"])?;
    for c in &bundle.centres {
        w.write_record([
            c.supplier.clone(),
            fmt_f64(c.centre_gbp),
            fmt_f64(phi_of.get(c.supplier.as_str()).copied().unwrap_or(f64::NAN)),
            c.tier.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("peak_proportions.csv"))?;
    w.write_record(["peak", "tier", "window_pct", "n_nearest", "n_within", "proportion_within"])?;
    for b in &bundle.anchoring.per_peak {
        w.write_record([
            fmt_f64(b.peak),
            b.tier.to_string(),
            fmt_f64(b.window_pct),
            b.n_nearest.to_string(),
            b.n_within.to_string(),
            fmt_f64(b.proportion_within),
        ])?;
    }
    w.flush()?;

    for (window, counts) in &bundle.anchoring_nulls.by_window {
        let name = format!("permutation_null_w{window}.csv");
        let mut w = csv::Writer::from_path(dir.join(name))?;
        w.write_record(["iteration", "proximate_count"])?;
        for (i, c) in counts.iter().enumerate() {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush()?;
    }

    let mut w = csv::Writer::from_path(dir.join("distance_by_tier.csv"))?;
    w.write_record(["supplier", "tier", "centre_gbp", "nearest_peak", "pct_distance"])?;
    for d in &bundle.anchoring.distances {
        w.write_record([
            d.supplier.clone(),
            d.tier.to_string(),
            fmt_f64(d.centre_gbp),
            fmt_f64(d.nearest_peak),
            fmt_f64(d.pct_distance),
        ])?;
    }
    w.flush()?;

    // per-tier ECDFs of distance to nearest peak
    let mut w = csv::Writer::from_path(dir.join("distance_ecdf.csv"))?;
    w.write_record(["tier", "pct_distance", "ecdf"])?;
    for tier in [Tier::High, Tier::Moderate, Tier::Low] {
        let mut values: Vec<f64> = bundle
            .anchoring
            .distances
            .iter()
            .filter(|d| d.tier == tier)
            .map(|d| d.pct_distance)
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len();
        for (i, v) in values.iter().enumerate() {
            w.write_record([tier.to_string(), fmt_f64(*v), fmt_f64((i + 1) as f64 / n as f64)])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("contribution_stats.csv"))?;
    w.write_record(["component", "mean_ln", "median_ln"])?;
    for s in &bundle.contribution_stats {
        w.write_record([s.component.clone(), fmt_f64(s.mean_ln), fmt_f64(s.median_ln)])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("top_decomposition.csv"))?;
    w.write_record([
        "supplier", "phi", "contrib_modality_pct", "contrib_asymmetry_pct",
        "contrib_tail_pct", "contrib_dispersion_pct",
    ])?;
    for r in &bundle.cv.top {
        let c = &r.components;
        w.write_record([
            r.supplier.clone(),
            fmt_f64(c.phi),
            fmt_f64(c.contributions.modality),
            fmt_f64(c.contributions.asymmetry),
            fmt_f64(c.contributions.tail),
            fmt_f64(c.contributions.dispersion),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Convenience wrapper: run, write, and optionally render plots.
pub fn run_and_write(cfg: &RunConfig) -> Result<ReportBundle> {
    let bundle = run_pipeline(cfg)?;
    let dir = cfg.output.dir.clone();
    write_bundle(&bundle, &dir)?;
    if cfg.output.plots {
        crate::plots::write_plots(&bundle, &dir.join("plots"))?;
    }
    Ok(bundle)
}

/// Ingest and harmonise only (the `harmonise` subcommand): corpus stats,
/// audit rows, and rejects, without fitting or scoring.
pub fn run_harmonise_audit(
    cfg: &RunConfig,
) -> Result<(CorpusStats, Vec<AuditRow>, Vec<RejectedRow>)> {
    cfg.validate()?;
    let outcome = ingest::parse_csv(&cfg.input.path, &cfg.input.ingest())?;
    if outcome.rows.is_empty() {
        return Err(Error::Ingest(format!(
            "no parseable data rows in {}",
            cfg.input.path.display()
        )));
    }
    let n_raw = outcome.rows.len() as u64;
    let rejects = outcome.rejects;
    let (clean, dropped) = ingest::filter_positive(outcome.rows);
    let corpus = CorpusStats::compute(n_raw, rejects.len() as u64, dropped, &clean);

    let mut name_freq: BTreeMap<String, u64> = BTreeMap::new();
    for row in &clean {
        *name_freq.entry(row.creditor_name.clone()).or_insert(0) += 1;
    }
    let names: Vec<(String, u64)> = name_freq.into_iter().collect();
    let map = harmonise::build_canonical_map(
        &names,
        &cfg.harmonise.suffix_aliases,
        &cfg.harmonise.thresholds(),
        &cfg.harmonise.pseudonym_salt,
    )?;
    Ok((corpus, harmonise::audit_rows(&map), rejects))
}

/// Read a centres.csv produced by a prior `score` run.
pub fn read_centres_csv(path: &Path) -> Result<Vec<CentreObservation>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", path.display())))?;
    let mut centres = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("").to_string();
        let tier: Tier = get(1).parse().map_err(Error::Ingest)?;
        let weight: f64 = get(2).parse().map_err(|e| Error::Ingest(format!("weight: {e}")))?;
        let centre_gbp: f64 =
            get(3).parse().map_err(|e| Error::Ingest(format!("centre_gbp: {e}")))?;
        centres.push(CentreObservation { supplier: get(0), tier, weight, centre_gbp });
    }
    if centres.is_empty() {
        return Err(Error::Ingest(format!("{} holds no centres", path.display())));
    }
    Ok(centres)
}

/// Write a standalone anchoring report (the `anchoring` subcommand).
pub fn write_anchoring_outputs(
    report: &AnchoringReport,
    nulls: &AnchoringNulls,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("anchoring_report.json"), report)?;
    for (window, counts) in &nulls.by_window {
        let mut w = csv::Writer::from_path(dir.join(format!("permutation_null_w{window}.csv")))?;
        w.write_record(["iteration", "proximate_count"])?;
        for (i, c) in counts.iter().enumerate() {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}
