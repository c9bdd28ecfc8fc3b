//! End-to-end pipeline tests over generated cohorts: bundle consistency,
//! file outputs, determinism across thread counts, CLI error paths, and
//! the ground-truth ordering oracle.

use phi_core::config::RunConfig;
use phi_core::error::Error;
use phi_core::phi::Tier;
use phi_core::pipeline::{self, ReportBundle};
use phi_core::synth;
use std::collections::BTreeMap;
use std::path::Path;

fn write_benchmark_corpus(dir: &Path, seed: u64) -> synth::GroundTruth {
    let specs = synth::benchmark_cohort(seed);
    let (csv_text, truth) = synth::generate_cohort(&specs).unwrap();
    std::fs::write(dir.join("corpus.csv"), csv_text).unwrap();
    truth
}

fn config_for(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.input.path = dir.join("corpus.csv");
    cfg.output.dir = dir.join("out");
    // synthetic centres reach past the default range
    cfg.anchoring.range_max = 250_000.0;
    cfg.anchoring.n_permutations = 500;
    cfg
}

fn scores_by_name(
    truth: &synth::GroundTruth,
    bundle: &ReportBundle,
) -> BTreeMap<String, phi_core::phi::PhiScore> {
    let audit: BTreeMap<&str, &str> = bundle
        .audit
        .iter()
        .map(|a| (a.raw_name.as_str(), a.pseudonym.as_str()))
        .collect();
    let mut out = BTreeMap::new();
    for spec in &truth.specs {
        let pseudonym = audit[spec.name.as_str()];
        let row = bundle.scores.iter().find(|r| r.supplier == pseudonym).unwrap();
        out.insert(
            spec.name.clone(),
            phi_core::phi::PhiScore {
                supplier: row.supplier.clone(),
                components: row.components,
                percentile: row.percentile,
                tier: row.tier,
            },
        );
    }
    out
}

#[test]
fn benchmark_cohort_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let truth = write_benchmark_corpus(tmp.path(), 42);
    let cfg = config_for(tmp.path());
    let bundle = pipeline::run_pipeline(&cfg).unwrap();

    // corpus identities
    assert_eq!(
        bundle.corpus.n_rows_clean,
        bundle.corpus.n_rows_raw - bundle.corpus.n_rows_dropped_nonpositive
    );
    assert_eq!(bundle.scores.len(), truth.specs.len());

    // every per-supplier count matches the generator
    let audit: BTreeMap<&str, &str> = bundle
        .audit
        .iter()
        .map(|a| (a.raw_name.as_str(), a.pseudonym.as_str()))
        .collect();
    for spec in &truth.specs {
        let row = bundle
            .scores
            .iter()
            .find(|r| r.supplier == audit[spec.name.as_str()])
            .unwrap_or_else(|| panic!("missing score for {}", spec.name));
        assert_eq!(row.n_payments as usize, spec.n_payments);
    }

    // tier counts sum to the cohort and sectoral rows agree
    let ts = &bundle.tier_summary;
    assert_eq!(ts.n_high + ts.n_moderate + ts.n_low, bundle.scores.len());
    assert_eq!(bundle.sectoral.total.total(), bundle.scores.len());
    let row_sum: usize = bundle.sectoral.rows.values().map(|c| c.total()).sum();
    assert_eq!(row_sum, bundle.scores.len());

    // percentiles are a monotone function of the score
    let mut by_rank = bundle.scores.clone();
    by_rank.sort_by_key(|r| r.phi_rank);
    for pair in by_rank.windows(2) {
        assert!(pair[0].components.phi >= pair[1].components.phi);
        assert!(pair[0].percentile >= pair[1].percentile);
    }

    // the ground-truth ordering oracle holds
    let by_name = scores_by_name(&truth, &bundle);
    let report = synth::oracle_rank_check(&truth, &by_name).unwrap();
    assert!(report.all_pass, "{report:#?}");

    // the max-separated archetype tops the cohort
    let max_sep = &by_name["CASE MAX SEPARATED"];
    assert_eq!(max_sep.percentile, 100.0);
    assert!(max_sep.components.contributions.dispersion > 40.0);
}

#[test]
fn bundle_files_are_written_and_deterministic_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    write_benchmark_corpus(tmp.path(), 7);
    let cfg = config_for(tmp.path());

    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();

    // same configuration, different parallelism, different physical dirs:
    // every output file must be byte-identical
    let out_a = tmp.path().join("out-a");
    let out_b = tmp.path().join("out-b");
    let bundle_a = pool1.install(|| pipeline::run_pipeline(&cfg)).unwrap();
    pipeline::write_bundle(&bundle_a, &out_a).unwrap();
    phi_core::plots::write_plots(&bundle_a, &out_a.join("plots")).unwrap();
    let bundle_b = pool4.install(|| pipeline::run_pipeline(&cfg)).unwrap();
    pipeline::write_bundle(&bundle_b, &out_b).unwrap();
    phi_core::plots::write_plots(&bundle_b, &out_b.join("plots")).unwrap();

    let expected = [
        "run_manifest.json",
        "corpus_stats.json",
        "scores.json",
        "scores.csv",
        "tier_summary.json",
        "harmonisation_audit.csv",
        "rejects.csv",
        "sectoral_tiers.csv",
        "cv_comparison.csv",
        "cv_comparison.json",
        "cohort_contributions.json",
        "component_spearman.json",
        "lorenz.csv",
        "centres.csv",
        "anchoring_report.json",
        "fits.jsonl",
        "summary.txt",
        "plot_data/standardised_hist.csv",
        "plot_data/payment_counts.csv",
        "plot_data/phi_distribution.csv",
        "plot_data/centre_scatter.csv",
        "plot_data/peak_proportions.csv",
        "plot_data/distance_by_tier.csv",
        "plot_data/distance_ecdf.csv",
        "plot_data/contribution_stats.csv",
        "plot_data/top_decomposition.csv",
        "plots/phi_distribution.svg",
        "plots/lorenz.svg",
        "plots/centre_scatter.svg",
        "plots/distance_ecdf.svg",
    ];
    for name in expected {
        let a = out_a.join(name);
        let b = out_b.join(name);
        assert!(a.exists(), "missing {name} in first run");
        assert!(b.exists(), "missing {name} in second run");
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{name} differs");
    }
    assert_eq!(bundle_a, bundle_b);
}

#[test]
fn empty_input_is_an_ingest_error() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("corpus.csv"),
        "Organisation Name,Directorate,Department,Service Plan,Creditor Name,Payment Date,\
         Transaction No,Net Amount,Subjective Group,Subjective Subgroup,Subjective Detail\n",
    )
    .unwrap();
    let cfg = config_for(tmp.path());
    let err = pipeline::run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::Ingest(_)), "got {err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn cohort_below_volume_threshold_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let specs = vec![synth::SyntheticSpec {
        name: "TINY".into(),
        directorate: "D".into(),
        archetype: synth::Archetype::Unimodal,
        components: vec![synth::ComponentSpec { weight: 1.0, mean_gbp: 100.0, sd_gbp: 10.0 }],
        n_payments: 20,
        seed: 0,
    }];
    let (csv_text, _) = synth::generate_cohort(&specs).unwrap();
    std::fs::write(tmp.path().join("corpus.csv"), csv_text).unwrap();
    let cfg = config_for(tmp.path());
    let err = pipeline::run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::Ingest(_)), "got {err:?}");
}

#[test]
fn degenerate_small_cohort_is_all_low_with_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let specs: Vec<synth::SyntheticSpec> = (0..4)
        .map(|i| synth::SyntheticSpec {
            name: format!("SMALL {i}"),
            directorate: "D".into(),
            archetype: synth::Archetype::Unimodal,
            components: vec![synth::ComponentSpec {
                weight: 1.0,
                mean_gbp: 400.0 + 50.0 * i as f64,
                sd_gbp: 60.0,
            }],
            n_payments: 80,
            seed: i as u64,
        })
        .collect();
    let (csv_text, _) = synth::generate_cohort(&specs).unwrap();
    std::fs::write(tmp.path().join("corpus.csv"), csv_text).unwrap();
    let cfg = config_for(tmp.path());
    let bundle = pipeline::run_pipeline(&cfg).unwrap();
    assert!(bundle.tier_summary.degenerate_cohort);
    assert!(bundle.scores.iter().all(|r| r.tier == Tier::Low));
    assert!(bundle.warnings.iter().any(|w| w.contains("below the tiering minimum")));
}

#[test]
fn centres_round_trip_through_csv() {
    let tmp = tempfile::tempdir().unwrap();
    write_benchmark_corpus(tmp.path(), 12);
    let cfg = config_for(tmp.path());
    let bundle = pipeline::run_pipeline(&cfg).unwrap();
    pipeline::write_bundle(&bundle, &cfg.output.dir).unwrap();
    let centres = pipeline::read_centres_csv(&cfg.output.dir.join("centres.csv")).unwrap();
    assert_eq!(centres, bundle.centres);
}
