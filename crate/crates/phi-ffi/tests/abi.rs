//! Exercise the C ABI exactly as a foreign caller would: through the
//! exported extern functions, raw pointers and status codes.

use phi_ffi::{
    phi_global_scale, phi_run_pipeline, phi_score_sample, phi_scorer_default, phi_scorer_free,
    phi_scorer_new, phi_status_name, phi_version, PhiBreakdown, PhiStatus,
};
use std::ffi::{CStr, CString};

fn empty_breakdown() -> PhiBreakdown {
    PhiBreakdown {
        modality: 0,
        asymmetry: 0.0,
        tail: 0.0,
        dispersion: 0.0,
        phi: 0.0,
        contrib_modality_pct: 0.0,
        contrib_asymmetry_pct: 0.0,
        contrib_tail_pct: 0.0,
        contrib_dispersion_pct: 0.0,
        degenerate: 0,
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(phi_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn status_names_are_static_strings() {
    for status in [
        PhiStatus::Ok,
        PhiStatus::NullPointer,
        PhiStatus::InvalidArgument,
        PhiStatus::InsufficientData,
        PhiStatus::NumericalError,
        PhiStatus::ConfigError,
        PhiStatus::IngestError,
        PhiStatus::IoError,
    ] {
        let name = unsafe { CStr::from_ptr(phi_status_name(status)) };
        assert!(!name.to_str().unwrap().is_empty());
    }
}

#[test]
fn scorer_constructor_validates_settings() {
    let bad = phi_scorer_new(0.0, 100, 1, 0, 1e-6, 0.05, 1e-6);
    assert!(bad.is_null());
    let bad = phi_scorer_new(1e-3, 100, 1, 0, 1e-6, 0.5, 1e-6);
    assert!(bad.is_null());
    let ok = phi_scorer_new(1e-3, 100, 1, 0, 1e-6, 0.05, 1e-6);
    assert!(!ok.is_null());
    unsafe { phi_scorer_free(ok) };
    unsafe { phi_scorer_free(std::ptr::null_mut()) }; // null is a no-op
}

#[test]
fn null_and_empty_inputs_are_reported() {
    let scorer = phi_scorer_default();
    let mut out = empty_breakdown();
    let amounts = [10.0f64, 12.0];
    unsafe {
        assert_eq!(
            phi_score_sample(std::ptr::null(), amounts.as_ptr(), 2, 0.0, 1.0, &mut out),
            PhiStatus::NullPointer
        );
        assert_eq!(
            phi_score_sample(scorer, std::ptr::null(), 2, 0.0, 1.0, &mut out),
            PhiStatus::NullPointer
        );
        assert_eq!(
            phi_score_sample(scorer, amounts.as_ptr(), 0, 0.0, 1.0, &mut out),
            PhiStatus::InsufficientData
        );
        // zero IQR cannot anchor a reference frame
        assert_eq!(
            phi_score_sample(scorer, amounts.as_ptr(), 2, 0.0, 0.0, &mut out),
            PhiStatus::InvalidArgument
        );
        let with_nan = [1.0f64, f64::NAN];
        assert_eq!(
            phi_score_sample(scorer, with_nan.as_ptr(), 2, 0.0, 1.0, &mut out),
            PhiStatus::InvalidArgument
        );
        phi_scorer_free(scorer);
    }
}

#[test]
fn global_scale_and_scoring_round_trip() {
    // corpus: a mundane cluster plus a separated high-value regime
    let mut corpus = Vec::new();
    for i in 0..400 {
        corpus.push(100.0 + (i % 40) as f64);
    }
    for i in 0..100 {
        corpus.push(5000.0 + (i % 25) as f64 * 8.0);
    }

    let (mut median, mut iqr) = (0.0f64, 0.0f64);
    let status =
        unsafe { phi_global_scale(corpus.as_ptr(), corpus.len(), &mut median, &mut iqr) };
    assert_eq!(status, PhiStatus::Ok);
    assert!(iqr > 0.0);

    let scorer = phi_scorer_default();
    let mut out = empty_breakdown();
    let status = unsafe {
        phi_score_sample(scorer, corpus.as_ptr(), corpus.len(), median, iqr, &mut out)
    };
    assert_eq!(status, PhiStatus::Ok);
    assert_eq!(out.modality, 2, "expected a bimodal fit, got {out:?}");
    assert!(out.phi > 1.0);
    assert_eq!(out.degenerate, 0);
    let share_sum = out.contrib_modality_pct
        + out.contrib_asymmetry_pct
        + out.contrib_tail_pct
        + out.contrib_dispersion_pct;
    assert!((share_sum - 100.0).abs() < 1e-9, "shares sum to {share_sum}");
    unsafe { phi_scorer_free(scorer) };
}

#[test]
fn pipeline_runs_from_a_config_path() {
    let tmp = tempfile::tempdir().unwrap();
    let specs = phi_core::synth::benchmark_cohort(5);
    let (csv_text, _) = phi_core::synth::generate_cohort(&specs).unwrap();
    std::fs::write(tmp.path().join("corpus.csv"), csv_text).unwrap();

    let mut cfg = phi_core::config::RunConfig::default();
    cfg.input.path = tmp.path().join("corpus.csv");
    cfg.output.dir = tmp.path().join("out");
    cfg.anchoring.range_max = 250_000.0;
    cfg.anchoring.n_permutations = 100;
    let cfg_path = tmp.path().join("run.toml");
    std::fs::write(&cfg_path, toml::to_string(&cfg).unwrap()).unwrap();

    let c_path = CString::new(cfg_path.to_str().unwrap()).unwrap();
    let status = unsafe { phi_run_pipeline(c_path.as_ptr()) };
    assert_eq!(status, PhiStatus::Ok);
    assert!(tmp.path().join("out/scores.csv").exists());

    // a missing config maps onto the config status code
    let missing = CString::new(tmp.path().join("nope.toml").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { phi_run_pipeline(missing.as_ptr()) }, PhiStatus::ConfigError);
    assert_eq!(unsafe { phi_run_pipeline(std::ptr::null()) }, PhiStatus::NullPointer);
}
