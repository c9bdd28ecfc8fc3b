//! Property tests for the contract invariants that hold for arbitrary
//! inputs, not just the worked examples.

use phi_core::ingest::{self, Pence, RawRow};
use phi_core::phi;
use phi_core::stats::{self, QuantileSet};
use proptest::prelude::*;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #[test]
    fn quantile_hits_min_and_max(values in prop::collection::vec(-1e6..1e6f64, 1..200)) {
        let s = sorted(values);
        prop_assert_eq!(stats::quantile(&s, 0.0).unwrap(), s[0]);
        prop_assert_eq!(stats::quantile(&s, 1.0).unwrap(), *s.last().unwrap());
    }

    #[test]
    fn quantile_is_monotone_in_p(values in prop::collection::vec(-1e4..1e4f64, 2..100),
                                 p1 in 0.0..1.0f64, p2 in 0.0..1.0f64) {
        let s = sorted(values);
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(stats::quantile(&s, lo).unwrap() <= stats::quantile(&s, hi).unwrap());
    }

    #[test]
    fn shape_statistics_stay_in_bounds(values in prop::collection::vec(-1e5..1e5f64, 1..300)) {
        let s = sorted(values);
        let q = QuantileSet::from_sorted(&s).unwrap();
        let bowley = stats::bowley_skewness(&q);
        prop_assert!((-1.0..=1.0).contains(&bowley));
        prop_assert!(stats::tail_ratio(&q, 1e-6) >= 1.0);
        prop_assert!((1.0..=2.0).contains(&phi::asymmetry_component(&q)));
        prop_assert!(phi::tail_component(&q, 1e-6) >= 1.0);
    }

    #[test]
    fn ks_statistic_is_symmetric_and_bounded(
        a in prop::collection::vec(-100.0..100.0f64, 1..80),
        b in prop::collection::vec(-100.0..100.0f64, 1..80),
    ) {
        let (dab, pab) = stats::ks_two_sample(&a, &b).unwrap();
        let (dba, pba) = stats::ks_two_sample(&b, &a).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(pab, pba);
        prop_assert!((0.0..=1.0).contains(&dab));
        prop_assert!((0.0..=1.0).contains(&pab));
    }

    #[test]
    fn lorenz_is_convex_and_anchored(spends in prop::collection::vec(0.0..1e6f64, 1..120)) {
        prop_assume!(spends.iter().sum::<f64>() > 0.0);
        let pts = stats::lorenz_points(&spends).unwrap();
        prop_assert_eq!(pts[0], (0.0, 0.0));
        let last = *pts.last().unwrap();
        prop_assert!((last.0 - 1.0).abs() < 1e-12 && (last.1 - 1.0).abs() < 1e-9);
        for w in pts.windows(3) {
            prop_assert!((w[2].1 - w[1].1) - (w[1].1 - w[0].1) >= -1e-12);
        }
    }

    #[test]
    fn percentile_ranks_preserve_order(scores in prop::collection::vec(0.0..1e4f64, 1..150)) {
        let ranks = phi::percentile_ranks(&scores);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if scores[i] < scores[j] {
                    prop_assert!(ranks[i] < ranks[j], "rank inversion at ({i}, {j})");
                }
            }
        }
        let max_idx = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        prop_assert_eq!(ranks[max_idx], 100.0);
    }

    #[test]
    fn decomposition_identity_holds(
        m in 1..=4u32,
        a in 1.0..2.0f64,
        t in 1.0..10.0f64,
        d in 1.0..50.0f64,
    ) {
        let c = phi::components_from_values(m, a, t, d);
        let log_sum = (m as f64).ln() + a.ln() + t.ln() + d.ln();
        prop_assert!((log_sum.exp() - c.phi).abs() / c.phi <= 1e-12);
        if !c.degenerate {
            let share_sum = c.contributions.modality + c.contributions.asymmetry
                + c.contributions.tail + c.contributions.dispersion;
            prop_assert!((share_sum - 100.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn positive_filter_is_idempotent(amounts in prop::collection::vec(-1_000_00..1_000_00i64, 0..60)) {
        let rows: Vec<RawRow> = amounts
            .iter()
            .map(|&p| RawRow {
                organisation: String::new(),
                directorate: String::new(),
                department: String::new(),
                service_plan: String::new(),
                creditor_name: "X".into(),
                payment_date: None,
                transaction_no: String::new(),
                net_amount: Pence(p),
                subjective_group: String::new(),
                subjective_subgroup: String::new(),
                subjective_detail: String::new(),
            })
            .collect();
        let n = rows.len();
        let (once, d1) = ingest::filter_positive(rows);
        let expected = once.clone();
        prop_assert_eq!(d1 as usize, n - once.len());
        let (twice, d2) = ingest::filter_positive(once);
        prop_assert_eq!(d2, 0);
        prop_assert_eq!(twice, expected);
    }

    #[test]
    fn pence_display_parse_round_trip(p in -1_000_000_000_00..1_000_000_000_00i64) {
        let pence = Pence(p);
        prop_assert_eq!(Pence::parse(&pence.to_string()).unwrap(), pence);
    }
}
