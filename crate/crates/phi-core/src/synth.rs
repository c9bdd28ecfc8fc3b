//! Deterministic synthetic-cohort generator. Each supplier is drawn from
//! a declared Gaussian mixture (GBP units) with a per-spec seed, rounded
//! to pence, and truncated below at one penny by resampling. The output
//! uses the same CSV schema ingest consumes, with the mixture ground
//! truth saved alongside, so the generator doubles as an oracle for
//! mixture recovery, score ordering, and permutation calibration tests.

use crate::error::{Error, Result};
use crate::ingest::Pence;
use crate::phi::PhiScore;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;

/// Distribution shapes mirroring the case-study profiles: a single regime,
/// closely tiered regimes, materially separated regimes, a heavy upper
/// tail, and price-point heaping (collapsed IQR, wide outer quantiles).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Archetype {
    Unimodal,
    TieredMultimodal,
    SeparatedBimodal,
    HeavyTail,
    Heaped,
}

/// One mixture component in GBP units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub mean_gbp: f64,
    pub sd_gbp: f64,
}

/// A synthetic supplier: its mixture, payment count, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub directorate: String,
    pub archetype: Archetype,
    pub components: Vec<ComponentSpec>,
    pub n_payments: usize,
    pub seed: u64,
}

/// Ground truth emitted next to the generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub specs: Vec<SyntheticSpec>,
}

fn validate_spec(spec: &SyntheticSpec) -> Result<()> {
    if spec.components.is_empty() {
        return Err(Error::Config(format!("spec {:?} has no components", spec.name)));
    }
    let weight_sum: f64 = spec.components.iter().map(|c| c.weight).sum();
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "spec {:?} weights sum to {weight_sum}, expected 1",
            spec.name
        )));
    }
    if spec.components.iter().any(|c| c.sd_gbp < 0.0 || c.weight <= 0.0) {
        return Err(Error::Config(format!("spec {:?} has invalid components", spec.name)));
    }
    Ok(())
}

/// Draw one supplier's payment amounts: inverse-CDF normal draws from a
/// seeded counter-based generator, truncated below at one penny by
/// resampling inside the chosen component, then rounded to pence.
pub fn sample_amounts(spec: &SyntheticSpec) -> Result<Vec<Pence>> {
    validate_spec(spec)?;
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.n_payments);
    for _ in 0..spec.n_payments {
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        let mut comp = spec.components[spec.components.len() - 1];
        for &c in &spec.components {
            acc += c.weight;
            if pick < acc {
                comp = c;
                break;
            }
        }
        let value = loop {
            let u: f64 = rng.random();
            if u <= 0.0 {
                continue;
            }
            let v = comp.mean_gbp + comp.sd_gbp * standard.inverse_cdf(u);
            if v >= 0.01 {
                break v;
            }
        };
        let pence = (value * 100.0).round() as i64;
        out.push(Pence(pence.max(1)));
    }
    Ok(out)
}

/// Generate the corpus CSV (ingest schema, byte-reproducible) and its
/// ground truth. Row order follows spec order.
pub fn generate_cohort(specs: &[SyntheticSpec]) -> Result<(String, GroundTruth)> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "Organisation Name",
            "Directorate",
            "Department",
            "Service Plan",
            "Creditor Name",
            "Payment Date",
            "Transaction No",
            "Card Transaction",
            "Net Amount",
            "Irrecoverable VAT",
            "Subjective Group",
            "Subjective Subgroup",
            "Subjective Detail",
        ])
        .map_err(Error::Csv)?;

    let start = chrono::NaiveDate::from_ymd_opt(2025, 5, 1).expect("valid date");
    for (si, spec) in specs.iter().enumerate() {
        let amounts = sample_amounts(spec)?;
        let detail = format!("{:?}", spec.archetype);
        for (i, amount) in amounts.iter().enumerate() {
            let date = start + chrono::Days::new((i % 180) as u64);
            writer
                .write_record([
                    "SYNTH COUNCIL",
                    &spec.directorate,
                    "Synthetic",
                    "Synthetic",
                    &spec.name,
                    &date.format("%d/%m/%Y").to_string(),
                    &format!("SYN-{si:03}-{i:05}"),
                    "N",
                    &amount.to_string(),
                    "0",
                    "Synthetic",
                    "Synthetic",
                    &detail,
                ])
                .map_err(Error::Csv)?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Ingest(e.to_string()))?;
    let csv = String::from_utf8(bytes).map_err(|e| Error::Ingest(e.to_string()))?;
    Ok((csv, GroundTruth { specs: specs.to_vec() }))
}

fn filler(i: usize, master_seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        name: format!("FILLER UNIMODAL {i:02}"),
        directorate: "Synthetic Baseline".into(),
        archetype: Archetype::Unimodal,
        components: vec![ComponentSpec {
            weight: 1.0,
            mean_gbp: 480.0 + 7.0 * i as f64,
            sd_gbp: 120.0,
        }],
        n_payments: 120,
        seed: master_seed.wrapping_add(100 + i as u64),
    }
}

/// The default benchmark cohort: eight unimodal fillers anchoring the
/// global scale plus one supplier per archetype, with parameters shaped
/// like the worked case studies.
pub fn benchmark_cohort(master_seed: u64) -> Vec<SyntheticSpec> {
    let mut specs: Vec<SyntheticSpec> = (0..8).map(|i| filler(i, master_seed)).collect();
    specs.push(SyntheticSpec {
        name: "CASE UNIMODAL".into(),
        directorate: "Synthetic Services".into(),
        archetype: Archetype::Unimodal,
        components: vec![ComponentSpec { weight: 1.0, mean_gbp: 487.0, sd_gbp: 120.0 }],
        n_payments: 150,
        seed: master_seed.wrapping_add(1),
    });
    specs.push(SyntheticSpec {
        name: "CASE SEPARATED BIMODAL".into(),
        directorate: "Synthetic Infrastructure".into(),
        archetype: Archetype::SeparatedBimodal,
        components: vec![
            ComponentSpec { weight: 0.52, mean_gbp: 1210.0, sd_gbp: 380.0 },
            ComponentSpec { weight: 0.48, mean_gbp: 8967.0, sd_gbp: 2400.0 },
        ],
        n_payments: 160,
        seed: master_seed.wrapping_add(2),
    });
    specs.push(SyntheticSpec {
        name: "CASE TIERED MULTIMODAL".into(),
        directorate: "Synthetic Care".into(),
        archetype: Archetype::TieredMultimodal,
        components: vec![
            ComponentSpec { weight: 0.27, mean_gbp: 2187.0, sd_gbp: 20.0 },
            ComponentSpec { weight: 0.25, mean_gbp: 2700.0, sd_gbp: 20.0 },
            ComponentSpec { weight: 0.25, mean_gbp: 3208.0, sd_gbp: 20.0 },
            ComponentSpec { weight: 0.23, mean_gbp: 3720.0, sd_gbp: 20.0 },
        ],
        n_payments: 160,
        seed: master_seed.wrapping_add(3),
    });
    specs.push(SyntheticSpec {
        name: "CASE HEAVY TAIL".into(),
        directorate: "Synthetic Services".into(),
        archetype: Archetype::HeavyTail,
        components: vec![
            ComponentSpec { weight: 0.85, mean_gbp: 600.0, sd_gbp: 100.0 },
            ComponentSpec { weight: 0.15, mean_gbp: 900.0, sd_gbp: 2500.0 },
        ],
        n_payments: 150,
        seed: master_seed.wrapping_add(4),
    });
    specs.push(SyntheticSpec {
        name: "CASE HEAPED".into(),
        directorate: "Synthetic Transport".into(),
        archetype: Archetype::Heaped,
        components: vec![
            ComponentSpec { weight: 0.85, mean_gbp: 500.0, sd_gbp: 0.001 },
            ComponentSpec { weight: 0.15, mean_gbp: 500.0, sd_gbp: 400.0 },
        ],
        n_payments: 150,
        seed: master_seed.wrapping_add(5),
    });
    specs.push(SyntheticSpec {
        name: "CASE MAX SEPARATED".into(),
        directorate: "Synthetic Transport".into(),
        archetype: Archetype::SeparatedBimodal,
        components: vec![
            ComponentSpec { weight: 0.81, mean_gbp: 3088.0, sd_gbp: 600.0 },
            ComponentSpec { weight: 0.19, mean_gbp: 154_625.0, sd_gbp: 30_000.0 },
        ],
        n_payments: 120,
        seed: master_seed.wrapping_add(6),
    });
    specs
}

/// One separated-vs-tiered ordering comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub separated: String,
    pub tiered: String,
    pub separated_phi: f64,
    pub tiered_phi: f64,
    pub separated_d_contribution: f64,
    pub tiered_d_contribution: f64,
    pub pass: bool,
}

/// Ground-truth ordering report produced after the cohort has been scored
/// by the main pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub pairs: Vec<PairCheck>,
    /// Heaped suppliers where tail is (or is not) the dominant
    /// contribution.
    pub heaped_tail_dominant: Vec<(String, bool)>,
    /// Specs with identical parameters and seeds must score identically.
    pub identical_spec_mismatches: Vec<(String, String)>,
    pub all_pass: bool,
}

/// Check the scored cohort against the generator's ground truth: every
/// separated-bimodal archetype must strictly outrank every
/// tiered-multimodal one (and carry the larger dispersion share), heaped
/// archetypes must be tail-dominated, and identical specs must tie
/// exactly.
pub fn oracle_rank_check(
    truth: &GroundTruth,
    scores_by_name: &BTreeMap<String, PhiScore>,
) -> Result<OrderingReport> {
    let lookup = |name: &str| -> Result<&PhiScore> {
        scores_by_name
            .get(name)
            .ok_or_else(|| Error::Numerical(format!("no score for synthetic supplier {name:?}")))
    };

    let mut pairs = Vec::new();
    for sep in truth.specs.iter().filter(|s| s.archetype == Archetype::SeparatedBimodal) {
        for tier in truth.specs.iter().filter(|s| s.archetype == Archetype::TieredMultimodal) {
            let s = lookup(&sep.name)?;
            let t = lookup(&tier.name)?;
            let pass = s.components.phi > t.components.phi
                && s.components.contributions.dispersion > t.components.contributions.dispersion;
            pairs.push(PairCheck {
                separated: sep.name.clone(),
                tiered: tier.name.clone(),
                separated_phi: s.components.phi,
                tiered_phi: t.components.phi,
                separated_d_contribution: s.components.contributions.dispersion,
                tiered_d_contribution: t.components.contributions.dispersion,
                pass,
            });
        }
    }

    let mut heaped = Vec::new();
    for spec in truth.specs.iter().filter(|s| s.archetype == Archetype::Heaped) {
        let c = &lookup(&spec.name)?.components.contributions;
        let dominant =
            c.tail >= c.modality && c.tail >= c.asymmetry && c.tail >= c.dispersion;
        heaped.push((spec.name.clone(), dominant));
    }

    let mut mismatches = Vec::new();
    for (i, a) in truth.specs.iter().enumerate() {
        for b in &truth.specs[i + 1..] {
            if a.components == b.components && a.n_payments == b.n_payments && a.seed == b.seed {
                let (sa, sb) = (lookup(&a.name)?, lookup(&b.name)?);
                if sa.components.phi != sb.components.phi {
                    mismatches.push((a.name.clone(), b.name.clone()));
                }
            }
        }
    }

    let all_pass = pairs.iter().all(|p| p.pass)
        && heaped.iter().all(|(_, ok)| *ok)
        && mismatches.is_empty();
    Ok(OrderingReport {
        pairs,
        heaped_tail_dominant: heaped,
        identical_spec_mismatches: mismatches,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmm::{select_and_prune, EmConfig};

    fn unimodal(n: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            name: "U".into(),
            directorate: "D".into(),
            archetype: Archetype::Unimodal,
            components: vec![ComponentSpec { weight: 1.0, mean_gbp: 1000.0, sd_gbp: 150.0 }],
            n_payments: n,
            seed,
        }
    }

    #[test]
    fn generation_is_byte_reproducible() {
        let specs = benchmark_cohort(42);
        let (a, _) = generate_cohort(&specs).unwrap();
        let (b, _) = generate_cohort(&specs).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_cohort(&benchmark_cohort(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn amounts_are_positive_pence() {
        let spec = SyntheticSpec {
            name: "T".into(),
            directorate: "D".into(),
            archetype: Archetype::Heaped,
            components: vec![
                ComponentSpec { weight: 0.5, mean_gbp: 5.0, sd_gbp: 50.0 },
                ComponentSpec { weight: 0.5, mean_gbp: 1.0, sd_gbp: 2.0 },
            ],
            n_payments: 2000,
            seed: 9,
        };
        let amounts = sample_amounts(&spec).unwrap();
        assert_eq!(amounts.len(), 2000);
        assert!(amounts.iter().all(|a| a.0 >= 1));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = unimodal(10, 0);
        spec.components[0].weight = 0.8;
        assert!(sample_amounts(&spec).is_err());
        spec.components.clear();
        assert!(sample_amounts(&spec).is_err());
    }

    #[test]
    fn unimodal_sample_selects_one_component() {
        let amounts = sample_amounts(&unimodal(200, 3)).unwrap();
        let sample: Vec<f64> = amounts.iter().map(|a| a.as_gbp_f64()).collect();
        let model = select_and_prune(&sample, &EmConfig::default(), 0.05).unwrap();
        assert_eq!(model.k(), 1);
    }

    #[test]
    fn separated_bimodal_recovery_at_six_sigma() {
        // separation 6 component-sd: fitted means within 0.2 sd, weights
        // within 0.05 at n = 500
        let sd = 150.0;
        let spec = SyntheticSpec {
            name: "B".into(),
            directorate: "D".into(),
            archetype: Archetype::SeparatedBimodal,
            components: vec![
                ComponentSpec { weight: 0.5, mean_gbp: 1000.0, sd_gbp: sd },
                ComponentSpec { weight: 0.5, mean_gbp: 1000.0 + 6.0 * sd, sd_gbp: sd },
            ],
            n_payments: 500,
            seed: 11,
        };
        let sample: Vec<f64> =
            sample_amounts(&spec).unwrap().iter().map(|a| a.as_gbp_f64()).collect();
        let model = select_and_prune(&sample, &EmConfig::default(), 0.05).unwrap();
        assert_eq!(model.k(), 2);
        assert!((model.means[0] - 1000.0).abs() < 0.2 * sd, "mu0 {}", model.means[0]);
        assert!((model.means[1] - 1900.0).abs() < 0.2 * sd, "mu1 {}", model.means[1]);
        assert!((model.weights[0] - 0.5).abs() < 0.05);
    }

    #[test]
    fn heaped_archetype_collapses_iqr() {
        let spec = benchmark_cohort(7)
            .into_iter()
            .find(|s| s.archetype == Archetype::Heaped)
            .unwrap();
        let mut sample: Vec<f64> =
            sample_amounts(&spec).unwrap().iter().map(|a| a.as_gbp_f64()).collect();
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = crate::stats::QuantileSet::from_sorted(&sample).unwrap();
        assert_eq!(q.iqr(), 0.0);
        assert!(q.q95 - q.q05 > 100.0, "outer span {}", q.q95 - q.q05);
    }

    #[test]
    fn cohort_csv_parses_through_ingest() {
        let specs = vec![unimodal(60, 1)];
        let (csv_text, truth) = generate_cohort(&specs).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut file, csv_text.as_bytes()).unwrap();
        let out = crate::ingest::parse_csv(file.path(), &crate::ingest::IngestConfig::default())
            .unwrap();
        assert_eq!(out.rows.len(), 60);
        assert!(out.rejects.is_empty());
        assert_eq!(truth.specs.len(), 1);
    }
}
