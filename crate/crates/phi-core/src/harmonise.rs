//! Supplier-identity harmonisation: raw creditor names are normalised,
//! compared with a conjunctive fuzzy-matching ensemble (TF-IDF cosine,
//! token set ratio, token Jaccard, unweighted mean), clustered as
//! connected components of the match graph, and pseudonymised.
//!
//! Two names are merged only when all four conditions hold, so the
//! procedure is deliberately conservative: relaxing any single condition
//! can only grow clusters.
//!
//! Scores are computed on suffix-standardised strings (the suffix table
//! maps legal-form aliases such as LTD to LIMITED before any comparison).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A raw name with its normalised form and token list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameKey {
    pub raw: String,
    pub normalised: String,
    pub tokens: Vec<String>,
}

/// Uppercase, strip punctuation, collapse whitespace, and standardise
/// suffix aliases token-by-token. Deterministic and idempotent for a
/// suffix table whose values are themselves canonical.
pub fn normalise_name(raw: &str, suffix_table: &BTreeMap<String, String>) -> Result<NameKey> {
    let upper = raw.to_uppercase();
    let cleaned: String =
        upper.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
    let tokens: Vec<String> = cleaned
        .split_whitespace()
        .map(|t| suffix_table.get(t).cloned().unwrap_or_else(|| t.to_string()))
        .collect();
    if tokens.is_empty() {
        return Err(Error::Ingest(format!(
            "creditor name {raw:?} is empty after normalisation"
        )));
    }
    Ok(NameKey { raw: raw.to_string(), normalised: tokens.join(" "), tokens })
}

/// Smoothed inverse document frequencies over a name corpus, one document
/// per distinct name: `idf = ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone)]
pub struct IdfTable {
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl IdfTable {
    pub fn build(keys: &[NameKey]) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for key in keys {
            let distinct: BTreeSet<&String> = key.tokens.iter().collect();
            for token in distinct {
                *df.entry(token.clone()).or_insert(0) += 1;
            }
        }
        IdfTable { n_docs: keys.len(), df }
    }

    pub fn idf(&self, token: &str) -> f64 {
        let df = self.df.get(token).copied().unwrap_or(0);
        ((1 + self.n_docs) as f64 / (1 + df) as f64).ln() + 1.0
    }
}

/// The four pair measures. A pair matches iff cosine >= 0.76, token set
/// ratio >= 77, Jaccard >= 0.36 and ensemble > 0.66 (defaults; all are
/// configurable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchScores {
    pub tfidf_cosine: f64,
    pub token_set_ratio: u32,
    pub jaccard: f64,
    pub ensemble: f64,
}

/// Match thresholds; the ensemble condition is strict (`>`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchThresholds {
    pub tfidf_cosine_min: f64,
    pub token_set_ratio_min: u32,
    pub jaccard_min: f64,
    pub ensemble_min: f64,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        MatchThresholds {
            tfidf_cosine_min: 0.76,
            token_set_ratio_min: 77,
            jaccard_min: 0.36,
            ensemble_min: 0.66,
        }
    }
}

impl MatchThresholds {
    pub fn is_match(&self, s: &MatchScores) -> bool {
        s.tfidf_cosine >= self.tfidf_cosine_min
            && s.token_set_ratio >= self.token_set_ratio_min
            && s.jaccard >= self.jaccard_min
            && s.ensemble > self.ensemble_min
    }
}

fn token_counts(key: &NameKey) -> BTreeMap<&str, f64> {
    let mut counts = BTreeMap::new();
    for t in &key.tokens {
        *counts.entry(t.as_str()).or_insert(0.0) += 1.0;
    }
    counts
}

/// Cosine similarity of L2-normalised word-unigram TF-IDF vectors.
pub fn tfidf_cosine(a: &NameKey, b: &NameKey, idf: &IdfTable) -> f64 {
    let wa: BTreeMap<&str, f64> =
        token_counts(a).into_iter().map(|(t, c)| (t, c * idf.idf(t))).collect();
    let wb: BTreeMap<&str, f64> =
        token_counts(b).into_iter().map(|(t, c)| (t, c * idf.idf(t))).collect();
    let na: f64 = wa.values().map(|w| w * w).sum::<f64>().sqrt();
    let nb: f64 = wb.values().map(|w| w * w).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = wa.iter().filter_map(|(t, w)| wb.get(t).map(|v| w * v)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Levenshtein distance with unit insert/delete and substitution cost 2.
fn levenshtein_sub2(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + if ca == cb { 0 } else { 2 };
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Normalised Levenshtein similarity on 0-100:
/// `(len_a + len_b - dist) / (len_a + len_b) * 100`.
fn similarity_ratio(a: &str, b: &str) -> f64 {
    let total = a.chars().count() + b.chars().count();
    if total == 0 {
        return 100.0;
    }
    (total - levenshtein_sub2(a, b)) as f64 * 100.0 / total as f64
}

/// Token set ratio, fuzzywuzzy convention: from the sorted deduplicated
/// token intersection `t0` and remainder-augmented strings `t1`, `t2`,
/// take the max of the three pairwise similarity ratios, rounded half-up.
pub fn token_set_ratio(a: &NameKey, b: &NameKey) -> u32 {
    let sa: BTreeSet<&str> = a.tokens.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = b.tokens.iter().map(String::as_str).collect();
    let inter: Vec<&str> = sa.intersection(&sb).copied().collect();
    let only_a: Vec<&str> = sa.difference(&sb).copied().collect();
    let only_b: Vec<&str> = sb.difference(&sa).copied().collect();

    let t0 = inter.join(" ");
    let t1 = if only_a.is_empty() {
        t0.clone()
    } else if t0.is_empty() {
        only_a.join(" ")
    } else {
        format!("{t0} {}", only_a.join(" "))
    };
    let t2 = if only_b.is_empty() {
        t0.clone()
    } else if t0.is_empty() {
        only_b.join(" ")
    } else {
        format!("{t0} {}", only_b.join(" "))
    };

    let best = similarity_ratio(&t0, &t1)
        .max(similarity_ratio(&t0, &t2))
        .max(similarity_ratio(&t1, &t2));
    best.round() as u32
}

/// Token Jaccard overlap of the deduplicated token sets.
pub fn jaccard(a: &NameKey, b: &NameKey) -> f64 {
    let sa: BTreeSet<&str> = a.tokens.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = b.tokens.iter().map(String::as_str).collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

/// All four measures for one pair. Symmetric in its arguments; the
/// ensemble is the unweighted mean of the three similarities mapped
/// to `[0, 1]`.
pub fn score_pair(a: &NameKey, b: &NameKey, idf: &IdfTable) -> MatchScores {
    let cosine = tfidf_cosine(a, b, idf);
    let ratio = token_set_ratio(a, b);
    let jac = jaccard(a, b);
    MatchScores {
        tfidf_cosine: cosine,
        token_set_ratio: ratio,
        jaccard: jac,
        ensemble: (cosine + ratio as f64 / 100.0 + jac) / 3.0,
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The harmonisation result: connected components of the match graph,
/// canonical names, and stable pseudonyms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMap {
    /// canonical name -> sorted raw members of its cluster
    pub clusters: BTreeMap<String, Vec<String>>,
    /// raw name -> canonical name
    pub canonical_of: BTreeMap<String, String>,
    /// canonical name -> pseudonym ("S-" + keyed-hash prefix)
    pub pseudonym_of: BTreeMap<String, String>,
}

impl CanonicalMap {
    pub fn n_raw_names(&self) -> usize {
        self.canonical_of.len()
    }
    pub fn n_canonical(&self) -> usize {
        self.clusters.len()
    }
    pub fn pseudonym_for_raw(&self, raw: &str) -> Option<&str> {
        self.canonical_of
            .get(raw)
            .and_then(|c| self.pseudonym_of.get(c))
            .map(String::as_str)
    }
}

/// One row of the harmonisation audit, mirroring the published summary
/// table's shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub raw_name: String,
    pub canonical_name: String,
    pub pseudonym: String,
    pub cluster_size: usize,
}

fn pseudonym_digest(salt: &str, canonical: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(salt.as_bytes());
    hasher.update([0x1f]);
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cluster raw names into canonical suppliers.
///
/// `names` carries each distinct raw name with its row frequency (used to
/// pick the modal canonical; ties break lexicographically). Pair scoring
/// is blocked on shared tokens, which is lossless because the Jaccard
/// condition already requires at least one shared token.
pub fn build_canonical_map(
    names: &[(String, u64)],
    suffix_table: &BTreeMap<String, String>,
    thresholds: &MatchThresholds,
    salt: &str,
) -> Result<CanonicalMap> {
    // merge duplicate raw names defensively, then fix a deterministic order
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    for (name, f) in names {
        *freq.entry(name.clone()).or_insert(0) += f;
    }
    let ordered: Vec<(String, u64)> = freq.into_iter().collect();

    let keys: Vec<NameKey> = ordered
        .iter()
        .map(|(name, _)| normalise_name(name, suffix_table))
        .collect::<Result<_>>()?;
    let idf = IdfTable::build(&keys);

    // blocking: candidate pairs share at least one token
    let mut by_token: HashMap<&str, Vec<u32>> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        let distinct: BTreeSet<&str> = key.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            by_token.entry(t).or_default().push(i as u32);
        }
    }
    let mut candidates: BTreeSet<(u32, u32)> = BTreeSet::new();
    for ids in by_token.values() {
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                candidates.insert((i.min(j), i.max(j)));
            }
        }
    }

    let mut uf = UnionFind::new(keys.len());
    for &(i, j) in &candidates {
        let (a, b) = (&keys[i as usize], &keys[j as usize]);
        // cheap screens before the Levenshtein-based ratio
        if jaccard(a, b) < thresholds.jaccard_min {
            continue;
        }
        if tfidf_cosine(a, b, &idf) < thresholds.tfidf_cosine_min {
            continue;
        }
        if thresholds.is_match(&score_pair(a, b, &idf)) {
            uf.union(i as usize, j as usize);
        }
    }

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..keys.len() {
        members.entry(uf.find(i)).or_default().push(i);
    }

    let mut clusters = BTreeMap::new();
    let mut canonical_of = BTreeMap::new();
    for ids in members.values() {
        let canonical = ids
            .iter()
            .map(|&i| &ordered[i])
            .max_by(|(na, fa), (nb, fb)| fa.cmp(fb).then_with(|| nb.cmp(na)))
            .map(|(name, _)| name.clone())
            .expect("non-empty cluster");
        let mut raws: Vec<String> = ids.iter().map(|&i| ordered[i].0.clone()).collect();
        raws.sort();
        for raw in &raws {
            canonical_of.insert(raw.clone(), canonical.clone());
        }
        clusters.insert(canonical, raws);
    }

    // pseudonyms: keyed-hash prefixes, extended on (unlikely) collision so
    // the mapping stays injective
    let mut pseudonym_of = BTreeMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    for canonical in clusters.keys() {
        let digest = pseudonym_digest(salt, canonical);
        let mut len = 8;
        let mut id = format!("S-{}", &digest[..len]);
        while used.contains(&id) && len < digest.len() {
            len += 2;
            id = format!("S-{}", &digest[..len]);
        }
        used.insert(id.clone());
        pseudonym_of.insert(canonical.clone(), id);
    }

    Ok(CanonicalMap { clusters, canonical_of, pseudonym_of })
}

/// Audit rows for every raw name, sorted by canonical then raw name.
pub fn audit_rows(map: &CanonicalMap) -> Vec<AuditRow> {
    let mut rows = Vec::with_capacity(map.canonical_of.len());
    for (canonical, members) in &map.clusters {
        for raw in members {
            rows.push(AuditRow {
                raw_name: raw.clone(),
                canonical_name: canonical.clone(),
                pseudonym: map.pseudonym_of[canonical].clone(),
                cluster_size: members.len(),
            });
        }
    }
    rows.sort_by(|a, b| {
        a.canonical_name.cmp(&b.canonical_name).then_with(|| a.raw_name.cmp(&b.raw_name))
    });
    rows
}

/// The default legal-form suffix aliases. ACADEMY/SCHOOL is deliberately
/// absent: those merges are left to the fuzzy scores.
pub fn default_suffix_table() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("LTD".to_string(), "LIMITED".to_string()),
        ("CO".to_string(), "COMPANY".to_string()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn key(s: &str) -> NameKey {
        normalise_name(s, &default_suffix_table()).unwrap()
    }

    #[test]
    fn normalise_applies_rules() {
        let k = key("Muddy Boots Nursery Ltd.");
        assert_eq!(k.normalised, "MUDDY BOOTS NURSERY LIMITED");
        assert_eq!(k.tokens, vec!["MUDDY", "BOOTS", "NURSERY", "LIMITED"]);
        assert_eq!(key("ACME").normalised, "ACME");
    }

    #[test]
    fn normalise_is_idempotent() {
        for raw in ["J&B  Tools (York) Ltd", "ACME", "St. Mary's C.E. School"] {
            let once = key(raw);
            let twice = key(&once.normalised);
            assert_eq!(once.normalised, twice.normalised);
            assert_eq!(once.tokens, twice.tokens);
        }
    }

    #[test]
    fn normalise_rejects_pure_punctuation() {
        assert!(normalise_name("***", &default_suffix_table()).is_err());
        assert!(normalise_name(" - ", &default_suffix_table()).is_err());
    }

    #[test]
    fn identical_keys_score_perfectly() {
        let a = key("E ON NEXT ENERGY LTD");
        let idf = IdfTable::build(std::slice::from_ref(&a));
        let s = score_pair(&a, &a, &idf);
        assert_relative_eq!(s.tfidf_cosine, 1.0, epsilon = 1e-12);
        assert_eq!(s.token_set_ratio, 100);
        assert_eq!(s.jaccard, 1.0);
        assert_relative_eq!(s.ensemble, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_keys_never_match() {
        let a = key("ALPHA HOLDINGS");
        let b = key("ZETA CATERING");
        let idf = IdfTable::build(&[a.clone(), b.clone()]);
        let s = score_pair(&a, &b, &idf);
        assert_eq!(s.jaccard, 0.0);
        assert!(!MatchThresholds::default().is_match(&s));
    }

    #[test]
    fn score_pair_is_symmetric() {
        let a = key("MUDDY BOOTS NURSERY");
        let b = key("MUDDY BOOTS NURSERY POPPLETON");
        let idf = IdfTable::build(&[a.clone(), b.clone()]);
        assert_eq!(score_pair(&a, &b, &idf), score_pair(&b, &a, &idf));
    }

    #[test]
    fn nursery_variant_matches() {
        let names = [
            "MUDDY BOOTS NURSERY",
            "MUDDY BOOTS NURSERY POPPLETON",
            "HEATHCOTES CARE",
            "CITY FACILITIES",
            "NORTHERN POWERGRID",
        ];
        let keys: Vec<NameKey> = names.iter().map(|n| key(n)).collect();
        let idf = IdfTable::build(&keys);
        let s = score_pair(&keys[0], &keys[1], &idf);
        assert!(MatchThresholds::default().is_match(&s), "scores: {s:?}");
        assert_eq!(s.token_set_ratio, 100);
        assert_relative_eq!(s.jaccard, 0.75);
    }

    fn build(names: &[(&str, u64)]) -> CanonicalMap {
        let owned: Vec<(String, u64)> = names.iter().map(|(n, f)| (n.to_string(), *f)).collect();
        build_canonical_map(&owned, &default_suffix_table(), &MatchThresholds::default(), "salt")
            .unwrap()
    }

    #[test]
    fn unrelated_names_stay_singletons() {
        let map = build(&[("ALPHA HOLDINGS", 3), ("ZETA CATERING", 2), ("OMEGA TRANSPORT", 1)]);
        assert_eq!(map.n_canonical(), 3);
        for members in map.clusters.values() {
            assert_eq!(members.len(), 1);
        }
    }

    #[test]
    fn suffix_variants_cluster() {
        let map = build(&[
            ("E ON NEXT ENERGY", 12),
            ("E ON NEXT ENERGY LTD", 3),
            ("HEATHCOTES CARE", 5),
            ("HEATHCOTES CARE LTD", 1),
            ("NORTHERN POWERGRID", 7),
        ]);
        assert_eq!(map.n_canonical(), 3);
        assert_eq!(map.canonical_of["E ON NEXT ENERGY LTD"], "E ON NEXT ENERGY");
        assert_eq!(map.canonical_of["HEATHCOTES CARE LTD"], "HEATHCOTES CARE");
    }

    #[test]
    fn chain_merges_by_transitive_closure() {
        // A and B match, B and C match, but A-C fails the cosine condition;
        // connected components still put all three in one cluster.
        let names = [
            ("GREEN ENERGY PARTNERS NORTH TRADING GROUP YORK", 1u64),
            ("GREEN ENERGY PARTNERS NORTH TRADING GROUP", 5),
            ("GREEN ENERGY PARTNERS NORTH TRADING GROUP EAST SERVICES", 2),
            ("RIVERBANK CATERING", 2),
            ("OMEGA LOGISTICS", 1),
            ("ACME HOLDINGS", 1),
        ];
        let owned: Vec<(String, u64)> = names.iter().map(|(n, f)| (n.to_string(), *f)).collect();
        let keys: Vec<NameKey> = owned.iter().map(|(n, _)| key(n)).collect();
        let idf = IdfTable::build(&keys);
        let thresholds = MatchThresholds::default();
        assert!(thresholds.is_match(&score_pair(&keys[0], &keys[1], &idf)));
        assert!(thresholds.is_match(&score_pair(&keys[1], &keys[2], &idf)));
        assert!(!thresholds.is_match(&score_pair(&keys[0], &keys[2], &idf)));

        let map = build(&names);
        assert_eq!(map.clusters["GREEN ENERGY PARTNERS NORTH TRADING GROUP"].len(), 3);
        assert_eq!(
            map.canonical_of["GREEN ENERGY PARTNERS NORTH TRADING GROUP YORK"],
            "GREEN ENERGY PARTNERS NORTH TRADING GROUP"
        );
    }

    #[test]
    fn canonical_is_modal_with_lexicographic_ties() {
        let map = build(&[("ACME SUPPLIES LTD", 2), ("ACME SUPPLIES LIMITED", 9)]);
        assert_eq!(map.clusters.len(), 1);
        assert!(map.clusters.contains_key("ACME SUPPLIES LIMITED"));

        let tie = build(&[("ACME SUPPLIES YORK LTD", 4), ("ACME SUPPLIES LTD", 4)]);
        assert_eq!(tie.clusters.len(), 1);
        // equal frequency: lexicographically smaller raw string wins
        assert!(tie.clusters.contains_key("ACME SUPPLIES LTD"));
    }

    #[test]
    fn clustering_is_order_invariant() {
        let forward = [("E ON NEXT ENERGY", 12u64), ("E ON NEXT ENERGY LTD", 3), ("ACME", 1)];
        let reversed: Vec<(&str, u64)> = forward.iter().rev().map(|&(n, f)| (n, f)).collect();
        assert_eq!(build(&forward), build(&reversed));
    }

    #[test]
    fn dropping_any_condition_only_grows_clusters() {
        let corpus: Vec<(String, u64)> = [
            "MUDDY BOOTS NURSERY",
            "MUDDY BOOTS NURSERY LTD",
            "MUDDY BOOTS NURSERY POPPLETON",
            "BURTON GREEN PRIMARY SCHOOL",
            "BURTON GREEN PRIMARY ACADEMY SCHOOL",
            "E ON NEXT ENERGY",
            "E ON NEXT ENERGY LTD",
            "E ON ENERGY SOLUTIONS",
            "YORK CITY FOOTBALL CLUB",
            "YORK CITY FOOTBALL CLUB FOUNDATION",
            "CITY OF YORK TRADING",
            "NORTH YORKSHIRE COUNCIL",
        ]
        .iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), 1 + i as u64))
        .collect();

        let strict = MatchThresholds::default();
        let relaxed = [
            MatchThresholds { tfidf_cosine_min: 0.0, ..strict },
            MatchThresholds { token_set_ratio_min: 0, ..strict },
            MatchThresholds { jaccard_min: 0.0, ..strict },
            MatchThresholds { ensemble_min: -1.0, ..strict },
        ];
        let suffixes = default_suffix_table();
        let full = build_canonical_map(&corpus, &suffixes, &strict, "s").unwrap();
        for variant in relaxed {
            let grown = build_canonical_map(&corpus, &suffixes, &variant, "s").unwrap();
            // every strict cluster must sit inside a single relaxed cluster
            for members in full.clusters.values() {
                let targets: BTreeSet<&String> =
                    members.iter().map(|m| &grown.canonical_of[m]).collect();
                assert_eq!(targets.len(), 1, "strict cluster split by relaxation: {members:?}");
            }
            assert!(grown.n_canonical() <= full.n_canonical());
        }
    }

    #[test]
    fn pseudonyms_are_stable_and_injective() {
        let names = [("ALPHA LTD", 1u64), ("BETA LTD", 2), ("GAMMA LTD", 3)];
        let a = build(&names);
        let b = build(&names);
        assert_eq!(a.pseudonym_of, b.pseudonym_of);
        let distinct: BTreeSet<&String> = a.pseudonym_of.values().collect();
        assert_eq!(distinct.len(), a.pseudonym_of.len());
        for p in a.pseudonym_of.values() {
            assert!(p.starts_with("S-") && p.len() == 10, "unexpected pseudonym {p}");
        }

        let owned: Vec<(String, u64)> = names.iter().map(|(n, f)| (n.to_string(), *f)).collect();
        let other = build_canonical_map(
            &owned,
            &default_suffix_table(),
            &MatchThresholds::default(),
            "different-salt",
        )
        .unwrap();
        assert_ne!(a.pseudonym_of, other.pseudonym_of);
    }
}
