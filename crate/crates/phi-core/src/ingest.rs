//! CSV ingest: parse raw payment rows against a configurable column
//! mapping, collect malformed rows into a rejects sidecar instead of
//! aborting, apply the non-positive filter, and report dataset-level
//! statistics.
//!
//! Amounts are parsed as exact decimals at pence precision and only
//! converted to binary floating point inside numerical routines; totals
//! are accumulated in integer pence.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

/// A GBP amount in integer pence. Exact at pence precision; may be
/// negative or zero before the positivity filter runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pence(pub i64);

impl Pence {
    /// Parse a currency cell. Strips pound signs, thousands separators and
    /// interior whitespace first; accepts an optional leading sign and at
    /// most two significant decimal places (trailing zeros beyond pence
    /// are fine, true sub-penny precision is not).
    pub fn parse(raw: &str) -> std::result::Result<Pence, String> {
        let cleaned: String =
            raw.chars().filter(|c| !matches!(c, '£' | ',' | ' ' | '\u{a0}')).collect();
        if cleaned.is_empty() {
            return Err("empty amount".into());
        }
        let (negative, digits) = match cleaned.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, cleaned.strip_prefix('+').unwrap_or(&cleaned)),
        };
        let (int_part, frac_part) = match digits.split_once('.') {
            Some((i, f)) => (i, f),
            None => (digits, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("no digits in amount {raw:?}"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(format!("non-numeric amount {raw:?}"));
        }
        let significant_frac = frac_part.trim_end_matches('0');
        if significant_frac.len() > 2 {
            return Err(format!("amount {raw:?} has sub-penny precision"));
        }
        let pounds: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| format!("amount {raw:?} out of range"))?
        };
        let frac_padded = format!("{significant_frac:0<2}");
        let pence_frac: i64 = frac_padded.parse().unwrap_or(0);
        let magnitude = pounds
            .checked_mul(100)
            .and_then(|p| p.checked_add(pence_frac))
            .ok_or_else(|| format!("amount {raw:?} out of range"))?;
        Ok(Pence(if negative { -magnitude } else { magnitude }))
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn as_gbp_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Pence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl serde::Serialize for Pence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Pence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Pence, D::Error> {
        let s = String::deserialize(d)?;
        Pence::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Decimal GBP total accumulated in integer pence (wide enough for any
/// realistic corpus).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PenceTotal(pub i128);

impl PenceTotal {
    pub fn add(&mut self, p: Pence) {
        self.0 += p.0 as i128;
    }
    pub fn as_gbp_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for PenceTotal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl serde::Serialize for PenceTotal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for PenceTotal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<PenceTotal, D::Error> {
        let s = String::deserialize(d)?;
        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.as_str()),
        };
        let (int_part, frac_part) = rest.split_once('.').unwrap_or((rest, "00"));
        let pounds: i128 = int_part.parse().map_err(serde::de::Error::custom)?;
        let frac: i128 = format!("{frac_part:0<2}")
            .get(..2)
            .unwrap_or("00")
            .parse()
            .map_err(serde::de::Error::custom)?;
        let magnitude = pounds * 100 + frac;
        Ok(PenceTotal(if negative { -magnitude } else { magnitude }))
    }
}

/// Header names for every consumed column, defaulting to the publisher's
/// transparency-release schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    pub organisation: String,
    pub directorate: String,
    pub department: String,
    pub service_plan: String,
    pub creditor_name: String,
    pub payment_date: String,
    pub transaction_no: String,
    pub net_amount: String,
    pub subjective_group: String,
    pub subjective_subgroup: String,
    pub subjective_detail: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            organisation: "Organisation Name".into(),
            directorate: "Directorate".into(),
            department: "Department".into(),
            service_plan: "Service Plan".into(),
            creditor_name: "Creditor Name".into(),
            payment_date: "Payment Date".into(),
            transaction_no: "Transaction No".into(),
            net_amount: "Net Amount".into(),
            subjective_group: "Subjective Group".into(),
            subjective_subgroup: "Subjective Subgroup".into(),
            subjective_detail: "Subjective Detail".into(),
        }
    }
}

/// Input file settings: path aside, the delimiter and the date formats
/// tried in order (dates are carried but unused by scoring).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub delimiter: char,
    pub date_formats: Vec<String>,
    pub columns: ColumnMap,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            delimiter: ',',
            date_formats: vec![
                "%d/%m/%Y".into(),
                "%Y-%m-%d".into(),
                "%d-%m-%Y".into(),
                "%d/%m/%y".into(),
            ],
            columns: ColumnMap::default(),
        }
    }
}

/// One parsed data row, prior to cleaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub organisation: String,
    pub directorate: String,
    pub department: String,
    pub service_plan: String,
    pub creditor_name: String,
    pub payment_date: Option<NaiveDate>,
    pub transaction_no: String,
    pub net_amount: Pence,
    pub subjective_group: String,
    pub subjective_subgroup: String,
    pub subjective_detail: String,
}

/// A data line that failed row-level validation, kept for the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub rows: Vec<RawRow>,
    pub rejects: Vec<RejectedRow>,
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Config(format!("input is missing mapped column {name:?}")))
}

/// Parse a payments CSV. Structural problems (missing mapped columns,
/// unreadable file) are errors; malformed rows become rejects with their
/// line number, never silent drops.
pub fn parse_csv(path: &Path, cfg: &IngestConfig) -> Result<ParseOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter as u8)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Ingest(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let col = &cfg.columns;
    let idx_organisation = header_index(&headers, &col.organisation)?;
    let idx_directorate = header_index(&headers, &col.directorate)?;
    let idx_department = header_index(&headers, &col.department)?;
    let idx_service_plan = header_index(&headers, &col.service_plan)?;
    let idx_creditor = header_index(&headers, &col.creditor_name)?;
    let idx_date = header_index(&headers, &col.payment_date)?;
    let idx_txn = header_index(&headers, &col.transaction_no)?;
    let idx_amount = header_index(&headers, &col.net_amount)?;
    let idx_group = header_index(&headers, &col.subjective_group)?;
    let idx_subgroup = header_index(&headers, &col.subjective_subgroup)?;
    let idx_detail = header_index(&headers, &col.subjective_detail)?;
    let width = headers.len();

    let mut outcome = ParseOutcome::default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Ingest(format!("csv read error: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            outcome.rejects.push(RejectedRow {
                line,
                reason: format!("expected {width} fields, found {}", record.len()),
            });
            continue;
        }
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();

        let creditor = field(idx_creditor);
        if creditor.is_empty() {
            outcome.rejects.push(RejectedRow { line, reason: "empty creditor name".into() });
            continue;
        }
        // pure-punctuation names cannot survive harmonisation either
        if !creditor.chars().any(char::is_alphanumeric) {
            outcome.rejects.push(RejectedRow {
                line,
                reason: format!("creditor name {creditor:?} has no alphanumeric characters"),
            });
            continue;
        }
        let net_amount = match Pence::parse(&field(idx_amount)) {
            Ok(p) => p,
            Err(reason) => {
                outcome.rejects.push(RejectedRow { line, reason });
                continue;
            }
        };
        let date_raw = field(idx_date);
        let payment_date = cfg
            .date_formats
            .iter()
            .find_map(|f| NaiveDate::parse_from_str(&date_raw, f).ok());

        outcome.rows.push(RawRow {
            organisation: field(idx_organisation),
            directorate: field(idx_directorate),
            department: field(idx_department),
            service_plan: field(idx_service_plan),
            creditor_name: creditor,
            payment_date,
            transaction_no: field(idx_txn),
            net_amount,
            subjective_group: field(idx_group),
            subjective_subgroup: field(idx_subgroup),
            subjective_detail: field(idx_detail),
        });
    }
    Ok(outcome)
}

/// Remove refunds, credits and adjustments: keep strictly positive
/// amounts, preserving input order. Idempotent.
pub fn filter_positive(rows: Vec<RawRow>) -> (Vec<RawRow>, u64) {
    let before = rows.len();
    let kept: Vec<RawRow> = rows.into_iter().filter(|r| r.net_amount.is_positive()).collect();
    let dropped = (before - kept.len()) as u64;
    (kept, dropped)
}

/// A cleaned transaction attributed to a canonical supplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentRecord {
    pub supplier_raw: String,
    /// Canonical supplier pseudonym assigned by harmonisation.
    pub supplier_id: String,
    /// Strictly positive amount.
    pub amount: Pence,
    pub directorate: String,
    pub subjective_detail: String,
}

/// Suppliers with at least `min_n` payments, keyed by canonical id.
pub fn select_high_volume(records: &[PaymentRecord], min_n: u64) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        *counts.entry(&r.supplier_id).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, n)| n >= min_n)
        .map(|(id, _)| id.to_string())
        .collect()
}

/// Dataset-level statistics for the run report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_rows_raw: u64,
    pub n_rows_rejected: u64,
    pub n_rows_dropped_nonpositive: u64,
    pub n_rows_clean: u64,
    /// Distinct raw creditor names in the cleaned sample.
    pub n_raw_names: u64,
    /// Rows in the cleaned sample sharing a transaction number with an
    /// earlier row (duplicates are kept, only counted).
    pub n_duplicate_transaction_rows: u64,
    /// Total positive spend, exact decimal GBP.
    pub total_spend: PenceTotal,
    pub min_amount: Option<Pence>,
    pub max_amount: Option<Pence>,
    /// Median payment over the cleaned sample, GBP.
    pub median_amount: Option<f64>,
    /// Median payment over the analytic (high-volume) subsample, GBP;
    /// filled once supplier selection has run.
    pub median_amount_analytic: Option<f64>,
}

impl CorpusStats {
    /// Compute the pre-selection statistics from the parse outcome and the
    /// positivity filter result.
    pub fn compute(n_rows_raw: u64, n_rejected: u64, dropped: u64, clean: &[RawRow]) -> Self {
        let mut names = BTreeSet::new();
        let mut seen_txn = BTreeSet::new();
        let mut duplicates = 0u64;
        let mut total = PenceTotal::default();
        let mut amounts: Vec<i64> = Vec::with_capacity(clean.len());
        for row in clean {
            names.insert(row.creditor_name.as_str());
            if !row.transaction_no.is_empty() && !seen_txn.insert(row.transaction_no.as_str()) {
                duplicates += 1;
            }
            total.add(row.net_amount);
            amounts.push(row.net_amount.0);
        }
        amounts.sort_unstable();
        let median = if amounts.is_empty() {
            None
        } else {
            let gbp: Vec<f64> = amounts.iter().map(|&p| p as f64 / 100.0).collect();
            crate::stats::quantile(&gbp, 0.5).ok()
        };
        CorpusStats {
            n_rows_raw,
            n_rows_rejected: n_rejected,
            n_rows_dropped_nonpositive: dropped,
            n_rows_clean: clean.len() as u64,
            n_raw_names: names.len() as u64,
            n_duplicate_transaction_rows: duplicates,
            total_spend: total,
            min_amount: amounts.first().map(|&p| Pence(p)),
            max_amount: amounts.last().map(|&p| Pence(p)),
            median_amount: median,
            median_amount_analytic: None,
        }
    }
}

/// Write the rejects sidecar CSV (line number and reason).
pub fn write_rejects(path: &Path, rejects: &[RejectedRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["line", "reason"])?;
    for r in rejects {
        writer.write_record([r.line.to_string(), r.reason.clone()])?;
    }
    writer.flush()?;
    Ok(())
}
