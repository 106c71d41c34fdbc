//! CSV ingestion: parse `date,value` files, trim daily series to the
//! spec'd trading-day counts, aggregate to weekly means where requested,
//! transform, and align everything onto a common quarter range.
//!
//! Quarters that are incomplete at the edges of the common range are
//! dropped and counted; incomplete quarters inside the range are a hard
//! error listing every offending (series, quarter) pair.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;

use super::{Frequency, MixedFreqPanel, PanelSeries, QuarterId, SeriesSpec, Transformation};
use crate::error::{Error, Result};

/// What ingestion discarded and why; one record per run.
#[derive(Debug, Clone, Default)]
pub struct IngestLog {
    /// Per series: observations discarded by trading-day trimming.
    pub trimmed: Vec<(String, usize)>,
    /// Quarters with partial data outside the final panel range.
    pub dropped_quarters: Vec<QuarterId>,
    /// First and last quarter retained.
    pub span: Option<(QuarterId, QuarterId)>,
}

impl fmt::Display for IngestLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((lo, hi)) = self.span {
            writeln!(f, "panel spans {lo}..{hi}")?;
        }
        for (name, count) in &self.trimmed {
            if *count > 0 {
                writeln!(f, "{name}: trimmed {count} observations beyond the trading-day budget")?;
            }
        }
        writeln!(f, "dropped {} incomplete edge quarters", self.dropped_quarters.len())
    }
}

/// One parsed series: chronologically ordered dated values.
struct RawSeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

fn read_series_csv(path: &Path) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| {
        Error::Ingest(format!("{}: {e}", path.display()))
    })?;
    let headers = reader.headers().map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let date_col = find("date").ok_or_else(|| {
        Error::Ingest(format!("{}: no 'date' column in header {:?}", path.display(), headers))
    })?;
    let value_col = find("value").ok_or_else(|| {
        Error::Ingest(format!("{}: no 'value' column in header {:?}", path.display(), headers))
    })?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut bad_lines: Vec<String> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header occupies line 1
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                bad_lines.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let date = record.get(date_col).unwrap_or("").trim();
        let value = record.get(value_col).unwrap_or("").trim();
        let parsed_date = NaiveDate::parse_from_str(date, "%Y-%m-%d");
        let parsed_value = value.parse::<f64>();
        match (parsed_date, parsed_value) {
            (Ok(d), Ok(v)) if v.is_finite() => rows.push((d, v)),
            (Err(_), _) => bad_lines.push(format!("line {line}: bad date {date:?}")),
            (_, Err(_)) => bad_lines.push(format!("line {line}: bad value {value:?}")),
            _ => bad_lines.push(format!("line {line}: non-finite value {value:?}")),
        }
    }
    if !bad_lines.is_empty() {
        return Err(Error::Ingest(format!(
            "{}: {} unparseable rows ({})",
            path.display(),
            bad_lines.len(),
            bad_lines.join("; ")
        )));
    }
    if rows.is_empty() {
        return Err(Error::Ingest(format!("{}: no data rows", path.display())));
    }
    rows.sort_by_key(|(d, _)| *d);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Ingest(format!("{}: duplicate date {}", path.display(), w[0].0)));
        }
    }
    let (dates, values) = rows.into_iter().unzip();
    Ok(RawSeries { dates, values })
}

/// Keeps the first `days` observations of each calendar month, returning
/// the retained series and the number discarded.
fn trim_trading_days(raw: &RawSeries, days: usize) -> (RawSeries, usize) {
    let mut dates = Vec::with_capacity(raw.dates.len());
    let mut values = Vec::with_capacity(raw.values.len());
    let mut discarded = 0usize;
    let mut month_key = None;
    let mut kept_in_month = 0usize;
    for (d, v) in raw.dates.iter().zip(&raw.values) {
        let key = (QuarterId::from_date(*d).year, d.format("%m").to_string());
        if month_key.as_ref() != Some(&key) {
            month_key = Some(key);
            kept_in_month = 0;
        }
        if kept_in_month < days {
            dates.push(*d);
            values.push(*v);
            kept_in_month += 1;
        } else {
            discarded += 1;
        }
    }
    (RawSeries { dates, values }, discarded)
}

/// Collapses each month's retained days into non-overlapping 4-day
/// means, dated by the last day of each block.
fn weekly_means(raw: &RawSeries) -> RawSeries {
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut i = 0;
    while i < raw.dates.len() {
        let month = (QuarterId::from_date(raw.dates[i]).year, raw.dates[i].format("%m").to_string());
        let mut j = i;
        while j < raw.dates.len()
            && (QuarterId::from_date(raw.dates[j]).year, raw.dates[j].format("%m").to_string())
                == month
        {
            j += 1;
        }
        let mut k = i;
        while k + 4 <= j {
            let mean = raw.values[k..k + 4].iter().sum::<f64>() / 4.0;
            dates.push(raw.dates[k + 3]);
            values.push(mean);
            k += 4;
        }
        // a trailing partial block signals a short month; dropping it
        // here lets quarter assembly report the shortage
        i = j;
    }
    RawSeries { dates, values }
}

fn transform(raw: &RawSeries, tf: Transformation, name: &str) -> Result<RawSeries> {
    match tf {
        Transformation::None => Ok(RawSeries { dates: raw.dates.clone(), values: raw.values.clone() }),
        Transformation::Diff => {
            let values = raw.values.windows(2).map(|w| w[1] - w[0]).collect();
            Ok(RawSeries { dates: raw.dates[1..].to_vec(), values })
        }
        Transformation::LogDiff => {
            if let Some(pos) = raw.values.iter().position(|&v| v <= 0.0) {
                return Err(Error::Ingest(format!(
                    "{name}: log difference needs positive values, got {} on {}",
                    raw.values[pos], raw.dates[pos]
                )));
            }
            let values = raw.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
            Ok(RawSeries { dates: raw.dates[1..].to_vec(), values })
        }
    }
}

/// Groups a transformed series by calendar quarter.
fn by_quarter(raw: &RawSeries) -> BTreeMap<QuarterId, Vec<f64>> {
    let mut map: BTreeMap<QuarterId, Vec<f64>> = BTreeMap::new();
    for (d, v) in raw.dates.iter().zip(&raw.values) {
        map.entry(QuarterId::from_date(*d)).or_default().push(*v);
    }
    map
}

/// Reads and aligns every series in `specs` onto their common complete
/// quarter range. Exactly one spec must be quarterly; it becomes the
/// panel target.
pub fn ingest_csv(specs: &[SeriesSpec]) -> Result<(MixedFreqPanel, IngestLog)> {
    let targets: Vec<&SeriesSpec> =
        specs.iter().filter(|s| s.frequency == Frequency::Quarterly).collect();
    if targets.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "need exactly one quarterly target series, found {}",
            targets.len()
        )));
    }
    let target_spec = targets[0];
    let covariate_specs: Vec<&SeriesSpec> =
        specs.iter().filter(|s| s.frequency != Frequency::Quarterly).collect();

    let mut log = IngestLog::default();

    let raw_target = read_series_csv(&target_spec.file)?;
    let target = transform(&raw_target, target_spec.transformation, &target_spec.name)?;
    let target_by_q = by_quarter(&target);
    for (q, vals) in &target_by_q {
        if vals.len() > 1 {
            return Err(Error::Ingest(format!(
                "{}: {} values in quarter {q}; a quarterly series has one",
                target_spec.name,
                vals.len()
            )));
        }
    }

    let mut aligned: Vec<(usize, BTreeMap<QuarterId, Vec<f64>>)> = Vec::new();
    for spec in &covariate_specs {
        let m = spec.per_quarter()?;
        let mut raw = read_series_csv(&spec.file)?;
        if spec.frequency == Frequency::Daily {
            let days = spec.days_per_month.expect("per_quarter checked daily fields");
            let (trimmed, discarded) = trim_trading_days(&raw, days);
            log.trimmed.push((spec.name.clone(), discarded));
            raw = trimmed;
            if spec.weekly_mean {
                raw = weekly_means(&raw);
            }
        }
        let transformed = transform(&raw, spec.transformation, &spec.name)?;
        aligned.push((m, by_quarter(&transformed)));
    }

    // Common range: every series complete and the target observed.
    let complete_span = |qs: &BTreeMap<QuarterId, Vec<f64>>, m: usize| {
        let lo = qs.iter().find(|(_, v)| v.len() == m).map(|(q, _)| *q);
        let hi = qs.iter().rev().find(|(_, v)| v.len() == m).map(|(q, _)| *q);
        (lo, hi)
    };
    let mut lo = target_by_q.keys().next().copied();
    let mut hi = target_by_q.keys().next_back().copied();
    for ((m, qs), spec) in aligned.iter().zip(&covariate_specs) {
        let (slo, shi) = complete_span(qs, *m);
        let (slo, shi) = match (slo, shi) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Ingest(format!(
                    "{}: no quarter has the full {m} observations",
                    spec.name
                )))
            }
        };
        lo = lo.map(|q| q.max(slo));
        hi = hi.map(|q| q.min(shi));
    }
    let (lo, hi) = match (lo, hi) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(Error::Ingest("series have no overlapping complete quarters".into())),
    };

    // Everything with data outside [lo, hi] is dropped and counted once.
    let mut dropped: Vec<QuarterId> = Vec::new();
    let mut note_dropped = |q: QuarterId| {
        if (q < lo || q > hi) && !dropped.contains(&q) {
            dropped.push(q);
        }
    };
    for q in target_by_q.keys() {
        note_dropped(*q);
    }
    for (_, qs) in &aligned {
        for q in qs.keys() {
            note_dropped(*q);
        }
    }
    dropped.sort();
    log.dropped_quarters = dropped;
    log.span = Some((lo, hi));

    let mut quarters = vec![lo];
    while *quarters.last().unwrap() < hi {
        let next = quarters.last().unwrap().next();
        quarters.push(next);
    }

    // Inside the range, shortages are hard errors listed per quarter.
    let mut problems: Vec<String> = Vec::new();
    let mut y = Vec::with_capacity(quarters.len());
    for q in &quarters {
        match target_by_q.get(q) {
            Some(v) => y.push(v[0]),
            None => problems.push(format!("{}: missing quarter {q}", target_spec.name)),
        }
    }
    let mut series = Vec::new();
    for ((m, qs), spec) in aligned.iter().zip(&covariate_specs) {
        let mut values = Vec::with_capacity(quarters.len() * m);
        for q in &quarters {
            match qs.get(q) {
                Some(v) if v.len() == *m => values.extend_from_slice(v),
                Some(v) => problems.push(format!(
                    "{}: quarter {q} has {} of {m} observations",
                    spec.name,
                    v.len()
                )),
                None => problems.push(format!("{}: missing quarter {q}", spec.name)),
            }
        }
        series.push(PanelSeries::new(spec.name.clone(), *m, values)?);
    }
    if !problems.is_empty() {
        return Err(Error::Ingest(format!(
            "incomplete quarters inside the common range: {}",
            problems.join("; ")
        )));
    }

    let panel = MixedFreqPanel::new(target_spec.name.clone(), quarters, y, series)?;
    Ok((panel, log))
}
