//! Streaming n-gram ingestion and per-verb yearly variant counts.
//!
//! Input lines are tab-separated `token<TAB>year<TAB>match_count<TAB>volume_count`
//! (optionally gzip-compressed files). Tokens are matched against the expanded
//! conjugations by exact byte equality after NFC normalization; no case
//! folding, so proper-noun noise stays out. Yearly resolution is canonical:
//! years with zero subjunctive tokens yield no data point, never `s = 0`, and
//! the 5-year window only exists inside the inclusion filter.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::lexicon::{expand_conjugations, VerbEntry};

/// One parsed n-gram line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramRecord {
    pub token: String,
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
}

/// Per-verb yearly token counts for the two variants plus archaic spellings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VariantCounts {
    pub lemma: String,
    /// year -> (n_ra, n_se)
    pub by_year: BTreeMap<i32, (u64, u64)>,
    /// year -> archaic-form tokens (kept out of n_ra/n_se)
    pub archaic_by_year: BTreeMap<i32, u64>,
}

impl VariantCounts {
    pub fn new(lemma: impl Into<String>) -> Self {
        Self {
            lemma: lemma.into(),
            ..Self::default()
        }
    }

    /// Total `-ra` + `-se` tokens over all recorded years.
    pub fn total(&self) -> u64 {
        self.by_year.values().map(|&(ra, se)| ra + se).sum()
    }

    /// Copy restricted to years in `[start, end]` (archaic counts included).
    pub fn clip_years(&self, start: i32, end: i32) -> VariantCounts {
        VariantCounts {
            lemma: self.lemma.clone(),
            by_year: self
                .by_year
                .range(start..=end)
                .map(|(&y, &c)| (y, c))
                .collect(),
            archaic_by_year: self
                .archaic_by_year
                .range(start..=end)
                .map(|(&y, &c)| (y, c))
                .collect(),
        }
    }
}

/// One observation of the `-se` fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionPoint {
    /// Years since the reference year.
    pub t: f64,
    /// `n_se / (n_ra + n_se)`, in [0, 1].
    pub s: f64,
    pub n_total: u64,
}

/// Yearly `-se` fraction series for one verb, on an irregular time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionSeries {
    pub lemma: String,
    /// Calendar year mapped to t = 0.
    pub t0_year: i32,
    /// Strictly increasing in `t`; zero-token years are absent.
    pub points: Vec<FractionPoint>,
}

/// Dimensionless frequency of use: total subjunctive tokens / corpus size.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbFrequency {
    pub lemma: String,
    pub nu: f64,
}

/// Default corpus size (tokens) used to normalize frequencies.
pub const DEFAULT_CORPUS_SIZE: f64 = 8.4e10;

/// Parses one tab-separated n-gram line. `line_no` is only used in error
/// reports (pass 0 when there is no meaningful position).
pub fn parse_ngram_line(line: &str, line_no: usize) -> Result<NgramRecord> {
    let bad = |reason: String| Error::BadNgramLine {
        line: line_no,
        reason,
        content: line.to_string(),
    };

    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(bad(format!(
            "expected 4 tab-separated fields, got {}",
            fields.len()
        )));
    }
    let year: i32 = fields[1]
        .parse()
        .map_err(|_| bad(format!("non-integer year '{}'", fields[1])))?;
    let match_count: u64 = fields[2]
        .parse()
        .map_err(|_| bad(format!("non-integer match_count '{}'", fields[2])))?;
    let volume_count: u64 = fields[3]
        .parse()
        .map_err(|_| bad(format!("non-integer volume_count '{}'", fields[3])))?;

    Ok(NgramRecord {
        token: fields[0].nfc().collect(),
        year,
        match_count,
        volume_count,
    })
}

/// Opens an n-gram file (gzip-decoded when the extension is `.gz`) and
/// streams parsed records. Blank lines are skipped.
pub fn read_ngram_file(path: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<NgramRecord>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let path_buf = path.to_path_buf();
    Ok(BufReader::new(reader)
        .lines()
        .enumerate()
        .filter_map(move |(idx, line)| match line {
            Err(e) => Some(Err(Error::io(path_buf.clone(), e))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(parse_ngram_line(&l, idx + 1)),
        }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FormKind {
    Ra,
    Se,
    Archaic,
}

/// token -> all (verb index, variant) pairs it counts towards. A single form
/// can serve several verbs (ser and ir share fuera/fuese).
fn token_index(lexicon: &[VerbEntry]) -> HashMap<String, Vec<(usize, FormKind)>> {
    let mut index: HashMap<String, Vec<(usize, FormKind)>> = HashMap::new();
    for (i, entry) in lexicon.iter().enumerate() {
        let forms = expand_conjugations(entry);
        for form in &forms.ra_forms {
            index.entry(form.clone()).or_default().push((i, FormKind::Ra));
        }
        for form in &forms.se_forms {
            index.entry(form.clone()).or_default().push((i, FormKind::Se));
        }
        for form in &entry.archaic_forms {
            index
                .entry(form.clone())
                .or_default()
                .push((i, FormKind::Archaic));
        }
    }
    index
}

/// Aggregates a record stream into per-verb yearly counts. Records outside
/// `year_range` (inclusive) and unmatched tokens are ignored; matching adds
/// `match_count` to the verb's tally. Order-independent by construction.
///
/// The result has one entry per lexicon verb, in lexicon order, possibly
/// empty for verbs never seen.
pub fn aggregate_counts<I>(
    records: I,
    lexicon: &[VerbEntry],
    year_range: (i32, i32),
) -> Result<Vec<VariantCounts>>
where
    I: IntoIterator<Item = Result<NgramRecord>>,
{
    let (start, end) = year_range;
    if start > end {
        return Err(Error::InvalidInput(format!(
            "year range must be ordered, got {start}..{end}"
        )));
    }
    let index = token_index(lexicon);
    let mut counts: Vec<VariantCounts> = lexicon
        .iter()
        .map(|e| VariantCounts::new(e.lemma.clone()))
        .collect();

    for record in records {
        let record = record?;
        if record.year < start || record.year > end || record.match_count == 0 {
            continue;
        }
        let Some(targets) = index.get(&record.token) else {
            continue;
        };
        for &(verb, kind) in targets {
            match kind {
                FormKind::Ra => {
                    counts[verb].by_year.entry(record.year).or_default().0 += record.match_count;
                }
                FormKind::Se => {
                    counts[verb].by_year.entry(record.year).or_default().1 += record.match_count;
                }
                FormKind::Archaic => {
                    *counts[verb].archaic_by_year.entry(record.year).or_default() +=
                        record.match_count;
                }
            }
        }
    }
    Ok(counts)
}

/// Returns the lemmas (input order) whose `-ra`+`-se` total is at least 1 in
/// every `window_years`-sized window tiling `[start_year, end_year]` (final
/// partial window included), minus the exclusion list.
pub fn apply_inclusion_filter(
    counts: &[VariantCounts],
    start_year: i32,
    end_year: i32,
    window_years: i32,
    exclusions: &HashSet<String>,
) -> Vec<String> {
    assert!(window_years > 0 && start_year <= end_year);
    counts
        .iter()
        .filter(|vc| {
            let mut window_start = start_year;
            while window_start <= end_year {
                let window_end = (window_start + window_years - 1).min(end_year);
                let total: u64 = vc
                    .by_year
                    .range(window_start..=window_end)
                    .map(|(_, &(ra, se))| ra + se)
                    .sum();
                if total == 0 {
                    return false;
                }
                window_start += window_years;
            }
            true
        })
        .filter(|vc| !exclusions.contains(&vc.lemma))
        .map(|vc| vc.lemma.clone())
        .collect()
}

/// Computes the yearly `-se` fraction series, one point per year with at
/// least one subjunctive token; `t = year − t0_year`.
pub fn compute_fraction_series(counts: &VariantCounts, t0_year: i32) -> FractionSeries {
    let points = counts
        .by_year
        .iter()
        .filter(|(_, &(ra, se))| ra + se > 0)
        .map(|(&year, &(ra, se))| {
            let n_total = ra + se;
            FractionPoint {
                t: f64::from(year - t0_year),
                s: se as f64 / n_total as f64,
                n_total,
            }
        })
        .collect();
    FractionSeries {
        lemma: counts.lemma.clone(),
        t0_year,
        points,
    }
}

/// Frequency of use: all recorded `-ra`+`-se` tokens divided by the corpus
/// size. A verb with zero tokens should have been filtered out earlier.
pub fn compute_frequency(counts: &VariantCounts, corpus_size: f64) -> Result<VerbFrequency> {
    if !corpus_size.is_finite() || corpus_size <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "corpus size must be positive, got {corpus_size}"
        )));
    }
    let total = counts.total();
    if total == 0 {
        return Err(Error::ZeroTotalTokens {
            lemma: counts.lemma.clone(),
        });
    }
    Ok(VerbFrequency {
        lemma: counts.lemma.clone(),
        nu: total as f64 / corpus_size,
    })
}

/// Archaic-orthography check: modern-forms-only holds when no archaic token
/// appears at or after the cutoff year.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ArchaicReport {
    pub lemma: String,
    pub cutoff_year: i32,
    /// Archaic tokens in years >= cutoff; zero means the assumption holds.
    pub total_at_or_after: u64,
    /// Per-year breakdown of the offending tokens.
    pub by_year_at_or_after: BTreeMap<i32, u64>,
    /// Archaic tokens before the cutoff (context, not a finding).
    pub total_before: u64,
}

pub fn verify_archaic_absence(counts: &VariantCounts, cutoff_year: i32) -> ArchaicReport {
    let by_year_at_or_after: BTreeMap<i32, u64> = counts
        .archaic_by_year
        .range(cutoff_year..)
        .map(|(&y, &c)| (y, c))
        .collect();
    ArchaicReport {
        lemma: counts.lemma.clone(),
        cutoff_year,
        total_at_or_after: by_year_at_or_after.values().sum(),
        by_year_at_or_after,
        total_before: counts
            .archaic_by_year
            .range(..cutoff_year)
            .map(|(_, &c)| c)
            .sum(),
    }
}

/// Writes the canonical aggregated-counts CSV (`lemma,year,n_ra,n_se`):
/// verbs in input order, years ascending. Verbs without any recorded year
/// produce no rows. Archaic counts are not part of this format.
pub fn write_counts_csv<W: Write>(mut w: W, counts: &[VariantCounts]) -> std::io::Result<()> {
    writeln!(w, "lemma,year,n_ra,n_se")?;
    for vc in counts {
        for (year, (ra, se)) in &vc.by_year {
            writeln!(w, "{},{},{},{}", vc.lemma, year, ra, se)?;
        }
    }
    Ok(())
}

/// Reads the canonical counts CSV back; verbs come out in first-seen order,
/// so `write_counts_csv` round-trips bit-exactly.
pub fn read_counts_csv<R: Read>(r: R, source: impl AsRef<Path>) -> Result<Vec<VariantCounts>> {
    let path = source.as_ref();
    let mut order: Vec<String> = Vec::new();
    let mut by_lemma: HashMap<String, VariantCounts> = HashMap::new();

    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let row = line.trim_end_matches(['\r', '\n']);
        if row.is_empty() || (line_no == 1 && row == "lemma,year,n_ra,n_se") {
            continue;
        }
        let malformed = |reason: String| Error::MalformedRow {
            path: path.into(),
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 4 {
            return Err(malformed(format!("expected 4 fields, got {}", fields.len())));
        }
        let lemma = fields[0].to_string();
        let year: i32 = fields[1]
            .parse()
            .map_err(|_| malformed(format!("bad year '{}'", fields[1])))?;
        let ra: u64 = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad n_ra '{}'", fields[2])))?;
        let se: u64 = fields[3]
            .parse()
            .map_err(|_| malformed(format!("bad n_se '{}'", fields[3])))?;

        let vc = by_lemma.entry(lemma.clone()).or_insert_with(|| {
            order.push(lemma.clone());
            VariantCounts::new(lemma)
        });
        if vc.by_year.insert(year, (ra, se)).is_some() {
            return Err(malformed(format!("duplicate year {year} for '{}'", vc.lemma)));
        }
    }

    Ok(order
        .into_iter()
        .map(|lemma| by_lemma.remove(&lemma).unwrap())
        .collect())
}

/// Reads the cross-corpus reference CSV `lemma,mean_se_fraction`. A header
/// row and `#` comments are accepted and skipped.
pub fn read_cdh_csv(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let row = line.trim();
        if row.is_empty() || row.starts_with('#') || row == "lemma,mean_se_fraction" {
            continue;
        }
        let malformed = |reason: String| Error::MalformedRow {
            path: path.into(),
            line: line_no,
            reason,
        };
        let (lemma, frac) = row
            .split_once(',')
            .ok_or_else(|| malformed("expected 2 comma-separated fields".into()))?;
        let frac: f64 = frac
            .trim()
            .parse()
            .map_err(|_| malformed(format!("bad fraction '{frac}'")))?;
        if !(0.0..=1.0).contains(&frac) {
            return Err(malformed(format!("fraction {frac} outside [0, 1]")));
        }
        out.push((lemma.trim().nfc().collect(), frac));
    }
    Ok(out)
}
