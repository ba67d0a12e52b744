//! `vardyn ingest`: n-gram files -> canonical counts, inclusion report,
//! archaic-orthography report.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use vardyn_core::ingest::{
    aggregate_counts, apply_inclusion_filter, read_ngram_file, verify_archaic_absence,
    write_counts_csv, ArchaicReport, VariantCounts,
};
use vardyn_core::lexicon::{load_lexicon, VerbEntry};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, IntoCliResult};

#[derive(Serialize)]
struct ArchaicSummary {
    cutoff_year: i32,
    all_clean: bool,
    verbs: Vec<ArchaicReport>,
}

/// Sums per-file aggregations; counts share the lexicon order, so the merge
/// is a position-wise map union.
fn merge_counts(mut acc: Vec<VariantCounts>, other: Vec<VariantCounts>) -> Vec<VariantCounts> {
    for (a, b) in acc.iter_mut().zip(other) {
        for (year, (ra, se)) in b.by_year {
            let slot = a.by_year.entry(year).or_default();
            slot.0 += ra;
            slot.1 += se;
        }
        for (year, n) in b.archaic_by_year {
            *a.archaic_by_year.entry(year).or_default() += n;
        }
    }
    acc
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let lexicon_path = cfg
        .lexicon_path
        .as_ref()
        .ok_or_else(|| CliError::usage(anyhow!("config is missing lexicon_path")))?;
    if cfg.ngram_paths.is_empty() {
        return Err(CliError::usage(anyhow!("config lists no ngram_paths")));
    }
    let lexicon = load_lexicon(lexicon_path).or_data()?;
    super::ensure_output_dir(&cfg.output_dir)?;

    let year_range = (cfg.corpus_start_year, cfg.end_year);
    let mut counts: Vec<VariantCounts> = lexicon
        .iter()
        .map(|e| VariantCounts::new(e.lemma.clone()))
        .collect();
    for path in &cfg.ngram_paths {
        let records = read_ngram_file(path).or_data()?;
        let file_counts = aggregate_counts(records, &lexicon, year_range)
            .map_err(anyhow::Error::from)
            .with_context(|| format!("while reading {}", path.display()))
            .map_err(CliError::data)?;
        counts = merge_counts(counts, file_counts);
    }

    let total_tokens: u64 = counts.iter().map(|c| c.total()).sum();
    if total_tokens == 0 {
        eprintln!("warning: no subjunctive tokens matched; outputs will be empty");
    }

    let counts_path = cfg.output_dir.join("counts.csv");
    let mut buf = Vec::new();
    write_counts_csv(&mut buf, &counts)
        .map_err(|e| CliError::data(anyhow!("cannot serialize counts: {e}")))?;
    super::write_file(&counts_path, &buf)?;

    let included = apply_inclusion_filter(
        &counts,
        cfg.t0_year,
        cfg.end_year,
        cfg.window_years,
        &cfg.exclusion_set(),
    );
    let included_path = cfg.output_dir.join("included_verbs.txt");
    let mut listing = included.join("\n");
    if !listing.is_empty() {
        listing.push('\n');
    }
    super::write_file(&included_path, listing.as_bytes())?;

    let archaic = archaic_summary(&lexicon, &counts, cfg.archaic_cutoff_year);
    let json = serde_json::to_string_pretty(&archaic)
        .map_err(|e| CliError::data(anyhow!("cannot serialize archaic report: {e}")))?;
    super::write_file(&cfg.output_dir.join("archaic_report.json"), json.as_bytes())?;

    let verbs_with_data = counts.iter().filter(|c| !c.by_year.is_empty()).count();
    println!(
        "ingested {} file(s): {} tokens over {} of {} verbs; {} pass the inclusion filter",
        cfg.ngram_paths.len(),
        total_tokens,
        verbs_with_data,
        lexicon.len(),
        included.len()
    );
    if !archaic.all_clean {
        println!(
            "archaic forms found at or after {} for: {}",
            cfg.archaic_cutoff_year,
            archaic
                .verbs
                .iter()
                .filter(|r| r.total_at_or_after > 0)
                .map(|r| r.lemma.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    println!("wrote {}", counts_path.display());
    Ok(())
}

/// Archaic reports for verbs that declare archaic spellings or were seen
/// with any; the rest have nothing to verify.
fn archaic_summary(
    lexicon: &[VerbEntry],
    counts: &[VariantCounts],
    cutoff_year: i32,
) -> ArchaicSummary {
    let declared: BTreeMap<&str, bool> = lexicon
        .iter()
        .map(|e| (e.lemma.as_str(), !e.archaic_forms.is_empty()))
        .collect();
    let verbs: Vec<ArchaicReport> = counts
        .iter()
        .filter(|vc| {
            declared.get(vc.lemma.as_str()).copied().unwrap_or(false)
                || !vc.archaic_by_year.is_empty()
        })
        .map(|vc| verify_archaic_absence(vc, cutoff_year))
        .collect();
    ArchaicSummary {
        cutoff_year,
        all_clean: verbs.iter().all(|r| r.total_at_or_after == 0),
        verbs,
    }
}

/// Path of the canonical counts file for a given output directory.
pub fn counts_path(output_dir: &Path) -> std::path::PathBuf {
    output_dir.join("counts.csv")
}
