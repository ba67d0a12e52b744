//! `vardyn fit`: aggregated counts -> per-verb (s0, τ) fits, one shared
//! amplitude, and its bootstrap spread.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use anyhow::anyhow;
use serde::Serialize;
use vardyn_core::fit::{bootstrap_a, fit_global, FitOptions, GlobalFit};
use vardyn_core::ingest::{
    apply_inclusion_filter, compute_fraction_series, compute_frequency, read_counts_csv,
    FractionSeries, VariantCounts,
};
use vardyn_core::Error as CoreError;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, IntoCliResult};

/// One row of the per-verb fit report CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub lemma: String,
    pub nu: f64,
    pub s0: f64,
    pub tau: f64,
    pub sse: f64,
    pub n_points: usize,
    pub max_model_value: f64,
}

pub const FIT_REPORT_HEADER: &str = "lemma,nu,s0,tau,sse,n_points,max_model_value";

pub fn write_fit_report(rows: &[FitRow]) -> String {
    let mut out = String::from(FIT_REPORT_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.lemma, r.nu, r.s0, r.tau, r.sse, r.n_points, r.max_model_value
        ));
    }
    out
}

pub fn read_fit_report(path: &Path) -> CliResult<Vec<FitRow>> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::data(anyhow!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::data(anyhow!("{}: {e}", path.display())))?;
        let row = line.trim();
        if row.is_empty() || (idx == 0 && row == FIT_REPORT_HEADER) {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let bad = || CliError::data(anyhow!("{}:{}: malformed row", path.display(), idx + 1));
        if fields.len() != 7 {
            return Err(bad());
        }
        rows.push(FitRow {
            lemma: fields[0].to_string(),
            nu: fields[1].parse().map_err(|_| bad())?,
            s0: fields[2].parse().map_err(|_| bad())?,
            tau: fields[3].parse().map_err(|_| bad())?,
            sse: fields[4].parse().map_err(|_| bad())?,
            n_points: fields[5].parse().map_err(|_| bad())?,
            max_model_value: fields[6].parse().map_err(|_| bad())?,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct BootstrapSummary {
    mean: f64,
    sd: f64,
    repetitions: usize,
    subset_size: usize,
    failed_draws: usize,
    degenerate: bool,
}

#[derive(Serialize)]
struct Summary {
    a: f64,
    a_sd: f64,
    total_sse: f64,
    excluded: Vec<String>,
    bootstrap: BootstrapSummary,
}

struct PreparedSeries {
    series: Vec<FractionSeries>,
    frequencies: BTreeMap<String, f64>,
    excluded: Vec<(String, String)>,
}

/// Builds the fraction series and frequencies for the included verbs,
/// restricted to the analysis window.
fn prepare_series(counts: &[VariantCounts], cfg: &RunConfig) -> PreparedSeries {
    let included = apply_inclusion_filter(
        counts,
        cfg.t0_year,
        cfg.end_year,
        cfg.window_years,
        &cfg.exclusion_set(),
    );
    let by_lemma: BTreeMap<&str, &VariantCounts> =
        counts.iter().map(|c| (c.lemma.as_str(), c)).collect();

    let mut series = Vec::new();
    let mut frequencies = BTreeMap::new();
    let mut excluded = Vec::new();
    for lemma in included {
        let clipped = by_lemma[lemma.as_str()].clip_years(cfg.t0_year, cfg.end_year);
        let s = compute_fraction_series(&clipped, cfg.t0_year);
        if s.points.len() < 3 {
            excluded.push((lemma, format!("only {} data points", s.points.len())));
            continue;
        }
        match compute_frequency(&clipped, cfg.corpus_size) {
            Ok(f) => {
                frequencies.insert(lemma.clone(), f.nu);
                series.push(s);
            }
            Err(e) => excluded.push((lemma, e.to_string())),
        }
    }
    PreparedSeries {
        series,
        frequencies,
        excluded,
    }
}

/// Fits the set, dropping verbs whose inner optimization reports
/// non-convergence and retrying, so one pathological trace cannot sink the
/// run.
fn fit_with_retries(
    series: &mut Vec<FractionSeries>,
    a_grid: &[f64],
    opts: &FitOptions,
    excluded: &mut Vec<(String, String)>,
) -> CliResult<GlobalFit> {
    loop {
        if series.is_empty() {
            return Err(CliError::fit(anyhow!("no fittable series remain")));
        }
        match fit_global(series, a_grid, opts) {
            Ok(global) => return Ok(global),
            Err(CoreError::NoConvergence { lemma, diagnostics }) => {
                eprintln!("warning: dropping '{lemma}': {diagnostics}");
                series.retain(|s| s.lemma != lemma);
                excluded.push((lemma, diagnostics));
            }
            Err(e) => return Err(CliError::from_core(e)),
        }
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let counts_path = super::ingest::counts_path(&cfg.output_dir);
    if !counts_path.exists() {
        return Err(CliError::data(anyhow!(
            "{} not found; run `vardyn ingest` first",
            counts_path.display()
        )));
    }
    let file = std::fs::File::open(&counts_path)
        .map_err(|e| CliError::data(anyhow!("cannot read {}: {e}", counts_path.display())))?;
    let counts = read_counts_csv(file, &counts_path).or_data()?;

    let PreparedSeries {
        mut series,
        frequencies,
        mut excluded,
    } = prepare_series(&counts, cfg);
    let a_grid = cfg.a_grid.values().map_err(CliError::usage)?;
    let opts = cfg.fit.options();

    let mut global = fit_with_retries(&mut series, &a_grid, &opts, &mut excluded)?;

    let subset_size = cfg.bootstrap.subset_size.min(series.len());
    let clamped = subset_size != cfg.bootstrap.subset_size;
    let boot = bootstrap_a(
        &series,
        cfg.bootstrap.repetitions,
        subset_size,
        cfg.bootstrap_seed(),
        &a_grid,
        &opts,
    )
    .map_err(CliError::from_core)?;
    let degenerate = boot.degenerate || clamped || series.len() == 1;
    global.a_sd = Some(boot.sd);

    let rows: Vec<FitRow> = global
        .verb_fits
        .iter()
        .map(|f| FitRow {
            lemma: f.lemma.clone(),
            nu: frequencies[&f.lemma],
            s0: f.params.s0,
            tau: f.params.tau,
            sse: f.sse,
            n_points: f.n_points,
            max_model_value: f.max_model_value,
        })
        .collect();
    super::ensure_output_dir(&cfg.output_dir)?;
    let report_path = cfg.output_dir.join("fit_report.csv");
    super::write_file(&report_path, write_fit_report(&rows).as_bytes())?;

    let summary = Summary {
        a: global.a,
        a_sd: boot.sd,
        total_sse: global.total_sse,
        excluded: excluded.iter().map(|(l, _)| l.clone()).collect(),
        bootstrap: BootstrapSummary {
            mean: boot.mean,
            sd: boot.sd,
            repetitions: cfg.bootstrap.repetitions,
            subset_size,
            failed_draws: boot.failed_draws,
            degenerate,
        },
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::data(anyhow!("cannot serialize summary: {e}")))?;
    super::write_file(&cfg.output_dir.join("summary.json"), json.as_bytes())?;

    println!(
        "fitted {} verbs: a = {:.4} +/- {:.4} (total sse {:.6e})",
        rows.len(),
        global.a,
        boot.sd,
        global.total_sse
    );
    for fit in &global.verb_fits {
        let tau = fit.params.tau;
        if tau >= opts.tau_max * (1.0 - 1e-6) || tau <= opts.tau_min * (1.0 + 1e-6) {
            println!(
                "note: '{}' hit the tau bound (tau = {tau:.2}); the timescale is not identified by this window",
                fit.lemma
            );
        }
        if fit.max_model_value > 1.0 {
            println!(
                "note: '{}' fitted curve peaks at {:.3} > 1 (kept; flagged in max_model_value)",
                fit.lemma, fit.max_model_value
            );
        }
    }
    if degenerate {
        println!("note: bootstrap spread is degenerate for this input");
    }
    for (lemma, reason) in &excluded {
        println!("excluded {lemma}: {reason}");
    }
    println!("wrote {}", report_path.display());
    Ok(())
}
