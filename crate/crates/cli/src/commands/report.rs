//! `vardyn report`: statistical analyses and plots from the fit report.

use std::collections::BTreeMap;

use anyhow::anyhow;
use serde::Serialize;
use vardyn_core::ingest::read_cdh_csv;
use vardyn_core::stats::{pearson, power_law_fit, zipf_fit, PowerLawFit, RegressionResult};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, IntoCliResult};

use super::fit::{read_fit_report, FitRow};

#[derive(Serialize)]
struct PowerLawSection {
    #[serde(flatten)]
    fit: PowerLawFit,
    delta: f64,
    n: usize,
}

#[derive(Serialize)]
struct CdhSection {
    #[serde(flatten)]
    regression: RegressionResult,
    /// Lemmas present in both the fit report and the reference CSV.
    matched: Vec<String>,
}

#[derive(Serialize)]
struct Inputs {
    lemmas: Vec<String>,
    nu: Vec<f64>,
    tau: Vec<f64>,
    s0: Vec<f64>,
    cdh_pairs: Option<Vec<(String, f64)>>,
}

#[derive(Serialize)]
struct Analysis {
    power_law: PowerLawSection,
    zipf: PowerLawSection,
    cdh: Option<CdhSection>,
    inputs: Inputs,
}

const LN10: f64 = std::f64::consts::LN_10;

fn log10_points(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (x.log10(), y.log10()))
        .collect()
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let report_path = cfg.output_dir.join("fit_report.csv");
    if !report_path.exists() {
        return Err(CliError::data(anyhow!(
            "{} not found; run `vardyn fit` first",
            report_path.display()
        )));
    }
    let rows = read_fit_report(&report_path)?;
    if rows.len() < 3 {
        return Err(CliError::data(anyhow!(
            "fit report has {} rows; need at least 3 for the analyses",
            rows.len()
        )));
    }

    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let nus: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let s0s: Vec<f64> = rows.iter().map(|r| r.s0).collect();

    let power_law = power_law_fit(&taus, &nus, cfg.deming_delta, cfg.permutations, cfg.seed)
        .or_data()?;

    let mut freqs = nus.clone();
    freqs.sort_by(|a, b| b.total_cmp(a));
    let zipf = zipf_fit(&freqs, cfg.permutations, cfg.seed).or_data()?;

    let cdh = cdh_section(cfg, &rows)?;

    super::ensure_output_dir(&cfg.output_dir)?;
    write_plots(cfg, &rows, &power_law, &zipf, cdh.as_ref())?;

    let analysis = Analysis {
        power_law: PowerLawSection {
            fit: power_law.clone(),
            delta: cfg.deming_delta,
            n: rows.len(),
        },
        zipf: PowerLawSection {
            fit: zipf.clone(),
            delta: cfg.deming_delta,
            n: rows.len(),
        },
        cdh,
        inputs: Inputs {
            lemmas: rows.iter().map(|r| r.lemma.clone()).collect(),
            nu: nus,
            tau: taus,
            s0: s0s,
            cdh_pairs: read_cdh_pairs(cfg),
        },
    };
    let json = serde_json::to_string_pretty(&analysis)
        .map_err(|e| CliError::data(anyhow!("cannot serialize analysis: {e}")))?;
    let analysis_path = cfg.output_dir.join("analysis.json");
    super::write_file(&analysis_path, json.as_bytes())?;

    println!(
        "power law: beta = {:.4}, r = {:.3}, p = {:.4}",
        analysis.power_law.fit.beta, analysis.power_law.fit.r, analysis.power_law.fit.p_value
    );
    println!(
        "zipf: exponent = {:.4}, r = {:.3}",
        analysis.zipf.fit.beta, analysis.zipf.fit.r
    );
    match &analysis.cdh {
        Some(section) => println!(
            "cdh: r = {:.3}, slope = {:.3}, p = {:.4} over {} verbs",
            section.regression.r,
            section.regression.slope,
            section.regression.p_value.unwrap_or(f64::NAN),
            section.matched.len()
        ),
        None => println!("cdh: no reference data; panel omitted"),
    }
    println!("wrote {}", analysis_path.display());
    Ok(())
}

fn read_cdh_pairs(cfg: &RunConfig) -> Option<Vec<(String, f64)>> {
    let path = cfg.cdh_path.as_ref()?;
    if !path.exists() {
        return None;
    }
    read_cdh_csv(path).ok()
}

fn cdh_section(cfg: &RunConfig, rows: &[FitRow]) -> CliResult<Option<CdhSection>> {
    let Some(path) = cfg.cdh_path.as_ref() else {
        return Ok(None);
    };
    if !path.exists() {
        eprintln!("notice: reference CSV {} is absent", path.display());
        return Ok(None);
    }
    let reference: BTreeMap<String, f64> = read_cdh_csv(path).or_data()?.into_iter().collect();

    let mut matched = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in rows {
        if let Some(&frac) = reference.get(&row.lemma) {
            matched.push(row.lemma.clone());
            xs.push(frac);
            ys.push(row.s0);
        }
    }
    if matched.len() < 3 {
        eprintln!(
            "notice: only {} verbs overlap the reference CSV; panel omitted",
            matched.len()
        );
        return Ok(None);
    }
    let regression = pearson(&xs, &ys, cfg.permutations, cfg.seed).or_data()?;
    Ok(Some(CdhSection {
        regression,
        matched,
    }))
}

fn write_plots(
    cfg: &RunConfig,
    rows: &[FitRow],
    power_law: &PowerLawFit,
    zipf: &PowerLawFit,
    cdh: Option<&CdhSection>,
) -> CliResult<()> {
    let nus: Vec<f64> = rows.iter().map(|r| r.nu).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let tau_nu = crate::svg::scatter(
        &log10_points(&nus, &taus),
        Some((-power_law.beta, power_law.log_intercept / LN10)),
        "log10 frequency of use",
        "log10 relaxation time (years)",
        "relaxation time vs frequency of use",
    );
    super::write_file(&cfg.output_dir.join("tau_nu.svg"), tau_nu.as_bytes())?;

    let mut freqs = nus;
    freqs.sort_by(|a, b| b.total_cmp(a));
    let ranks: Vec<f64> = (1..=freqs.len()).map(|r| r as f64).collect();
    let zipf_plot = crate::svg::scatter(
        &log10_points(&ranks, &freqs),
        Some((-zipf.beta, zipf.log_intercept / LN10)),
        "log10 rank",
        "log10 frequency",
        "rank-frequency",
    );
    super::write_file(&cfg.output_dir.join("zipf.svg"), zipf_plot.as_bytes())?;

    if let Some(section) = cdh {
        let reference: BTreeMap<String, f64> = read_cdh_pairs(cfg)
            .unwrap_or_default()
            .into_iter()
            .collect();
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| reference.get(&r.lemma).map(|&x| (x, r.s0)))
            .collect();
        let plot = crate::svg::scatter(
            &points,
            Some((section.regression.slope, section.regression.intercept)),
            "reference -se fraction",
            "fitted s0",
            "fitted s0 vs reference corpus",
        );
        super::write_file(&cfg.output_dir.join("cdh_s0.svg"), plot.as_bytes())?;
    }
    Ok(())
}
