//! Run configuration: one declarative TOML file holding every constant of a
//! run, so a config plus a seed reproduces all outputs byte for byte. CLI
//! flags (`--seed`, `--output`) override the file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use vardyn_core::fit::FitOptions;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Verb inventory CSV (`lemma,stem,stem_accented[,archaic;...]`).
    #[serde(default)]
    pub lexicon_path: Option<PathBuf>,
    /// N-gram count files (TSV, optionally .gz); merged on ingest.
    #[serde(default)]
    pub ngram_paths: Vec<PathBuf>,
    /// Cross-corpus reference CSV (`lemma,mean_se_fraction`); optional.
    #[serde(default)]
    pub cdh_path: Option<PathBuf>,
    /// Lemmas dropped after the inclusion filter.
    #[serde(default = "default_exclusions")]
    pub exclusions: Vec<String>,
    /// Calendar year mapped to t = 0.
    #[serde(default = "default_t0_year")]
    pub t0_year: i32,
    /// Last year of the analysis window.
    #[serde(default = "default_end_year")]
    pub end_year: i32,
    /// Window size of the inclusion filter.
    #[serde(default = "default_window_years")]
    pub window_years: i32,
    /// First year kept at ingest; wider than the analysis window so the
    /// archaic-orthography check can see the pre-standardization period.
    #[serde(default = "default_corpus_start_year")]
    pub corpus_start_year: i32,
    /// Archaic forms found at or after this year get flagged.
    #[serde(default = "default_archaic_cutoff_year")]
    pub archaic_cutoff_year: i32,
    /// Corpus size (tokens) normalizing the frequency of use.
    #[serde(default = "default_corpus_size")]
    pub corpus_size: f64,
    /// Master seed for permutation tests; also the bootstrap default.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Error-variance ratio of the Deming regression.
    #[serde(default = "default_deming_delta")]
    pub deming_delta: f64,
    /// Shufflings per permutation p-value.
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub a_grid: AGrid,
    #[serde(default)]
    pub bootstrap: BootstrapCfg,
    #[serde(default)]
    pub fit: FitCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes via defaults")
    }
}

/// Amplitude grid `start, start+step, ..., stop`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AGrid {
    #[serde(default = "default_a_start")]
    pub start: f64,
    #[serde(default = "default_a_stop")]
    pub stop: f64,
    #[serde(default = "default_a_step")]
    pub step: f64,
}

impl Default for AGrid {
    fn default() -> Self {
        Self {
            start: default_a_start(),
            stop: default_a_stop(),
            step: default_a_step(),
        }
    }
}

impl AGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !self.start.is_finite() || !self.stop.is_finite() || self.start < 0.0 {
            bail!("a_grid bounds must be finite and non-negative");
        }
        if self.stop < self.start {
            bail!("a_grid stop {} below start {}", self.stop, self.start);
        }
        if self.start == self.stop {
            return Ok(vec![self.start]);
        }
        if !self.step.is_finite() || self.step <= 0.0 {
            bail!("a_grid step must be positive, got {}", self.step);
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let mut values: Vec<f64> = (0..=n).map(|k| self.start + k as f64 * self.step).collect();
        if let Some(last) = values.last_mut() {
            if *last > self.stop {
                *last = self.stop;
            }
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapCfg {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_subset_size")]
    pub subset_size: usize,
    /// Defaults to the master seed when unset.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for BootstrapCfg {
    fn default() -> Self {
        Self {
            repetitions: default_repetitions(),
            subset_size: default_subset_size(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCfg {
    #[serde(default = "default_tau_min")]
    pub tau_min: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    /// Weight residuals by inverse binomial variance (sensitivity analysis).
    #[serde(default)]
    pub weighted: bool,
}

impl Default for FitCfg {
    fn default() -> Self {
        Self {
            tau_min: default_tau_min(),
            tau_max: default_tau_max(),
            weighted: false,
        }
    }
}

impl FitCfg {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            weighted: self.weighted,
            ..FitOptions::default()
        }
    }
}

fn default_exclusions() -> Vec<String> {
    // ser/haber serve as auxiliaries, ir shares fuera/fuese with ser, and
    // deber resists the model; all four stay out by default but remain
    // config-editable.
    ["ser", "haber", "ir", "deber"].map(String::from).to_vec()
}
fn default_t0_year() -> i32 {
    1750
}
fn default_end_year() -> i32 {
    2000
}
fn default_window_years() -> i32 {
    5
}
fn default_corpus_start_year() -> i32 {
    1500
}
fn default_archaic_cutoff_year() -> i32 {
    1700
}
fn default_corpus_size() -> f64 {
    vardyn_core::ingest::DEFAULT_CORPUS_SIZE
}
fn default_seed() -> u64 {
    42
}
fn default_deming_delta() -> f64 {
    1.0
}
fn default_permutations() -> usize {
    10_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_a_start() -> f64 {
    0.0
}
fn default_a_stop() -> f64 {
    0.1
}
fn default_a_step() -> f64 {
    0.001
}
fn default_repetitions() -> usize {
    100
}
fn default_subset_size() -> usize {
    2
}
fn default_tau_min() -> f64 {
    1.0
}
fn default_tau_max() -> f64 {
    500.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t0_year >= self.end_year {
            bail!("t0_year {} must precede end_year {}", self.t0_year, self.end_year);
        }
        if self.corpus_start_year > self.end_year {
            bail!("corpus_start_year {} beyond end_year {}", self.corpus_start_year, self.end_year);
        }
        if self.window_years < 1 {
            bail!("window_years must be >= 1, got {}", self.window_years);
        }
        if !self.corpus_size.is_finite() || self.corpus_size <= 0.0 {
            bail!("corpus_size must be positive, got {}", self.corpus_size);
        }
        if !self.deming_delta.is_finite() || self.deming_delta <= 0.0 {
            bail!("deming_delta must be positive, got {}", self.deming_delta);
        }
        if self.permutations == 0 {
            bail!("permutations must be >= 1");
        }
        if !self.fit.tau_min.is_finite()
            || !self.fit.tau_max.is_finite()
            || self.fit.tau_min <= 0.0
            || self.fit.tau_max <= self.fit.tau_min
        {
            bail!("fit tau bounds must satisfy 0 < tau_min < tau_max");
        }
        self.a_grid.values()?;
        Ok(())
    }

    pub fn exclusion_set(&self) -> HashSet<String> {
        self.exclusions.iter().cloned().collect()
    }

    pub fn bootstrap_seed(&self) -> u64 {
        self.bootstrap.seed.unwrap_or(self.seed)
    }

    /// Applies `--seed` and `--output` flag overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, output: Option<PathBuf>) -> Self {
        if let Some(seed) = seed {
            self.seed = seed;
            self.bootstrap.seed = Some(seed);
        }
        if let Some(output) = output {
            self.output_dir = output;
        }
        self
    }
}
