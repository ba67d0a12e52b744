//! Statistical analyses of the fit results: Pearson correlation with
//! permutation p-values, Deming errors-in-variables regression, the τ–ν
//! power-law fit, and the Zipf rank-frequency check.
//!
//! p-values come from seeded permutation tests (two-sided, plus-one
//! corrected), not closed-form distributions: with a few dozen verbs there is
//! no normality to lean on.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressionMethod {
    Ols,
    Deming,
    PermutationPearson,
}

/// A fitted line plus association strength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Sample Pearson coefficient of the (possibly transformed) data.
    pub r: f64,
    /// Two-sided permutation p-value; absent when no permutation test ran.
    pub p_value: Option<f64>,
    pub n: usize,
    pub method: RegressionMethod,
}

/// Power-law fit `y = C·x^(−beta)` in log-log space. `log_intercept` is
/// `ln C`: the pure power-law form omits the prefactor, so it is reported
/// here instead of silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub beta: f64,
    pub log_intercept: f64,
    pub r: f64,
    pub p_value: f64,
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    s_xx: f64,
    s_yy: f64,
    s_xy: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite input value".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut m = Moments {
        mean_x,
        mean_y,
        s_xx: 0.0,
        s_yy: 0.0,
        s_xy: 0.0,
    };
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mean_x, yi - mean_y);
        m.s_xx += dx * dx;
        m.s_yy += dy * dy;
        m.s_xy += dx * dy;
    }
    if m.s_xx == 0.0 || m.s_yy == 0.0 {
        return Err(Error::InvalidInput("zero variance in input".into()));
    }
    Ok(m)
}

fn pearson_r_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut s_xx, mut s_yy, mut s_xy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mean_x, yi - mean_y);
        s_xx += dx * dx;
        s_yy += dy * dy;
        s_xy += dx * dy;
    }
    s_xy / (s_xx * s_yy).sqrt()
}

/// Two-sided permutation p-value for the Pearson coefficient: the fraction of
/// `permutations` random shufflings of `y` whose |r| reaches the observed
/// one, with the plus-one correction `(k+1)/(N+1)`.
fn permutation_p(x: &[f64], y: &[f64], r_obs: f64, permutations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = y.to_vec();
    let mut hits = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(&mut rng);
        if pearson_r_unchecked(x, &shuffled).abs() >= r_obs.abs() {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (permutations + 1) as f64
}

/// Ordinary least squares of `y` on `x` (no p-value).
pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    let m = moments(x, y)?;
    let slope = m.s_xy / m.s_xx;
    Ok(RegressionResult {
        slope,
        intercept: m.mean_y - slope * m.mean_x,
        r: m.s_xy / (m.s_xx * m.s_yy).sqrt(),
        p_value: None,
        n: x.len(),
        method: RegressionMethod::Ols,
    })
}

/// Pearson correlation with a seeded permutation p-value. Slope and intercept
/// are the OLS line of `y` on `x`, reported alongside for plotting.
pub fn pearson(x: &[f64], y: &[f64], permutations: usize, seed: u64) -> Result<RegressionResult> {
    if permutations == 0 {
        return Err(Error::InvalidInput("permutations must be >= 1".into()));
    }
    let base = ols(x, y)?;
    let p = permutation_p(x, y, base.r, permutations, seed);
    Ok(RegressionResult {
        p_value: Some(p),
        method: RegressionMethod::PermutationPearson,
        ..base
    })
}

/// Deming errors-in-variables regression with error-variance ratio
/// `delta = var(y errors)/var(x errors)`:
///
/// `slope = [s_yy − δ·s_xx + √((s_yy − δ·s_xx)² + 4δ·s_xy²)] / (2·s_xy)`.
///
/// As `δ → ∞` this approaches the OLS slope of `y` on `x`; at `δ = 1` it is
/// symmetric under swapping the axes (the two slopes multiply to 1). `r` is
/// the plain Pearson coefficient of the data, reported separately from the
/// corrected slope.
pub fn deming(x: &[f64], y: &[f64], delta: f64) -> Result<RegressionResult> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "variance ratio must be > 0, got {delta}"
        )));
    }
    let m = moments(x, y)?;
    if m.s_xy == 0.0 {
        // With uncorrelated data the estimator degenerates: either every
        // slope is equally good (s_yy = δ·s_xx) or the optimum is an axis.
        return Err(Error::InvalidInput(
            "Deming slope is indeterminate: zero covariance".into(),
        ));
    }
    let d = m.s_yy - delta * m.s_xx;
    let slope = (d + (d * d + 4.0 * delta * m.s_xy * m.s_xy).sqrt()) / (2.0 * m.s_xy);
    Ok(RegressionResult {
        slope,
        intercept: m.mean_y - slope * m.mean_x,
        r: m.s_xy / (m.s_xx * m.s_yy).sqrt(),
        p_value: None,
        n: x.len(),
        method: RegressionMethod::Deming,
    })
}

/// Fits `τ = C·ν^(−beta)` by Deming regression of `ln τ` on `ln ν`; `r` and
/// the permutation p-value describe the log-log correlation.
pub fn power_law_fit(
    taus: &[f64],
    nus: &[f64],
    delta: f64,
    permutations: usize,
    seed: u64,
) -> Result<PowerLawFit> {
    if taus.iter().chain(nus).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::InvalidInput(
            "power-law fit needs strictly positive values".into(),
        ));
    }
    let log_nu: Vec<f64> = nus.iter().map(|v| v.ln()).collect();
    let log_tau: Vec<f64> = taus.iter().map(|v| v.ln()).collect();
    let line = deming(&log_nu, &log_tau, delta)?;
    let p = pearson(&log_nu, &log_tau, permutations, seed)?;
    Ok(PowerLawFit {
        beta: -line.slope,
        log_intercept: line.intercept,
        r: line.r,
        p_value: p.p_value.unwrap(),
    })
}

/// Zipf rank-frequency check: OLS of `ln f` on `ln rank` for descending
/// frequencies; `beta` is the rank exponent.
pub fn zipf_fit(frequencies: &[f64], permutations: usize, seed: u64) -> Result<PowerLawFit> {
    if frequencies.iter().any(|&f| !f.is_finite() || f <= 0.0) {
        return Err(Error::InvalidInput(
            "frequencies must be strictly positive".into(),
        ));
    }
    if frequencies.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput(
            "frequencies must be sorted in descending order".into(),
        ));
    }
    let log_rank: Vec<f64> = (1..=frequencies.len()).map(|r| (r as f64).ln()).collect();
    let log_f: Vec<f64> = frequencies.iter().map(|f| f.ln()).collect();
    let line = ols(&log_rank, &log_f)?;
    let p = pearson(&log_rank, &log_f, permutations, seed)?;
    Ok(PowerLawFit {
        beta: -line.slope,
        log_intercept: line.intercept,
        r: line.r,
        p_value: p.p_value.unwrap(),
    })
}
