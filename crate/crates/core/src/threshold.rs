//! Threshold estimation for detail coefficients and shrinkage.
//!
//! Estimators implement [`ThresholdEstimator`] and are looked up by name in
//! [`estimators`]: `sure`, `bayes`, `median` (universal threshold with MAD
//! noise scale), `median-abs` (median of |g| used directly) and `none`
//! (always zero).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;

/// MAD-to-sigma factor for Gaussian noise.
pub const MAD_SCALE: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseEstimate {
    pub sigma: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Noise scale from the finest details: `median(|g|) / 0.6745`.
pub fn estimate_sigma(finest_details: &[f64]) -> Result<NoiseEstimate> {
    if finest_details.is_empty() {
        return Err(Error::NoData);
    }
    let sigma = median(finest_details.iter().map(|g| g.abs()).collect()) / MAD_SCALE;
    Ok(NoiseEstimate { sigma })
}

/// Stein's unbiased risk estimate of soft thresholding at `t`.
pub fn sure_risk(g: &[f64], sigma: f64, t: f64) -> f64 {
    let n = g.len() as f64;
    let s2 = sigma * sigma;
    let inside = g.iter().filter(|x| x.abs() <= t).count() as f64;
    let clipped: f64 = g.iter().map(|x| (x * x).min(t * t)).sum();
    n * s2 - 2.0 * s2 * inside + clipped
}

/// Threshold minimizing the SURE risk over `{0} ∪ {|g_i|}`; ties go to the
/// smaller threshold.
pub fn threshold_sure(g: &[f64], sigma: f64) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::NoData);
    }
    if sigma <= 0.0 {
        return Ok(0.0);
    }
    let n = g.len();
    let s2 = sigma * sigma;
    let mut a: Vec<f64> = g.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);

    // t = 0 counts exact zeros as inside.
    let zeros = a.iter().take_while(|&&v| v == 0.0).count();
    let mut best_t = 0.0;
    let mut best = n as f64 * s2 - 2.0 * s2 * zeros as f64;

    let mut below_sq = 0.0; // Σ g² over |g| < current value
    let mut i = 0;
    while i < n {
        let t = a[i];
        let mut j = i;
        while j < n && a[j] == t {
            j += 1;
        }
        // j elements satisfy |g| <= t, the rest are clipped to t².
        let risk = n as f64 * s2 - 2.0 * s2 * j as f64 + below_sq + (j - i) as f64 * t * t + (n - j) as f64 * t * t;
        if risk < best {
            best = risk;
            best_t = t;
        }
        below_sq += (j - i) as f64 * t * t;
        i = j;
    }
    Ok(best_t)
}

/// BayesShrink: `σ² / σ_x` with `σ_x = sqrt(max(mean(g²) − σ², 0))`; a band
/// without signal energy gets `max |g|`.
pub fn threshold_bayes(g: &[f64], sigma: f64) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::NoData);
    }
    if sigma <= 0.0 {
        return Ok(0.0);
    }
    let mean_sq = g.iter().map(|x| x * x).sum::<f64>() / g.len() as f64;
    let sigma_x = (mean_sq - sigma * sigma).max(0.0).sqrt();
    if sigma_x == 0.0 {
        return Ok(g.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    Ok(sigma * sigma / sigma_x)
}

/// Universal threshold `σ·sqrt(2 ln n)`.
pub fn threshold_median(g: &[f64], sigma: f64) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::NoData);
    }
    Ok(sigma.max(0.0) * (2.0 * (g.len() as f64).ln()).sqrt())
}

/// Median of |g| taken as the threshold itself.
pub fn threshold_median_abs(g: &[f64], _sigma: f64) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::NoData);
    }
    Ok(median(g.iter().map(|x| x.abs()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShrinkMode {
    #[default]
    Soft,
    Hard,
}

impl FromStr for ShrinkMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "soft" => Ok(ShrinkMode::Soft),
            "hard" => Ok(ShrinkMode::Hard),
            _ => Err(Error::Unknown { kind: "shrink mode", name: s.into() }),
        }
    }
}

/// Soft: `sign(g)·max(|g| − t, 0)`. Hard: `g·1{|g| > t}`.
pub fn shrink(g: &[f64], t: f64, mode: ShrinkMode) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(match mode {
        ShrinkMode::Soft => g.iter().map(|&x| x.signum() * (x.abs() - t).max(0.0)).collect(),
        ShrinkMode::Hard => g.iter().map(|&x| if x.abs() > t { x } else { 0.0 }).collect(),
    })
}

/// A rule turning one level's details and a noise scale into a threshold.
pub trait ThresholdEstimator: Send + Sync {
    fn name(&self) -> &str;
    fn threshold(&self, g: &[f64], sigma: f64) -> Result<f64>;
}

struct FnEstimator {
    name: &'static str,
    f: fn(&[f64], f64) -> Result<f64>,
}

impl ThresholdEstimator for FnEstimator {
    fn name(&self) -> &str {
        self.name
    }

    fn threshold(&self, g: &[f64], sigma: f64) -> Result<f64> {
        (self.f)(g, sigma)
    }
}

fn threshold_none(g: &[f64], _sigma: f64) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::NoData);
    }
    Ok(0.0)
}

/// Built-in estimators keyed by name.
pub fn estimators() -> Registry<dyn ThresholdEstimator> {
    let mut r: Registry<dyn ThresholdEstimator> = Registry::new("threshold scheme");
    let table: [(&'static str, fn(&[f64], f64) -> Result<f64>); 5] = [
        ("sure", threshold_sure),
        ("bayes", threshold_bayes),
        ("median", threshold_median),
        ("median-abs", threshold_median_abs),
        ("none", threshold_none),
    ];
    for (name, f) in table {
        r.register(name, move |_: &()| Ok(Box::new(FnEstimator { name, f }) as Box<dyn ThresholdEstimator>));
    }
    r
}

/// Where the noise scale is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    /// Once, from the finest details, reused at every level.
    #[default]
    Finest,
    /// Separately at each level.
    PerLevel,
}

impl FromStr for SigmaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finest" => Ok(SigmaMode::Finest),
            "per-level" => Ok(SigmaMode::PerLevel),
            _ => Err(Error::Unknown { kind: "sigma mode", name: s.into() }),
        }
    }
}

/// The thresholding estimation scheme of a denoiser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdScheme {
    /// Estimator name from [`estimators`].
    pub kind: String,
    #[serde(default)]
    pub shrink: ShrinkMode,
    #[serde(default)]
    pub sigma: SigmaMode,
}

impl Default for ThresholdScheme {
    fn default() -> Self {
        ThresholdScheme::new("sure")
    }
}

impl ThresholdScheme {
    pub fn new(kind: &str) -> Self {
        ThresholdScheme { kind: kind.to_string(), shrink: ShrinkMode::Soft, sigma: SigmaMode::Finest }
    }

    /// The three schemes swept by the configuration grid, in TES order.
    pub fn grid_schemes() -> [ThresholdScheme; 3] {
        [ThresholdScheme::new("sure"), ThresholdScheme::new("bayes"), ThresholdScheme::new("median")]
    }

    /// Shrinks every level in place. `levels` is ordered coarse → fine; the
    /// last entry is the finest.
    pub fn apply(&self, levels: &mut [Vec<f64>]) -> Result<()> {
        let est = estimators().create(&self.kind, &())?;
        let Some(finest) = levels.last() else { return Ok(()) };
        let global = estimate_sigma(finest)?.sigma;
        for g in levels.iter_mut() {
            if g.is_empty() {
                continue;
            }
            let sigma = match self.sigma {
                SigmaMode::Finest => global,
                SigmaMode::PerLevel => estimate_sigma(g)?.sigma,
            };
            let t = est.threshold(g, sigma)?;
            *g = shrink(g, t, self.shrink)?;
        }
        Ok(())
    }
}
