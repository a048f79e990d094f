//! Multiresolution local-polynomial lifting transform.
//!
//! Each level splits the current scaling coefficients into even and odd
//! halves, predicts the odd half from the even half with a local polynomial
//! fit (detail = odd − prediction, optionally standardized), then updates the
//! even half with the details to obtain the next, coarser, scaling
//! coefficients. The inverse undoes the steps in reverse order, so
//! reconstruction is exact up to floating-point round-off whatever the
//! configuration.

mod predict;
mod update;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Grid, Signal};

pub use predict::{build_prediction, split, stencil, Branch, PredictionOperator, PredictionRow};
pub use update::UpdateOperator;

use predict::{deinterleave, interleave};

/// Bandwidth rule for the local polynomial fits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Bandwidth {
    /// Smallest bandwidth covering the `order` nearest even neighbours.
    #[default]
    Auto,
    /// `h₀` in sample units; level `k` (0 = finest) uses `h₀·2^(k+1)`.
    Fixed(f64),
}

impl Bandwidth {
    pub fn at_level(&self, step: usize) -> Option<f64> {
        match *self {
            Bandwidth::Auto => None,
            Bandwidth::Fixed(h0) => Some(h0 * (1u64 << (step + 1)) as f64),
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Auto => f.write_str("auto"),
            Bandwidth::Fixed(h) => write!(f, "{h}"),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::Auto);
        }
        let h: f64 = s.parse().map_err(|_| Error::InvalidConfig(format!("bad bandwidth `{s}`")))?;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        Ok(Bandwidth::Fixed(h))
    }
}

impl TryFrom<String> for Bandwidth {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Bandwidth> for String {
    fn from(b: Bandwidth) -> String {
        b.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateMode {
    /// Half of the co-located detail; with order 1 the coarse branch is the
    /// pairwise average.
    #[default]
    Haar,
    /// Minimum-norm update preserving the integral of the scaling coefficients.
    MomentPreserving,
}

impl FromStr for UpdateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(UpdateMode::Haar),
            "moment" | "moment-preserving" => Ok(UpdateMode::MomentPreserving),
            _ => Err(Error::Unknown { kind: "update mode", name: s.into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftingConfig {
    /// Number of decomposition levels (the signal resolution level).
    pub levels: usize,
    /// Polynomial order `r̃`; predictions use degree `r̃ − 1`.
    pub poly_order: usize,
    pub bandwidth: Bandwidth,
    pub update: UpdateMode,
    /// Divide details by the residual-row norm `sqrt(1 + Σ w²)`.
    pub standardize: bool,
}

impl Default for LiftingConfig {
    fn default() -> Self {
        LiftingConfig {
            levels: 2,
            poly_order: 3,
            bandwidth: Bandwidth::Auto,
            update: UpdateMode::Haar,
            standardize: false,
        }
    }
}

impl LiftingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidConfig("levels must be at least 1".into()));
        }
        if self.levels >= 48 {
            return Err(Error::InvalidConfig(format!("{} levels is not supported", self.levels)));
        }
        if self.poly_order == 0 {
            return Err(Error::InvalidConfig("polynomial order must be at least 1".into()));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
            }
        }
        Ok(())
    }

    /// Minimum number of samples a signal needs for this many levels.
    pub fn min_length(&self) -> usize {
        1usize << self.levels
    }
}

/// Operators of one level, from scaling coefficients of length `even + odd`
/// to `even` coarse coefficients and `odd` details.
#[derive(Debug, Clone)]
pub struct LevelOperators {
    pub even_grid: Grid,
    pub odd_grid: Grid,
    pub predict: PredictionOperator,
    pub update: UpdateOperator,
    /// Integrals of the fine-level scaling functions.
    pub fine_integrals: Vec<f64>,
    /// Integrals of the coarse-level scaling functions.
    pub coarse_integrals: Vec<f64>,
}

/// All operators for a given grid and configuration, finest level first.
///
/// Building a plan is the costly part of the transform; a plan can be reused
/// for every channel (and every signal) sampled on the same grid.
#[derive(Debug, Clone)]
pub struct LiftingPlan {
    config: LiftingConfig,
    grid: Grid,
    levels: Vec<LevelOperators>,
}

impl LiftingPlan {
    pub fn new(grid: &Grid, config: &LiftingConfig) -> Result<Self> {
        config.validate()?;
        if grid.len() < config.min_length() {
            return Err(Error::InsufficientLength { len: grid.len(), needed: config.min_length() });
        }
        let mut levels = Vec::with_capacity(config.levels);
        let mut current = grid.clone();
        let mut integrals = vec![1.0; grid.len()];
        for step in 0..config.levels {
            let (even, odd) = split(&integrals, &current)?;
            let (fine_even, fine_odd) = (even.coeffs, odd.coeffs);
            let predict = build_prediction(&even.grid, &odd.grid, config.poly_order, config.bandwidth.at_level(step))?;
            let coarse = update::coarse_integrals(&predict, &fine_even, &fine_odd);
            let update = match config.update {
                UpdateMode::Haar => UpdateOperator::haar(even.grid.len(), odd.grid.len()),
                UpdateMode::MomentPreserving => {
                    let scale =
                        if config.standardize { predict.normalization.clone() } else { vec![1.0; odd.grid.len()] };
                    UpdateOperator::moment_preserving(&predict, &fine_odd, &coarse, &scale)
                }
            };
            current = even.grid.clone();
            levels.push(LevelOperators {
                even_grid: even.grid,
                odd_grid: odd.grid,
                predict,
                update,
                fine_integrals: integrals,
                coarse_integrals: coarse.clone(),
            });
            integrals = coarse;
        }
        Ok(LiftingPlan { config: *config, grid: grid.clone(), levels })
    }

    /// Plan for the regular grid `0..n`.
    pub fn regular(n: usize, config: &LiftingConfig) -> Result<Self> {
        Self::new(&Grid::regular(n), config)
    }

    pub fn config(&self) -> &LiftingConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Level operators, finest first.
    pub fn levels(&self) -> &[LevelOperators] {
        &self.levels
    }

    pub fn forward(&self, x: &[f64]) -> Result<Decomposition> {
        if x.len() != self.grid.len() {
            return Err(Error::LengthMismatch(format!(
                "signal has {} samples, plan expects {}",
                x.len(),
                self.grid.len()
            )));
        }
        let mut scaling = x.to_vec();
        let mut details = Vec::with_capacity(self.levels.len());
        for (step, ops) in self.levels.iter().enumerate() {
            let (mut even, odd) = deinterleave(&scaling);
            let predicted = ops.predict.predict(&even);
            let mut g: Vec<f64> = odd.iter().zip(&predicted).map(|(o, p)| o - p).collect();
            if self.config.standardize {
                for (gk, nk) in g.iter_mut().zip(&ops.predict.normalization) {
                    *gk /= nk;
                }
            }
            for (e, u) in even.iter_mut().zip(ops.update.apply(&g)) {
                *e += u;
            }
            details.push(DetailLevel { level: self.levels.len() - 1 - step, coeffs: g, grid: ops.odd_grid.clone() });
            scaling = even;
        }
        details.reverse();
        Ok(Decomposition {
            coarse: scaling,
            coarse_grid: self.levels.last().map(|l| l.even_grid.clone()).unwrap_or_else(|| self.grid.clone()),
            details,
            config: self.config,
        })
    }

    pub fn inverse(&self, d: &Decomposition) -> Result<Vec<f64>> {
        d.check_shape()?;
        if d.details.len() != self.levels.len() {
            return Err(Error::CorruptDecomposition(format!(
                "{} detail levels, plan has {}",
                d.details.len(),
                self.levels.len()
            )));
        }
        let mut scaling = d.coarse.clone();
        for (ops, det) in self.levels.iter().rev().zip(&d.details) {
            if scaling.len() != ops.even_grid.len() || det.coeffs.len() != ops.odd_grid.len() {
                return Err(Error::CorruptDecomposition(format!("level {} does not match the plan's grid", det.level)));
            }
            let g = &det.coeffs;
            for (e, u) in scaling.iter_mut().zip(ops.update.apply(g)) {
                *e -= u;
            }
            let predicted = ops.predict.predict(&scaling);
            let odd: Vec<f64> = if self.config.standardize {
                g.iter().zip(&ops.predict.normalization).zip(&predicted).map(|((gk, nk), p)| gk * nk + p).collect()
            } else {
                g.iter().zip(&predicted).map(|(gk, p)| gk + p).collect()
            };
            scaling = interleave(&scaling, &odd);
        }
        Ok(scaling)
    }
}

/// Details of one level and the odd-grid locations they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailLevel {
    /// 0 is the coarsest detail level, `levels − 1` the finest.
    pub level: usize,
    pub coeffs: Vec<f64>,
    pub grid: Grid,
}

/// Coarse scaling coefficients plus per-level details, ordered coarse → fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub coarse: Vec<f64>,
    pub coarse_grid: Grid,
    pub details: Vec<DetailLevel>,
    pub config: LiftingConfig,
}

impl Decomposition {
    pub fn coefficient_count(&self) -> usize {
        self.coarse.len() + self.details.iter().map(|d| d.coeffs.len()).sum::<usize>()
    }

    pub fn finest(&self) -> Option<&DetailLevel> {
        self.details.last()
    }

    fn check_shape(&self) -> Result<()> {
        if self.coarse.len() != self.coarse_grid.len() {
            return Err(Error::CorruptDecomposition(format!(
                "{} coarse coefficients on a grid of {}",
                self.coarse.len(),
                self.coarse_grid.len()
            )));
        }
        if self.details.len() != self.config.levels {
            return Err(Error::CorruptDecomposition(format!(
                "{} detail levels for a {}-level configuration",
                self.details.len(),
                self.config.levels
            )));
        }
        let mut len = self.coarse.len();
        for (i, d) in self.details.iter().enumerate() {
            if d.level != i || d.coeffs.len() != d.grid.len() {
                return Err(Error::CorruptDecomposition(format!("malformed detail level {i}")));
            }
            if d.coeffs.len() != len && d.coeffs.len() + 1 != len {
                return Err(Error::CorruptDecomposition(format!(
                    "level {i}: {} details against {len} scaling coefficients",
                    d.coeffs.len()
                )));
            }
            len += d.coeffs.len();
        }
        Ok(())
    }

    /// The finest grid, recovered by interleaving the stored grids.
    pub fn finest_grid(&self) -> Result<Grid> {
        self.check_shape()?;
        let mut g = self.coarse_grid.positions().to_vec();
        for d in &self.details {
            g = interleave(&g, d.grid.positions());
        }
        Grid::new(g).map_err(|_| Error::CorruptDecomposition("stored grids do not interleave".into()))
    }
}

/// Forward transform of one channel on the regular grid.
pub fn forward(x: &[f64], config: &LiftingConfig) -> Result<Decomposition> {
    LiftingPlan::regular(x.len(), config)?.forward(x)
}

/// Forward transform on an arbitrary increasing grid.
pub fn forward_on_grid(x: &[f64], grid: &Grid, config: &LiftingConfig) -> Result<Decomposition> {
    LiftingPlan::new(grid, config)?.forward(x)
}

/// Reconstructs the samples a decomposition was computed from.
pub fn inverse(d: &Decomposition) -> Result<Vec<f64>> {
    let grid = d.finest_grid()?;
    let plan = LiftingPlan::new(&grid, &d.config)?;
    if plan.levels.iter().rev().zip(&d.details).any(|(ops, det)| ops.odd_grid != det.grid) {
        return Err(Error::CorruptDecomposition("stored grids do not match the configuration".into()));
    }
    plan.inverse(d)
}

/// Per-channel forward transform, channel order preserved.
pub fn forward_multichannel(s: &Signal, config: &LiftingConfig) -> Result<Vec<Decomposition>> {
    if s.channels() == 0 {
        return Ok(Vec::new());
    }
    let plan = LiftingPlan::regular(s.len(), config)?;
    s.samples.iter().map(|ch| plan.forward(ch)).collect()
}

/// Per-channel inverse; returns one sample vector per decomposition.
pub fn inverse_multichannel(ds: &[Decomposition]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = ds.first() else { return Ok(Vec::new()) };
    let plan = LiftingPlan::new(&first.finest_grid()?, &first.config)?;
    ds.iter()
        .map(|d| {
            if d.config != first.config {
                return Err(Error::CorruptDecomposition("channels use different configurations".into()));
            }
            plan.inverse(d)
        })
        .collect()
}
