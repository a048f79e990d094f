//! The TES × SRL configuration sweep and single-pipeline evaluation.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::denoise::{Denoiser, MrdpiDenoiser};
use crate::error::{Error, Result};
use crate::features::{extract_with, feature_sets, FeatureConfig, FeatureSetId};
use crate::learn::{cross_validate, ClassifierSpec, CvPlan, CvReport, DEFAULT_FOLDS};
use crate::lifting::{Decomposition, LiftingConfig, LiftingPlan};
use crate::metrics::MacroMetrics;
use crate::signal::{LabeledDataset, Record, WindowSpec};
use crate::threshold::ThresholdScheme;

pub const GRID_CSV_HEADER: &str = "tes,srl,feature,classifier,accuracy,precision,recall,fscore";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Order, bandwidth, update and standardization shared by every cell;
    /// its `levels` is replaced by each SRL.
    pub lifting: LiftingConfig,
    pub schemes: Vec<ThresholdScheme>,
    pub levels: Vec<usize>,
    pub features: Vec<FeatureSetId>,
    pub classifiers: Vec<ClassifierSpec>,
    pub window: WindowSpec,
    pub feature_config: FeatureConfig,
    pub folds: usize,
}

impl GridSpec {
    /// The full 3 × 5 sweep for the given feature sets and classifiers.
    pub fn new(features: Vec<FeatureSetId>, classifiers: Vec<ClassifierSpec>) -> Self {
        GridSpec {
            lifting: LiftingConfig::default(),
            schemes: ThresholdScheme::grid_schemes().to_vec(),
            levels: (1..=5).collect(),
            features,
            classifiers,
            window: WindowSpec::default(),
            feature_config: FeatureConfig::default(),
            folds: DEFAULT_FOLDS,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.schemes.len() * self.levels.len() * self.features.len() * self.classifiers.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub tes: String,
    pub srl: usize,
    pub feature: String,
    pub classifier: String,
    pub metrics: MacroMetrics,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
}

impl GridReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{GRID_CSV_HEADER}")?;
        for r in &self.rows {
            let m = &r.metrics;
            writeln!(
                w,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
                r.tes, r.srl, r.feature, r.classifier, m.accuracy, m.precision, m.recall, m.fscore
            )?;
        }
        Ok(())
    }

    /// Row with the highest accuracy; earlier rows win ties.
    pub fn best(&self) -> Option<&GridRow> {
        self.rows.iter().fold(None, |b: Option<&GridRow>, r| match b {
            Some(b) if b.metrics.accuracy >= r.metrics.accuracy => Some(b),
            _ => Some(r),
        })
    }
}

fn check_feasible(data: &LabeledDataset, folds: usize) -> Result<()> {
    let classes = data.classes().len();
    if classes < 2 {
        return Err(Error::CvInfeasible(format!("{classes} class(es); need at least 2")));
    }
    let groups = data.trials().len();
    if groups < folds {
        return Err(Error::CvInfeasible(format!("{groups} trial groups for {folds} folds")));
    }
    Ok(())
}

/// Features of `data` then grouped cross-validation of every classifier.
fn score_dataset(data: &LabeledDataset, spec: &GridSpec) -> Result<Vec<(String, String, MacroMetrics)>> {
    let mut out = Vec::new();
    for set in &spec.features {
        let fx = feature_sets().create(&set.to_string(), &spec.feature_config)?;
        let table = extract_with(data, &*fx, &spec.window)?;
        let plan = CvPlan::grouped(&table, spec.folds)?;
        for c in &spec.classifiers {
            let r = cross_validate(c, &table, &plan)?;
            out.push((set.to_string(), c.kind.name().to_string(), r.metrics));
        }
    }
    Ok(out)
}

/// Evaluates every (TES, SRL, feature set, classifier) cell. Decompositions
/// are computed once per (record, SRL) and shared by the threshold schemes.
/// Rows come out TES-major, then SRL, feature set and classifier.
pub fn run_grid(data: &LabeledDataset, spec: &GridSpec) -> Result<GridReport> {
    check_feasible(data, spec.folds)?;
    for s in &spec.schemes {
        crate::threshold::estimators().create(&s.kind, &())?;
    }
    let decomposed: Vec<(LiftingPlanCache, Vec<Vec<Decomposition>>)> = spec
        .levels
        .iter()
        .map(|&levels| {
            let cfg = LiftingConfig { levels, ..spec.lifting };
            let plans = LiftingPlanCache::build(data, &cfg)?;
            let ds = data
                .records
                .par_iter()
                .map(|r| {
                    let plan = plans.get(r.signal.len());
                    r.signal.samples.iter().map(|ch| plan.forward(ch)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((plans, ds))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> =
        (0..spec.schemes.len()).flat_map(|t| (0..spec.levels.len()).map(move |l| (t, l))).collect();
    let scored = cells
        .par_iter()
        .map(|&(t, l)| {
            let scheme = &spec.schemes[t];
            let (plans, ds) = &decomposed[l];
            let records = data
                .records
                .iter()
                .zip(ds)
                .map(|(r, d)| {
                    let plan = plans.get(r.signal.len());
                    let samples = MrdpiDenoiser::reconstruct(plan, d, scheme)?;
                    Ok(Record { signal: r.signal.with_samples(samples), ..r.clone() })
                })
                .collect::<Result<Vec<_>>>()?;
            score_dataset(&LabeledDataset { records }, spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(spec.cell_count());
    for (&(t, l), cell) in cells.iter().zip(scored) {
        for (feature, classifier, metrics) in cell {
            rows.push(GridRow { tes: spec.schemes[t].kind.clone(), srl: spec.levels[l], feature, classifier, metrics });
        }
    }
    Ok(GridReport { rows })
}

/// One lifting plan per distinct record length.
struct LiftingPlanCache(HashMap<usize, LiftingPlan>);

impl LiftingPlanCache {
    fn build(data: &LabeledDataset, cfg: &LiftingConfig) -> Result<Self> {
        let mut m = HashMap::new();
        for r in &data.records {
            let n = r.signal.len();
            if let std::collections::hash_map::Entry::Vacant(e) = m.entry(n) {
                e.insert(LiftingPlan::regular(n, cfg)?);
            }
        }
        Ok(LiftingPlanCache(m))
    }

    fn get(&self, n: usize) -> &LiftingPlan {
        &self.0[&n]
    }
}

/// Denoise → features → grouped cross-validation for a single pipeline.
pub fn evaluate_pipeline(
    data: &LabeledDataset,
    denoiser: &dyn Denoiser,
    set: &FeatureSetId,
    feature_config: &FeatureConfig,
    classifier: &ClassifierSpec,
    window: &WindowSpec,
    folds: usize,
) -> Result<CvReport> {
    check_feasible(data, folds)?;
    let cleaned = data.map_signals(|s| denoiser.denoise(s))?;
    let fx = feature_sets().create(&set.to_string(), feature_config)?;
    let table = extract_with(&cleaned, &*fx, window)?;
    let plan = CvPlan::grouped(&table, folds)?;
    cross_validate(classifier, &table, &plan)
}
