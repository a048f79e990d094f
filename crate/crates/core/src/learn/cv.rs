use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit, ClassifierSpec};
use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::metrics::{confusion, macro_metrics, ConfusionMatrix, MacroMetrics};

pub const DEFAULT_FOLDS: usize = 5;

/// Assignment of whole trial groups to folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub k: usize,
    /// Group ids held out in each fold.
    pub folds: Vec<Vec<String>>,
}

impl CvPlan {
    /// Groups are ordered by their dominant class, then by id, and dealt
    /// round-robin so every class is spread over the folds and fold sizes
    /// differ by at most one group.
    pub fn grouped(table: &FeatureTable, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidConfig(format!("{k} folds; need at least 2")));
        }
        let mut per_group: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        for (g, l) in table.groups.iter().zip(&table.labels) {
            *per_group.entry(g).or_default().entry(l).or_default() += 1;
        }
        if per_group.len() < k {
            return Err(Error::CvInfeasible(format!("{} trial groups for {k} folds", per_group.len())));
        }
        let mut keyed: Vec<(&str, &str)> = per_group
            .iter()
            .map(|(g, counts)| {
                // Most frequent label; ties go to the smallest label.
                let dominant = counts.iter().fold(("", 0), |b, (l, &c)| if c > b.1 { (l, c) } else { b }).0;
                (dominant, *g)
            })
            .collect();
        keyed.sort();
        let mut folds = vec![Vec::new(); k];
        for (i, (_, g)) in keyed.into_iter().enumerate() {
            folds[i % k].push(g.to_string());
        }
        Ok(CvPlan { k, folds })
    }

    /// Row indices (train, test) of fold `f`.
    pub fn split(&self, table: &FeatureTable, f: usize) -> (Vec<usize>, Vec<usize>) {
        let held: BTreeSet<&str> = self.folds[f].iter().map(String::as_str).collect();
        (0..table.len()).partition(|&i| !held.contains(table.groups[i].as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_rows: Vec<usize>,
    pub predictions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub confusion: ConfusionMatrix,
    pub metrics: MacroMetrics,
}

/// Fits on each fold's training groups and predicts its held-out groups;
/// metrics come from the confusion matrix pooled over folds.
pub fn cross_validate(spec: &ClassifierSpec, table: &FeatureTable, plan: &CvPlan) -> Result<CvReport> {
    let classes = table.classes();
    if classes.len() < 2 {
        return Err(Error::CvInfeasible(format!("{} class(es); need at least 2", classes.len())));
    }
    let folds = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = plan.split(table, f);
            if test.is_empty() {
                return Ok(FoldResult { fold: f, test_rows: test, predictions: Vec::new() });
            }
            let model = fit(spec, &table.subset(&train))?;
            let predictions = model.predict(&table.subset(&test).rows)?;
            Ok(FoldResult { fold: f, test_rows: test, predictions })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cm = ConfusionMatrix::zeros(classes.clone());
    for fr in &folds {
        let truth: Vec<&str> = fr.test_rows.iter().map(|&i| table.labels[i].as_str()).collect();
        let pred: Vec<&str> = fr.predictions.iter().map(String::as_str).collect();
        cm.merge(&confusion(&truth, &pred, &classes)?)?;
    }
    let metrics = macro_metrics(&cm, 1.0)?;
    Ok(CvReport { folds, confusion: cm, metrics })
}
