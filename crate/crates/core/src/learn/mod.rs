//! Classifiers over feature tables and grouped cross-validation.

mod cv;
mod forest;
mod knn;
mod lda;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, CvPlan, CvReport, FoldResult, DEFAULT_FOLDS};
pub use forest::{ForestModel, Node, Tree};
pub use knn::KnnModel;
pub use lda::LdaModel;

use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Lda,
    Knn,
    Rf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Lda, ClassifierKind::Knn, ClassifierKind::Rf];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Rf => "rf",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(ClassifierKind::Lda),
            "knn" => Ok(ClassifierKind::Knn),
            "rf" => Ok(ClassifierKind::Rf),
            _ => Err(Error::Unknown { kind: "classifier", name: s.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub knn_k: usize,
    pub rf_trees: usize,
    pub rf_max_depth: Option<usize>,
    pub lda_ridge: f64,
    pub rng_seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec { kind, knn_k: 5, rf_trees: 100, rf_max_depth: None, lda_ridge: 1e-6, rng_seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knn_k == 0 || self.rf_trees == 0 || self.rf_max_depth == Some(0) {
            return Err(Error::InvalidConfig("knn_k, rf_trees and rf_max_depth must be positive".into()));
        }
        if !(self.lda_ridge >= 0.0) {
            return Err(Error::InvalidConfig(format!("lda_ridge {} must be nonnegative", self.lda_ridge)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Lda(LdaModel),
    Knn(KnnModel),
    Rf(ForestModel),
}

/// A trained classifier. Class indices refer to `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub classes: Vec<String>,
    pub width: usize,
    pub model: Model,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: FittedModel,
}

impl FittedModel {
    pub fn predict_one(&self, row: &[f64]) -> Result<&str> {
        if row.len() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: row.len() });
        }
        let n = self.classes.len();
        let i = match &self.model {
            Model::Lda(m) => m.predict_index(row),
            Model::Knn(m) => m.predict_index(row, n),
            Model::Rf(m) => m.predict_index(row, n),
        };
        Ok(&self.classes[i])
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<String>> {
        rows.iter().map(|r| self.predict_one(r).map(str::to_string)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile { format_version: MODEL_FORMAT_VERSION, model: self.clone() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        match v.get("format_version").and_then(|x| x.as_u64()) {
            Some(1) => Ok(serde_json::from_value::<ModelFile>(v)?.model),
            Some(other) => Err(Error::Format(format!("unknown model format_version {other}"))),
            None => Err(Error::Format("model file has no format_version".into())),
        }
    }
}

/// A fitting strategy selectable by name.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &str;
    fn fit(&self, table: &FeatureTable) -> Result<FittedModel>;
}

struct Configured(ClassifierSpec);

impl Classifier for Configured {
    fn name(&self) -> &str {
        self.0.kind.name()
    }

    fn fit(&self, table: &FeatureTable) -> Result<FittedModel> {
        fit(&self.0, table)
    }
}

/// `lda`, `knn` and `rf`; the spec's own `kind` is overridden by the name.
pub fn classifiers() -> Registry<dyn Classifier, ClassifierSpec> {
    let mut r: Registry<dyn Classifier, ClassifierSpec> = Registry::new("classifier");
    for kind in ClassifierKind::ALL {
        r.register(kind.name(), move |s: &ClassifierSpec| {
            let spec = ClassifierSpec { kind, ..s.clone() };
            spec.validate()?;
            Ok(Box::new(Configured(spec)) as Box<dyn Classifier>)
        });
    }
    r
}

pub fn fit(spec: &ClassifierSpec, table: &FeatureTable) -> Result<FittedModel> {
    spec.validate()?;
    table.validate()?;
    if table.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    let classes = table.classes();
    if classes.len() < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 classes, found {}", classes.len())));
    }
    let class_of: Vec<usize> = table.labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    let n = classes.len();
    let model = match spec.kind {
        ClassifierKind::Lda => Model::Lda(LdaModel::fit(&table.rows, &class_of, n, spec.lda_ridge)?),
        ClassifierKind::Knn => Model::Knn(KnnModel::fit(&table.rows, &class_of, spec.knn_k)),
        ClassifierKind::Rf => {
            Model::Rf(ForestModel::fit(&table.rows, &class_of, n, spec.rf_trees, spec.rf_max_depth, spec.rng_seed))
        }
    };
    Ok(FittedModel { classes, width: table.width(), model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn table(rows: Vec<Vec<f64>>, labels: &[&str]) -> FeatureTable {
        let w = rows[0].len();
        FeatureTable::new(
            rows,
            labels.iter().map(|s| s.to_string()).collect(),
            labels.iter().map(|s| s.to_string()).collect(),
            (0..w).map(|i| format!("f{i}")).collect(),
        )
        .unwrap()
    }

    fn two_blobs(n: usize, seed: u64) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, mu) in [("neg", -10.0), ("pos", 10.0)] {
            for _ in 0..n {
                rows.push(vec![mu + e.sample(&mut rng)]);
                labels.push(c);
            }
        }
        table(rows, &labels)
    }

    #[test]
    fn lda_boundary_near_midpoint() {
        let m = fit(&ClassifierSpec::new(ClassifierKind::Lda), &two_blobs(20, 1)).unwrap();
        // Scan for the sign change of the score difference.
        let Model::Lda(lda) = &m.model else { unreachable!() };
        let boundary = (-4000..=4000)
            .map(|i| i as f64 * 1e-3)
            .find(|&x| {
                let s = lda.scores(&[x]);
                s[1] >= s[0]
            })
            .unwrap();
        assert!(boundary.abs() < 2.0, "{boundary}");
        assert_eq!(m.predict_one(&[-10.0]).unwrap(), "neg");
        assert_eq!(m.predict_one(&[10.0]).unwrap(), "pos");
    }

    #[test]
    fn knn_one_memorizes() {
        let t = two_blobs(15, 2);
        let spec = ClassifierSpec { knn_k: 1, ..ClassifierSpec::new(ClassifierKind::Knn) };
        let m = fit(&spec, &t).unwrap();
        assert_eq!(m.predict(&t.rows).unwrap(), t.labels);
    }

    #[test]
    fn knn_majority_vote() {
        let t = table(vec![vec![0.0], vec![0.1], vec![0.3], vec![5.0], vec![6.0]], &["a", "b", "b", "a", "a"]);
        let spec = ClassifierSpec { knn_k: 3, ..ClassifierSpec::new(ClassifierKind::Knn) };
        assert_eq!(fit(&spec, &t).unwrap().predict_one(&[0.05]).unwrap(), "b");
    }

    #[test]
    fn rf_deterministic_and_accurate() {
        let t = two_blobs(30, 3);
        let spec = ClassifierSpec { rng_seed: 11, rf_trees: 25, ..ClassifierSpec::new(ClassifierKind::Rf) };
        let probe: Vec<Vec<f64>> = (-20..=20).map(|i| vec![i as f64 * 0.7]).collect();
        let a = fit(&spec, &t).unwrap();
        let b = fit(&spec, &t).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predict(&probe).unwrap(), b.predict(&probe).unwrap());
        assert_eq!(a.predict(&t.rows).unwrap(), t.labels);
    }

    #[test]
    fn rf_depth_limit() {
        let t = two_blobs(30, 4);
        let spec = ClassifierSpec { rf_trees: 5, rf_max_depth: Some(1), ..ClassifierSpec::new(ClassifierKind::Rf) };
        let Model::Rf(f) = fit(&spec, &t).unwrap().model else { unreachable!() };
        assert!(f.trees.iter().all(|t| t.nodes.len() <= 3));
    }

    #[test]
    fn width_mismatch_and_bad_input() {
        let m = fit(&ClassifierSpec::new(ClassifierKind::Lda), &two_blobs(5, 5)).unwrap();
        assert!(matches!(m.predict_one(&[1.0, 2.0]), Err(Error::WidthMismatch { expected: 1, got: 2 })));
        let one = table(vec![vec![1.0], vec![2.0]], &["a", "a"]);
        assert!(fit(&ClassifierSpec::new(ClassifierKind::Knn), &one).is_err());
        let nan = table(vec![vec![f64::NAN], vec![2.0]], &["a", "b"]);
        assert!(matches!(fit(&ClassifierSpec::new(ClassifierKind::Knn), &nan), Err(Error::NonFiniteFeature)));
    }

    #[test]
    fn lda_affine_invariance_at_zero_ridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let e = Normal::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, mu) in [("a", [0.0, 0.0, 0.0]), ("b", [2.0, 1.0, -1.0]), ("c", [-1.0, 3.0, 1.0])] {
            for _ in 0..40 {
                rows.push(mu.iter().map(|m| m + e.sample(&mut rng)).collect::<Vec<f64>>());
                labels.push(c);
            }
        }
        let a = [[2.0, 0.5, 0.0], [0.0, 1.5, -0.3], [0.2, 0.0, 0.8]];
        let b = [3.0, -7.0, 0.5];
        let tf =
            |r: &Vec<f64>| (0..3).map(|i| (0..3).map(|j| a[i][j] * r[j]).sum::<f64>() + b[i]).collect::<Vec<f64>>();
        let spec = ClassifierSpec { lda_ridge: 0.0, ..ClassifierSpec::new(ClassifierKind::Lda) };
        let m1 = fit(&spec, &table(rows.clone(), &labels)).unwrap();
        let m2 = fit(&spec, &table(rows.iter().map(tf).collect(), &labels)).unwrap();
        let (Model::Lda(l1), Model::Lda(l2)) = (&m1.model, &m2.model) else { unreachable!() };
        for r in rows.iter().step_by(7) {
            let (s1, s2) = (l1.scores(r), l2.scores(&tf(r)));
            for k in 1..3 {
                assert!(((s1[k] - s1[0]) - (s2[k] - s2[0])).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn knn_standardization_is_internal() {
        let t = two_blobs(10, 8);
        let scaled = FeatureTable { rows: t.rows.iter().map(|r| vec![r[0] * 1000.0 + 5.0]).collect(), ..t.clone() };
        let spec = ClassifierSpec::new(ClassifierKind::Knn);
        let (m1, m2) = (fit(&spec, &t).unwrap(), fit(&spec, &scaled).unwrap());
        for x in [-3.0, -0.2, 0.4, 8.0] {
            assert_eq!(m1.predict_one(&[x]).unwrap(), m2.predict_one(&[x * 1000.0 + 5.0]).unwrap());
        }
    }

    #[test]
    fn model_json_round_trip() {
        for kind in ClassifierKind::ALL {
            let spec = ClassifierSpec { rf_trees: 3, ..ClassifierSpec::new(kind) };
            let m = fit(&spec, &two_blobs(6, 9)).unwrap();
            assert_eq!(FittedModel::from_json(&m.to_json().unwrap()).unwrap(), m);
        }
        assert!(FittedModel::from_json(r#"{"format_version":9}"#).is_err());
    }

    #[test]
    fn registry_selects_kind() {
        let c = classifiers().create("knn", &ClassifierSpec::new(ClassifierKind::Lda)).unwrap();
        assert_eq!(c.name(), "knn");
        assert!(classifiers().create("svm", &ClassifierSpec::new(ClassifierKind::Lda)).is_err());
    }
}
