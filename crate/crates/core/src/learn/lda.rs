use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear discriminant with pooled within-class covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// `Σ⁻¹ μ_c`, one vector per class.
    pub weights: Vec<Vec<f64>>,
    /// `−½ μ_cᵀ Σ⁻¹ μ_c + ln π_c`.
    pub offsets: Vec<f64>,
}

impl LdaModel {
    /// `rows` grouped by `class_of[i]` ∈ `0..n_classes`.
    pub fn fit(rows: &[Vec<f64>], class_of: &[usize], n_classes: usize, ridge: f64) -> Result<Self> {
        let d = rows[0].len();
        let n = rows.len();
        let mut means = vec![DVector::<f64>::zeros(d); n_classes];
        let mut counts = vec![0usize; n_classes];
        for (r, &c) in rows.iter().zip(class_of) {
            means[c] += DVector::from_column_slice(r);
            counts[c] += 1;
        }
        for (m, &k) in means.iter_mut().zip(&counts) {
            if k > 0 {
                *m /= k as f64;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for (r, &c) in rows.iter().zip(class_of) {
            let z = DVector::from_column_slice(r) - &means[c];
            cov.ger(1.0, &z, &z, 1.0);
        }
        let present = counts.iter().filter(|&&k| k > 0).count();
        let dof = if n > present { n - present } else { n };
        cov /= dof as f64;
        for i in 0..d {
            cov[(i, i)] += ridge;
        }
        let inv = cov
            .clone()
            .cholesky()
            .map(|ch| ch.inverse())
            .or_else(|| cov.try_inverse())
            .ok_or_else(|| Error::InvalidConfig("pooled covariance is singular; raise lda_ridge".into()))?;

        let mut weights = Vec::with_capacity(n_classes);
        let mut offsets = Vec::with_capacity(n_classes);
        for (m, &k) in means.iter().zip(&counts) {
            if k == 0 {
                weights.push(vec![0.0; d]);
                offsets.push(f64::NEG_INFINITY);
                continue;
            }
            let w = &inv * m;
            offsets.push(-0.5 * m.dot(&w) + (k as f64 / n as f64).ln());
            weights.push(w.as_slice().to_vec());
        }
        Ok(LdaModel { weights, offsets })
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.offsets)
            .map(|(w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
            .collect()
    }

    pub fn predict_index(&self, x: &[f64]) -> usize {
        let s = self.scores(x);
        (0..s.len()).fold(0, |best, i| if s[i] > s[best] { i } else { best })
    }
}
