use super::predict::PredictionOperator;

/// Sparse update of even samples from details: `S = even + D·g`.
///
/// `rows[j]` lists `(detail index, weight)` pairs for even sample `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOperator {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl UpdateOperator {
    /// Each even sample takes half of its co-located detail. An unpaired
    /// trailing even sample is left untouched.
    pub fn haar(n_even: usize, n_odd: usize) -> Self {
        let rows = (0..n_even).map(|j| if j < n_odd { vec![(j, 0.5)] } else { Vec::new() }).collect();
        UpdateOperator { rows }
    }

    /// Minimum-norm update making every detail carry zero integral, so the
    /// integral-weighted sum of the coefficients is the same on both levels.
    ///
    /// `fine_even` / `fine_odd` are the integrals of the fine-level scaling
    /// functions on the two branches, `coarse` those of the coarse level and
    /// `detail_scale` the factor the stored details were divided by.
    pub fn moment_preserving(
        predict: &PredictionOperator,
        fine_odd: &[f64],
        coarse: &[f64],
        detail_scale: &[f64],
    ) -> Self {
        let mut rows = vec![Vec::new(); coarse.len()];
        for (k, row) in predict.rows.iter().enumerate() {
            let st = row.stencil();
            let denom: f64 = coarse[st.clone()].iter().map(|c| c * c).sum();
            if denom <= f64::MIN_POSITIVE {
                continue;
            }
            let scale = fine_odd[k] * detail_scale[k] / denom;
            for j in st {
                rows[j].push((k, coarse[j] * scale));
            }
        }
        UpdateOperator { rows }
    }

    pub fn apply(&self, details: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(k, w)| w * details[k]).sum()).collect()
    }
}

/// Integrals of the coarse scaling functions: `I_even + Rᵀ·I_odd`.
pub(crate) fn coarse_integrals(predict: &PredictionOperator, fine_even: &[f64], fine_odd: &[f64]) -> Vec<f64> {
    let mut out = fine_even.to_vec();
    for (row, io) in predict.rows.iter().zip(fine_odd) {
        for (j, w) in row.stencil().zip(&row.weights) {
            out[j] += w * io;
        }
    }
    out
}
