use serde::{Deserialize, Serialize};

/// k-nearest-neighbour vote in z-scored feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub class_of: Vec<usize>,
}

impl KnnModel {
    pub fn fit(rows: &[Vec<f64>], class_of: &[usize], k: usize) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        // A constant training feature carries no distance information.
        for s in scale.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let mut m = KnnModel { k, mean, scale, rows: Vec::new(), class_of: class_of.to_vec() };
        m.rows = rows.iter().map(|r| m.standardize(r)).collect();
        m
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }

    /// Majority among the `k` nearest; a tied vote goes to the tied class
    /// with the closest member.
    pub fn predict_index(&self, x: &[f64], n_classes: usize) -> usize {
        let z = self.standardize(x);
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(dist.len());
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        let mut near = dist[..k].to_vec();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; n_classes];
        for &(_, i) in &near {
            votes[self.class_of[i]] += 1;
        }
        let top = *votes.iter().max().unwrap_or(&0);
        near.iter().map(|&(_, i)| self.class_of[i]).find(|&c| votes[c] == top).unwrap_or(0)
    }
}
