use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    class_of: &'a [usize],
    n_classes: usize,
    mtry: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    (0..counts.len()).fold(0, |b, i| if counts[i] > counts[b] { i } else { b })
}

impl Grower<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.class_of[i]] += 1;
        }
        c
    }

    /// Best (feature, threshold, weighted child impurity) over a random
    /// feature subset, or `None` when no candidate separates the samples.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64, f64)> {
        let d = self.rows[0].len();
        let feats = sample(&mut self.rng, d, self.mtry.min(d));
        let n = idx.len();
        let total = self.counts(idx);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in feats.iter() {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let mut left = vec![0usize; self.n_classes];
            for s in 0..n - 1 {
                left[self.class_of[order[s]]] += 1;
                let (a, b) = (self.rows[order[s]][f], self.rows[order[s + 1]][f]);
                if a == b {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = s + 1;
                let score = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
                if best.is_none_or(|(_, _, bs)| score < bs) {
                    best = Some((f, a + (b - a) / 2.0, score));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&idx);
        self.nodes.push(Node::Leaf { class: majority(&counts) });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < 2 || self.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let Some((feature, threshold, _)) = self.best_split(&idx) else { return id };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.rows[i][feature] <= threshold);
        if l.is_empty() || r.is_empty() {
            return id;
        }
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

impl ForestModel {
    pub fn fit(
        rows: &[Vec<f64>],
        class_of: &[usize],
        n_classes: usize,
        trees: usize,
        max_depth: Option<usize>,
        seed: u64,
    ) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..trees).map(|_| master.random()).collect();
        let n = rows.len();
        let mtry = ((rows[0].len() as f64).sqrt().floor() as usize).max(1);
        let trees = seeds
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut g = Grower { rows, class_of, n_classes, mtry, max_depth, rng, nodes: Vec::new() };
                g.grow(boot, 0);
                Tree { nodes: g.nodes }
            })
            .collect();
        ForestModel { trees }
    }

    /// Plurality of tree votes; ties go to the lower class index.
    pub fn predict_index(&self, x: &[f64], n_classes: usize) -> usize {
        let mut votes = vec![0usize; n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        majority(&votes)
    }
}
