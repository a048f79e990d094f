use std::collections::HashMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::signal::Grid;

/// One half of a split: coefficients and the grid locations they sit on.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub coeffs: Vec<f64>,
    pub grid: Grid,
}

/// Splits into even-indexed `{0, 2, 4, …}` and odd-indexed `{1, 3, …}` halves.
pub fn split(coeffs: &[f64], grid: &Grid) -> Result<(Branch, Branch)> {
    if coeffs.len() < 2 {
        return Err(Error::CannotSplit(coeffs.len()));
    }
    if coeffs.len() != grid.len() {
        return Err(Error::LengthMismatch(format!("{} coefficients on a grid of {} points", coeffs.len(), grid.len())));
    }
    let (even_c, odd_c) = deinterleave(coeffs);
    let (even_g, odd_g) = deinterleave(grid.positions());
    Ok((
        Branch { coeffs: even_c, grid: Grid::from_sorted_unchecked(even_g) },
        Branch { coeffs: odd_c, grid: Grid::from_sorted_unchecked(odd_g) },
    ))
}

pub(crate) fn deinterleave(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let even = x.iter().step_by(2).copied().collect();
    let odd = x.iter().skip(1).step_by(2).copied().collect();
    (even, odd)
}

pub(crate) fn interleave(even: &[f64], odd: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(even.len() + odd.len());
    for (i, e) in even.iter().enumerate() {
        out.push(*e);
        if let Some(o) = odd.get(i) {
            out.push(*o);
        }
    }
    out
}

/// Sparse linear prediction of odd samples from even samples.
///
/// Row `k` holds the stencil of even indices used for odd sample `k` together
/// with its weights. Each row reproduces polynomials up to the fitted degree,
/// in particular constants, so the weights of a row sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionOperator {
    pub rows: Vec<PredictionRow>,
    /// Standardization scale per detail, `sqrt(1 + Σ w²)`.
    pub normalization: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub start: usize,
    pub weights: Vec<f64>,
}

impl PredictionRow {
    pub fn stencil(&self) -> Range<usize> {
        self.start..self.start + self.weights.len()
    }

    #[inline]
    pub fn apply(&self, even: &[f64]) -> f64 {
        self.weights.iter().zip(&even[self.stencil()]).map(|(w, e)| w * e).sum()
    }
}

impl PredictionOperator {
    pub fn predict(&self, even: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.apply(even)).collect()
    }
}

/// Indices of the `count` even points nearest to `x`; ties go to the left.
fn nearest(even: &[f64], x: f64, count: usize) -> Range<usize> {
    let pos = even.partition_point(|&e| e < x);
    let (mut lo, mut hi) = (pos, pos);
    for _ in 0..count.min(even.len()) {
        let take_left = match (lo > 0, hi < even.len()) {
            (true, true) => x - even[lo - 1] <= even[hi] - x,
            (true, false) => true,
            (false, _) => false,
        };
        if take_left {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    lo..hi
}

/// The even points used to predict the sample at `x`.
///
/// With no bandwidth, exactly `order` nearest neighbours. With bandwidth `h`,
/// every point within distance `h`, widened to the `order` nearest when fewer
/// than `order` fall inside.
pub fn stencil(even: &[f64], x: f64, order: usize, bandwidth: Option<f64>) -> Range<usize> {
    match bandwidth {
        None => nearest(even, x, order),
        Some(h) => {
            let lo = even.partition_point(|&e| e < x - h);
            let hi = even.partition_point(|&e| e <= x + h);
            if hi - lo >= order {
                lo..hi
            } else {
                nearest(even, x, order)
            }
        }
    }
}

/// Least-squares weights of a degree-`degree` polynomial fit through the
/// points at `offsets` (relative to the target), evaluated at the target.
fn local_fit_weights(offsets: &[f64], degree: usize) -> Vec<f64> {
    let m = offsets.len();
    if degree == 0 {
        return vec![1.0 / m as f64; m];
    }
    let scale = offsets.iter().fold(0.0f64, |a, o| a.max(o.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let n = degree + 1;
    // powers[i][a] = u_i^a
    let powers: Vec<Vec<f64>> = offsets
        .iter()
        .map(|o| {
            let u = o / scale;
            let mut p = Vec::with_capacity(n);
            let mut acc = 1.0;
            for _ in 0..n {
                p.push(acc);
                acc *= u;
            }
            p
        })
        .collect();
    let mut normal = vec![vec![0.0; n]; n];
    for p in &powers {
        for a in 0..n {
            for b in 0..n {
                normal[a][b] += p[a] * p[b];
            }
        }
    }
    let mut rhs = vec![0.0; n];
    rhs[0] = 1.0;
    let z = solve_small(normal, rhs);
    powers.iter().map(|p| p.iter().zip(&z).map(|(a, b)| a * b).sum()).collect()
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Builds the local-polynomial prediction of the odd grid from the even grid.
///
/// For every odd location a polynomial of degree `order - 1` (lowered when the
/// stencil has fewer than `order` points) is fitted by uniform-weight least
/// squares to the stencil and evaluated at the odd location.
pub fn build_prediction(
    even_grid: &Grid,
    odd_grid: &Grid,
    order: usize,
    bandwidth: Option<f64>,
) -> Result<PredictionOperator> {
    if even_grid.is_empty() {
        return Err(Error::NoSupport);
    }
    if order == 0 {
        return Err(Error::InvalidConfig("polynomial order must be at least 1".into()));
    }
    let even = even_grid.positions();
    let mut cache: HashMap<Vec<u64>, Vec<f64>> = HashMap::new();
    let mut rows = Vec::with_capacity(odd_grid.len());
    let mut normalization = Vec::with_capacity(odd_grid.len());
    for &x in odd_grid.positions() {
        let st = stencil(even, x, order, bandwidth);
        let offsets: Vec<f64> = even[st.clone()].iter().map(|e| e - x).collect();
        let degree = order.min(offsets.len()) - 1;
        let mut key: Vec<u64> = offsets.iter().map(|o| o.to_bits()).collect();
        key.push(degree as u64);
        let weights = cache.entry(key).or_insert_with(|| local_fit_weights(&offsets, degree)).clone();
        normalization.push((1.0 + weights.iter().map(|w| w * w).sum::<f64>()).sqrt());
        rows.push(PredictionRow { start: st.start, weights });
    }
    Ok(PredictionOperator { rows, normalization })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[f64]) -> Grid {
        Grid::new(v.to_vec()).unwrap()
    }

    #[test]
    fn split_by_parity() {
        let (e, o) = split(&[1.0, 3.0, 2.0, 4.0], &Grid::regular(4)).unwrap();
        assert_eq!(e.coeffs, vec![1.0, 2.0]);
        assert_eq!(o.coeffs, vec![3.0, 4.0]);
        assert_eq!(e.grid.positions(), &[0.0, 2.0]);
        assert_eq!(o.grid.positions(), &[1.0, 3.0]);

        let (e, o) = split(&[5.0, 6.0, 7.0], &Grid::regular(3)).unwrap();
        assert_eq!(e.coeffs, vec![5.0, 7.0]);
        assert_eq!(o.coeffs, vec![6.0]);

        assert!(matches!(split(&[7.0], &Grid::regular(1)), Err(Error::CannotSplit(1))));
    }

    #[test]
    fn order_one_picks_nearest_left_on_ties() {
        let op = build_prediction(&g(&[0.0, 2.0, 4.0]), &g(&[1.0, 3.0, 5.0]), 1, None).unwrap();
        for (k, row) in op.rows.iter().enumerate() {
            assert_eq!(row.weights, vec![1.0]);
            assert_eq!(row.start, k);
        }
    }

    #[test]
    fn order_two_interior_is_midpoint() {
        let op = build_prediction(&g(&[0.0, 2.0, 4.0]), &g(&[1.0, 3.0]), 2, None).unwrap();
        for row in &op.rows {
            assert!((row.weights[0] - 0.5).abs() < 1e-15);
            assert!((row.weights[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn order_two_boundary_extrapolates() {
        // Line through (2, a) and (4, b) evaluated at 5: -a/2 + 3b/2.
        let op = build_prediction(&g(&[0.0, 2.0, 4.0]), &g(&[5.0]), 2, None).unwrap();
        assert_eq!(op.rows[0].stencil(), 1..3);
        assert!((op.rows[0].weights[0] + 0.5).abs() < 1e-14);
        assert!((op.rows[0].weights[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn empty_even_grid_has_no_support() {
        assert!(matches!(build_prediction(&g(&[]), &g(&[1.0]), 2, None), Err(Error::NoSupport)));
    }

    #[test]
    fn fixed_bandwidth_uses_least_squares() {
        // Bandwidth 3 around x=5 covers evens 2, 4, 6, 8: a line fit over four
        // symmetric points evaluated at the centre is their mean.
        let even = g(&[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let op = build_prediction(&even, &g(&[5.0]), 2, Some(3.0)).unwrap();
        assert_eq!(op.rows[0].stencil(), 1..5);
        for w in &op.rows[0].weights {
            assert!((w - 0.25).abs() < 1e-14);
        }
        // Too narrow: widened to the two nearest.
        let op = build_prediction(&even, &g(&[5.0]), 2, Some(0.5)).unwrap();
        assert_eq!(op.rows[0].stencil(), 2..4);
    }

    #[test]
    fn stencil_is_capped_by_available_points() {
        let op = build_prediction(&g(&[0.0]), &g(&[1.0]), 4, None).unwrap();
        assert_eq!(op.rows[0].weights, vec![1.0]);
    }

    #[test]
    fn rows_reproduce_polynomials_on_irregular_grids() {
        let even = g(&[0.0, 0.7, 2.1, 3.0, 4.4, 6.0, 7.5]);
        let odd = g(&[0.3, 1.5, 2.5, 3.9, 5.1, 7.0, 9.0]);
        for order in 1..=4 {
            let op = build_prediction(&even, &odd, order, None).unwrap();
            for (row, &x) in op.rows.iter().zip(odd.positions()) {
                assert!((row.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for deg in 0..order {
                    let vals: Vec<f64> = even.positions().iter().map(|e| (e / 10.0).powi(deg as i32)).collect();
                    let got = row.apply(&vals);
                    assert!((got - (x / 10.0).powi(deg as i32)).abs() < 1e-12, "order {order} deg {deg}");
                }
            }
        }
    }

    #[test]
    fn normalization_is_residual_row_norm() {
        let op = build_prediction(&g(&[0.0, 2.0]), &g(&[1.0]), 2, None).unwrap();
        assert!((op.normalization[0] - 1.5f64.sqrt()).abs() < 1e-15);
    }
}
