use crate::error::{Error, Result};

/// Clamp applied to every TD-PSD log argument.
pub const LOG_FLOOR: f64 = 1e-12;
/// Power-normalization exponent for the TD-PSD moments.
pub const TDPSD_LAMBDA: f64 = 0.1;

fn need(x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::WindowTooShort { len: x.len(), needed });
    }
    Ok(())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

pub fn rms(x: &[f64]) -> Result<f64> {
    need(x, 1)?;
    Ok((x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt())
}

/// Order-`p` autoregressive fit by Burg's method, returned as `a` with
/// `x_t ≈ Σ_k a_k x_{t−k}`.
pub fn burg(x: &[f64], p: usize) -> Result<Vec<f64>> {
    need(x, p + 1)?;
    if is_constant(x) {
        return Err(Error::DegenerateWindow("constant window has no AR structure".into()));
    }
    let n = x.len();
    let mut f = x.to_vec();
    let mut b = x.to_vec();
    // Prediction-error filter 1 + c_1 z⁻¹ + … ; stored without the leading 1.
    let mut c: Vec<f64> = Vec::with_capacity(p);
    for m in 0..p {
        let (mut num, mut den) = (0.0, 0.0);
        for t in m + 1..n {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        if den <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateWindow(format!("zero prediction error at order {}", m + 1)));
        }
        let k = -2.0 * num / den;
        let prev = c.clone();
        c.push(k);
        for i in 0..m {
            c[i] = prev[i] + k * prev[m - 1 - i];
        }
        for t in (m + 1..n).rev() {
            let ft = f[t];
            f[t] = ft + k * b[t - 1];
            b[t] = b[t - 1] + k * ft;
        }
    }
    Ok(c.into_iter().map(|v| -v).collect())
}

pub fn ar5(x: &[f64]) -> Result<Vec<f64>> {
    need(x, 6)?;
    burg(x, 5)
}

/// Hudgins set with deadzone `eps`: MAV, ZC, WL, SSC.
pub fn td4(x: &[f64], eps: f64) -> Result<[f64; 4]> {
    need(x, 3)?;
    let mav = x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64;
    let zc = x.windows(2).filter(|w| w[0] * w[1] < 0.0 && (w[0] - w[1]).abs() >= eps).count();
    let wl: f64 = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let ssc = x
        .windows(3)
        .filter(|w| {
            let (l, r) = (w[1] - w[0], w[1] - w[2]);
            l * r > 0.0 && l.abs().max(r.abs()) >= eps
        })
        .count();
    Ok([mav, zc as f64, wl, ssc as f64])
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn ln(v: f64) -> f64 {
    v.max(LOG_FLOOR).ln()
}

/// Six time-dependent spectral descriptors built from the norms of `x`,
/// `Δx` and `Δ²x`, each power-normalized as `m^λ / λ`.
pub fn tdpsd(x: &[f64]) -> Result<[f64; 6]> {
    need(x, 5)?;
    if is_constant(x) {
        return Err(Error::DegenerateWindow("constant window".into()));
    }
    let d1 = diff(x);
    let d2 = diff(&d1);
    let pn = |m: f64| m.powf(TDPSD_LAMBDA) / TDPSD_LAMBDA;
    let (m0, m2, m4) = (pn(norm(x)), pn(norm(&d1)), pn(norm(&d2)));
    let wl1: f64 = d1.iter().map(|v| v.abs()).sum();
    let wl2: f64 = d2.iter().map(|v| v.abs()).sum();
    let (a, b) = ((m0 - m2).max(LOG_FLOOR), (m0 - m4).max(LOG_FLOOR));
    Ok([
        ln(m0),
        ln(m0 - m2),
        ln(m0 - m4),
        ln(m0 / (a * b).sqrt()),
        ln(m2 / (m0 * m4).sqrt()),
        ln(wl1 / wl2.max(LOG_FLOOR)),
    ])
}

/// Hjorth activity, mobility and complexity.
pub fn hjorth(x: &[f64]) -> Result<[f64; 3]> {
    need(x, 3)?;
    let var = |v: &[f64]| {
        let mu = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - mu) * (a - mu)).sum::<f64>() / v.len() as f64
    };
    let d1 = diff(x);
    let d2 = diff(&d1);
    let (v0, v1, v2) = (var(x), var(&d1), var(&d2));
    if v0 <= 0.0 || v1 <= 0.0 {
        return Err(Error::DegenerateWindow("Hjorth parameters need a varying window".into()));
    }
    let mobility = (v1 / v0).sqrt();
    Ok([v0, mobility, (v2 / v1).sqrt() / mobility])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ar1(a: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            prev = a * prev + e.sample(&mut rng);
            x.push(prev);
        }
        x
    }

    #[test]
    fn rms_examples() {
        assert_relative_eq!(rms(&[3.0, 4.0]).unwrap(), 12.5f64.sqrt());
        assert_eq!(rms(&[0.0; 7]).unwrap(), 0.0);
        assert_relative_eq!(rms(&[-2.5; 9]).unwrap(), 2.5);
        assert!(rms(&[]).is_err());
    }

    #[test]
    fn burg_recovers_ar1() {
        let a = ar5(&ar1(0.9, 100_000, 42)).unwrap();
        assert!((a[0] - 0.9).abs() < 0.05, "{a:?}");
        assert!(a[1..].iter().all(|v| v.abs() < 0.05), "{a:?}");
    }

    #[test]
    fn burg_white_noise_is_flat() {
        let a = ar5(&ar1(0.0, 100_000, 7)).unwrap();
        assert!(a.iter().all(|v| v.abs() < 0.05), "{a:?}");
    }

    #[test]
    fn burg_recovers_ar2() {
        // x_t = 0.5 x_{t-1} - 0.3 x_{t-2} + e_t
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let e = Normal::new(0.0, 1.0).unwrap();
        let mut x = vec![0.0, 0.0];
        for t in 2..50_000 {
            let v = 0.5 * x[t - 1] - 0.3 * x[t - 2] + e.sample(&mut rng);
            x.push(v);
        }
        let a = burg(&x, 2).unwrap();
        assert!((a[0] - 0.5).abs() < 0.03 && (a[1] + 0.3).abs() < 0.03, "{a:?}");
    }

    #[test]
    fn degenerate_windows() {
        assert!(matches!(ar5(&[1.0; 20]), Err(Error::DegenerateWindow(_))));
        assert!(matches!(ar5(&[1.0, 2.0, 3.0]), Err(Error::WindowTooShort { .. })));
        assert!(matches!(tdpsd(&[4.0; 20]), Err(Error::DegenerateWindow(_))));
        assert!(matches!(td4(&[1.0, 2.0], 0.0), Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn td4_hand_counts() {
        assert_eq!(td4(&[1.0, -1.0, 1.0], 0.0).unwrap(), [1.0, 2.0, 4.0, 1.0]);
        assert_eq!(td4(&[-3.0; 10], 0.0).unwrap(), [3.0, 0.0, 0.0, 0.0]);
        let t = td4(&[1.0, -1.0, 1.0], 3.0).unwrap();
        assert_eq!((t[1], t[3]), (0.0, 0.0));
    }

    #[test]
    fn tdpsd_sinusoid_irregularity() {
        let x: Vec<f64> = (0..10_000).map(|i| (2.0 * std::f64::consts::PI * 0.01 * i as f64).sin()).collect();
        let f = tdpsd(&x).unwrap();
        assert!(f[4].abs() < 0.05, "{f:?}");
    }

    #[test]
    fn tdpsd_scaling() {
        let x: Vec<f64> = (0..400).map(|i| (0.05 * i as f64).sin() + 0.3 * (0.011 * i as f64).cos()).collect();
        let f = tdpsd(&x).unwrap();
        for c in [0.2, 3.0, 50.0] {
            let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
            let g = tdpsd(&cx).unwrap();
            for i in 0..3 {
                assert_relative_eq!(g[i] - f[i], TDPSD_LAMBDA * f64::ln(c), epsilon = 1e-9);
            }
            for i in 3..6 {
                assert_relative_eq!(g[i], f[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn tdpsd_matches_direct_evaluation() {
        let x = [0.3, -1.2, 2.0, 0.7, -0.4, 1.1, 0.0, -0.9];
        let d1: Vec<f64> = (0..7).map(|i| x[i + 1] - x[i]).collect();
        let d2: Vec<f64> = (0..6).map(|i| d1[i + 1] - d1[i]).collect();
        let m = |v: &[f64]| 10.0 * v.iter().map(|a| a * a).sum::<f64>().sqrt().powf(0.1);
        let (m0, m2, m4) = (m(&x), m(&d1), m(&d2));
        let f = tdpsd(&x).unwrap();
        assert_relative_eq!(f[0], m0.ln(), epsilon = 1e-12);
        assert_relative_eq!(f[4], (m2 / (m0 * m4).sqrt()).ln(), epsilon = 1e-12);
        let wl = d1.iter().map(|a| a.abs()).sum::<f64>() / d2.iter().map(|a| a.abs()).sum::<f64>();
        assert_relative_eq!(f[5], wl.ln(), epsilon = 1e-12);
    }

    #[test]
    fn hjorth_sinusoid() {
        // 200 whole periods, so no edge effects.
        let w = 2.0 * std::f64::consts::PI / 100.0;
        let x: Vec<f64> = (0..20_000).map(|i| (w * i as f64).sin()).collect();
        let h = hjorth(&x).unwrap();
        assert_relative_eq!(h[0], 0.5, epsilon = 1e-3);
        assert_relative_eq!(h[1], 2.0 * (w / 2.0).sin(), epsilon = 1e-5);
        assert_relative_eq!(h[2], 1.0, epsilon = 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn window() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-10.0f64..10.0, 8..64)
        }

        proptest! {
            #[test]
            fn homogeneity(x in window(), c in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0]) {
                let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
                let (a, b) = (td4(&x, 0.0).unwrap(), td4(&cx, 0.0).unwrap());
                let tol = |v: f64| 1e-9 * v.abs().max(1.0);
                prop_assert!((b[0] - c.abs() * a[0]).abs() <= tol(b[0]));
                prop_assert!((b[2] - c.abs() * a[2]).abs() <= tol(b[2]));
                prop_assert_eq!(a[1], b[1]);
                prop_assert_eq!(a[3], b[3]);
                let (r, cr) = (rms(&x).unwrap(), rms(&cx).unwrap());
                prop_assert!((cr - c.abs() * r).abs() <= tol(cr));
            }

            #[test]
            fn tdpsd_ratios_scale_invariant(x in window(), c in 0.05f64..20.0) {
                prop_assume!(!is_constant(&x));
                let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
                let (f, g) = (tdpsd(&x).unwrap(), tdpsd(&cx).unwrap());
                prop_assert!((f[4] - g[4]).abs() < 1e-9);
                prop_assert!((f[5] - g[5]).abs() < 1e-9);
                prop_assert!((f[0] + TDPSD_LAMBDA * c.ln() - g[0]).abs() < 1e-9);
            }

            #[test]
            fn features_finite(x in window()) {
                prop_assume!(!is_constant(&x));
                prop_assert!(ar5(&x).unwrap().iter().all(|v| v.is_finite()));
                prop_assert!(tdpsd(&x).unwrap().iter().all(|v| v.is_finite()));
            }
        }
    }
}
