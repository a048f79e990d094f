//! Orthogonal discrete wavelet transform (periodized Mallat cascade) with the
//! Daubechies-4 and Coiflet-5 filter banks, used as comparison denoisers.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DB4: [f64; 8] = [
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
];

const COIF5: [f64; 30] = [
    -0.000212081862067494,
    0.0003585777411617577,
    0.0021782943778456947,
    -0.00415931262757864,
    -0.010131584846900276,
    0.023408322118927783,
    0.028169744270532353,
    -0.09192158806008609,
    -0.052046670253554764,
    0.42157126673075435,
    0.7742936228603274,
    0.4379823066591634,
    -0.06203775157498196,
    -0.10556315130733723,
    0.041287530472117834,
    0.032674799467057355,
    -0.019758391600965465,
    -0.009159507338676163,
    0.006761520220620417,
    0.0024315754425382886,
    -0.0016616273039298788,
    -0.0006375589261258812,
    0.0003018579416682448,
    0.00014035632812373243,
    -4.12198619242655e-05,
    -2.1270221672515614e-05,
    3.7007277113394796e-06,
    2.0612203985788783e-06,
    -1.6237995172048338e-07,
    -9.604010112767894e-08,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Db4,
    Coif5,
}

impl WaveletFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WaveletFamily::Db4 => "db4",
            WaveletFamily::Coif5 => "coif5",
        }
    }

    /// Low-pass synthesis filter.
    pub fn lowpass(&self) -> &'static [f64] {
        match self {
            WaveletFamily::Db4 => &DB4,
            WaveletFamily::Coif5 => &COIF5,
        }
    }

    pub fn vanishing_moments(&self) -> usize {
        match self {
            WaveletFamily::Db4 => 4,
            WaveletFamily::Coif5 => 10,
        }
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "db4" => Ok(WaveletFamily::Db4),
            "coif5" => Ok(WaveletFamily::Coif5),
            _ => Err(Error::Unknown { kind: "wavelet family", name: s.into() }),
        }
    }
}

/// Quadrature mirror high-pass: `g[n] = (−1)^n h[L−1−n]`.
pub fn highpass(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l).map(|n| if n % 2 == 0 { h[l - 1 - n] } else { -h[l - 1 - n] }).collect()
}

/// Worst deviation found while checking a low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterCheck {
    pub sum_error: f64,
    pub norm_error: f64,
    pub shift_orthogonality_error: f64,
    /// Largest relative residual of the wavelet moments `Σ nᵏ g[n]`.
    pub moment_error: f64,
}

/// Checks `Σh = √2`, `Σh² = 1`, double-shift orthogonality and the vanishing
/// moments of the associated wavelet.
pub fn check_filter(h: &[f64], vanishing_moments: usize) -> FilterCheck {
    let sum_error = (h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs();
    let norm_error = (h.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
    let shift_orthogonality_error =
        (1..h.len() / 2).map(|m| h.iter().zip(&h[2 * m..]).map(|(a, b)| a * b).sum::<f64>().abs()).fold(0.0, f64::max);
    let g = highpass(h);
    let moment_error = (0..vanishing_moments)
        .map(|k| {
            let terms = g.iter().enumerate().map(|(n, gn)| gn * (n as f64).powi(k as i32));
            let (s, a) = terms.fold((0.0, 0.0), |(s, a), t| (s + t, a + t.abs()));
            s.abs() / a
        })
        .fold(0.0, f64::max);
    FilterCheck { sum_error, norm_error, shift_orthogonality_error, moment_error }
}

pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const MOMENT_TOL: f64 = 1e-8;

impl FilterCheck {
    pub fn passes(&self) -> bool {
        self.sum_error <= ORTHOGONALITY_TOL
            && self.norm_error <= ORTHOGONALITY_TOL
            && self.shift_orthogonality_error <= ORTHOGONALITY_TOL
            && self.moment_error <= MOMENT_TOL
    }
}

/// A verified filter bank and decomposition depth.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletSpec {
    /// Verifies the filter constants before handing out a spec.
    pub fn new(family: WaveletFamily, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidConfig("wavelet levels must be at least 1".into()));
        }
        let h = family.lowpass();
        let check = check_filter(h, family.vanishing_moments());
        if !check.passes() {
            return Err(Error::InvalidConfig(format!("{} filter failed verification: {check:?}", family.name())));
        }
        Ok(WaveletSpec { family, levels, lowpass: h.to_vec(), highpass: highpass(h) })
    }

    pub fn filter_len(&self) -> usize {
        self.lowpass.len()
    }
}

/// Coefficients of a multi-level DWT, details ordered coarse → fine.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    /// Input length at each level, finest first.
    pub lengths: Vec<usize>,
}

impl WaveletPyramid {
    pub fn energy(&self) -> f64 {
        self.approx.iter().chain(self.details.iter().flatten()).map(|x| x * x).sum()
    }
}

/// Forward transform with periodic extension. An odd sample left over at any
/// level is carried into the approximation unchanged.
pub fn dwt_forward(x: &[f64], spec: &WaveletSpec) -> Result<WaveletPyramid> {
    if x.len() < spec.filter_len() {
        return Err(Error::InsufficientLength { len: x.len(), needed: spec.filter_len() });
    }
    let (h, g) = (&spec.lowpass, &spec.highpass);
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(spec.levels);
    let mut lengths = Vec::with_capacity(spec.levels);
    for _ in 0..spec.levels {
        let n = approx.len();
        let m = n - n % 2;
        if m < 2 {
            return Err(Error::InsufficientLength { len: x.len(), needed: 1 << spec.levels });
        }
        let half = m / 2;
        let mut a = vec![0.0; half + n % 2];
        let mut d = vec![0.0; half];
        for k in 0..half {
            let (mut sa, mut sd) = (0.0, 0.0);
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                let v = approx[(2 * k + i) % m];
                sa += hi * v;
                sd += gi * v;
            }
            a[k] = sa;
            d[k] = sd;
        }
        if n % 2 == 1 {
            a[half] = approx[n - 1];
        }
        lengths.push(n);
        details.push(d);
        approx = a;
    }
    details.reverse();
    Ok(WaveletPyramid { approx, details, lengths })
}

pub fn dwt_inverse(p: &WaveletPyramid, spec: &WaveletSpec) -> Result<Vec<f64>> {
    if p.details.len() != p.lengths.len() {
        return Err(Error::CorruptDecomposition("pyramid level count mismatch".into()));
    }
    let (h, g) = (&spec.lowpass, &spec.highpass);
    let mut approx = p.approx.clone();
    for (d, &n) in p.details.iter().zip(p.lengths.iter().rev()) {
        let m = n - n % 2;
        let half = m / 2;
        if d.len() != half || approx.len() != half + n % 2 {
            return Err(Error::CorruptDecomposition(format!("pyramid level of length {n} is malformed")));
        }
        let mut x = vec![0.0; n];
        for k in 0..half {
            for (i, (hi, gi)) in h.iter().zip(g).enumerate() {
                x[(2 * k + i) % m] += hi * approx[k] + gi * d[k];
            }
        }
        if n % 2 == 1 {
            x[n - 1] = approx[half];
        }
        approx = x;
    }
    Ok(approx)
}
