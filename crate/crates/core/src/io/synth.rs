//! Seeded synthetic multi-channel EMG.
//!
//! Each record is one repetition of one class: a band-limited Gaussian
//! carrier per channel, gated by a raised-cosine burst envelope and scaled
//! by a class-specific channel weight profile, plus white Gaussian noise.
//! The clean mixture and the activity mask are kept for SNR oracles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{LabeledDataset, Record, Signal};

pub const REST_CLASS: &str = "rest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub fs: f64,
    pub duration_s: f64,
    /// Quiet lead-in and tail of every record.
    pub rest_s: f64,
    /// Raised-cosine ramp length at each burst edge.
    pub ramp_s: f64,
    pub channels: usize,
    pub n_classes: usize,
    /// Repetitions (bursts) per class; repetition `r` is trial `rep{r}`.
    pub trials: usize,
    pub band_hz: (f64, f64),
    pub noise_sigma: f64,
    /// When set, the noise level of each record is chosen to give this SNR
    /// against the record's clean power, and `noise_sigma` is ignored.
    pub target_snr_db: Option<f64>,
    /// Relative amplitude jitter between repetitions.
    pub amplitude_jitter: f64,
    /// Adds a class of noise-only records.
    pub include_rest: bool,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            fs: 2000.0,
            duration_s: 3.0,
            rest_s: 0.25,
            ramp_s: 0.1,
            channels: 8,
            n_classes: 4,
            trials: 6,
            band_hz: (20.0, 450.0),
            noise_sigma: 0.0,
            target_snr_db: Some(0.0),
            amplitude_jitter: 0.1,
            include_rest: false,
            rng_seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.fs > 0.0) || self.channels == 0 || self.n_classes == 0 || self.trials == 0 {
            return bad("fs, channels, n_classes and trials must be positive".into());
        }
        let (lo, hi) = self.band_hz;
        if !(0.0 <= lo && lo < hi) || self.fs <= 2.0 * hi {
            return bad(format!("band {lo}..{hi} Hz must be increasing and below fs/2 = {}", self.fs / 2.0));
        }
        if !(self.rest_s >= 0.0 && self.ramp_s >= 0.0) || self.duration_s <= 2.0 * (self.rest_s + self.ramp_s) {
            return bad("duration must exceed the rest margins and ramps".into());
        }
        if !(self.noise_sigma >= 0.0) || !(0.0..1.0).contains(&self.amplitude_jitter) {
            return bad("noise_sigma must be nonnegative and amplitude_jitter in [0, 1)".into());
        }
        if self.target_snr_db.is_some_and(|s| !s.is_finite()) {
            return bad("target SNR must be finite".into());
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration_s * self.fs).round() as usize
    }

    pub fn class_names(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..self.n_classes).map(|c| format!("c{c}")).collect();
        if self.include_rest {
            v.push(REST_CLASS.into());
        }
        v
    }

    /// Channel gains of class `c`: a raised-cosine bump that moves around
    /// the electrode ring with the class index.
    pub fn profile(&self, c: usize) -> Vec<f64> {
        (0..self.channels)
            .map(|ch| {
                let phase = ch as f64 / self.channels as f64 - c as f64 / self.n_classes as f64;
                0.15 + 0.85 * 0.5 * (1.0 + (2.0 * PI * phase).cos())
            })
            .collect()
    }

    /// Burst envelope in `[0, 1]`.
    pub fn envelope(&self) -> Vec<f64> {
        let n = self.samples();
        let (rest, ramp) = ((self.rest_s * self.fs).round() as usize, (self.ramp_s * self.fs).round() as usize);
        (0..n)
            .map(|t| {
                let edge = t.min(n - 1 - t);
                if edge < rest {
                    0.0
                } else if edge < rest + ramp {
                    0.5 * (1.0 - (PI * (edge - rest) as f64 / ramp as f64).cos())
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Noisy records with their clean references and activity masks, all in
/// the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub noisy: LabeledDataset,
    pub clean: Vec<Signal>,
    pub masks: Vec<Vec<bool>>,
}

/// Unit-RMS Gaussian noise restricted to `band` by zeroing FFT bins.
fn band_limited(n: usize, fs: f64, band: (f64, f64), rng: &mut ChaCha8Rng, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut buf: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(normal.sample(rng), 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * fs / n as f64;
        if f < band.0 || f > band.1 {
            *v = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    x.iter().map(|v| if rms > 0.0 { v / rms } else { 0.0 }).collect()
}

pub fn synth_dataset(spec: &SynthSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let n = spec.samples();
    let env = spec.envelope();
    let mask: Vec<bool> = env.iter().map(|&e| e > 0.0).collect();
    let mut master = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut planner = FftPlanner::new();
    let normal = Normal::new(0.0, 1.0).unwrap();

    let classes = spec.class_names();
    let mut records = Vec::new();
    let mut clean = Vec::new();
    let mut masks = Vec::new();
    for r in 0..spec.trials {
        for (c, label) in classes.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(master.random());
            let rest = label == REST_CLASS;
            let gains = if rest { vec![0.0; spec.channels] } else { spec.profile(c) };
            let amp = 1.0 + spec.amplitude_jitter * rng.random_range(-1.0..=1.0);
            let clean_samples: Vec<Vec<f64>> = gains
                .iter()
                .map(|g| {
                    let carrier = band_limited(n, spec.fs, spec.band_hz, &mut rng, &mut planner);
                    carrier.iter().zip(&env).map(|(v, e)| amp * g * e * v).collect()
                })
                .collect();
            let p_clean = clean_samples.iter().flatten().map(|v| v * v).sum::<f64>() / (n * spec.channels) as f64;
            let sigma = match spec.target_snr_db {
                Some(db) if p_clean > 0.0 => (p_clean / 10f64.powf(db / 10.0)).sqrt(),
                _ => spec.noise_sigma,
            };
            let noisy_samples = clean_samples
                .iter()
                .map(|ch| ch.iter().map(|v| v + sigma * normal.sample(&mut rng)).collect())
                .collect();
            let tags = (Some("synth".to_string()), Some(format!("rep{r}")), Some(label.clone()));
            let clean_sig =
                Signal::new(clean_samples, spec.fs)?.with_tags(tags.0.clone(), tags.1.clone(), tags.2.clone());
            let noisy_sig = Signal::new(noisy_samples, spec.fs)?.with_tags(tags.0, tags.1, tags.2);
            records.push(Record::from_tagged(noisy_sig)?);
            clean.push(clean_sig);
            masks.push(if rest { vec![false; n] } else { mask.clone() });
        }
    }
    Ok(SynthDataset { noisy: LabeledDataset::new(records)?, clean, masks })
}
