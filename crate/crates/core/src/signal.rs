//! Shared domain types: multi-channel signals, sample grids, analysis
//! windows and labeled datasets.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multi-channel, uniformly sampled time series.
///
/// `samples[c]` holds channel `c`. Every channel has the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub samples: Vec<Vec<f64>>,
    pub sample_rate_hz: f64,
    pub channel_ids: Vec<String>,
    pub subject_id: Option<String>,
    pub trial_id: Option<String>,
    pub class_label: Option<String>,
}

/// First violated invariant found by [`validate_signal`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveSampleRate(f64),
    RaggedChannels { channel: usize, expected: usize, got: usize },
    EmptyChannels,
    ChannelIdCount { ids: usize, channels: usize },
    NonFiniteSample { channel: usize, index: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonPositiveSampleRate(fs) => write!(f, "sample rate {fs} is not positive"),
            Violation::RaggedChannels { channel, expected, got } => {
                write!(f, "channel {channel} has {got} samples, expected {expected}")
            }
            Violation::EmptyChannels => write!(f, "channels are empty"),
            Violation::ChannelIdCount { ids, channels } => {
                write!(f, "{ids} channel ids for {channels} channels")
            }
            Violation::NonFiniteSample { channel, index } => {
                write!(f, "non-finite sample at channel {channel}, index {index}")
            }
        }
    }
}

pub type ValidationResult = std::result::Result<(), Violation>;

/// Checks every `Signal` invariant and reports the first breach.
pub fn validate_signal(s: &Signal) -> ValidationResult {
    if !(s.sample_rate_hz > 0.0) || !s.sample_rate_hz.is_finite() {
        return Err(Violation::NonPositiveSampleRate(s.sample_rate_hz));
    }
    if s.channel_ids.len() != s.samples.len() {
        return Err(Violation::ChannelIdCount { ids: s.channel_ids.len(), channels: s.samples.len() });
    }
    if let Some(first) = s.samples.first() {
        let expected = first.len();
        if expected == 0 {
            return Err(Violation::EmptyChannels);
        }
        for (c, ch) in s.samples.iter().enumerate() {
            if ch.len() != expected {
                return Err(Violation::RaggedChannels { channel: c, expected, got: ch.len() });
            }
        }
        for (c, ch) in s.samples.iter().enumerate() {
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Violation::NonFiniteSample { channel: c, index: i });
            }
        }
    }
    Ok(())
}

impl Signal {
    /// Builds a validated signal with default channel ids `ch0..`.
    pub fn new(samples: Vec<Vec<f64>>, sample_rate_hz: f64) -> Result<Self> {
        let channel_ids = (0..samples.len()).map(|c| format!("ch{c}")).collect();
        let s = Signal { samples, sample_rate_hz, channel_ids, subject_id: None, trial_id: None, class_label: None };
        validate_signal(&s).map_err(|v| Error::InvalidSignal(v.to_string()))?;
        Ok(s)
    }

    pub fn with_tags(
        mut self,
        subject_id: Option<String>,
        trial_id: Option<String>,
        class_label: Option<String>,
    ) -> Self {
        self.subject_id = subject_id;
        self.trial_id = trial_id;
        self.class_label = class_label;
        self
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }

    /// Samples per channel (0 for a channel-less signal).
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same metadata, new sample data.
    pub fn with_samples(&self, samples: Vec<Vec<f64>>) -> Signal {
        Signal {
            samples,
            sample_rate_hz: self.sample_rate_hz,
            channel_ids: self.channel_ids.clone(),
            subject_id: self.subject_id.clone(),
            trial_id: self.trial_id.clone(),
            class_label: self.class_label.clone(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().flatten().map(|v| v * v).sum()
    }
}

/// Strictly increasing sample locations, in index units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("grid positions must be finite".into()));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("grid positions must be strictly increasing".into()));
        }
        Ok(Grid(positions))
    }

    /// The regular grid `0, 1, …, n-1`.
    pub fn regular(n: usize) -> Self {
        Grid((0..n).map(|i| i as f64).collect())
    }

    pub fn positions(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn from_sorted_unchecked(positions: Vec<f64>) -> Self {
        Grid(positions)
    }
}

/// How the `overlap_ms` of a [`WindowSpec`] is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    /// Consecutive windows share `overlap_ms`; the hop is `window - overlap`.
    #[default]
    Shared,
    /// `overlap_ms` is the hop between window starts.
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window_ms: f64,
    pub overlap_ms: f64,
    #[serde(default)]
    pub mode: OverlapMode,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { window_ms: 250.0, overlap_ms: 100.0, mode: OverlapMode::Shared }
    }
}

impl WindowSpec {
    pub fn new(window_ms: f64, overlap_ms: f64) -> Result<Self> {
        let w = WindowSpec { window_ms, overlap_ms, mode: OverlapMode::Shared };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_ms > 0.0) || !self.window_ms.is_finite() {
            return Err(Error::InvalidWindow(format!("window_ms {} must be positive", self.window_ms)));
        }
        if !(self.overlap_ms >= 0.0) || self.overlap_ms >= self.window_ms {
            return Err(Error::InvalidWindow(format!("overlap_ms {} must lie in [0, window_ms)", self.overlap_ms)));
        }
        if self.mode == OverlapMode::Step && self.overlap_ms == 0.0 {
            return Err(Error::InvalidWindow("step mode needs a positive hop".into()));
        }
        Ok(())
    }

    /// Window length and hop, in samples, at `fs`.
    pub fn in_samples(&self, fs: f64) -> Result<(usize, usize)> {
        self.validate()?;
        let win = (self.window_ms * fs / 1000.0).round() as usize;
        let hop_ms = match self.mode {
            OverlapMode::Shared => self.window_ms - self.overlap_ms,
            OverlapMode::Step => self.overlap_ms,
        };
        let step = (hop_ms * fs / 1000.0).round() as usize;
        if win == 0 || step == 0 {
            return Err(Error::InvalidWindow(format!(
                "window ({win}) and hop ({step}) must each span at least one sample at {fs} Hz"
            )));
        }
        Ok((win, step))
    }

    /// Sample ranges of every complete window over a signal of `len` samples.
    pub fn ranges(&self, len: usize, fs: f64) -> Result<Vec<Range<usize>>> {
        let (win, step) = self.in_samples(fs)?;
        if win > len {
            return Err(Error::EmptyWindow { window: win, len });
        }
        Ok((0..=(len - win) / step).map(|k| k * step..k * step + win).collect())
    }
}

/// Splits `s` into complete analysis windows; a trailing partial window is
/// dropped. Provenance tags are copied onto every window.
pub fn segment(s: &Signal, w: &WindowSpec) -> Result<Vec<Signal>> {
    let ranges = w.ranges(s.len(), s.sample_rate_hz)?;
    Ok(ranges
        .into_iter()
        .map(|r| s.with_samples(s.samples.iter().map(|ch| ch[r.clone()].to_vec()).collect()))
        .collect())
}

/// One labeled recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub signal: Signal,
    pub class_label: String,
    pub trial_id: String,
    pub subject_id: String,
}

impl Record {
    /// Builds a record from a signal carrying class and trial tags.
    pub fn from_tagged(signal: Signal) -> Result<Self> {
        let class_label =
            signal.class_label.clone().ok_or_else(|| Error::InvalidSignal("record has no class label".into()))?;
        let trial_id = signal.trial_id.clone().ok_or_else(|| Error::InvalidSignal("record has no trial id".into()))?;
        let subject_id = signal.subject_id.clone().unwrap_or_default();
        Ok(Record { signal, class_label, trial_id, subject_id })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<Record>,
}

impl LabeledDataset {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        for r in &records {
            if r.trial_id.is_empty() {
                return Err(Error::InvalidSignal("every record needs a trial id".into()));
            }
            validate_signal(&r.signal).map_err(|v| Error::InvalidSignal(v.to_string()))?;
        }
        Ok(LabeledDataset { records })
    }

    pub fn classes(&self) -> Vec<String> {
        self.records.iter().map(|r| r.class_label.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn trials(&self) -> Vec<String> {
        self.records.iter().map(|r| r.trial_id.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Applies `f` to every signal, keeping labels.
    pub fn map_signals<F>(&self, f: F) -> Result<LabeledDataset>
    where
        F: Fn(&Signal) -> Result<Signal> + Sync,
    {
        use rayon::prelude::*;
        let records = self
            .records
            .par_iter()
            .map(|r| Ok(Record { signal: f(&r.signal)?, ..r.clone() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(len: usize, fs: f64) -> Signal {
        Signal::new(vec![(0..len).map(|i| i as f64).collect()], fs).unwrap().with_tags(
            Some("s1".into()),
            Some("t1".into()),
            Some("WF".into()),
        )
    }

    #[test]
    fn validates_good_signal() {
        let s = Signal::new(vec![vec![0.0; 10], vec![1.0; 10]], 2000.0).unwrap();
        assert_eq!(validate_signal(&s), Ok(()));
    }

    #[test]
    fn ragged_channels_rejected() {
        let mut s = Signal::new(vec![vec![0.0; 10], vec![1.0; 10]], 2000.0).unwrap();
        s.samples[1].pop();
        assert!(matches!(validate_signal(&s), Err(Violation::RaggedChannels { channel: 1, .. })));
    }

    #[test]
    fn nan_rejected() {
        let mut s = Signal::new(vec![vec![0.0; 10]], 2000.0).unwrap();
        s.samples[0][3] = f64::NAN;
        assert_eq!(validate_signal(&s), Err(Violation::NonFiniteSample { channel: 0, index: 3 }));
        assert!(Signal::new(vec![vec![f64::INFINITY]], 1.0).is_err());
    }

    #[test]
    fn segment_default_windows() {
        let s = sig(1100, 2000.0);
        let w = segment(&s, &WindowSpec::default()).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w[0].samples[0][0], 0.0);
        assert_eq!(w[1].samples[0][0], 300.0);
        assert_eq!(w[2].samples[0][0], 600.0);
        assert!(w.iter().all(|x| x.len() == 500));
        assert_eq!(w[2].samples[0][499], 1099.0);
        assert!(w.iter().all(|x| x.class_label.as_deref() == Some("WF") && x.trial_id.as_deref() == Some("t1")));
    }

    #[test]
    fn segment_exact_and_too_short() {
        assert_eq!(segment(&sig(500, 2000.0), &WindowSpec::default()).unwrap().len(), 1);
        assert!(matches!(
            segment(&sig(499, 2000.0), &WindowSpec::default()),
            Err(Error::EmptyWindow { window: 500, len: 499 })
        ));
    }

    #[test]
    fn step_mode_hop() {
        let w = WindowSpec { mode: OverlapMode::Step, ..WindowSpec::default() };
        assert_eq!(w.in_samples(2000.0).unwrap(), (500, 200));
    }

    #[test]
    fn overlap_must_be_below_window() {
        assert!(WindowSpec::new(250.0, 250.0).is_err());
        assert!(WindowSpec::new(250.0, -1.0).is_err());
        assert!(WindowSpec::new(250.0, 0.0).is_ok());
    }

    #[test]
    fn grid_must_increase() {
        assert!(Grid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.5, 3.0]).is_ok());
    }

    #[test]
    fn dataset_needs_trial_ids() {
        let s = sig(10, 100.0);
        let r = Record { signal: s, class_label: "a".into(), trial_id: String::new(), subject_id: "s".into() };
        assert!(LabeledDataset::new(vec![r]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn window_count_and_overlap(len in 1usize..4000, win_ms in 5.0f64..300.0, frac in 0.0f64..0.95) {
                let w = WindowSpec::new(win_ms, win_ms * frac).unwrap();
                let fs = 1000.0;
                let Ok((win, step)) = w.in_samples(fs) else { return Ok(()) };
                match w.ranges(len, fs) {
                    Ok(r) => {
                        prop_assert!(len >= win);
                        prop_assert_eq!(r.len(), (len - win) / step + 1);
                        for pair in r.windows(2) {
                            let shared = pair[0].end.saturating_sub(pair[1].start);
                            prop_assert_eq!(shared, win.saturating_sub(step));
                        }
                    }
                    Err(_) => prop_assert!(len < win),
                }
            }
        }
    }
}
