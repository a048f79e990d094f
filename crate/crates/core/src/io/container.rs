//! Coefficient dump written by `decompose` and read by `reconstruct`.
//!
//! Same framing as the signal bundle (magic `MRDPIDEC`), with the lifting
//! configuration in the manifest and `f64` little-endian coefficients: per
//! channel, the coarse coefficients followed by each detail level from
//! coarse to fine.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bundle::{read_header, write_header};
use crate::error::{Error, Result};
use crate::lifting::{Decomposition, LiftingConfig, LiftingPlan};
use crate::signal::Signal;

pub const DECOMPOSITION_MAGIC: &[u8; 8] = b"MRDPIDEC";
pub const DECOMPOSITION_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DecManifest {
    format_version: u32,
    dtype: String,
    sample_rate_hz: f64,
    samples_per_channel: usize,
    channel_ids: Vec<String>,
    subject_id: Option<String>,
    trial_id: Option<String>,
    class_label: Option<String>,
    config: LiftingConfig,
    coarse_len: usize,
    detail_lens: Vec<usize>,
}

/// Per-channel decompositions of one signal on the regular grid, with the
/// signal's metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSignal {
    /// Metadata carrier; its samples are empty.
    pub meta: Signal,
    pub samples_per_channel: usize,
    pub channels: Vec<Decomposition>,
}

impl DecomposedSignal {
    pub fn new(s: &Signal, channels: Vec<Decomposition>) -> Self {
        let meta = Signal { samples: Vec::new(), ..s.clone() };
        DecomposedSignal { meta, samples_per_channel: s.len(), channels }
    }

    /// The signal rebuilt from the given per-channel samples.
    pub fn to_signal(&self, samples: Vec<Vec<f64>>) -> Signal {
        Signal { samples, ..self.meta.clone() }
    }
}

pub fn encode_decomposition(d: &DecomposedSignal) -> Result<Vec<u8>> {
    let first = d.channels.first().ok_or(Error::NoData)?;
    let manifest = DecManifest {
        format_version: DECOMPOSITION_VERSION,
        dtype: "f64le".into(),
        sample_rate_hz: d.meta.sample_rate_hz,
        samples_per_channel: d.samples_per_channel,
        channel_ids: d.meta.channel_ids.clone(),
        subject_id: d.meta.subject_id.clone(),
        trial_id: d.meta.trial_id.clone(),
        class_label: d.meta.class_label.clone(),
        config: first.config,
        coarse_len: first.coarse.len(),
        detail_lens: first.details.iter().map(|l| l.coeffs.len()).collect(),
    };
    let mut out = Vec::new();
    write_header(&mut out, DECOMPOSITION_MAGIC, &manifest)?;
    for ch in &d.channels {
        if ch.coarse.len() != manifest.coarse_len || ch.config != manifest.config {
            return Err(Error::CorruptDecomposition("channels differ in shape or configuration".into()));
        }
        for v in ch.coarse.iter().chain(ch.details.iter().flat_map(|l| &l.coeffs)) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_decomposition(bytes: &[u8]) -> Result<DecomposedSignal> {
    let (value, payload) = read_header(bytes, DECOMPOSITION_MAGIC)?;
    let m: DecManifest =
        serde_json::from_value(value).map_err(|e| Error::Format(format!("malformed manifest: {e}")))?;
    if m.format_version != DECOMPOSITION_VERSION || m.dtype != "f64le" {
        return Err(Error::Format(format!("unsupported decomposition version {} / {}", m.format_version, m.dtype)));
    }
    // The grid layout follows from the length and configuration alone.
    let plan = LiftingPlan::regular(m.samples_per_channel, &m.config)?;
    let template = plan.forward(&vec![0.0; m.samples_per_channel])?;
    let lens: Vec<usize> = template.details.iter().map(|l| l.coeffs.len()).collect();
    if template.coarse.len() != m.coarse_len || lens != m.detail_lens {
        return Err(Error::CorruptDecomposition("manifest lengths disagree with the configuration".into()));
    }
    let per_channel = m.samples_per_channel;
    let n_ch = m.channel_ids.len();
    if payload.len() != 8 * per_channel * n_ch {
        return Err(Error::LengthMismatch(format!(
            "payload has {} bytes, manifest implies {}",
            payload.len(),
            8 * per_channel * n_ch
        )));
    }
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let channels = values
        .chunks_exact(per_channel)
        .map(|chunk| {
            let mut d = template.clone();
            let (coarse, mut rest) = chunk.split_at(m.coarse_len);
            d.coarse = coarse.to_vec();
            for l in d.details.iter_mut() {
                let (head, tail) = rest.split_at(l.coeffs.len());
                l.coeffs = head.to_vec();
                rest = tail;
            }
            d
        })
        .collect();
    let meta = Signal {
        samples: Vec::new(),
        sample_rate_hz: m.sample_rate_hz,
        channel_ids: m.channel_ids,
        subject_id: m.subject_id,
        trial_id: m.trial_id,
        class_label: m.class_label,
    };
    Ok(DecomposedSignal { meta, samples_per_channel: per_channel, channels })
}

pub fn write_decomposition(d: &DecomposedSignal, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_decomposition(d)?)?;
    Ok(())
}

pub fn read_decomposition(path: impl AsRef<Path>) -> Result<DecomposedSignal> {
    decode_decomposition(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{forward_multichannel, inverse_multichannel, UpdateMode};

    #[test]
    fn round_trip_reconstructs() {
        let samples = (0..2).map(|c| (0..301).map(|i| ((i * (c + 2)) as f64 * 0.13).cos()).collect()).collect();
        let s = Signal::new(samples, 1000.0).unwrap().with_tags(None, Some("t".into()), None);
        let cfg =
            LiftingConfig { levels: 4, update: UpdateMode::MomentPreserving, standardize: true, ..Default::default() };
        let d = DecomposedSignal::new(&s, forward_multichannel(&s, &cfg).unwrap());
        let back = decode_decomposition(&encode_decomposition(&d).unwrap()).unwrap();
        assert_eq!(back, d);
        let x = inverse_multichannel(&back.channels).unwrap();
        for (a, b) in x.iter().flatten().zip(s.samples.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_rejected() {
        let s = Signal::new(vec![vec![1.0, 2.0, 0.5, 4.0, 3.0, 1.0, 0.0, 2.0]], 10.0).unwrap();
        let d = DecomposedSignal::new(&s, forward_multichannel(&s, &LiftingConfig::default()).unwrap());
        let bytes = encode_decomposition(&d).unwrap();
        assert!(decode_decomposition(&bytes[..bytes.len() - 8]).is_err());
    }
}
