//! Single-file signal container.
//!
//! Layout: the 8-byte magic `MRDPIBND`, a little-endian `u32` manifest length,
//! the JSON manifest, then the samples as little-endian `f32`, interleaved by
//! channel (`t0c0 t0c1 … t1c0 …`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{validate_signal, Signal};

pub const BUNDLE_MAGIC: &[u8; 8] = b"MRDPIBND";
pub const BUNDLE_VERSION: u32 = 1;

const REQUIRED: [&str; 8] = [
    "format_version",
    "sample_rate_hz",
    "channels",
    "samples_per_channel",
    "dtype",
    "subject_id",
    "trial_id",
    "class_label",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub sample_rate_hz: f64,
    pub channels: usize,
    pub samples_per_channel: usize,
    pub dtype: String,
    pub subject_id: Option<String>,
    pub trial_id: Option<String>,
    pub class_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_ids: Option<Vec<String>>,
}

/// Splits a container into its parsed JSON header and payload.
pub(crate) fn read_header<'a>(bytes: &'a [u8], magic: &[u8; 8]) -> Result<(serde_json::Value, &'a [u8])> {
    if bytes.len() < 12 || &bytes[..8] != magic {
        return Err(Error::Format(format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() < len {
        return Err(Error::Format("manifest is truncated".into()));
    }
    let value: serde_json::Value =
        serde_json::from_slice(&body[..len]).map_err(|e| Error::Format(format!("malformed manifest: {e}")))?;
    Ok((value, &body[len..]))
}

pub(crate) fn write_header(out: &mut Vec<u8>, magic: &[u8; 8], manifest: &impl Serialize) -> Result<()> {
    let json = serde_json::to_vec(manifest)?;
    out.extend_from_slice(magic);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    Ok(())
}

pub fn encode_bundle(s: &Signal) -> Result<Vec<u8>> {
    validate_signal(s).map_err(|v| Error::InvalidSignal(v.to_string()))?;
    let default_ids: Vec<String> = (0..s.channels()).map(|c| format!("ch{c}")).collect();
    let manifest = Manifest {
        format_version: BUNDLE_VERSION,
        sample_rate_hz: s.sample_rate_hz,
        channels: s.channels(),
        samples_per_channel: s.len(),
        dtype: "f32le".into(),
        subject_id: s.subject_id.clone(),
        trial_id: s.trial_id.clone(),
        class_label: s.class_label.clone(),
        channel_ids: (s.channel_ids != default_ids).then(|| s.channel_ids.clone()),
    };
    let mut out = Vec::with_capacity(64 + 4 * s.channels() * s.len());
    write_header(&mut out, BUNDLE_MAGIC, &manifest)?;
    for t in 0..s.len() {
        for ch in &s.samples {
            out.extend_from_slice(&(ch[t] as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_bundle(bytes: &[u8]) -> Result<Signal> {
    let (value, payload) = read_header(bytes, BUNDLE_MAGIC)?;
    let obj = value.as_object().ok_or_else(|| Error::Format("manifest is not an object".into()))?;
    if let Some(missing) = REQUIRED.iter().find(|k| !obj.contains_key(**k)) {
        return Err(Error::Format(format!("manifest lacks `{missing}`")));
    }
    let m: Manifest = serde_json::from_value(value).map_err(|e| Error::Format(format!("malformed manifest: {e}")))?;
    if m.format_version != BUNDLE_VERSION {
        return Err(Error::Format(format!("unknown bundle format_version {}", m.format_version)));
    }
    if m.dtype != "f32le" {
        return Err(Error::Format(format!("unsupported dtype `{}`", m.dtype)));
    }
    let expected = 4 * m.channels * m.samples_per_channel;
    if payload.len() != expected {
        return Err(Error::LengthMismatch(format!("payload has {} bytes, manifest implies {expected}", payload.len())));
    }
    let mut samples = vec![Vec::with_capacity(m.samples_per_channel); m.channels];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        samples[i % m.channels].push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
    }
    let mut s = Signal::new(samples, m.sample_rate_hz)?.with_tags(m.subject_id, m.trial_id, m.class_label);
    if let Some(ids) = m.channel_ids {
        if ids.len() != s.channels() {
            return Err(Error::Format(format!("{} channel ids for {} channels", ids.len(), s.channels())));
        }
        s.channel_ids = ids;
    }
    Ok(s)
}

pub fn write_bundle(s: &Signal, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_bundle(s)?)?;
    Ok(())
}

pub fn read_bundle(path: impl AsRef<Path>) -> Result<Signal> {
    decode_bundle(&fs::read(path)?)
}
