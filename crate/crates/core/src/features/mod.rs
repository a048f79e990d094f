//! Windowed feature extraction.
//!
//! An extractor maps one channel of one window to a fixed number of values.
//! [`extract`] segments every record, runs the extractor channel by channel
//! and concatenates the results into a row of a [`FeatureTable`].

mod time_domain;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use time_domain::{ar5, burg, hjorth, rms, td4, tdpsd, LOG_FLOOR, TDPSD_LAMBDA};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::signal::{LabeledDataset, WindowSpec};

/// Per-channel, per-window feature computation.
pub trait FeatureExtractor: Send + Sync {
    fn name(&self) -> &str;
    /// Names of the values produced for one channel.
    fn value_names(&self) -> Vec<String>;
    fn extract(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn width(&self) -> usize {
        self.value_names().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Amplitude deadzone for the ZC and SSC counts.
    #[serde(default)]
    pub td4_deadzone: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureSetId {
    Feat1,
    Feat2,
    Feat3,
    Feat4,
    Plugin(String),
}

impl FeatureSetId {
    pub const BUILTIN: [FeatureSetId; 4] =
        [FeatureSetId::Feat1, FeatureSetId::Feat2, FeatureSetId::Feat3, FeatureSetId::Feat4];
}

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSetId::Feat1 => f.write_str("feat1"),
            FeatureSetId::Feat2 => f.write_str("feat2"),
            FeatureSetId::Feat3 => f.write_str("feat3"),
            FeatureSetId::Feat4 => f.write_str("feat4"),
            FeatureSetId::Plugin(p) => write!(f, "plugin:{p}"),
        }
    }
}

impl FromStr for FeatureSetId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feat1" => Ok(FeatureSetId::Feat1),
            "feat2" => Ok(FeatureSetId::Feat2),
            "feat3" => Ok(FeatureSetId::Feat3),
            "feat4" => Ok(FeatureSetId::Feat4),
            _ => match s.strip_prefix("plugin:") {
                Some(p) if !p.is_empty() => Ok(FeatureSetId::Plugin(p.to_string())),
                _ => Err(Error::Unknown { kind: "feature set", name: s.into() }),
            },
        }
    }
}

impl TryFrom<String> for FeatureSetId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureSetId> for String {
    fn from(f: FeatureSetId) -> String {
        f.to_string()
    }
}

struct Simple {
    name: &'static str,
    names: &'static [&'static str],
    f: Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>,
}

impl FeatureExtractor for Simple {
    fn name(&self) -> &str {
        self.name
    }

    fn value_names(&self) -> Vec<String> {
        self.names.iter().map(|s| s.to_string()).collect()
    }

    fn extract(&self, x: &[f64]) -> Result<Vec<f64>> {
        (self.f)(x)
    }
}

fn simple<F>(name: &'static str, names: &'static [&'static str], f: F) -> Box<dyn FeatureExtractor>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
{
    Box::new(Simple { name, names, f: Box::new(f) })
}

/// Built-in feature sets plus the `plugin:hjorth` example plug-in. Further
/// plug-ins are added with [`Registry::register`] under `plugin:<name>`.
pub fn feature_sets() -> Registry<dyn FeatureExtractor, FeatureConfig> {
    let mut r: Registry<dyn FeatureExtractor, FeatureConfig> = Registry::new("feature set");
    r.register("feat1", |_: &FeatureConfig| Ok(simple("feat1", &["rms"], |x| Ok(vec![rms(x)?]))));
    r.register("feat2", |_: &FeatureConfig| Ok(simple("feat2", &["ar1", "ar2", "ar3", "ar4", "ar5"], ar5)));
    r.register("feat3", |c: &FeatureConfig| {
        let eps = c.td4_deadzone;
        if !(eps >= 0.0) {
            return Err(Error::InvalidConfig(format!("td4 deadzone {eps} must be nonnegative")));
        }
        Ok(simple("feat3", &["mav", "zc", "wl", "ssc"], move |x| Ok(td4(x, eps)?.to_vec())))
    });
    r.register("feat4", |_: &FeatureConfig| {
        Ok(simple("feat4", &["psd1", "psd2", "psd3", "psd4", "psd5", "psd6"], |x| Ok(tdpsd(x)?.to_vec())))
    });
    r.register("plugin:hjorth", |_: &FeatureConfig| {
        Ok(simple("plugin:hjorth", &["activity", "mobility", "complexity"], |x| Ok(hjorth(x)?.to_vec())))
    });
    r
}

/// Feature rows with their class labels and trial groups.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub groups: Vec<String>,
    pub feature_names: Vec<String>,
}

impl FeatureTable {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<String>,
        groups: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let t = FeatureTable { rows, labels, groups, feature_names };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.rows.len() || self.groups.len() != self.rows.len() {
            return Err(Error::LengthMismatch(format!(
                "{} rows, {} labels, {} groups",
                self.rows.len(),
                self.labels.len(),
                self.groups.len()
            )));
        }
        let w = self.width();
        if let Some(r) = self.rows.iter().find(|r| r.len() != w) {
            return Err(Error::WidthMismatch { expected: w, got: r.len() });
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        let mut c = self.labels.clone();
        c.sort();
        c.dedup();
        c
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> FeatureTable {
        FeatureTable {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Header of feature names then `label,group`; one line per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = self.feature_names.clone();
        header.extend(["label".to_string(), "group".to_string()]);
        writeln!(w, "{}", header.join(","))?;
        for ((row, label), group) in self.rows.iter().zip(&self.labels).zip(&self.groups) {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{},{},{}", vals.join(","), csv_field(label)?, csv_field(group)?)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty feature table".into()))??;
        let cols: Vec<&str> = header.trim_end().split(',').collect();
        if cols.len() < 2 || cols[cols.len() - 2..] != ["label", "group"] {
            return Err(Error::Format("feature table header must end with label,group".into()));
        }
        let names: Vec<String> = cols[..cols.len() - 2].iter().map(|s| s.to_string()).collect();
        let mut t = FeatureTable { feature_names: names, ..Default::default() };
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.trim_end().split(',').collect();
            if cells.len() != cols.len() {
                return Err(Error::Format(format!("line {}: {} cells, expected {}", i + 2, cells.len(), cols.len())));
            }
            let (vals, tail) = cells.split_at(cols.len() - 2);
            let row = vals
                .iter()
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| Error::Format(format!("line {}: bad number `{c}`", i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            t.rows.push(row);
            t.labels.push(tail[0].to_string());
            t.groups.push(tail[1].to_string());
        }
        Ok(t)
    }
}

fn csv_field(s: &str) -> Result<&str> {
    if s.contains([',', '\n', '"']) {
        return Err(Error::Format(format!("`{s}` cannot be written as a bare CSV field")));
    }
    Ok(s)
}

/// Feature table of `data` under feature set `set` and windowing `w`.
pub fn extract(data: &LabeledDataset, set: &FeatureSetId, w: &WindowSpec) -> Result<FeatureTable> {
    extract_with(data, &*feature_sets().create(&set.to_string(), &FeatureConfig::default())?, w)
}

/// As [`extract`], with an explicit extractor.
pub fn extract_with(data: &LabeledDataset, fx: &dyn FeatureExtractor, w: &WindowSpec) -> Result<FeatureTable> {
    let first = data.records.first().ok_or(Error::NoData)?;
    let channels = first.signal.channels();
    let per = fx.value_names();
    let feature_names =
        first.signal.channel_ids.iter().flat_map(|ch| per.iter().map(move |v| format!("{ch}_{v}"))).collect();

    let per_record = data
        .records
        .par_iter()
        .map(|rec| {
            if rec.signal.channels() != channels {
                return Err(Error::WidthMismatch { expected: channels, got: rec.signal.channels() });
            }
            let ranges = w.ranges(rec.signal.len(), rec.signal.sample_rate_hz)?;
            ranges
                .into_iter()
                .map(|r| {
                    let mut row = Vec::with_capacity(channels * per.len());
                    for ch in &rec.signal.samples {
                        row.extend(fx.extract(&ch[r.clone()])?);
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFiniteFeature);
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = FeatureTable { feature_names, ..Default::default() };
    for (rec, rows) in data.records.iter().zip(per_record) {
        t.labels.extend(std::iter::repeat_n(rec.class_label.clone(), rows.len()));
        t.groups.extend(std::iter::repeat_n(rec.trial_id.clone(), rows.len()));
        t.rows.extend(rows);
    }
    Ok(t)
}
