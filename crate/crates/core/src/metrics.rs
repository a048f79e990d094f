//! Confusion matrices, macro-averaged classification metrics, SNR and RMS
//! energy maps.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::rms;
use crate::signal::{Signal, WindowSpec};

/// Rows are true classes, columns predicted classes, both in `classes` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix { classes, counts: vec![vec![0; n]; n] }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = classes.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::LengthMismatch(format!("confusion matrix must be {n}x{n}")));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Adds another matrix over the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.classes != self.classes {
            return Err(Error::LengthMismatch("confusion matrices use different class orders".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "true\\pred,{}", self.classes.join(","))?;
        for (c, row) in self.classes.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{c},{}", cells.join(","))?;
        }
        Ok(())
    }
}

pub fn confusion<S: AsRef<str>>(y_true: &[S], y_pred: &[S], class_order: &[String]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(format!("{} true labels, {} predictions", y_true.len(), y_pred.len())));
    }
    let index = |l: &str| class_order.iter().position(|c| c == l).ok_or_else(|| Error::UnknownLabel(l.to_string()));
    let mut cm = ConfusionMatrix::zeros(class_order.to_vec());
    for (t, p) in y_true.iter().zip(y_pred) {
        cm.counts[index(t.as_ref())?][index(p.as_ref())?] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub beta: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest per-class rates averaged over classes. The F-score combines
/// the averaged precision and recall; empty denominators count as 0.
pub fn macro_metrics(cm: &ConfusionMatrix, beta: f64) -> Result<MacroMetrics> {
    let n = cm.classes.len();
    let total = cm.total();
    if n == 0 || total == 0 {
        return Err(Error::NoData);
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidConfig(format!("beta {beta} must be positive")));
    }
    let (mut acc, mut prec, mut rec) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let tp = cm.counts[i][i];
        let fn_ = cm.counts[i].iter().sum::<u64>() - tp;
        let fp = (0..n).map(|r| cm.counts[r][i]).sum::<u64>() - tp;
        let tn = total - tp - fn_ - fp;
        acc += ratio(tp + tn, total);
        prec += ratio(tp, tp + fp);
        rec += ratio(tp, tp + fn_);
    }
    let (p, r) = (prec / n as f64, rec / n as f64);
    let b2 = beta * beta;
    let fscore = if p + r == 0.0 { 0.0 } else { (1.0 + b2) * p * r / (b2 * p + r) };
    Ok(MacroMetrics { accuracy: acc / n as f64, precision: p, recall: r, fscore, beta })
}

/// Reported in place of +∞ when the noise power is exactly zero.
pub const SNR_CAP_DB: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrResult {
    pub snr_db: f64,
    pub p_signal: f64,
    pub p_noise: f64,
}

pub fn snr_db(p_signal: f64, p_noise: f64) -> Result<SnrResult> {
    if !(p_noise > 0.0) || !(p_signal >= 0.0) {
        return Err(Error::NoData);
    }
    Ok(SnrResult { snr_db: 10.0 * (p_signal / p_noise).log10(), p_signal, p_noise })
}

/// Like [`snr_db`], but a zero noise power yields [`SNR_CAP_DB`].
pub fn snr_db_capped(p_signal: f64, p_noise: f64) -> SnrResult {
    match snr_db(p_signal, p_noise) {
        Ok(r) => SnrResult { snr_db: r.snr_db.min(SNR_CAP_DB), ..r },
        Err(_) => SnrResult { snr_db: SNR_CAP_DB, p_signal, p_noise },
    }
}

fn mean_power<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, usize) {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (if n == 0 { 0.0 } else { s / n as f64 }, n)
}

/// Mean power of the samples marked active and of the rest, with `active[t]`
/// applying to every channel.
pub fn masked_powers(s: &Signal, active: &[bool]) -> Result<(f64, f64)> {
    if active.len() != s.len() {
        return Err(Error::LengthMismatch(format!("mask of {} for {} samples", active.len(), s.len())));
    }
    let pick = |want: bool| {
        mean_power(
            s.samples.iter().flat_map(|ch| ch.iter().zip(active).filter(move |(_, &a)| a == want).map(|(v, _)| v)),
        )
    };
    let (ps, na) = pick(true);
    let (pn, nr) = pick(false);
    if na == 0 || nr == 0 {
        return Err(Error::NoData);
    }
    Ok((ps, pn))
}

/// Active-over-rest power ratio in dB.
pub fn snr_from_signal(s: &Signal, active: &[bool]) -> Result<SnrResult> {
    let (ps, pn) = masked_powers(s, active)?;
    snr_db(ps, pn)
}

/// SNR of an estimate against a known clean reference:
/// `P(clean) / P(estimate − clean)`, capped at [`SNR_CAP_DB`].
pub fn snr_vs_reference(clean: &Signal, estimate: &Signal) -> Result<SnrResult> {
    if clean.channels() != estimate.channels() || clean.len() != estimate.len() {
        return Err(Error::LengthMismatch("reference and estimate differ in shape".into()));
    }
    let (ps, n) = mean_power(clean.samples.iter().flatten());
    if n == 0 {
        return Err(Error::NoData);
    }
    let err: Vec<f64> =
        clean.samples.iter().flatten().zip(estimate.samples.iter().flatten()).map(|(c, e)| e - c).collect();
    let (pn, _) = mean_power(err.iter());
    Ok(snr_db_capped(ps, pn))
}

/// RMS per window (rows) and channel (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyMap {
    pub channel_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn rms_energy_map(s: &Signal, w: &WindowSpec) -> Result<EnergyMap> {
    let ranges = w.ranges(s.len(), s.sample_rate_hz)?;
    let rows = ranges
        .into_iter()
        .map(|r| s.samples.iter().map(|ch| rms(&ch[r.clone()])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyMap { channel_ids: s.channel_ids.clone(), rows })
}

impl EnergyMap {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "window,{}", self.channel_ids.join(","))?;
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
            writeln!(w, "{i},{}", cells.join(","))?;
        }
        Ok(())
    }
}
