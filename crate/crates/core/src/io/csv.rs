use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Provenance tags attached to an imported signal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tags {
    pub subject_id: Option<String>,
    pub trial_id: Option<String>,
    pub class_label: Option<String>,
}

/// Reads a rectangular CSV with one column per channel and one row per
/// sample. A first line that does not parse as numbers is taken as a header
/// and supplies the channel ids.
pub fn parse_csv<R: BufRead>(r: R, fs: f64, tags: Tags) -> Result<Signal> {
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if i == 0 => {
                header = Some(cells.iter().map(|c| c.to_string()).collect());
                continue;
            }
            Err(_) => {
                let bad = cells.iter().find(|c| c.parse::<f64>().is_err()).unwrap();
                return Err(Error::Format(format!("line {}: non-numeric cell `{bad}`", i + 1)));
            }
        };
        let width = header.as_ref().map(Vec::len).or(columns.first().map(|_| columns.len()));
        if let Some(w) = width {
            if row.len() != w {
                return Err(Error::Format(format!("line {}: {} cells, expected {w}", i + 1, row.len())));
            }
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); row.len()];
        }
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    if columns.is_empty() {
        return Err(Error::NoData);
    }
    let mut s = Signal::new(columns, fs)?.with_tags(tags.subject_id, tags.trial_id, tags.class_label);
    if let Some(h) = header {
        s.channel_ids = h;
    }
    Ok(s)
}

pub fn import_csv(path: impl AsRef<Path>, fs: f64, tags: Tags) -> Result<Signal> {
    let f = std::fs::File::open(path)?;
    parse_csv(std::io::BufReader::new(f), fs, tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_columns() {
        let text: String = (0..100).map(|i| format!("{i},{},{}\n", -i, i * 2)).collect();
        let s = parse_csv(text.as_bytes(), 1000.0, Tags::default()).unwrap();
        assert_eq!((s.channels(), s.len()), (3, 100));
        assert_eq!(s.samples[1][5], -5.0);
    }

    #[test]
    fn header_detected() {
        let s = parse_csv("fds,edc\n1,2\n3,4\n".as_bytes(), 500.0, Tags::default()).unwrap();
        assert_eq!(s.channel_ids, vec!["fds", "edc"]);
        assert_eq!(s.samples, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
    }

    #[test]
    fn ragged_and_non_numeric() {
        assert!(parse_csv("1,2\n3\n".as_bytes(), 1.0, Tags::default()).is_err());
        assert!(parse_csv("a,b\n1,2,3\n".as_bytes(), 1.0, Tags::default()).is_err());
        let e = parse_csv("1,2\n3,x\n".as_bytes(), 1.0, Tags::default()).unwrap_err();
        assert!(e.to_string().contains("`x`"));
        assert!(parse_csv("".as_bytes(), 1.0, Tags::default()).is_err());
    }
}
