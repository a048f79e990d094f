use std::fs;
use std::path::{Path, PathBuf};

use super::bundle::{read_bundle, write_bundle};
use crate::error::{Error, Result};
use crate::signal::{LabeledDataset, Record, Signal};

pub const BUNDLE_EXT: &str = "bnd";
pub const CLEAN_DIR: &str = "clean";

fn bundles_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == BUNDLE_EXT))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Writes one bundle per record, plus the clean references under `clean/`
/// with matching file names.
pub fn write_dataset(dir: impl AsRef<Path>, data: &LabeledDataset, clean: Option<&[Signal]>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    if let Some(c) = clean {
        if c.len() != data.len() {
            return Err(Error::LengthMismatch(format!("{} clean references for {} records", c.len(), data.len())));
        }
        fs::create_dir_all(dir.join(CLEAN_DIR))?;
    }
    for (i, rec) in data.records.iter().enumerate() {
        let name = format!("{i:04}_{}_{}.{BUNDLE_EXT}", rec.class_label, rec.trial_id);
        write_bundle(&rec.signal, dir.join(&name))?;
        if let Some(c) = clean {
            write_bundle(&c[i], dir.join(CLEAN_DIR).join(&name))?;
        }
    }
    Ok(())
}

/// Records from every `*.bnd` file in `dir`, in file-name order. Clean
/// references are returned when `clean/` holds a file for every record.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<(LabeledDataset, Option<Vec<Signal>>)> {
    let dir = dir.as_ref();
    let paths = bundles_in(dir)?;
    if paths.is_empty() {
        return Err(Error::NoData);
    }
    let records = paths
        .iter()
        .map(|p| Record::from_tagged(read_bundle(p)?).map_err(|e| Error::Format(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>>>()?;
    let clean_dir = dir.join(CLEAN_DIR);
    let clean = if clean_dir.is_dir() {
        let refs: Vec<PathBuf> = paths.iter().map(|p| clean_dir.join(p.file_name().unwrap())).collect();
        if refs.iter().all(|p| p.is_file()) {
            Some(refs.iter().map(read_bundle).collect::<Result<Vec<_>>>()?)
        } else {
            None
        }
    } else {
        None
    };
    Ok((LabeledDataset::new(records)?, clean))
}
