//! File formats, CSV import, dataset directories and the synthetic
//! generator.

pub mod bundle;
pub mod container;
pub mod csv;
pub mod dataset;
pub mod synth;

pub use bundle::{decode_bundle, encode_bundle, read_bundle, write_bundle, Manifest};
pub use container::{read_decomposition, write_decomposition, DecomposedSignal};
pub use csv::{import_csv, parse_csv, Tags};
pub use dataset::{read_dataset, write_dataset};
pub use synth::{synth_dataset, SynthDataset, SynthSpec};
