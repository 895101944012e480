//! Series ingestion, normalization and synthetic data.

mod csv_io;
mod normalize;
mod synth;

pub use csv_io::{load_csv, write_csv, ColumnSpec, CsvOptions, LoadedSeries};
pub use normalize::{normalize, NormalizationMode, NormalizationStats, StreamNormalizer};
pub use synth::generate_synthetic;
