//! Network documents and tabular datasets.

mod dataset;
mod network;

pub use dataset::{infer_variables, parse_dataset, Dataset, DatasetError};
pub use network::{
    parse_network, parse_structure, serialize_network, serialize_structure, CptBlock, FormatError,
    NetworkDocument, Notes, FORMAT_VERSION, LOAD_ROW_SUM_TOLERANCE,
};
