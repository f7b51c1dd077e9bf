//! Discretized tabular data.
//!
//! CSV dialect: comma separated, a header row of variable ids, cells trimmed
//! and matched case-sensitively against declared state labels. Incomplete
//! records are rejected, not imputed. Row numbers in errors count data rows
//! from 1 (the header is row 0).

use std::collections::HashSet;

use thiserror::Error;

use crate::model::VariableSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}, column {column}: unknown state {value:?}")]
    UnknownState { row: usize, column: String, value: String },
    #[error("row {row}, column {column}: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: expected {expected} cells, found {found}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("csv: {0}")]
    Csv(String),
}

impl DatasetError {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetError::Header(_) => "HeaderError",
            DatasetError::UnknownState { .. } => "UnknownStateError",
            DatasetError::MissingValue { .. } => "MissingValueError",
            DatasetError::RowLength { .. } => "RowLengthError",
            DatasetError::Csv(_) => "CsvError",
        }
    }
}

/// Records over a fixed set of categorical columns, stored as state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    variables: Vec<VariableSpec>,
    cells: Vec<u16>,
}

impl Dataset {
    pub fn new(variables: Vec<VariableSpec>) -> Self {
        assert!(
            variables.iter().all(|v| v.cardinality() <= u16::MAX as usize),
            "state count exceeds u16"
        );
        Dataset {
            variables,
            cells: Vec::new(),
        }
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn width(&self) -> usize {
        self.variables.len()
    }

    pub fn len(&self) -> usize {
        if self.variables.is_empty() {
            0
        } else {
            self.cells.len() / self.variables.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column_index(&self, id: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.id == id)
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(VariableSpec::cardinality).collect()
    }

    pub fn record(&self, i: usize) -> &[u16] {
        let w = self.width();
        &self.cells[i * w..(i + 1) * w]
    }

    pub fn records(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        // width 0 never stores records
        self.cells.chunks(self.width().max(1))
    }

    /// Appends one record of state indices in column order.
    pub fn push(&mut self, record: &[u16]) {
        assert_eq!(record.len(), self.width(), "record width");
        for (v, &s) in self.variables.iter().zip(record) {
            assert!((s as usize) < v.cardinality(), "state index out of range for {}", v.id);
        }
        self.cells.extend_from_slice(record);
    }

    /// Appends one record given as state labels in column order.
    pub fn push_labels<S: AsRef<str>>(&mut self, labels: &[S]) -> Result<(), DatasetError> {
        let row = self.len() + 1;
        if labels.len() != self.width() {
            return Err(DatasetError::RowLength {
                row,
                expected: self.width(),
                found: labels.len(),
            });
        }
        let mut record = Vec::with_capacity(labels.len());
        for (v, label) in self.variables.iter().zip(labels) {
            let label = label.as_ref();
            let s = v.state_index(label).ok_or_else(|| DatasetError::UnknownState {
                row,
                column: v.id.clone(),
                value: label.to_string(),
            })?;
            record.push(s as u16);
        }
        self.cells.extend(record);
        Ok(())
    }

    /// Records at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut out = Dataset::new(self.variables.clone());
        out.cells.reserve(indices.len() * self.width());
        for &i in indices {
            out.cells.extend_from_slice(self.record(i));
        }
        out
    }

    /// Appends the records of `other`, which must have identical columns.
    pub fn extend_from(&mut self, other: &Dataset) {
        assert_eq!(self.variables, other.variables, "column mismatch");
        self.cells.extend_from_slice(&other.cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let ids: Vec<&str> = self.variables.iter().map(|v| v.id.as_str()).collect();
        out.push_str(&ids.join(","));
        out.push('\n');
        for rec in self.records() {
            let labels: Vec<&str> = rec
                .iter()
                .zip(&self.variables)
                .map(|(&s, v)| v.states[s as usize].as_str())
                .collect();
            out.push_str(&labels.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses a CSV whose header is a permutation of `variables`' ids. Columns
/// keep the header order.
pub fn parse_dataset(text: &str, variables: &[VariableSpec]) -> Result<Dataset, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| DatasetError::Header(e.to_string()))?
        .clone();
    let mut columns = Vec::with_capacity(header.len());
    let mut seen = HashSet::new();
    for name in header.iter() {
        if !seen.insert(name) {
            return Err(DatasetError::Header(format!("duplicate column {name}")));
        }
        let spec = variables
            .iter()
            .find(|v| v.id == name)
            .ok_or_else(|| DatasetError::Header(format!("unknown column {name:?}")))?;
        columns.push(spec.clone());
    }
    if let Some(missing) = variables.iter().find(|v| !seen.contains(v.id.as_str())) {
        return Err(DatasetError::Header(format!("missing column {}", missing.id)));
    }
    let mut data = Dataset::new(columns);
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| DatasetError::Csv(format!("row {row}: {e}")))?;
        if rec.len() != data.width() {
            return Err(DatasetError::RowLength {
                row,
                expected: data.width(),
                found: rec.len(),
            });
        }
        if let Some(col) = rec.iter().position(str::is_empty) {
            return Err(DatasetError::MissingValue {
                row,
                column: data.variables[col].id.clone(),
            });
        }
        let cells: Vec<&str> = rec.iter().collect();
        data.push_labels(&cells)?;
    }
    Ok(data)
}

/// Builds variable specs from a CSV alone: states in order of first
/// appearance, labels equal to ids.
pub fn infer_variables(text: &str) -> Result<Vec<VariableSpec>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Header(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut states: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| DatasetError::Csv(format!("row {row}: {e}")))?;
        if rec.len() != header.len() {
            return Err(DatasetError::RowLength {
                row,
                expected: header.len(),
                found: rec.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if cell.is_empty() {
                return Err(DatasetError::MissingValue {
                    row,
                    column: header[c].clone(),
                });
            }
            if !states[c].iter().any(|s| s == cell) {
                states[c].push(cell.to_string());
            }
        }
    }
    header
        .into_iter()
        .zip(states)
        .map(|(id, mut st)| {
            // a column constant in the sample still needs two states
            if st.len() < 2 {
                st.push(format!("{}__unobserved", st.first().map(String::as_str).unwrap_or("state")));
            }
            VariableSpec::new(id.clone(), id, st).map_err(|e| DatasetError::Header(e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> Vec<VariableSpec> {
        vec![
            VariableSpec::new("v1", "Sex", ["female", "male"]).unwrap(),
            VariableSpec::new("v2", "Age", ["(44-54]", "(54-64]"]).unwrap(),
        ]
    }

    #[test]
    fn two_valid_rows() {
        let d = parse_dataset("v1,v2\nmale,(44-54]\n female , (54-64] \n", &specs()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.record(1), &[0, 1]);
    }

    #[test]
    fn header_may_be_permuted() {
        let d = parse_dataset("v2,v1\n(54-64],female\n", &specs()).unwrap();
        assert_eq!(d.variables()[0].id, "v2");
        assert_eq!(d.record(0), &[1, 0]);
    }

    #[test]
    fn empty_cell_is_missing_value() {
        let err = parse_dataset("v1,v2\nmale,(44-54]\nfemale,\n", &specs()).unwrap_err();
        assert_eq!(
            err,
            DatasetError::MissingValue {
                row: 2,
                column: "v2".into()
            }
        );
    }

    #[test]
    fn state_match_is_case_sensitive() {
        let err = parse_dataset("v1,v2\nMale,(44-54]\n", &specs()).unwrap_err();
        assert_eq!(err.name(), "UnknownStateError");
        assert!(matches!(err, DatasetError::UnknownState { row: 1, ref value, .. } if value == "Male"));
    }

    #[test]
    fn header_errors() {
        assert_eq!(parse_dataset("v1\nmale\n", &specs()).unwrap_err().name(), "HeaderError");
        assert_eq!(parse_dataset("v1,v2,v3\n", &specs()).unwrap_err().name(), "HeaderError");
        assert_eq!(parse_dataset("v1,v1\n", &specs()).unwrap_err().name(), "HeaderError");
    }

    #[test]
    fn short_row_is_reported() {
        let err = parse_dataset("v1,v2\nmale\n", &specs()).unwrap_err();
        assert!(matches!(err, DatasetError::RowLength { row: 1, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let d = parse_dataset("v1,v2\nmale,(44-54]\nfemale,(54-64]\n", &specs()).unwrap();
        assert_eq!(parse_dataset(&d.to_csv(), &specs()).unwrap(), d);
    }

    #[test]
    fn inferred_states_follow_first_appearance() {
        let v = infer_variables("a,b\nx,1\ny,1\n").unwrap();
        assert_eq!(v[0].states, ["x", "y"]);
        assert_eq!(v[1].states.len(), 2);
    }
}
