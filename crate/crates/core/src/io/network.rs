//! JSON network documents.
//!
//! ```text
//! { "version": 1,
//!   "variables": [{"id": .., "label": .., "states": [..]}],
//!   "parents": {"v3": ["v1", "v8"], ..},
//!   "cpts": {"v3": {"parent_order": [..], "rows": [[..]], "counts": [[..]]}},
//!   "notes": {..} }
//! ```
//!
//! Output is canonical: map keys sorted, floats in shortest round-trip form,
//! one CPT row per line. A document without `cpts` is a structure document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BayesianNetwork, Cpt, Dag, ModelError, VariableSpec, ROW_SUM_TOLERANCE};

pub const FORMAT_VERSION: u32 = 1;

/// Free-form document annotations.
pub type Notes = BTreeMap<String, String>;

/// Row-sum tolerance accepted on load. Rows inside it but outside the core
/// tolerance are renormalized.
pub const LOAD_ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Schema(String),
    #[error("invalid network: {0}")]
    Validation(String),
    #[error("unsupported format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
}

impl FormatError {
    pub fn name(&self) -> &'static str {
        match self {
            FormatError::Schema(_) => "SchemaError",
            FormatError::Validation(_) => "ValidationError",
            FormatError::Version { .. } => "VersionError",
        }
    }
}

impl From<ModelError> for FormatError {
    fn from(e: ModelError) -> Self {
        FormatError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptBlock {
    pub parent_order: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub version: u32,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub parents: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cpts: BTreeMap<String, CptBlock>,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

impl NetworkDocument {
    pub fn from_network(net: &BayesianNetwork) -> Self {
        let cpts = net
            .cpts()
            .iter()
            .map(|c| {
                (
                    c.variable().to_string(),
                    CptBlock {
                        parent_order: c.parent_order().to_vec(),
                        rows: c.rows().map(<[f64]>::to_vec).collect(),
                        counts: c.count_rows().map(|rows| rows.map(<[f64]>::to_vec).collect()),
                    },
                )
            })
            .collect();
        NetworkDocument {
            version: FORMAT_VERSION,
            variables: net.variables().to_vec(),
            parents: net.dag().parent_map(),
            cpts,
            notes: net.notes().clone(),
        }
    }

    pub fn from_structure(
        variables: &[VariableSpec],
        dag: &Dag,
        notes: BTreeMap<String, String>,
    ) -> Self {
        NetworkDocument {
            version: FORMAT_VERSION,
            variables: variables.to_vec(),
            parents: dag.parent_map(),
            cpts: BTreeMap::new(),
            notes,
        }
    }

    fn check_version(&self) -> Result<(), FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Version { found: self.version });
        }
        Ok(())
    }

    /// Variables and DAG, ignoring any CPT blocks.
    pub fn to_structure(&self) -> Result<(Vec<VariableSpec>, Dag), FormatError> {
        self.check_version()?;
        for v in &self.variables {
            v.validate()?;
        }
        let ids: Vec<&str> = self.variables.iter().map(|v| v.id.as_str()).collect();
        for (child, parents) in &self.parents {
            if !ids.contains(&child.as_str()) {
                return Err(FormatError::Validation(format!(
                    "parents listed for unknown variable {child}"
                )));
            }
            if let Some(p) = parents.iter().find(|p| !ids.contains(&p.as_str())) {
                return Err(FormatError::Validation(format!(
                    "unknown parent id {p} of {child}"
                )));
            }
        }
        let dag = Dag::new(ids, self.parents.iter().map(|(k, v)| (k, v.clone())))?;
        Ok((self.variables.clone(), dag))
    }

    pub fn to_network(&self) -> Result<BayesianNetwork, FormatError> {
        let (variables, dag) = self.to_structure()?;
        let mut cpts = Vec::with_capacity(variables.len());
        for v in &variables {
            let block = self
                .cpts
                .get(&v.id)
                .ok_or_else(|| FormatError::Validation(format!("missing CPT for {}", v.id)))?;
            let rows = settle_rows(&v.id, block.rows.clone())?;
            let cpt = match &block.counts {
                Some(counts) => Cpt::with_counts(&v.id, block.parent_order.clone(), rows, counts.clone())?,
                None => Cpt::new(&v.id, block.parent_order.clone(), rows)?,
            };
            cpts.push(cpt);
        }
        if let Some(extra) = self.cpts.keys().find(|k| dag.index_of(k).is_none()) {
            return Err(FormatError::Validation(format!("CPT for unknown variable {extra}")));
        }
        Ok(BayesianNetwork::new(variables, &dag, cpts, self.notes.clone())?)
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"version\": {},", self.version);
        out.push_str("  \"variables\": [");
        for (i, v) in self.variables.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(
                out,
                "    {{\"id\": {}, \"label\": {}, \"states\": {}}}",
                json(&v.id),
                json(&v.label),
                json(&v.states)
            );
        }
        out.push_str(if self.variables.is_empty() { "],\n" } else { "\n  ],\n" });
        out.push_str("  \"parents\": {");
        for (i, (k, v)) in self.parents.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(out, "    {}: {}", json(k), json(v));
        }
        out.push_str(if self.parents.is_empty() { "},\n" } else { "\n  },\n" });
        if !self.cpts.is_empty() {
            out.push_str("  \"cpts\": {");
            for (i, (k, block)) in self.cpts.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                let _ = writeln!(out, "    {}: {{", json(k));
                let _ = write!(out, "      \"parent_order\": {},\n      \"rows\": ", json(&block.parent_order));
                write_rows(&mut out, &block.rows);
                if let Some(counts) = &block.counts {
                    out.push_str(",\n      \"counts\": ");
                    write_rows(&mut out, counts);
                }
                out.push_str("\n    }");
            }
            out.push_str("\n  },\n");
        }
        out.push_str("  \"notes\": {");
        for (i, (k, v)) in self.notes.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(out, "    {}: {}", json(k), json(v));
        }
        out.push_str(if self.notes.is_empty() { "}\n" } else { "\n  }\n" });
        out.push_str("}\n");
        out
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn write_rows(out: &mut String, rows: &[Vec<f64>]) {
    out.push('[');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str("        ");
        out.push_str(&serde_json::to_string(row).expect("finite floats"));
    }
    out.push_str(if rows.is_empty() { "]" } else { "\n      ]" });
}

fn settle_rows(var: &str, mut rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, FormatError> {
    for (r, row) in rows.iter_mut().enumerate() {
        let sum: f64 = row.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > LOAD_ROW_SUM_TOLERANCE {
            return Err(FormatError::Validation(format!(
                "CPT {var} row {r} sums to {sum}, not 1"
            )));
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            row.iter_mut().for_each(|p| *p /= sum);
        }
    }
    Ok(rows)
}

fn parse_document(text: &str) -> Result<NetworkDocument, FormatError> {
    // Check the version before the full schema so a future format gets a
    // version error rather than a schema error.
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| FormatError::Schema(e.to_string()))?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v != FORMAT_VERSION as u64 => {
            return Err(FormatError::Version { found: v as u32 });
        }
        Some(_) => {}
        None => return Err(FormatError::Schema("missing or non-integer `version`".into())),
    }
    serde_json::from_str(text).map_err(|e| FormatError::Schema(e.to_string()))
}

/// Parses and fully validates a network document.
pub fn parse_network(text: &str) -> Result<BayesianNetwork, FormatError> {
    parse_document(text)?.to_network()
}

/// Parses the variables and DAG of a structure or network document.
pub fn parse_structure(text: &str) -> Result<(Vec<VariableSpec>, Dag, Notes), FormatError> {
    let doc = parse_document(text)?;
    let (vars, dag) = doc.to_structure()?;
    Ok((vars, dag, doc.notes))
}

pub fn serialize_network(net: &BayesianNetwork) -> String {
    NetworkDocument::from_network(net).to_text()
}

pub fn serialize_structure(variables: &[VariableSpec], dag: &Dag, notes: BTreeMap<String, String>) -> String {
    NetworkDocument::from_structure(variables, dag, notes).to_text()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::cvd_fixture;

    #[test]
    fn fixture_round_trips() {
        let net = cvd_fixture();
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(serialize_network(&back), text);
    }

    #[test]
    fn serialization_is_deterministic() {
        let net = cvd_fixture();
        assert_eq!(serialize_network(&net), serialize_network(&net));
    }

    #[test]
    fn table_values_appear_literally() {
        let text = serialize_network(&cvd_fixture());
        assert!(text.contains("[0.1964,0.8033,0.0003]"), "{text}");
    }

    #[test]
    fn output_is_valid_json_with_sorted_keys() {
        let text = serialize_network(&cvd_fixture());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v["cpts"].as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    fn doc_text() -> String {
        serialize_network(&cvd_fixture())
    }

    #[test]
    fn non_normalized_row_is_rejected() {
        let text = doc_text().replace("[0.1964,0.8033,0.0003]", "[0.1,0.8,0.0]");
        let err = parse_network(&text).unwrap_err();
        assert_eq!(err.name(), "ValidationError");
    }

    #[test]
    fn nearly_normalized_row_is_renormalized() {
        let text = doc_text().replace("[0.1964,0.8033,0.0003]", "[0.1964,0.8033,0.0003001]");
        let net = parse_network(&text).unwrap();
        let row = net.cpt("v7").unwrap().row(5);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_parent_is_named() {
        let text = doc_text().replace("\"v11\": [\"v5\",\"v6\",\"v7\"]", "\"v11\": [\"v5\",\"v6\",\"v99\"]");
        assert_ne!(text, doc_text());
        let err = parse_network(&text).unwrap_err();
        assert_eq!(err.name(), "ValidationError");
        assert!(err.to_string().contains("v99"), "{err}");
    }

    #[test]
    fn cycle_is_a_validation_error() {
        let text = doc_text().replace("\"v1\": [],", "\"v1\": [\"v3\"],");
        let err = parse_network(&text).unwrap_err();
        assert_eq!(err.name(), "ValidationError");
    }

    #[test]
    fn version_and_schema_errors() {
        let text = doc_text().replacen("\"version\": 1", "\"version\": 2", 1);
        assert_eq!(parse_network(&text).unwrap_err().name(), "VersionError");
        assert_eq!(parse_network("{not json").unwrap_err().name(), "SchemaError");
        assert_eq!(
            parse_network(r#"{"version": 1, "variables": 3}"#).unwrap_err().name(),
            "SchemaError"
        );
    }

    #[test]
    fn structure_document_omits_cpts() {
        let net = cvd_fixture();
        let text = serialize_structure(net.variables(), net.dag(), BTreeMap::new());
        assert!(!text.contains("\"cpts\""));
        let (vars, dag, _) = parse_structure(&text).unwrap();
        assert_eq!(vars, net.variables());
        assert_eq!(&dag, net.dag());
        assert!(parse_network(&text).is_err());
        // a network document is also a structure document
        assert!(parse_structure(&serialize_network(&net)).is_ok());
    }
}
