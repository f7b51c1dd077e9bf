//! Command-line and HTTP front ends for `cardionet-core`.

pub mod cli;
mod error;
pub mod http;

use std::path::Path;

use cardionet_core::inference::{enumerate_query, query_conditional, Method, QueryResult};
use cardionet_core::io::parse_network;
use cardionet_core::{cvd_fixture, BayesianNetwork, Evidence};

pub use cli::run_cli;
pub use error::AppError;

/// Name accepted in place of a network path to load the built-in fixture.
pub const FIXTURE_NAME: &str = "fixture";

pub fn read_text(path: &Path) -> Result<String, AppError> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Loads a network document, or the fixture when `source` is `fixture`.
pub fn load_network(source: &str) -> Result<BayesianNetwork, AppError> {
    if source == FIXTURE_NAME {
        return Ok(cvd_fixture());
    }
    Ok(parse_network(&read_text(Path::new(source))?)?)
}

/// Accepts `ve`/`elimination` and `enum`/`enumeration`.
pub fn parse_method(name: &str) -> Option<Method> {
    match name {
        "ve" | "elimination" => Some(Method::Elimination),
        "enum" | "enumeration" => Some(Method::Enumeration),
        _ => None,
    }
}

/// The query path shared by the CLI and the HTTP service.
pub fn answer_query(
    net: &BayesianNetwork,
    evidence: &Evidence,
    target: &Evidence,
    method: Method,
) -> Result<QueryResult, AppError> {
    Ok(match method {
        Method::Elimination => query_conditional(net, evidence, target)?,
        Method::Enumeration => enumerate_query(net, evidence, target)?,
    })
}
