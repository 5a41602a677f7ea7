//! Loading systems from disk in either input format.

use std::path::Path;

use carleman_core::{Monomial, PolyOde};
use thiserror::Error;

use crate::{dsl, json};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Dsl { path: String, source: dsl::DslError },
    #[error("{path}: invalid JSON system: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: String,
        source: carleman_core::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSystem {
    pub ode: PolyOde,
    pub rhs: Vec<Vec<Monomial>>,
    pub params: Vec<(String, f64)>,
}

/// JSON when the file ends in `.json` or its first non-blank character is `{`,
/// the DSL otherwise.
pub fn is_json(path: &Path, text: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{')
}

pub fn parse_system(path: &Path, text: &str) -> Result<LoadedSystem, InputError> {
    let name = path.display().to_string();
    let (n, rhs, params) = if is_json(path, text) {
        let sys = json::parse(text).map_err(|source| InputError::Json {
            path: name.clone(),
            source,
        })?;
        (sys.n, sys.monomials(), Vec::new())
    } else {
        let sys = dsl::parse(text).map_err(|source| InputError::Dsl {
            path: name.clone(),
            source,
        })?;
        (sys.n, sys.rhs, sys.params)
    };
    let ode = carleman_core::model::compile(&rhs, n)
        .map_err(|source| InputError::Model { path: name, source })?;
    Ok(LoadedSystem { ode, rhs, params })
}

pub fn load(path: &Path) -> Result<LoadedSystem, InputError> {
    let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(path, &text)
}
