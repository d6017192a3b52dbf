use seer_core::dataset::DatasetError;
use seer_core::eval::EvalError;
use seer_core::{ModelError, SparseError, SynthError, TreeError};
use thiserror::Error;

pub const FAILURE: u8 = 1;
pub const USAGE: u8 = 2;
pub const PARSE: u8 = 3;
pub const SCHEMA: u8 = 4;
pub const EMPTY: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Schema(String),
    #[error("{0}")]
    Empty(String),
}

fn dataset(e: &DatasetError) -> u8 {
    use DatasetError::*;
    match e {
        Csv { .. } | BadNumber { .. } | ColumnCount { .. } | DuplicateName { .. } => PARSE,
        NoInput | TooFewRows { .. } => EMPTY,
        BadFraction(_) => USAGE,
        _ => SCHEMA,
    }
}

fn tree(e: &TreeError) -> u8 {
    match e {
        TreeError::Version { .. } | TreeError::Malformed(_) => PARSE,
        TreeError::Empty => EMPTY,
        _ => SCHEMA,
    }
}

fn model(e: &ModelError) -> u8 {
    match e {
        ModelError::Malformed(_) | ModelError::Version { .. } => PARSE,
        ModelError::NoRows => EMPTY,
        ModelError::Iterations => USAGE,
        ModelError::Dataset(d) => dataset(d),
        ModelError::Tree(t) => tree(t),
        _ => SCHEMA,
    }
}

/// Exit status for an error: the first classifiable cause in the chain wins.
pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) => USAGE,
                CliError::Parse(_) => PARSE,
                CliError::Schema(_) => SCHEMA,
                CliError::Empty(_) => EMPTY,
            };
        }
        if let Some(e) = cause.downcast_ref::<DatasetError>() {
            return dataset(e);
        }
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return model(e);
        }
        if let Some(e) = cause.downcast_ref::<TreeError>() {
            return tree(e);
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return match e {
                EvalError::Empty => EMPTY,
                EvalError::Model(m) => model(m),
                _ => SCHEMA,
            };
        }
        if cause.downcast_ref::<SparseError>().is_some()
            || cause.downcast_ref::<toml::de::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return PARSE;
        }
        if cause.downcast_ref::<SynthError>().is_some() {
            return SCHEMA;
        }
    }
    FAILURE
}
