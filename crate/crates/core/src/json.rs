//! Canonical JSON I/O. Output is pretty-printed with a trailing newline; term
//! lists are already in canonical order in every `Serialize` impl, and
//! rationals are strings (`"p"` or `"p/q"`).

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::Error;

pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: ".".into(),
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

/// Parses JSON, reporting the path of the first schema violation.
pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T, Error> {
    let mut de = serde_json::Deserializer::from_str(s);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Json {
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(value)
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    from_str(&std::fs::read_to_string(path)?)
}

pub fn write_file<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    std::fs::write(path, to_canonical_string(value)?)?;
    Ok(())
}
