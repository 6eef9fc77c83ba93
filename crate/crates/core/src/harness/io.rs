//! Versioned JSON envelopes for model files.
//!
//! ```json
//! { "format_version": 1, "kind": "svm", "model": { ... } }
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    format_version: u32,
    kind: &'a str,
    model: &'a T,
}

#[derive(Deserialize)]
struct Envelope {
    format_version: u32,
    kind: String,
    model: serde_json::Value,
}

pub fn to_versioned_json<T: Serialize>(kind: &str, model: &T) -> Result<String> {
    let env = EnvelopeRef {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        model,
    };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn from_versioned_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let env: Envelope = serde_json::from_str(text)?;
    if env.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (expected {MODEL_FORMAT_VERSION})",
            env.format_version
        )));
    }
    if env.kind != kind {
        return Err(Error::Format(format!("expected a {kind} file, found {}", env.kind)));
    }
    Ok(serde_json::from_value(env.model)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_kind_and_version() {
        let text = to_versioned_json("a", &vec![1.0, 2.5]).unwrap();
        assert_eq!(from_versioned_json::<Vec<f64>>("a", &text).unwrap(), vec![1.0, 2.5]);
        assert!(matches!(from_versioned_json::<Vec<f64>>("b", &text), Err(Error::Format(_))));
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(from_versioned_json::<Vec<f64>>("a", &bumped), Err(Error::Format(_))));
    }
}
