use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown key `{key}`{}", suggest(.suggestion))]
    UnknownKey { key: String, suggestion: Option<String> },

    #[error("unknown recipe `{name}`{}", suggest(.suggestion))]
    UnknownRecipe { name: String, suggestion: Option<String> },

    #[error("`{key}`: {reason}")]
    BadValue { key: String, reason: String },

    #[error("missing key `{0}`")]
    Missing(String),

    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] micromaser::Error),
}

fn suggest(s: &Option<String>) -> String {
    match s {
        Some(s) => format!(" (did you mean `{s}`?)"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Nearest candidate by Jaro–Winkler similarity, if any is reasonably close.
pub fn nearest<'a>(key: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<String> {
    candidates
        .into_iter()
        .map(|c| (strsim::jaro_winkler(key, c), c))
        .filter(|(score, _)| *score > 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}
