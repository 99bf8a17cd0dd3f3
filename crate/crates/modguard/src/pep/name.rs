use super::PepError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A project name together with its normalized form.
///
/// Normalization lowercases the name and collapses every run of `-`, `_`
/// and `.` into a single `-`, so `Adafruit_Blinka` and `adafruit-blinka`
/// identify the same project.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectName {
    raw: String,
    normalized: String,
}

impl ProjectName {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }
}

impl fmt::Display for ProjectName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)
    }
}

/// Names compare by normalized form.
impl PartialEq for ProjectName {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for ProjectName {}

impl PartialOrd for ProjectName {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProjectName {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl std::hash::Hash for ProjectName {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl std::str::FromStr for ProjectName {
    type Err = PepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_name(s)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.'
}

/// Parse and normalize a project name.
///
/// The raw form must be non-empty, consist of letters, digits, `-`, `_`
/// and `.`, and start and end with an alphanumeric character.
pub fn normalize_name(raw: &str) -> Result<ProjectName, PepError> {
    if raw.is_empty() {
        return Err(PepError::InvalidName(raw.into(), "empty name".into()));
    }
    if let Some(bad) = raw.chars().find(|c| !is_name_char(*c)) {
        return Err(PepError::InvalidName(
            raw.into(),
            format!("illegal character {bad:?}"),
        ));
    }
    let first = raw.chars().next().unwrap();
    let last = raw.chars().last().unwrap();
    if !first.is_ascii_alphanumeric() || !last.is_ascii_alphanumeric() {
        return Err(PepError::InvalidName(
            raw.into(),
            "must start and end with a letter or digit".into(),
        ));
    }

    let mut normalized = String::with_capacity(raw.len());
    let mut in_run = false;
    for c in raw.chars() {
        if c == '-' || c == '_' || c == '.' {
            if !in_run {
                normalized.push('-');
                in_run = true;
            }
        } else {
            normalized.push(c.to_ascii_lowercase());
            in_run = false;
        }
    }

    Ok(ProjectName {
        raw: raw.to_string(),
        normalized,
    })
}
