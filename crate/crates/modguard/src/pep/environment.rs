use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// The eleven environment variables a dependency marker may reference.
pub const MARKER_VARIABLES: [&str; 11] = [
    "python_version",
    "python_full_version",
    "os_name",
    "sys_platform",
    "platform_machine",
    "platform_python_implementation",
    "platform_release",
    "platform_system",
    "platform_version",
    "implementation_name",
    "implementation_version",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvironmentError {
    #[error("unknown environment variable {0:?}")]
    UnknownKey(String),
    #[error("environment variable {0:?} must not be empty")]
    EmptyValue(String),
}

/// A complete assignment of the eleven marker variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    variables: BTreeMap<String, String>,
}

impl EnvironmentProfile {
    /// A CPython 3.10 on Linux profile, used as the default environment for
    /// resolution. Every value can be overridden per query.
    pub fn default_linux() -> Self {
        let pairs = [
            ("python_version", "3.10"),
            ("python_full_version", "3.10.12"),
            ("os_name", "posix"),
            ("sys_platform", "linux"),
            ("platform_machine", "x86_64"),
            ("platform_python_implementation", "CPython"),
            ("platform_release", "5.15.0"),
            ("platform_system", "Linux"),
            ("platform_version", "#1 SMP"),
            ("implementation_name", "cpython"),
            ("implementation_version", "3.10.12"),
        ];
        EnvironmentProfile {
            variables: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Replace one variable, validating the key and rejecting empty values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), EnvironmentError> {
        if !MARKER_VARIABLES.contains(&key) {
            return Err(EnvironmentError::UnknownKey(key.into()));
        }
        if value.is_empty() {
            return Err(EnvironmentError::EmptyValue(key.into()));
        }
        self.variables.insert(key.into(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.variables.get(key).map(String::as_str)
    }

    pub fn variables(&self) -> &BTreeMap<String, String> {
        &self.variables
    }
}

impl Default for EnvironmentProfile {
    fn default() -> Self {
        EnvironmentProfile::default_linux()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_profile_covers_all_eleven_variables() {
        let env = EnvironmentProfile::default_linux();
        for key in MARKER_VARIABLES {
            let value = env.get(key).unwrap_or_else(|| panic!("{key} missing"));
            assert!(!value.is_empty());
        }
        assert_eq!(env.variables().len(), 11);
    }

    #[test]
    fn set_validates_keys_and_values() {
        let mut env = EnvironmentProfile::default_linux();
        env.set("python_version", "3.11").unwrap();
        assert_eq!(env.get("python_version"), Some("3.11"));
        assert!(env.set("no_such_variable", "x").is_err());
        assert!(env.set("os_name", "").is_err());
    }
}
