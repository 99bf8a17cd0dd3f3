use super::marker::MarkerExpr;
use super::name::{normalize_name, ProjectName};
use super::specifier::VersionSpecifier;
use super::PepError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// A single dependency declaration: name, optional extras, version
/// specifier and optional environment marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub name: ProjectName,
    pub extras: BTreeSet<String>,
    pub specifier: VersionSpecifier,
    pub marker: Option<MarkerExpr>,
}

impl Requirement {
    pub fn new(name: ProjectName, specifier: VersionSpecifier) -> Self {
        Requirement {
            name,
            extras: BTreeSet::new(),
            specifier,
            marker: None,
        }
    }

    /// Attach an additional marker condition, conjoining with any existing
    /// one. Used for `[:marker]` sections in requires.txt.
    pub fn with_marker(mut self, marker: MarkerExpr) -> Self {
        self.marker = Some(match self.marker.take() {
            None => marker,
            Some(MarkerExpr::And(mut parts)) => {
                parts.push(marker);
                MarkerExpr::And(parts)
            }
            Some(existing) => MarkerExpr::And(vec![existing, marker]),
        });
        self
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name.normalized())?;
        if !self.extras.is_empty() {
            let extras: Vec<&str> = self.extras.iter().map(String::as_str).collect();
            write!(f, "[{}]", extras.join(","))?;
        }
        if !self.specifier.is_empty() {
            write!(f, "{}", self.specifier)?;
        }
        if let Some(marker) = &self.marker {
            write!(f, "; {marker}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Requirement {
    type Err = PepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_requirement(s)
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.'
}

/// Parse one requirement line, e.g.
/// `numpy>=1.21.0; python_version >= '3.11'` or `pandas[compression]`.
/// Specifiers may be parenthesized as in metadata files: `pytz (>=2020.1)`.
/// Errors carry the byte offset of the first grammar violation.
pub fn parse_requirement(text: &str) -> Result<Requirement, PepError> {
    let err = |offset: usize, message: String| PepError::InvalidRequirement {
        text: text.into(),
        offset,
        message,
    };

    let bytes = text.as_bytes();
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && (bytes[*pos] == b' ' || bytes[*pos] == b'\t') {
            *pos += 1;
        }
    };

    skip_ws(&mut pos);
    let name_start = pos;
    while pos < bytes.len() && is_name_char(bytes[pos] as char) {
        pos += 1;
    }
    if pos == name_start {
        return Err(err(pos, "expected a project name".into()));
    }
    let name = normalize_name(&text[name_start..pos])
        .map_err(|e| err(name_start, e.to_string()))?;

    // Extras: [a, b]
    let mut extras = BTreeSet::new();
    skip_ws(&mut pos);
    if pos < bytes.len() && bytes[pos] == b'[' {
        let open = pos;
        pos += 1;
        loop {
            skip_ws(&mut pos);
            let extra_start = pos;
            while pos < bytes.len() && is_name_char(bytes[pos] as char) {
                pos += 1;
            }
            if pos > extra_start {
                let extra = normalize_name(&text[extra_start..pos])
                    .map_err(|e| err(extra_start, e.to_string()))?;
                extras.insert(extra.normalized().to_string());
            }
            skip_ws(&mut pos);
            match bytes.get(pos) {
                Some(b',') => pos += 1,
                Some(b']') => {
                    pos += 1;
                    break;
                }
                _ => return Err(err(open, "unterminated extras list".into())),
            }
        }
    }

    // URL requirements are out of scope.
    skip_ws(&mut pos);
    if pos < bytes.len() && bytes[pos] == b'@' {
        return Err(err(pos, "direct-URL requirements are not supported".into()));
    }

    // Specifier, possibly parenthesized, up to the marker separator.
    let spec_start = pos;
    let spec_text;
    if pos < bytes.len() && bytes[pos] == b'(' {
        let close = text[pos..]
            .find(')')
            .ok_or_else(|| err(pos, "unterminated '(' in specifier".into()))?;
        spec_text = text[pos + 1..pos + close].to_string();
        pos += close + 1;
        skip_ws(&mut pos);
        if pos < bytes.len() && bytes[pos] != b';' {
            return Err(err(pos, "unexpected input after specifier".into()));
        }
    } else {
        let end = text[pos..].find(';').map(|i| pos + i).unwrap_or(text.len());
        spec_text = text[pos..end].to_string();
        pos = end;
    }
    let specifier = VersionSpecifier::parse(&spec_text)
        .map_err(|e| err(spec_start, e.to_string()))?;

    // Optional marker.
    let mut marker = None;
    if pos < bytes.len() && bytes[pos] == b';' {
        pos += 1;
        let marker_text = text[pos..].trim();
        if marker_text.is_empty() {
            return Err(err(pos, "empty marker after ';'".into()));
        }
        marker = Some(MarkerExpr::parse(marker_text).map_err(|e| err(pos, e.to_string()))?);
    }

    Ok(Requirement {
        name,
        extras,
        specifier,
        marker,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pep::version::parse_version;

    #[test]
    fn parses_specifier_and_marker() {
        let req = parse_requirement("numpy>=1.21.0; python_version >= '3.11'").unwrap();
        assert_eq!(req.name.normalized(), "numpy");
        assert!(req.specifier.contains(&parse_version("1.21.0").unwrap()));
        assert!(!req.specifier.contains(&parse_version("1.20.0").unwrap()));
        assert_eq!(
            req.marker.unwrap().to_string(),
            "python_version >= '3.11'"
        );
    }

    #[test]
    fn parses_extras_with_empty_specifier() {
        let req = parse_requirement("pandas[compression]").unwrap();
        assert_eq!(req.name.normalized(), "pandas");
        assert_eq!(
            req.extras.iter().cloned().collect::<Vec<_>>(),
            vec!["compression".to_string()]
        );
        assert!(req.specifier.is_empty());
        assert!(req.marker.is_none());
    }

    #[test]
    fn parses_plain_requirement() {
        let req = parse_requirement("pytz>=2020.1").unwrap();
        assert_eq!(req.name.normalized(), "pytz");
        assert!(req.extras.is_empty());
        assert!(req.marker.is_none());
        assert!(req.specifier.contains(&parse_version("2020.1").unwrap()));
    }

    #[test]
    fn parses_parenthesized_metadata_form() {
        let req = parse_requirement("pytz (>=2020.1)").unwrap();
        assert_eq!(req.to_string(), "pytz>=2020.1");
        let req = parse_requirement("hypothesis (>=5.5.3) ; extra == 'toml'").unwrap();
        assert_eq!(req.name.normalized(), "hypothesis");
        assert_eq!(req.marker.unwrap().to_string(), "extra == 'toml'");
    }

    #[test]
    fn normalizes_names_and_extras() {
        let req = parse_requirement("Adafruit_Blinka[Some_Extra]==1.0").unwrap();
        assert_eq!(req.name.normalized(), "adafruit-blinka");
        assert!(req.extras.contains("some-extra"));
    }

    #[test]
    fn errors_carry_byte_offsets() {
        match parse_requirement("numpy>=1.x") {
            Err(PepError::InvalidRequirement { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected InvalidRequirement, got {other:?}"),
        }
        match parse_requirement("  !bad") {
            Err(PepError::InvalidRequirement { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected InvalidRequirement, got {other:?}"),
        }
        match parse_requirement("pkg[extra") {
            Err(PepError::InvalidRequirement { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected InvalidRequirement, got {other:?}"),
        }
    }

    #[test]
    fn render_parse_round_trip() {
        for text in [
            "numpy>=1.21.0; python_version >= '3.11'",
            "pandas[compression]",
            "pytz>=2020.1",
            "a-b[x,y]==1.0,<2; os_name == 'posix' and extra == 'z'",
        ] {
            let once = parse_requirement(text).unwrap();
            let twice = parse_requirement(&once.to_string()).unwrap();
            assert_eq!(once, twice);
            assert_eq!(once.to_string(), twice.to_string());
        }
    }
}
