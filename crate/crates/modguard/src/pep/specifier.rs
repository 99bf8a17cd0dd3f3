use super::version::{compare_release, parse_version, Version};
use super::PepError;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Comparison operator of a specifier clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Compatible,
    ArbitraryEq,
}

impl Operator {
    fn as_str(self) -> &'static str {
        match self {
            Operator::Eq => "==",
            Operator::Ne => "!=",
            Operator::Le => "<=",
            Operator::Ge => ">=",
            Operator::Lt => "<",
            Operator::Gt => ">",
            Operator::Compatible => "~=",
            Operator::ArbitraryEq => "===",
        }
    }

    /// True for operators that pin a single version.
    pub fn is_pinning(self) -> bool {
        matches!(self, Operator::Eq | Operator::ArbitraryEq)
    }
}

/// One clause of a version specifier: an operator plus a version pattern.
/// `wildcard` marks `==1.2.*` / `!=1.2.*` prefix patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Clause {
    pub op: Operator,
    pub version: Version,
    pub wildcard: bool,
    /// Verbatim version text, used for `===` literal comparison.
    pub raw: String,
}

// The raw text only carries meaning for `===`; everywhere else clauses with
// equal structured patterns are the same clause.
impl PartialEq for Clause {
    fn eq(&self, other: &Self) -> bool {
        if self.op != other.op || self.wildcard != other.wildcard {
            return false;
        }
        if self.op == Operator::ArbitraryEq {
            self.raw == other.raw
        } else {
            self.version == other.version
        }
    }
}

impl Eq for Clause {}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.op == Operator::ArbitraryEq {
            return write!(f, "==={}", self.raw);
        }
        write!(f, "{}{}", self.op.as_str(), self.version)?;
        if self.wildcard {
            f.write_str(".*")?;
        }
        Ok(())
    }
}

/// A conjunction of specifier clauses. The empty specifier matches every
/// version.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionSpecifier {
    pub clauses: Vec<Clause>,
}

impl VersionSpecifier {
    pub fn any() -> Self {
        VersionSpecifier::default()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// True when any clause pins an exact version.
    pub fn has_pin(&self) -> bool {
        self.clauses.iter().any(|c| c.op.is_pinning())
    }

    pub fn contains(&self, version: &Version) -> bool {
        self.clauses.iter().all(|c| clause_contains(c, version))
    }

    pub fn parse(text: &str) -> Result<Self, PepError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(VersionSpecifier::any());
        }
        let mut clauses = Vec::new();
        for part in trimmed.split(',') {
            clauses.push(parse_clause(part.trim(), text)?);
        }
        Ok(VersionSpecifier { clauses })
    }
}

impl fmt::Display for VersionSpecifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rendered: Vec<String> = self.clauses.iter().map(Clause::to_string).collect();
        f.write_str(&rendered.join(","))
    }
}

impl std::str::FromStr for VersionSpecifier {
    type Err = PepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VersionSpecifier::parse(s)
    }
}

fn parse_clause(part: &str, whole: &str) -> Result<Clause, PepError> {
    let err = |msg: String| PepError::InvalidSpecifier(whole.into(), msg);
    let (op, rest) = if let Some(r) = part.strip_prefix("===") {
        (Operator::ArbitraryEq, r)
    } else if let Some(r) = part.strip_prefix("==") {
        (Operator::Eq, r)
    } else if let Some(r) = part.strip_prefix("!=") {
        (Operator::Ne, r)
    } else if let Some(r) = part.strip_prefix("<=") {
        (Operator::Le, r)
    } else if let Some(r) = part.strip_prefix(">=") {
        (Operator::Ge, r)
    } else if let Some(r) = part.strip_prefix("~=") {
        (Operator::Compatible, r)
    } else if let Some(r) = part.strip_prefix('<') {
        (Operator::Lt, r)
    } else if let Some(r) = part.strip_prefix('>') {
        (Operator::Gt, r)
    } else {
        return Err(err(format!("missing operator in clause {part:?}")));
    };

    let raw = rest.trim().to_string();
    if raw.is_empty() {
        return Err(err(format!("missing version in clause {part:?}")));
    }

    if op == Operator::ArbitraryEq {
        // Literal comparison: keep the text, no version grammar applied.
        return Ok(Clause {
            op,
            version: Version::from_release(&[0]),
            wildcard: false,
            raw,
        });
    }

    let (version_text, wildcard) = match raw.strip_suffix(".*") {
        Some(prefix) => (prefix, true),
        None => (raw.as_str(), false),
    };
    if wildcard && !matches!(op, Operator::Eq | Operator::Ne) {
        return Err(err(format!(
            "wildcard pattern not allowed with {}",
            op.as_str()
        )));
    }
    let version = parse_version(version_text)
        .map_err(|e| err(format!("bad version in clause {part:?}: {e}")))?;
    if op == Operator::Compatible && version.release.len() < 2 {
        return Err(err("~= requires at least two release numbers".into()));
    }
    Ok(Clause {
        op,
        version,
        wildcard,
        raw,
    })
}

/// Whether a single version satisfies the whole specifier. The compatible
/// release clause `~=X.Y` behaves as `>=X.Y, ==X.*`; `===` compares the
/// rendered text literally.
pub fn specifier_contains(spec: &VersionSpecifier, version: &Version) -> bool {
    spec.contains(version)
}

fn release_prefix_matches(pattern: &Version, candidate: &Version) -> bool {
    if pattern.epoch != candidate.epoch {
        return false;
    }
    pattern
        .release
        .iter()
        .enumerate()
        .all(|(i, p)| candidate.release.get(i).copied().unwrap_or(0) == *p)
}

fn clause_contains(clause: &Clause, version: &Version) -> bool {
    // Local labels are ignored unless the clause itself carries one.
    let (pattern, candidate) = if clause.version.local.is_some() {
        (clause.version.clone(), version.clone())
    } else {
        (clause.version.clone(), version.without_local())
    };

    match clause.op {
        Operator::Eq => {
            if clause.wildcard {
                release_prefix_matches(&pattern, &candidate.without_local())
            } else {
                candidate == pattern
            }
        }
        Operator::Ne => {
            if clause.wildcard {
                !release_prefix_matches(&pattern, &candidate.without_local())
            } else {
                candidate != pattern
            }
        }
        Operator::ArbitraryEq => version.to_string() == clause.raw.trim(),
        Operator::Compatible => {
            if pattern.epoch != candidate.epoch {
                return false;
            }
            let prefix = &pattern.release[..pattern.release.len() - 1];
            if !prefix
                .iter()
                .enumerate()
                .all(|(i, p)| candidate.release.get(i).copied().unwrap_or(0) == *p)
            {
                return false;
            }
            candidate >= pattern
        }
        Operator::Le => less_than(&pattern, &candidate) || candidate <= pattern,
        Operator::Ge => greater_than(&pattern, &candidate) || candidate >= pattern,
        Operator::Lt => {
            less_than(&pattern, &candidate)
                && !(compare_release(&pattern.release, &candidate.release) == Ordering::Equal
                    && candidate.is_prerelease()
                    && !pattern.is_prerelease())
        }
        Operator::Gt => greater_than(&pattern, &candidate),
    }
}

fn less_than(pattern: &Version, candidate: &Version) -> bool {
    if candidate.epoch < pattern.epoch {
        return true;
    }
    // `<3.1` must not admit 3.1 pre-releases unless the bound is itself one.
    if !pattern.is_prerelease()
        && candidate.is_prerelease()
        && compare_release(&pattern.release, &candidate.release) == Ordering::Equal
    {
        return false;
    }
    candidate < pattern
}

fn greater_than(pattern: &Version, candidate: &Version) -> bool {
    if candidate.epoch > pattern.epoch {
        return true;
    }
    if compare_release(&pattern.release, &candidate.release) == Ordering::Equal {
        // `>3.1` must not admit 3.1.post releases or local variants.
        if !pattern.is_post() && candidate.is_post() {
            return false;
        }
        if candidate.local.is_some() {
            return false;
        }
    }
    candidate > pattern
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> VersionSpecifier {
        VersionSpecifier::parse(s).unwrap()
    }

    fn v(s: &str) -> Version {
        parse_version(s).unwrap()
    }

    #[test]
    fn empty_specifier_matches_everything() {
        let any = spec("");
        assert!(any.contains(&v("0.1")));
        assert!(any.contains(&v("1!3.0rc1")));
    }

    #[test]
    fn boundary_is_inclusive_for_ge() {
        assert!(spec(">=1.21.0").contains(&v("1.21.0")));
        assert!(spec(">=1.21.0").contains(&v("1.21.1")));
        assert!(!spec(">=1.21.0").contains(&v("1.20.9")));
    }

    #[test]
    fn exact_pin_rejects_neighbours() {
        assert!(!spec("==0.29.32").contains(&v("0.29.31")));
        assert!(spec("==0.29.32").contains(&v("0.29.32")));
        assert!(spec("==2.0").contains(&v("2")));
    }

    #[test]
    fn compatible_release_expands_to_range() {
        assert!(spec("~=2.8.1").contains(&v("2.8.1")));
        assert!(!spec("~=2.8.1").contains(&v("2.9.0")));
        assert!(spec("~=2.8.1").contains(&v("2.8.9")));
        assert!(!spec("~=2.8.1").contains(&v("3.0.0")));
        assert!(spec("~=2.8").contains(&v("2.9.0")));
        assert!(!spec("~=2.8").contains(&v("3.0.0")));
    }

    #[test]
    fn wildcard_patterns() {
        assert!(spec("==1.21.*").contains(&v("1.21.5")));
        assert!(!spec("==1.21.*").contains(&v("1.22.0")));
        assert!(spec("!=1.21.*").contains(&v("1.22.0")));
        assert!(!spec("!=1.21.*").contains(&v("1.21.0")));
        assert!(VersionSpecifier::parse(">=1.*").is_err());
    }

    #[test]
    fn arbitrary_equality_is_literal() {
        assert!(spec("===1.2a1").contains(&v("1.2a1")));
        assert!(!spec("===1.2a1").contains(&v("1.2a1+local")));
        assert!(!spec("===1.2.0").contains(&v("1.2")));
    }

    #[test]
    fn prerelease_exclusions_for_ordering_operators() {
        assert!(!spec("<2.0").contains(&v("2.0.dev1")));
        assert!(spec("<2.0").contains(&v("1.9")));
        assert!(!spec(">2.0").contains(&v("2.0.post1")));
        assert!(spec(">2.0").contains(&v("2.1")));
        assert!(spec("<=2.0").contains(&v("2.0")));
        assert!(spec(">=2.0").contains(&v("2.0.post1")));
    }

    #[test]
    fn conjunction_of_clauses() {
        let s = spec(">=1.21.0, <2.0");
        assert!(s.contains(&v("1.21.0")));
        assert!(s.contains(&v("1.99")));
        assert!(!s.contains(&v("2.0")));
        assert!(!s.contains(&v("1.20")));
    }

    #[test]
    fn local_versions_match_bare_pins() {
        assert!(spec("==2.0").contains(&v("2.0+deadbeef")));
        assert!(!spec("==2.0+other").contains(&v("2.0+deadbeef")));
    }

    #[test]
    fn render_round_trip() {
        for s in ["==1.2.*", ">=1.0,<2.0", "~=2.8.1", "===1.2armv7"] {
            let parsed = spec(s);
            assert_eq!(spec(&parsed.to_string()), parsed);
        }
    }
}
