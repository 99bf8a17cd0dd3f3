use super::PepError;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Pre-release phase. Spellings `alpha`, `beta`, `c`, `pre` and `preview`
/// normalize onto these three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PreTag {
    Alpha,
    Beta,
    Rc,
}

impl PreTag {
    fn as_str(self) -> &'static str {
        match self {
            PreTag::Alpha => "a",
            PreTag::Beta => "b",
            PreTag::Rc => "rc",
        }
    }
}

/// A structured package version: epoch, release numbers and optional
/// pre/post/dev/local parts. Versions form a strict total order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Version {
    pub epoch: u32,
    pub release: Vec<u64>,
    pub pre: Option<(PreTag, u64)>,
    pub post: Option<u64>,
    pub dev: Option<u64>,
    pub local: Option<String>,
}

impl Version {
    pub fn from_release(release: &[u64]) -> Self {
        Version {
            epoch: 0,
            release: release.to_vec(),
            pre: None,
            post: None,
            dev: None,
            local: None,
        }
    }

    pub fn is_prerelease(&self) -> bool {
        self.pre.is_some() || self.dev.is_some()
    }

    pub fn is_post(&self) -> bool {
        self.post.is_some()
    }

    pub fn without_local(&self) -> Version {
        Version {
            local: None,
            ..self.clone()
        }
    }

    fn local_segments(&self) -> Option<Vec<LocalSegment>> {
        self.local.as_ref().map(|l| {
            l.split('.')
                .map(|s| match s.parse::<u64>() {
                    Ok(n) => LocalSegment::Number(n),
                    Err(_) => LocalSegment::Text(s.to_string()),
                })
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LocalSegment {
    Text(String),
    Number(u64),
}

// Numeric local segments sort above textual ones.
impl Ord for LocalSegment {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LocalSegment::Number(a), LocalSegment::Number(b)) => a.cmp(b),
            (LocalSegment::Text(a), LocalSegment::Text(b)) => a.cmp(b),
            (LocalSegment::Number(_), LocalSegment::Text(_)) => Ordering::Greater,
            (LocalSegment::Text(_), LocalSegment::Number(_)) => Ordering::Less,
        }
    }
}

impl PartialOrd for LocalSegment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compare release tuples, padding the shorter side with zeros so that
/// `1.0` == `1.0.0`.
pub(crate) fn compare_release(a: &[u64], b: &[u64]) -> Ordering {
    let len = a.len().max(b.len());
    for i in 0..len {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

type SuffixKey = (u8, u64, Option<u64>, u64, Option<Vec<LocalSegment>>);

/// Order the parts attached after an equal release:
/// devN < aN < bN < rcN < final < postN, with dev/local nested inside.
fn suffix_key(v: &Version) -> SuffixKey {
    let locals = v.local_segments();
    match (&v.pre, &v.post, &v.dev) {
        (None, None, Some(dev)) => (0, 0, None, *dev, locals),
        (Some((tag, n)), post, dev) => {
            let stage = match tag {
                PreTag::Alpha => 1,
                PreTag::Beta => 2,
                PreTag::Rc => 3,
            };
            (stage, *n, *post, dev.unwrap_or(u64::MAX), locals)
        }
        (None, None, None) => (4, 0, None, u64::MAX, locals),
        (None, Some(post), dev) => (5, 0, Some(*post), dev.unwrap_or(u64::MAX), locals),
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.epoch
            .cmp(&other.epoch)
            .then_with(|| compare_release(&self.release, &other.release))
            .then_with(|| suffix_key(self).cmp(&suffix_key(other)))
    }
}

impl std::hash::Hash for Version {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.to_string().hash(state);
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.epoch != 0 {
            write!(f, "{}!", self.epoch)?;
        }
        let release: Vec<String> = self.release.iter().map(u64::to_string).collect();
        f.write_str(&release.join("."))?;
        if let Some((tag, n)) = &self.pre {
            write!(f, "{}{}", tag.as_str(), n)?;
        }
        if let Some(post) = self.post {
            write!(f, ".post{post}")?;
        }
        if let Some(dev) = self.dev {
            write!(f, ".dev{dev}")?;
        }
        if let Some(local) = &self.local {
            write!(f, "+{local}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Version {
    type Err = PepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_version(s)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, n: usize) {
        self.pos += n;
    }

    fn eat_separator(&mut self) -> bool {
        match self.rest().chars().next() {
            Some('.') | Some('-') | Some('_') => {
                self.eat(1);
                true
            }
            _ => false,
        }
    }

    fn eat_number(&mut self) -> Option<u64> {
        let digits: String = self.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return None;
        }
        self.eat(digits.len());
        digits.parse().ok()
    }

    fn eat_word(&mut self, words: &[&'static str]) -> Option<&'static str> {
        // Longest spelling first so "rc" is not consumed as "r".
        let mut sorted: Vec<&'static str> = words.to_vec();
        sorted.sort_by_key(|w| std::cmp::Reverse(w.len()));
        for w in sorted {
            if self.rest().starts_with(w) {
                let after = self.rest()[w.len()..].chars().next();
                // A word must not run into more letters ("r" vs "rev").
                if after.is_none_or(|c| !c.is_ascii_alphabetic()) {
                    self.eat(w.len());
                    return Some(w);
                }
            }
        }
        None
    }
}

/// Parse a version string into its structured form. Parsing is lenient in
/// the separators it accepts (`1.0-alpha.1`, `1.0a1`, `1.0.post1`) and
/// strict about everything else; unparseable versions are rejected rather
/// than guessed at.
pub fn parse_version(text: &str) -> Result<Version, PepError> {
    let err = |msg: &str| PepError::InvalidVersion(text.into(), msg.into());
    let trimmed = text.trim().to_ascii_lowercase();
    let mut body = trimmed.as_str();
    if let Some(stripped) = body.strip_prefix('v') {
        body = stripped;
    }
    if body.is_empty() {
        return Err(err("empty version"));
    }

    let mut cur = Cursor {
        text: body,
        pos: 0,
    };

    // Optional epoch.
    let mut epoch = 0u32;
    if let Some(bang) = body.find('!') {
        let digits = &body[..bang];
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(err("malformed epoch"));
        }
        epoch = digits.parse().map_err(|_| err("epoch out of range"))?;
        cur.eat(bang + 1);
    }

    // Release numbers.
    let mut release = Vec::new();
    match cur.eat_number() {
        Some(n) => release.push(n),
        None => return Err(err("missing release number")),
    }
    while cur.rest().starts_with('.') {
        let save = cur.pos;
        cur.eat(1);
        match cur.eat_number() {
            Some(n) => release.push(n),
            None => {
                cur.pos = save;
                break;
            }
        }
    }

    // Pre-release.
    let mut pre = None;
    {
        let save = cur.pos;
        let mut probe = Cursor { text: body, pos: cur.pos };
        probe.eat_separator();
        if let Some(word) = probe.eat_word(&["a", "alpha", "b", "beta", "rc", "c", "pre", "preview"]) {
            probe.eat_separator();
            let n = probe.eat_number().unwrap_or(0);
            let tag = match word {
                "a" | "alpha" => PreTag::Alpha,
                "b" | "beta" => PreTag::Beta,
                _ => PreTag::Rc,
            };
            pre = Some((tag, n));
            cur.pos = probe.pos;
        } else {
            cur.pos = save;
        }
    }

    // Post-release, either spelled out or the implicit `-N` form.
    let mut post = None;
    {
        let save = cur.pos;
        let mut probe = Cursor { text: body, pos: cur.pos };
        let had_sep = probe.eat_separator();
        if let Some(_word) = probe.eat_word(&["post", "rev", "r"]) {
            probe.eat_separator();
            post = Some(probe.eat_number().unwrap_or(0));
            cur.pos = probe.pos;
        } else if had_sep && body.as_bytes().get(save) == Some(&b'-') {
            if let Some(n) = probe.eat_number() {
                post = Some(n);
                cur.pos = probe.pos;
            } else {
                cur.pos = save;
            }
        } else {
            cur.pos = save;
        }
    }

    // Dev release.
    let mut dev = None;
    {
        let save = cur.pos;
        let mut probe = Cursor { text: body, pos: cur.pos };
        probe.eat_separator();
        if probe.eat_word(&["dev"]).is_some() {
            probe.eat_separator();
            dev = Some(probe.eat_number().unwrap_or(0));
            cur.pos = probe.pos;
        } else {
            cur.pos = save;
        }
    }

    // Local identifier.
    let mut local = None;
    if cur.rest().starts_with('+') {
        cur.eat(1);
        let raw = cur.rest();
        if raw.is_empty() {
            return Err(err("empty local identifier"));
        }
        if !raw
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_')
        {
            return Err(err("illegal character in local identifier"));
        }
        let normalized: Vec<&str> = raw.split(['.', '-', '_']).collect();
        if normalized.iter().any(|s| s.is_empty()) {
            return Err(err("empty local segment"));
        }
        local = Some(normalized.join("."));
        cur.eat(raw.len());
    }

    if !cur.rest().is_empty() {
        return Err(err(&format!("trailing input {:?}", cur.rest())));
    }

    Ok(Version {
        epoch,
        release,
        pre,
        post,
        dev,
        local,
    })
}
