use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};

/// The set of module paths a package yields after installation, each with a
/// content digest. Paths use `/`; the digest is empty when the content is
/// not knowable from the archive (synthetic `.pth` shims, missing sources).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModuleSet {
    entries: BTreeMap<String, String>,
}

impl ModuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, digest: impl Into<String>) {
        self.entries.insert(path.into(), digest.into());
    }

    pub fn remove(&mut self, path: &str) -> bool {
        self.entries.remove(path).is_some()
    }

    pub fn contains_path(&self, path: &str) -> bool {
        self.entries.contains_key(path)
    }

    pub fn digest(&self, path: &str) -> Option<&str> {
        self.entries.get(path).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, d)| (p.as_str(), d.as_str()))
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Importable top-level names: the first path segment of every `.py`
    /// entry; a root-level `m.py` yields `m`. `.pth` entries are carried in
    /// the set but excluded here.
    pub fn top_level_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for path in self.paths() {
            if !path.ends_with(".py") {
                continue;
            }
            match path.split_once('/') {
                Some((first, _)) => {
                    names.insert(first.to_string());
                }
                None => {
                    names.insert(path.trim_end_matches(".py").to_string());
                }
            }
        }
        names
    }
}

impl FromIterator<(String, String)> for ModuleSet {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        ModuleSet {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    path: String,
    digest: String,
}

// Serialized as a sorted array of {path, digest} objects so index files and
// command output diff cleanly.
impl Serialize for ModuleSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (path, digest) in &self.entries {
            seq.serialize_element(&EntryRepr {
                path: path.clone(),
                digest: digest.clone(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ModuleSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SetVisitor;

        impl<'de> Visitor<'de> for SetVisitor {
            type Value = ModuleSet;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of {path, digest} objects")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ModuleSet, A::Error> {
                let mut set = ModuleSet::new();
                while let Some(entry) = seq.next_element::<EntryRepr>()? {
                    set.insert(entry.path, entry.digest);
                }
                Ok(set)
            }
        }

        deserializer.deserialize_seq(SetVisitor)
    }
}
