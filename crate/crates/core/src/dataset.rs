//! Labeled samples and the JSONL dataset manifest.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cube::{load_cube, RadarCube};
use crate::error::{Error, Result};

/// Largest people count handled by the classifiers.
pub const MAX_PEOPLE: u8 = 3;
pub const NUM_CLASSES: usize = MAX_PEOPLE as usize + 1;

/// Number of people present, 0..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PeopleCount(u8);

impl PeopleCount {
    pub fn new(n: u8) -> Result<Self> {
        if n > MAX_PEOPLE {
            return Err(Error::InvalidInput(format!(
                "people count {n} outside 0..={MAX_PEOPLE}"
            )));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn all() -> impl Iterator<Item = PeopleCount> {
        (0..=MAX_PEOPLE).map(PeopleCount)
    }
}

impl TryFrom<u8> for PeopleCount {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PeopleCount> for u8 {
    fn from(p: PeopleCount) -> u8 {
        p.0
    }
}

impl fmt::Display for PeopleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Recording environment: the four Environment-A layouts and Environment B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Environment {
    A1,
    A2,
    A3,
    A4,
    B,
}

impl Environment {
    pub fn as_str(self) -> &'static str {
        match self {
            Environment::A1 => "A1",
            Environment::A2 => "A2",
            Environment::A3 => "A3",
            Environment::A4 => "A4",
            Environment::B => "B",
        }
    }

    pub fn is_a(self) -> bool {
        !matches!(self, Environment::B)
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Environment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A1" => Ok(Environment::A1),
            "A2" => Ok(Environment::A2),
            "A3" => Ok(Environment::A3),
            "A4" => Ok(Environment::A4),
            "B" => Ok(Environment::B),
            other => Err(Error::InvalidInput(format!("unknown environment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Standing,
    Walking,
    Mixed,
}

impl Activity {
    pub const ALL: [Activity; 3] = [Activity::Standing, Activity::Walking, Activity::Mixed];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!("unknown split {other:?}"))),
        }
    }
}

/// A labeled cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub cube: RadarCube,
    pub label: PeopleCount,
    pub environment: Environment,
    pub activity: Activity,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: PeopleCount,
    pub environment: Environment,
    pub activity: Activity,
    pub split: Split,
}

impl ManifestEntry {
    /// Sample id: the file stem of `path`.
    pub fn id(&self) -> String {
        Path::new(&self.path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.clone())
    }
}

/// A list of entries, with relative paths resolved against `base_dir`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let m = Self {
            entries,
            base_dir: base_dir.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.path.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate manifest path {:?}",
                    e.path
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Entries of one split, keeping the base directory.
    pub fn filter_split(&self, split: Split) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|e| e.split == split)
                .cloned()
                .collect(),
            base_dir: self.base_dir.clone(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(&line)
                .map_err(|e| Error::json(format!("{}:{}", path.display(), i + 1), e))?;
            entries.push(entry);
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(entries, base)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        for e in &self.entries {
            let line = serde_json::to_string(e).map_err(|e| Error::json("manifest entry", e))?;
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&out).map_err(|e| Error::io(path, e))
    }

    pub fn load_sample(&self, entry: &ManifestEntry) -> Result<Sample> {
        Ok(Sample {
            id: entry.id(),
            cube: load_cube(self.resolve(entry))?,
            label: entry.label,
            environment: entry.environment,
            activity: entry.activity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(path: &str, split: Split) -> ManifestEntry {
        ManifestEntry {
            path: path.into(),
            label: PeopleCount::new(2).unwrap(),
            environment: Environment::A2,
            activity: Activity::Walking,
            split,
        }
    }

    #[test]
    fn label_range() {
        assert!(PeopleCount::new(3).is_ok());
        assert!(PeopleCount::new(4).is_err());
        assert!(serde_json::from_str::<PeopleCount>("7").is_err());
    }

    #[test]
    fn manifest_line_format() {
        let s = serde_json::to_string(&entry("a.radc", Split::Val)).unwrap();
        assert_eq!(
            s,
            r#"{"path":"a.radc","label":2,"environment":"A2","activity":"walking","split":"val"}"#
        );
    }

    #[test]
    fn duplicate_paths_rejected() {
        let r = DatasetManifest::new(vec![entry("a", Split::Train), entry("a", Split::Test)], ".");
        assert!(r.is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = DatasetManifest::new(
            vec![entry("x/a.radc", Split::Train), entry("b.radc", Split::Test)],
            dir.path(),
        )
        .unwrap();
        let p = dir.path().join("m.jsonl");
        m.save(&p).unwrap();
        let back = DatasetManifest::load(&p).unwrap();
        assert_eq!(back.entries, m.entries);
        assert_eq!(back.resolve(&back.entries[0]), dir.path().join("x/a.radc"));
        assert_eq!(back.filter_split(Split::Test).len(), 1);
        assert_eq!(back.entries[0].id(), "a");
    }
}
