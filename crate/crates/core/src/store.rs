//! Versioned document store backed by one JSON file per document.
//!
//! Layout: `<root>/<kind>/<id>.json` plus `<root>/index.json`, which is
//! rebuilt after every successful save. Writes go to a temporary file in
//! the same directory, are fsynced and then renamed over the target, so a
//! reader sees either the previous or the new version, never a mix.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ahp::{RankingInput, RankingResult};
use crate::assessment::AssessmentProject;

/// Environment variable that overrides the data directory.
pub const DATA_ENV: &str = "PLATFORM_RATER_DATA";
const DEFAULT_ROOT: &str = "./data";
const INDEX_FILE: &str = "index.json";
const TMP_SUFFIX: &str = ".tmp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentKind {
    SingleAssessment,
    MultiAssessment,
    RankingResult,
}

impl DocumentKind {
    pub const ALL: [DocumentKind; 3] = [
        DocumentKind::SingleAssessment,
        DocumentKind::MultiAssessment,
        DocumentKind::RankingResult,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocumentKind::SingleAssessment => "single-assessment",
            DocumentKind::MultiAssessment => "multi-assessment",
            DocumentKind::RankingResult => "ranking-result",
        }
    }

    /// Checks that a payload deserializes as this kind's document type.
    pub fn validate(self, payload: &Value) -> Result<(), String> {
        let result = match self {
            DocumentKind::SingleAssessment => {
                AssessmentProject::deserialize(payload).map(|_| ())
            }
            DocumentKind::MultiAssessment => RankingInput::deserialize(payload).map(|_| ()),
            DocumentKind::RankingResult => RankingResult::deserialize(payload).map(|_| ()),
        };
        result.map_err(|e| e.to_string())
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DocumentKind {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocumentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| StoreError::Validation(format!("unknown document kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredDocument {
    pub id: String,
    pub kind: DocumentKind,
    pub version: u64,
    pub updated_at: DateTime<Utc>,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub id: String,
    pub kind: DocumentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub version: u64,
    pub updated_at: DateTime<Utc>,
}

impl From<&StoredDocument> for DocumentSummary {
    fn from(doc: &StoredDocument) -> Self {
        DocumentSummary {
            id: doc.id.clone(),
            kind: doc.kind,
            name: doc
                .payload
                .get("name")
                .and_then(Value::as_str)
                .map(str::to_string),
            version: doc.version,
            updated_at: doc.updated_at,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} {id:?} is at version {current}, expected {expected}")]
    Conflict {
        kind: DocumentKind,
        id: String,
        expected: u64,
        current: u64,
    },
    #[error("{kind} {id:?} not found")]
    NotFound { kind: DocumentKind, id: String },
    #[error("invalid document: {0}")]
    Validation(String),
    #[error("invalid document id {0:?}")]
    InvalidId(String),
    #[error("storage error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt document at {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Stages of the write path where a test can inject a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultPoint {
    /// Temporary file created and partially written.
    PartialWrite,
    /// Temporary file fully written and synced, not yet renamed.
    BeforeRename,
    /// Document renamed into place, index not yet rebuilt.
    BeforeIndex,
}

type FaultHook = Arc<dyn Fn(FaultPoint) -> io::Result<()> + Send + Sync>;
type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// Ids are restricted to a filename-safe alphabet.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// One mutex per (kind, id), created on first use.
type LockTable = HashMap<(DocumentKind, String), Arc<Mutex<()>>>;

#[derive(Clone)]
pub struct Store {
    root: PathBuf,
    locks: Arc<Mutex<LockTable>>,
    index_lock: Arc<Mutex<()>>,
    clock: Clock,
    fault: Option<FaultHook>,
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Store").field("root", &self.root).finish()
    }
}

impl Store {
    /// Opens (and creates if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for kind in DocumentKind::ALL {
            let dir = root.join(kind.as_str());
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(Store {
            root,
            locks: Arc::default(),
            index_lock: Arc::default(),
            clock: Arc::new(Utc::now),
            fault: None,
        })
    }

    /// Data directory from `PLATFORM_RATER_DATA`, or `./data`.
    pub fn root_from_env() -> PathBuf {
        std::env::var_os(DATA_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT))
    }

    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Arc::new(clock);
        self
    }

    pub fn with_fault_hook(
        mut self,
        hook: impl Fn(FaultPoint) -> io::Result<()> + Send + Sync + 'static,
    ) -> Self {
        self.fault = Some(Arc::new(hook));
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    fn path(&self, kind: DocumentKind, id: &str) -> PathBuf {
        self.root.join(kind.as_str()).join(format!("{id}.json"))
    }

    fn lock_for(&self, kind: DocumentKind, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry((kind, id.to_string())).or_default().clone()
    }

    fn inject(&self, point: FaultPoint) -> io::Result<()> {
        match &self.fault {
            Some(hook) => hook(point),
            None => Ok(()),
        }
    }

    /// Persists `payload` as the next version of `(kind, id)`.
    ///
    /// With `expected_version`, the save only applies if the stored version
    /// matches (0 meaning "must not exist yet"); otherwise nothing is written.
    pub fn save(
        &self,
        kind: DocumentKind,
        id: &str,
        payload: Value,
        expected_version: Option<u64>,
    ) -> Result<StoredDocument, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        kind.validate(&payload).map_err(StoreError::Validation)?;

        let lock = self.lock_for(kind, id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

        let current = match self.load(kind, id) {
            Ok(doc) => doc.version,
            Err(StoreError::NotFound { .. }) => 0,
            Err(e) => return Err(e),
        };
        if let Some(expected) = expected_version {
            if expected != current {
                return Err(StoreError::Conflict {
                    kind,
                    id: id.to_string(),
                    expected,
                    current,
                });
            }
        }
        let doc = StoredDocument {
            id: id.to_string(),
            kind,
            version: current + 1,
            updated_at: self.now(),
            payload,
        };
        let bytes = serde_json::to_vec_pretty(&doc).map_err(|e| StoreError::Validation(e.to_string()))?;
        let path = self.path(kind, id);
        self.write_atomic(&path, &bytes)?;
        self.inject(FaultPoint::BeforeIndex).map_err(io_err(&path))?;
        self.rebuild_index()?;
        Ok(doc)
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let dir = path.parent().expect("document path has a parent");
        let tmp = dir.join(format!(
            "{}{TMP_SUFFIX}",
            path.file_name().unwrap().to_string_lossy()
        ));
        let result = (|| {
            let mut file = File::create(&tmp)?;
            let half = bytes.len() / 2;
            file.write_all(&bytes[..half])?;
            self.inject(FaultPoint::PartialWrite)?;
            file.write_all(&bytes[half..])?;
            file.sync_all()?;
            drop(file);
            self.inject(FaultPoint::BeforeRename)?;
            fs::rename(&tmp, path)?;
            // persist the rename itself
            File::open(dir)?.sync_all()
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result.map_err(io_err(path))
    }

    pub fn load(&self, kind: DocumentKind, id: &str) -> Result<StoredDocument, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound {
                kind,
                id: id.to_string(),
            });
        }
        let path = self.path(kind, id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound {
                    kind,
                    id: id.to_string(),
                })
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path,
            message: e.to_string(),
        })
    }

    /// Summaries ordered by `updated_at` descending, then id.
    pub fn list(&self, kind: Option<DocumentKind>) -> Result<Vec<DocumentSummary>, StoreError> {
        let kinds: Vec<DocumentKind> = match kind {
            Some(k) => vec![k],
            None => DocumentKind::ALL.to_vec(),
        };
        let mut out = Vec::new();
        for k in kinds {
            let dir = self.root.join(k.as_str());
            let entries = match fs::read_dir(&dir) {
                Ok(e) => e,
                Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
                Err(e) => return Err(io_err(&dir)(e)),
            };
            for entry in entries {
                let entry = entry.map_err(io_err(&dir))?;
                let name = entry.file_name().to_string_lossy().into_owned();
                let Some(id) = name.strip_suffix(".json") else {
                    continue;
                };
                match self.load(k, id) {
                    Ok(doc) => out.push(DocumentSummary::from(&doc)),
                    // removed between read_dir and load
                    Err(StoreError::NotFound { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        out.sort_by(|a, b| {
            b.updated_at
                .cmp(&a.updated_at)
                .then_with(|| a.id.cmp(&b.id))
                .then_with(|| a.kind.cmp(&b.kind))
        });
        Ok(out)
    }

    fn rebuild_index(&self) -> Result<(), StoreError> {
        let _guard = self.index_lock.lock().unwrap_or_else(|e| e.into_inner());
        let summaries = self.list(None)?;
        let bytes = serde_json::to_vec_pretty(&summaries)
            .map_err(|e| StoreError::Validation(e.to_string()))?;
        self.write_atomic(&self.root.join(INDEX_FILE), &bytes)
    }
}
