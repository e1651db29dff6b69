//! Versioned, in-memory case store with optional write-through to a
//! directory of `<id>.case.json` files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use cae_core::argument::{DefeaterStatus, NodeId};
use cae_core::soundness::ResolveError;
use cae_core::{build_graph, resolve_defeater, ArgumentGraph, CaseDocument, CaseError, Verdict};
use parking_lot::{Mutex, RwLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown case {0}")]
    UnknownCase(String),
    #[error("unknown version {version} of case {id}")]
    UnknownVersion { id: String, version: u64 },
    #[error("unknown defeater {0}")]
    UnknownDefeater(NodeId),
    #[error("defeater {id} is already {status}")]
    AlreadyResolved { id: NodeId, status: DefeaterStatus },
    #[error("document id {found} does not match path id {expected}")]
    IdMismatch { expected: String, found: String },
    #[error(transparent)]
    Invalid(#[from] CaseError),
    #[error("persisting {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl From<ResolveError> for StoreError {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::UnknownDefeater(id) => StoreError::UnknownDefeater(id),
            ResolveError::AlreadyResolved { id, status } => StoreError::AlreadyResolved { id, status },
        }
    }
}

/// One immutable version of a case.
#[derive(Debug)]
pub struct Snapshot {
    pub version: u64,
    pub graph: ArgumentGraph,
}

#[derive(Debug, Default)]
struct Entry {
    /// Held across read-modify-write so concurrent writers serialise.
    writer: Mutex<()>,
    versions: RwLock<Vec<Arc<Snapshot>>>,
}

impl Entry {
    fn latest(&self) -> Arc<Snapshot> {
        self.versions.read().last().cloned().expect("entries hold at least one version")
    }

    fn push(&self, graph: ArgumentGraph) -> Arc<Snapshot> {
        let mut versions = self.versions.write();
        let version = versions.last().map_or(1, |s| s.version + 1);
        let snap = Arc::new(Snapshot { version, graph });
        versions.push(snap.clone());
        snap
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CaseListing {
    pub id: String,
    pub title: String,
    pub version: u64,
    pub top_claim: NodeId,
}

#[derive(Debug, Default)]
pub struct CaseStore {
    dir: Option<PathBuf>,
    cases: RwLock<BTreeMap<String, Arc<Entry>>>,
}

impl CaseStore {
    pub fn in_memory() -> Self {
        CaseStore::default()
    }

    /// Loads every `*.json` file in `dir` and writes later changes back.
    /// Files that fail to parse or validate are skipped and reported.
    pub fn open(dir: &Path) -> Result<(Self, Vec<String>), StoreError> {
        let io = |e: std::io::Error| StoreError::Io { path: dir.to_path_buf(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(io)?;
        let store = CaseStore { dir: Some(dir.to_path_buf()), cases: RwLock::default() };
        let mut skipped = Vec::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let loaded = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| ArgumentGraph::from_json(&t).map_err(|e| e.to_string()));
            match loaded {
                Ok(graph) => {
                    let id = graph.meta().id.clone();
                    store.cases.write().entry(id).or_default().push(graph);
                }
                Err(e) => skipped.push(format!("{}: {e}", path.display())),
            }
        }
        Ok((store, skipped))
    }

    pub fn list(&self) -> Vec<CaseListing> {
        self.cases
            .read()
            .iter()
            .map(|(id, e)| {
                let s = e.latest();
                CaseListing {
                    id: id.clone(),
                    title: s.graph.meta().title.clone(),
                    version: s.version,
                    top_claim: s.graph.top_claim().id.clone(),
                }
            })
            .collect()
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, StoreError> {
        self.cases.read().get(id).cloned().ok_or_else(|| StoreError::UnknownCase(id.to_string()))
    }

    /// The latest version, or a specific one.
    pub fn get(&self, id: &str, version: Option<u64>) -> Result<Arc<Snapshot>, StoreError> {
        let entry = self.entry(id)?;
        match version {
            None => Ok(entry.latest()),
            Some(v) => entry
                .versions
                .read()
                .iter()
                .find(|s| s.version == v)
                .cloned()
                .ok_or(StoreError::UnknownVersion { id: id.to_string(), version: v }),
        }
    }

    /// Creates or replaces a case; returns the new snapshot.
    pub fn put(&self, id: &str, doc: CaseDocument) -> Result<Arc<Snapshot>, StoreError> {
        if doc.case.id != id {
            return Err(StoreError::IdMismatch { expected: id.to_string(), found: doc.case.id });
        }
        let graph = build_graph(doc)?;
        let entry = self.cases.write().entry(id.to_string()).or_default().clone();
        let _guard = entry.writer.lock();
        self.persist(id, &graph)?;
        Ok(entry.push(graph))
    }

    pub fn resolve(&self, id: &str, defeater: &NodeId, verdict: Verdict) -> Result<Arc<Snapshot>, StoreError> {
        self.update(id, |g| Ok(resolve_defeater(g, defeater, verdict)?))
    }

    /// Derives a new version from the latest one. Writers to the same case
    /// run one at a time; readers keep the snapshot they already hold.
    pub fn update(
        &self,
        id: &str,
        change: impl FnOnce(&ArgumentGraph) -> Result<ArgumentGraph, StoreError>,
    ) -> Result<Arc<Snapshot>, StoreError> {
        let entry = self.entry(id)?;
        let _guard = entry.writer.lock();
        let graph = change(&entry.latest().graph)?;
        self.persist(id, &graph)?;
        Ok(entry.push(graph))
    }

    fn persist(&self, id: &str, graph: &ArgumentGraph) -> Result<(), StoreError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(format!("{id}.case.json"));
        let tmp = dir.join(format!(".{id}.case.json.tmp"));
        let io = |e: std::io::Error| StoreError::Io { path: path.clone(), message: e.to_string() };
        fs::write(&tmp, graph.to_document().to_json_pretty()).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)
    }
}
