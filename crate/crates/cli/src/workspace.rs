//! On-disk workspace: registered graphs, materialized collections, and run
//! outputs, tracked by a JSON manifest.
//!
//! Layout under the workspace root:
//!   manifest.json
//!   graphs/<name>.nodes.csv, <name>.edges.csv, <name>.idmap
//!   collections/<name>.eds
//!   runs/<run files>
//!
//! One command at a time: a lock file guards the root. Manifest updates are
//! written to a temp file and renamed, so failed commands leave no partial
//! entries.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strata_graph::{load_graph, PropertyGraph};

pub const WORKSPACE_ENV: &str = "STRATA_WORKSPACE";

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("a graph or collection named `{0}` already exists")]
    NameExists(String),
    #[error("no graph named `{0}` is registered")]
    UnknownGraph(String),
    #[error("no collection named `{0}` is materialized")]
    UnknownCollection(String),
    #[error("workspace is locked by another command (remove {0} if stale)")]
    Locked(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest is corrupt: {0}")]
    BadManifest(String),
    #[error(transparent)]
    Graph(#[from] strata_graph::GraphError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphEntry {
    pub nodes_file: String,
    pub edges_file: String,
    pub idmap_file: String,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollectionEntry {
    pub graph: String,
    pub eds_file: String,
    pub views: usize,
    pub diffs: u64,
    /// Stream order as original view indices.
    pub order: Vec<usize>,
    pub view_names: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Manifest {
    pub graphs: BTreeMap<String, GraphEntry>,
    pub collections: BTreeMap<String, CollectionEntry>,
}

pub struct Workspace {
    root: PathBuf,
    manifest: Manifest,
    _lock: LockFile,
}

struct LockFile {
    path: PathBuf,
}

impl Drop for LockFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Workspace {
    /// Opens (creating if needed) the workspace at `root` and takes the
    /// command lock.
    pub fn open(root: &Path) -> Result<Workspace, WorkspaceError> {
        for sub in ["graphs", "collections", "runs"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        let lock_path = root.join(".lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock_path)
        {
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(WorkspaceError::Locked(lock_path));
            }
            Err(e) => return Err(io_err(&lock_path)(e)),
        }
        let lock = LockFile { path: lock_path };

        let manifest_path = root.join("manifest.json");
        let manifest = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
            serde_json::from_str(&text)
                .map_err(|e| WorkspaceError::BadManifest(e.to_string()))?
        } else {
            Manifest::default()
        };
        Ok(Workspace {
            root: root.to_path_buf(),
            manifest,
            _lock: lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn save_manifest(&self) -> Result<(), WorkspaceError> {
        let path = self.root.join("manifest.json");
        let tmp = self.root.join("manifest.json.tmp");
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| WorkspaceError::BadManifest(e.to_string()))?;
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        Ok(())
    }

    pub fn graph_path(&self, name: &str) -> (PathBuf, PathBuf) {
        (
            self.root.join("graphs").join(format!("{name}.nodes.csv")),
            self.root.join("graphs").join(format!("{name}.edges.csv")),
        )
    }

    pub fn collection_path(&self, name: &str) -> PathBuf {
        self.root.join("collections").join(format!("{name}.eds"))
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join("runs")
    }

    fn name_in_use(&self, name: &str) -> bool {
        self.manifest.graphs.contains_key(name) || self.manifest.collections.contains_key(name)
    }

    /// Loads and validates a graph, stores its canonical dump plus the
    /// external-id mapping under the workspace, and registers it.
    pub fn register_graph(
        &mut self,
        name: &str,
        node_file: &Path,
        edge_file: &Path,
    ) -> Result<GraphEntry, WorkspaceError> {
        if self.name_in_use(name) {
            return Err(WorkspaceError::NameExists(name.to_string()));
        }
        let graph = load_graph(node_file, edge_file)?;
        self.store_graph(name, &graph)
    }

    /// Registers an already-built graph (generators, summary graphs).
    pub fn store_graph(
        &mut self,
        name: &str,
        graph: &PropertyGraph,
    ) -> Result<GraphEntry, WorkspaceError> {
        if self.name_in_use(name) {
            return Err(WorkspaceError::NameExists(name.to_string()));
        }
        let (nodes_path, edges_path) = self.graph_path(name);
        graph.dump(&nodes_path, &edges_path)?;
        let idmap_path = self.root.join("graphs").join(format!("{name}.idmap"));
        let mut idmap = String::from("internal,external\n");
        for nid in 0..graph.node_count() as u32 {
            idmap.push_str(&format!("{nid},{}\n", graph.external_id(nid)));
        }
        fs::write(&idmap_path, idmap).map_err(io_err(&idmap_path))?;

        let entry = GraphEntry {
            nodes_file: nodes_path.to_string_lossy().into_owned(),
            edges_file: edges_path.to_string_lossy().into_owned(),
            idmap_file: idmap_path.to_string_lossy().into_owned(),
            nodes: graph.node_count(),
            edges: graph.edge_count(),
        };
        self.manifest.graphs.insert(name.to_string(), entry.clone());
        self.save_manifest()?;
        Ok(entry)
    }

    pub fn load_registered_graph(&self, name: &str) -> Result<PropertyGraph, WorkspaceError> {
        let entry = self
            .manifest
            .graphs
            .get(name)
            .ok_or_else(|| WorkspaceError::UnknownGraph(name.to_string()))?;
        Ok(load_graph(
            Path::new(&entry.nodes_file),
            Path::new(&entry.edges_file),
        )?)
    }

    pub fn register_collection(
        &mut self,
        name: &str,
        entry: CollectionEntry,
        eds_text: &str,
    ) -> Result<(), WorkspaceError> {
        if self.name_in_use(name) {
            return Err(WorkspaceError::NameExists(name.to_string()));
        }
        let path = self.collection_path(name);
        fs::write(&path, eds_text).map_err(io_err(&path))?;
        self.manifest
            .collections
            .insert(name.to_string(), entry);
        self.save_manifest()?;
        Ok(())
    }

    pub fn collection_entry(&self, name: &str) -> Result<&CollectionEntry, WorkspaceError> {
        self.manifest
            .collections
            .get(name)
            .ok_or_else(|| WorkspaceError::UnknownCollection(name.to_string()))
    }

    pub fn read_collection(&self, name: &str) -> Result<String, WorkspaceError> {
        let path = self.collection_path(name);
        fs::read_to_string(&path).map_err(io_err(&path))
    }

    pub fn write_run_file(&self, file: &str, text: &str) -> Result<PathBuf, WorkspaceError> {
        let path = self.runs_dir().join(file);
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }
}
