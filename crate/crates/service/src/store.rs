//! Session store: in memory, optionally mirrored to one JSON file per session.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use tokio::sync::Mutex;
use uuid::Uuid;

use crate::error::{Result, ServiceError};
use crate::session::{Session, SessionState, Snapshot};

/// Sessions are independent; the per-session mutex serializes operations on
/// one session while others proceed.
#[derive(Default)]
pub struct Store {
    sessions: RwLock<HashMap<Uuid, Arc<Mutex<Session>>>>,
    dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Persists to `dir`, loading any snapshots already there.
    pub fn persistent(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(storage)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir).map_err(storage)? {
            let path = entry.map_err(storage)?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = fs::read_to_string(&path).map_err(storage)?;
                let snap: Snapshot = serde_json::from_str(&text)
                    .map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))?;
                let session = Session::restore(snap)?;
                sessions.insert(session.id, Arc::new(Mutex::new(session)));
            }
        }
        log::info!("loaded {} sessions from {}", sessions.len(), dir.display());
        Ok(Store { sessions: RwLock::new(sessions), dir: Some(dir) })
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, session: Session) -> Result<Uuid> {
        self.write(&session.snapshot())?;
        let id = session.id;
        self.sessions.write().expect("store lock").insert(id, Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn get(&self, id: Uuid) -> Result<Arc<Mutex<Session>>> {
        self.sessions.read().expect("store lock").get(&id).cloned().ok_or(ServiceError::NotFound(id))
    }

    /// Writes the new state out first and only then installs it, so memory and
    /// disk never disagree after a failure.
    pub fn commit(&self, session: &mut Session, next: SessionState) -> Result<()> {
        if self.dir.is_some() {
            let mut snap = session.snapshot();
            snap.state = next.clone();
            self.write(&snap)?;
        }
        session.state = next;
        Ok(())
    }

    fn write(&self, snap: &Snapshot) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let text = serde_json::to_string(snap).map_err(|e| ServiceError::Storage(e.to_string()))?;
        let tmp = dir.join(format!("{}.json.tmp", snap.id));
        fs::write(&tmp, text).map_err(storage)?;
        fs::rename(&tmp, path_for(dir, snap.id)).map_err(storage)
    }
}

fn path_for(dir: &Path, id: Uuid) -> PathBuf {
    dir.join(format!("{id}.json"))
}

fn storage(e: std::io::Error) -> ServiceError {
    ServiceError::Storage(e.to_string())
}
