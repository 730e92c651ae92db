//! Crash-safe persistence: each session is stored as its configuration
//! plus the accepted action log, one JSON file per game, replaced
//! atomically (write to a temporary file, then rename).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spotit_core::session::{replay, Action, GameConfig, GameState};

use crate::error::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredSession {
    pub id: String,
    pub config: GameConfig,
    pub actions: Vec<Action>,
}

impl StoredSession {
    pub fn of(state: &GameState) -> Self {
        StoredSession { id: state.id.clone(), config: state.config, actions: state.actions.clone() }
    }

    pub fn replay(&self) -> spotit_core::Result<GameState> {
        replay(self.id.clone(), self.config, &self.actions)
    }
}

#[derive(Debug, Clone)]
pub struct FileStore {
    dir: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.display().to_string(), source }
}

/// Game ids are generated server-side, but files are named after them, so
/// anything outside `[A-Za-z0-9_-]` is refused rather than escaped.
fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl FileStore {
    pub async fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        tokio::fs::create_dir_all(&dir).await.map_err(io_err(&dir))?;
        Ok(FileStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    pub async fn save(&self, session: &StoredSession) -> Result<(), StoreError> {
        if !valid_id(&session.id) {
            return Err(StoreError::Io {
                path: session.id.clone(),
                source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "unsafe game id"),
            });
        }
        let bytes = serde_json::to_vec_pretty(session)
            .map_err(|source| StoreError::Encode { id: session.id.clone(), source })?;
        let path = self.path_for(&session.id);
        let tmp = self.dir.join(format!(".{}.json.tmp", session.id));
        tokio::fs::write(&tmp, &bytes).await.map_err(io_err(&tmp))?;
        tokio::fs::rename(&tmp, &path).await.map_err(io_err(&path))?;
        Ok(())
    }

    /// Every readable session file; unparsable files are skipped with a
    /// warning so one bad file cannot keep the service down.
    pub async fn load_all(&self) -> Result<Vec<StoredSession>, StoreError> {
        let mut entries = tokio::fs::read_dir(&self.dir).await.map_err(io_err(&self.dir))?;
        let mut sessions = Vec::new();
        while let Some(entry) = entries.next_entry().await.map_err(io_err(&self.dir))? {
            let path = entry.path();
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with('.') || path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let bytes = tokio::fs::read(&path).await.map_err(io_err(&path))?;
            match serde_json::from_slice::<StoredSession>(&bytes) {
                Ok(session) => sessions.push(session),
                Err(err) => tracing::warn!(path = %path.display(), error = %err, "skipping unreadable session file"),
            }
        }
        sessions.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(sessions)
    }
}
