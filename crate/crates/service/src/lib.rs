//! HTTP+JSON service for solitaire sessions.
//!
//! Sessions live in an in-memory map; each one sits behind its own
//! `RwLock`, so actions on a game are serialized while reads see a
//! consistent snapshot and other games proceed independently. With a
//! [`FileStore`] every accepted action is persisted before it becomes
//! visible, and sessions are rebuilt by replaying their logs at startup.

pub mod config;
pub mod error;
pub mod store;

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;
use tower_http::cors::{AllowOrigin, CorsLayer};

use spotit_core::session::{self, Action, GameConfig, GameState, GameView, Hint, ProgressReport};

pub use config::ServiceConfig;
pub use error::{ApiError, ErrorBody, StoreError};
pub use store::{FileStore, StoredSession};

type Session = Arc<RwLock<GameState>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Session>>>,
    store: Option<FileStore>,
}

impl AppState {
    pub fn in_memory() -> Self {
        AppState::default()
    }

    /// Opens the store and replays every persisted session into memory.
    pub async fn with_store(store: FileStore) -> Result<Self, StoreError> {
        let mut sessions = HashMap::new();
        for stored in store.load_all().await? {
            match stored.replay() {
                Ok(state) => {
                    sessions.insert(stored.id.clone(), Arc::new(RwLock::new(state)));
                }
                Err(err) => tracing::warn!(id = %stored.id, error = %err, "dropping session whose log no longer replays"),
            }
        }
        tracing::info!(count = sessions.len(), dir = %store.dir().display(), "restored sessions");
        Ok(AppState { sessions: Arc::new(RwLock::new(sessions)), store: Some(store) })
    }

    async fn session(&self, id: &str) -> Result<Session, ApiError> {
        self.sessions.read().await.get(id).cloned().ok_or_else(|| ApiError::NotFound(id.to_owned()))
    }

    async fn persist(&self, state: &GameState) -> Result<(), ApiError> {
        if let Some(store) = &self.store {
            store.save(&StoredSession::of(state)).await?;
        }
        Ok(())
    }

    pub async fn session_count(&self) -> usize {
        self.sessions.read().await.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CreatedGame {
    pub game_id: String,
    pub state: GameView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRequest {
    pub action: Action,
}

#[derive(Debug, Clone, Serialize)]
pub struct Health {
    pub status: &'static str,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/actions", post(post_action))
        .route("/games/{id}/hint", get(get_hint))
        .route("/games/{id}/check", get(get_check))
        .with_state(state)
}

pub fn cors_layer(origins: &[String]) -> Result<CorsLayer, String> {
    let origins = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|e| format!("bad CORS origin {o:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

/// Router for a configuration: opens the store and attaches CORS if any
/// origins are allowed.
pub async fn app(config: &ServiceConfig) -> Result<Router, String> {
    let state = match &config.store {
        Some(dir) => {
            let store = FileStore::open(dir).await.map_err(|e| e.to_string())?;
            AppState::with_store(store).await.map_err(|e| e.to_string())?
        }
        None => AppState::in_memory(),
    };
    let mut app = router(state);
    if !config.cors_origins.is_empty() {
        app = app.layer(cors_layer(&config.cors_origins)?);
    }
    Ok(app)
}

pub async fn serve(config: ServiceConfig) -> Result<(), String> {
    let app = app(&config).await?;
    let listener =
        tokio::net::TcpListener::bind(config.listen).await.map_err(|e| format!("binding {}: {e}", config.listen))?;
    tracing::info!(addr = %config.listen, "listening");
    axum::serve(listener, app).await.map_err(|e| e.to_string())
}

async fn healthz() -> Json<Health> {
    Json(Health { status: "ok" })
}

async fn create_game(
    State(app): State<AppState>,
    body: Result<Json<GameConfig>, JsonRejection>,
) -> Result<Json<CreatedGame>, ApiError> {
    let Json(config) = body?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let game = session::new_game(id.clone(), config).map_err(ApiError::InvalidConfig)?;
    app.persist(&game).await?;
    let view = GameView::of(&game);
    app.sessions.write().await.insert(id.clone(), Arc::new(RwLock::new(game)));
    tracing::debug!(%id, order = config.order, seed = config.seed, "created game");
    Ok(Json(CreatedGame { game_id: id, state: view }))
}

async fn get_game(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<GameView>, ApiError> {
    let session = app.session(&id).await?;
    let game = session.read().await;
    Ok(Json(GameView::of(&game)))
}

async fn post_action(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<ActionRequest>, JsonRejection>,
) -> Result<Json<GameView>, ApiError> {
    let session = app.session(&id).await?;
    let Json(ActionRequest { action }) = body?;
    let mut game = session.write().await;
    let next = session::apply_player_action(&game, action).map_err(ApiError::Rejected)?;
    app.persist(&next).await?;
    *game = next;
    Ok(Json(GameView::of(&game)))
}

async fn get_hint(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Hint>, ApiError> {
    let session = app.session(&id).await?;
    let game = session.read().await;
    session::hint(&game).map(Json).map_err(ApiError::WrongPhase)
}

async fn get_check(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<ProgressReport>, ApiError> {
    let session = app.session(&id).await?;
    let game = session.read().await;
    session::check(&game).map(Json).map_err(ApiError::WrongPhase)
}
