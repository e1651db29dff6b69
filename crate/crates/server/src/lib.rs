//! HTTP service over a directory of assurance cases.
//!
//! Reads are served from immutable snapshots and never block; writes to one
//! case are serialised and each returns the new version number. Earlier
//! versions stay readable through `?version=`.

mod api;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use tower_http::services::ServeDir;

pub use api::{ApiError, AppState, CaseView, VersionRef, WhatIfView};
pub use store::{CaseListing, CaseStore, Snapshot, StoreError};

pub const PORT_ENV: &str = "CAE_PORT";
pub const CASES_DIR_ENV: &str = "CAE_CASES_DIR";
pub const UI_DIR_ENV: &str = "CAE_UI_DIR";
pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub port: u16,
    /// Loaded at startup and written through on every change.
    pub cases_dir: Option<PathBuf>,
    /// Static assets served under `/ui`.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { port: DEFAULT_PORT, cases_dir: None, ui_dir: None }
    }
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, String> {
        let port = match std::env::var(PORT_ENV) {
            Ok(p) => p.parse().map_err(|_| format!("{PORT_ENV}={p} is not a port number"))?,
            Err(_) => DEFAULT_PORT,
        };
        Ok(ServiceConfig {
            port,
            cases_dir: std::env::var_os(CASES_DIR_ENV).map(PathBuf::from),
            ui_dir: std::env::var_os(UI_DIR_ENV).map(PathBuf::from),
        })
    }
}

pub fn router(store: AppState, ui_dir: Option<PathBuf>) -> Router {
    let router = Router::new()
        .route("/cases", get(api::list_cases))
        .route("/cases/{id}", get(api::get_case).put(api::put_case))
        .route("/cases/{id}/defeaters/{defeater}/resolve", post(api::resolve))
        .route("/cases/{id}/assignments", post(api::set_assignments))
        .route("/cases/{id}/whatif", post(api::whatif_case))
        .route("/cases/{id}/prioritisation", get(api::prioritisation))
        .route("/cases/{id}/report/summary.svg", get(api::summary_svg))
        .route("/delphi/sessions", post(api::delphi_session))
        .with_state(store);
    match ui_dir {
        Some(dir) => router.nest_service("/ui", ServeDir::new(dir)),
        None => router,
    }
}

/// Opens the case directory (or an empty in-memory store) and builds the
/// router. Unreadable case files are skipped with a warning.
pub fn app(config: &ServiceConfig) -> Result<Router, StoreError> {
    let store = match &config.cases_dir {
        Some(dir) => {
            let (store, skipped) = CaseStore::open(dir)?;
            for s in skipped {
                tracing::warn!("skipping {s}");
            }
            store
        }
        None => CaseStore::in_memory(),
    };
    Ok(router(Arc::new(store), config.ui_dir.clone()))
}

pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let app = app(&config).map_err(std::io::Error::other)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await
}
