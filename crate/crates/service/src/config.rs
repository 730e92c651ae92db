use std::net::SocketAddr;
use std::path::PathBuf;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

/// Service settings. `from_env` reads `SPOTIT_ADDR`, `SPOTIT_STORE` and
/// `SPOTIT_CORS` (comma-separated origins); explicit values override them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Directory for session files; `None` keeps sessions in memory only.
    pub store: Option<PathBuf>,
    /// Origins allowed to call the API from a browser. Empty disables CORS.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig { listen: DEFAULT_ADDR.parse().expect("valid default address"), store: None, cors_origins: Vec::new() }
    }
}

pub fn parse_origins(list: &str) -> Vec<String> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned).collect()
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, String> {
        let mut config = ServiceConfig::default();
        if let Ok(addr) = std::env::var("SPOTIT_ADDR") {
            config.listen = addr.parse().map_err(|e| format!("SPOTIT_ADDR={addr}: {e}"))?;
        }
        if let Ok(store) = std::env::var("SPOTIT_STORE") {
            config.store = Some(PathBuf::from(store));
        }
        if let Ok(origins) = std::env::var("SPOTIT_CORS") {
            config.cors_origins = parse_origins(&origins);
        }
        Ok(config)
    }
}
