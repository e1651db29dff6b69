use std::sync::OnceLock;
use std::time::Duration;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::Serialize;

use super::{BackendError, ExpertBackend, ExpertRequest};

pub const ENDPOINT_ENV: &str = "CAE_REMOTE_ENDPOINT";
pub const TOKEN_ENV: &str = "CAE_REMOTE_TOKEN";

/// Posts a role-conditioned prompt to a text-generation endpoint and reads
/// a percentage from the reply.
pub struct RemoteBackend {
    endpoint: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct Completion<'a> {
    prompt: &'a str,
    temperature: f64,
    seed: u64,
}

impl RemoteBackend {
    pub fn new(endpoint: String, token: Option<String>) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(RemoteBackend { endpoint, token, client })
    }

    pub fn from_env() -> Result<Self, BackendError> {
        let endpoint =
            std::env::var(ENDPOINT_ENV).map_err(|_| BackendError::Transport(format!("{ENDPOINT_ENV} is not set")))?;
        Self::new(endpoint, std::env::var(TOKEN_ENV).ok())
    }
}

/// First percentage in `text`, as a fraction.
pub(crate) fn parse_percentage(text: &str) -> Option<f64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(\d+(?:\.\d+)?)\s*%").expect("valid pattern"));
    re.captures(text)?.get(1)?.as_str().parse::<f64>().ok().map(|p| p / 100.0)
}

fn reply_text(body: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(body) {
        Ok(v) => ["text", "completion", "output", "response"]
            .iter()
            .find_map(|k| v.get(k).and_then(|t| t.as_str()).map(String::from))
            .unwrap_or_else(|| body.to_string()),
        Err(_) => body.to_string(),
    }
}

impl ExpertBackend for RemoteBackend {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn submit(&self, req: &ExpertRequest<'_>, rng: &mut ChaCha8Rng) -> Result<f64, BackendError> {
        let prompt = req.prompt();
        let mut call = self
            .client
            .post(&self.endpoint)
            .json(&Completion { prompt: &prompt, temperature: req.temperature, seed: rng.random() });
        if let Some(t) = &self.token {
            call = call.bearer_auth(t);
        }
        let resp = call.send().map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        let body = resp.text().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(BackendError::Transport(format!("HTTP {status}")));
        }
        let text = reply_text(&body);
        parse_percentage(&text).ok_or(BackendError::Unparseable(text))
    }
}
