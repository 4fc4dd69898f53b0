use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("no replay entry for request {0}")]
    MissingReplay(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Response(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("client not configured: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: "assistant".into(), content: content.into() }
    }
}

/// A chat-completions request. Field order is part of the hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ChatRequest {
    /// Hex SHA-256 of the compact JSON body; the replay key.
    pub fn hash(&self) -> String {
        let body = serde_json::to_vec(self).expect("request serializes");
        hex::encode(Sha256::digest(&body))
    }
}

pub trait ChatClient: Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError>;
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (**self).complete(request)
    }
}

/// Answers from canned responses keyed by request hash, either in memory or
/// as `<hash>.txt` files in a directory.
#[derive(Clone, Debug)]
pub enum ReplayClient {
    Dir(PathBuf),
    Map(HashMap<String, String>),
}

impl ReplayClient {
    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        ReplayClient::Dir(dir.into())
    }

    pub fn from_map(map: HashMap<String, String>) -> Self {
        ReplayClient::Map(map)
    }

    /// Path of the file that would answer `request` in directory mode.
    pub fn entry_path(dir: &Path, request: &ChatRequest) -> PathBuf {
        dir.join(format!("{}.txt", request.hash()))
    }
}

impl ChatClient for ReplayClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let hash = request.hash();
        match self {
            ReplayClient::Map(m) => m.get(&hash).cloned().ok_or(ClientError::MissingReplay(hash)),
            ReplayClient::Dir(dir) => {
                let path = dir.join(format!("{hash}.txt"));
                match fs::read_to_string(&path) {
                    Ok(s) => Ok(s),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ClientError::MissingReplay(hash)),
                    Err(e) => Err(e.into()),
                }
            }
        }
    }
}

/// Wraps a closure; handy for scripted fakes.
pub struct FnClient<F>(pub F);

impl<F> ChatClient for FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (self.0)(request)
    }
}

/// Forwards to an inner client and stores every answer in a replay
/// directory, so a live run can be replayed offline.
pub struct RecordingClient<C> {
    inner: C,
    dir: PathBuf,
}

impl<C: ChatClient> RecordingClient<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Result<Self, ClientError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { inner, dir })
    }
}

impl<C: ChatClient> ChatClient for RecordingClient<C> {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let text = self.inner.complete(request)?;
        fs::write(ReplayClient::entry_path(&self.dir, request), &text)?;
        Ok(text)
    }
}

pub const ENDPOINT_ENV: &str = "FK_API_ENDPOINT";
pub const API_KEY_ENV: &str = "FK_API_KEY";

/// Chat-completions over HTTP. Reads `choices[0].message.content`.
#[cfg(feature = "http")]
pub struct HttpChatClient {
    endpoint: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

#[cfg(feature = "http")]
impl HttpChatClient {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: std::time::Duration) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(Self { endpoint: endpoint.into(), api_key, http })
    }

    /// Endpoint from `FK_API_ENDPOINT`, optional key from `FK_API_KEY`.
    pub fn from_env(timeout: std::time::Duration) -> Result<Self, ClientError> {
        let endpoint = std::env::var(ENDPOINT_ENV).map_err(|_| ClientError::Config(format!("{ENDPOINT_ENV} is not set")))?;
        Self::new(endpoint, std::env::var(API_KEY_ENV).ok(), timeout)
    }
}

#[cfg(feature = "http")]
impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, ClientError> {
        let mut req = self.http.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ClientError::Transport(format!("HTTP {status}")));
        }
        let body: serde_json::Value = resp.json().map_err(|e| ClientError::Response(e.to_string()))?;
        body.pointer("/choices/0/message/content")
            .and_then(serde_json::Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ClientError::Response("missing choices[0].message.content".into()))
    }
}
