//! Text-generation backends: a deterministic scripted stub for tests and
//! offline runs, and an HTTP client speaking the common chat-completions
//! convention for hosted models.

use crate::artifact;
use crate::types::Modality;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

pub const COLLECT_TEMPERATURE: f64 = 1.0;
pub const EVAL_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_TOKENS: u32 = 2048;
pub const DEFAULT_SAMPLE_COUNT: u32 = 10;
/// Problems handled concurrently when a pipeline drives this client.
pub const DEFAULT_PARALLELISM: usize = 8;
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("backend unavailable: {message}")]
    BackendUnavailable { message: String },

    #[error("authentication failed: {message}")]
    AuthError { message: String },

    #[error("stub table has no entry for ({problem_id}, {modality}, {sample_index})")]
    StubMiss { problem_id: String, modality: Modality, sample_index: u32 },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One sampling request. `problem_id` and `modality` identify the request for
/// the stub's response table and for logging; the remote backend sends only
/// the prompt and sampling parameters.
#[derive(Debug, Clone)]
pub struct GenRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub n_samples: u32,
    pub seed: Option<u64>,
    pub problem_id: String,
    pub modality: Modality,
}

impl GenRequest {
    /// Trajectory-collection defaults: temperature 1.0, 2048 tokens, 10 samples.
    pub fn collection(prompt: String, problem_id: &str, modality: Modality) -> Self {
        GenRequest {
            prompt,
            temperature: COLLECT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            n_samples: DEFAULT_SAMPLE_COUNT,
            seed: None,
            problem_id: problem_id.to_string(),
            modality,
        }
    }

    /// Evaluation defaults: temperature 0.7, 2048 tokens, one sample.
    pub fn evaluation(prompt: String, problem_id: &str, modality: Modality) -> Self {
        GenRequest {
            prompt,
            temperature: EVAL_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            n_samples: 1,
            seed: None,
            problem_id: problem_id.to_string(),
            modality,
        }
    }
}

fn default_auth_env() -> String {
    "MOT_API_KEY".into()
}

/// Serializable backend configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendSpec {
    /// Scripted responses keyed by (problem_id, modality, sample_index).
    Stub { table: PathBuf },
    /// Chat-completions endpoint; the API key is read from `auth_env`.
    Remote {
        endpoint: String,
        model: String,
        #[serde(default = "default_auth_env")]
        auth_env: String,
    },
}

impl BackendSpec {
    /// Parse the compact CLI form: `stub:<table.jsonl>` or
    /// `remote:<model>@<endpoint>[#<AUTH_ENV>]`.
    pub fn parse(s: &str) -> Result<BackendSpec, String> {
        if let Some(path) = s.strip_prefix("stub:") {
            return Ok(BackendSpec::Stub { table: PathBuf::from(path) });
        }
        if let Some(rest) = s.strip_prefix("remote:") {
            let (model, rest) = rest
                .split_once('@')
                .ok_or_else(|| "remote backend needs <model>@<endpoint>".to_string())?;
            let (endpoint, auth_env) = match rest.split_once('#') {
                Some((e, env)) => (e, env.to_string()),
                None => (rest, default_auth_env()),
            };
            if model.is_empty() || endpoint.is_empty() {
                return Err("remote backend needs <model>@<endpoint>".into());
            }
            return Ok(BackendSpec::Remote {
                endpoint: endpoint.to_string(),
                model: model.to_string(),
                auth_env,
            });
        }
        Err(format!("unrecognized backend spec {s:?} (use stub:<path> or remote:<model>@<url>)"))
    }
}

#[derive(Debug, Deserialize)]
struct StubRecord {
    problem_id: String,
    modality: Modality,
    sample_index: u32,
    text: String,
}

/// In-memory response table loaded from a stub JSONL file.
#[derive(Debug, Clone)]
pub struct StubBackend {
    table: Arc<HashMap<(String, Modality, u32), String>>,
}

impl StubBackend {
    pub fn load(path: &Path) -> Result<StubBackend, LlmError> {
        let (_, lines) = artifact::read_jsonl(path)?;
        let mut table = HashMap::with_capacity(lines.len());
        for (line_no, line) in lines {
            let rec: StubRecord = serde_json::from_str(&line).map_err(|e| LlmError::Schema {
                line: line_no,
                message: format!("malformed stub record: {e}"),
            })?;
            table.insert((rec.problem_id, rec.modality, rec.sample_index), rec.text);
        }
        Ok(StubBackend { table: Arc::new(table) })
    }

    pub fn generate(&self, req: &GenRequest) -> Result<Vec<String>, LlmError> {
        (0..req.n_samples)
            .map(|i| {
                self.table
                    .get(&(req.problem_id.clone(), req.modality, i))
                    .cloned()
                    .ok_or_else(|| LlmError::StubMiss {
                        problem_id: req.problem_id.clone(),
                        modality: req.modality,
                        sample_index: i,
                    })
            })
            .collect()
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
    n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

/// HTTP chat-completions client with exponential-backoff retries.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    url: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    max_retries: u32,
    retry_base: Duration,
}

enum Attempt {
    Retry(String),
    Fatal(LlmError),
}

impl RemoteBackend {
    pub fn new(endpoint: &str, model: &str, auth_env: &str) -> RemoteBackend {
        let trimmed = endpoint.trim_end_matches('/');
        let url = if trimmed.ends_with("/chat/completions") {
            trimmed.to_string()
        } else {
            format!("{trimmed}/v1/chat/completions")
        };
        RemoteBackend {
            url,
            model: model.to_string(),
            api_key: std::env::var(auth_env).ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(DEFAULT_REQUEST_TIMEOUT)
                .build()
                .expect("client builds"),
            max_retries: 3,
            retry_base: Duration::from_millis(500),
        }
    }

    pub fn with_retry(mut self, max_retries: u32, retry_base: Duration) -> RemoteBackend {
        self.max_retries = max_retries;
        self.retry_base = retry_base;
        self
    }

    pub fn with_model(&self, model: &str) -> RemoteBackend {
        let mut next = self.clone();
        next.model = model.to_string();
        next
    }

    fn try_once(&self, req: &GenRequest) -> Result<Vec<String>, Attempt> {
        let body = ChatRequest {
            model: &self.model,
            messages: vec![ChatMessage { role: "user", content: &req.prompt }],
            temperature: req.temperature,
            max_tokens: req.max_tokens,
            n: req.n_samples,
            seed: req.seed,
        };
        let mut http = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            http = http.bearer_auth(key);
        }
        let response = http.send().map_err(|e| Attempt::Retry(format!("request failed: {e}")))?;
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(Attempt::Fatal(LlmError::AuthError {
                message: format!("{} from {}", status, self.url),
            }));
        }
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retry(format!("{status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(LlmError::BackendUnavailable {
                message: format!("{} from {}", status, self.url),
            }));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| Attempt::Retry(format!("unparseable response: {e}")))?;
        if parsed.choices.len() != req.n_samples as usize {
            // Partial responses are discarded; a retry must return all samples.
            return Err(Attempt::Retry(format!(
                "expected {} samples, got {}",
                req.n_samples,
                parsed.choices.len()
            )));
        }
        Ok(parsed.choices.into_iter().map(|c| c.message.content).collect())
    }

    pub fn generate(&self, req: &GenRequest) -> Result<Vec<String>, LlmError> {
        let mut attempt = 0u32;
        loop {
            match self.try_once(req) {
                Ok(texts) => return Ok(texts),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(message)) => {
                    if attempt >= self.max_retries {
                        return Err(LlmError::BackendUnavailable { message });
                    }
                    std::thread::sleep(self.retry_base * 2u32.pow(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

/// A ready-to-use backend built from a [`BackendSpec`].
#[derive(Debug, Clone)]
pub enum Backend {
    Stub(StubBackend),
    Remote(RemoteBackend),
}

impl Backend {
    pub fn from_spec(spec: &BackendSpec) -> Result<Backend, LlmError> {
        match spec {
            BackendSpec::Stub { table } => Ok(Backend::Stub(StubBackend::load(table)?)),
            BackendSpec::Remote { endpoint, model, auth_env } => {
                Ok(Backend::Remote(RemoteBackend::new(endpoint, model, auth_env)))
            }
        }
    }

    /// Sample exactly `n_samples` texts. Stub responses are order-stable;
    /// remote failures are retried with exponential backoff and partial
    /// results are never returned.
    pub fn generate(&self, req: &GenRequest) -> Result<Vec<String>, LlmError> {
        let texts = match self {
            Backend::Stub(stub) => stub.generate(req)?,
            Backend::Remote(remote) => remote.generate(req)?,
        };
        debug_assert_eq!(texts.len(), req.n_samples as usize);
        Ok(texts)
    }

    /// The same backend pointed at a different model identifier. The stub is
    /// model-agnostic and returned unchanged.
    pub fn with_model(&self, model: &str) -> Backend {
        match self {
            Backend::Stub(stub) => Backend::Stub(stub.clone()),
            Backend::Remote(remote) => Backend::Remote(remote.with_model(model)),
        }
    }
}
