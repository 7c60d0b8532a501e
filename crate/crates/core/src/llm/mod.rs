//! Uniform text-generation boundary: prompt construction plus scripted-stub
//! and remote chat-completions backends.

mod backend;
mod prompt;

pub use backend::{
    Backend, BackendSpec, GenRequest, LlmError, RemoteBackend, StubBackend, COLLECT_TEMPERATURE,
    DEFAULT_MAX_TOKENS, DEFAULT_PARALLELISM, DEFAULT_REQUEST_TIMEOUT, DEFAULT_SAMPLE_COUNT,
    EVAL_TEMPERATURE,
};
pub use prompt::{build_prompt, Exemplar, FewShotSet, EXEMPLAR_SEPARATOR, PREAMBLE};
