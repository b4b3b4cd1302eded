//! Chat-completion client for a remote model.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::objective::BestRestSplit;

use super::prompt::PromptBundle;
use super::{Exchange, SynthesisError, Synthesizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub key_env: String,
    pub timeout_secs: u64,
    /// Upper bound on calls in flight across all threads.
    pub max_concurrent: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-4o-mini".to_string(),
            key_env: "OPENAI_API_KEY".to_string(),
            timeout_secs: 60,
            max_concurrent: 4,
        }
    }
}

/// Counting semaphore.
#[derive(Debug)]
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn enter(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

pub struct RemoteSynthesizer {
    config: RemoteConfig,
    key: String,
    agent: ureq::Agent,
    gate: Gate,
}

/// Request body for the chat contract.
pub fn request_body(model: &str, prompt: &PromptBundle) -> Value {
    let messages: Vec<Value> = prompt
        .messages()
        .into_iter()
        .map(|(role, content)| json!({ "role": role, "content": content }))
        .collect();
    json!({ "model": model, "messages": messages })
}

/// Pull the completion text out of a chat response.
pub fn completion_text(body: &str) -> Result<String, SynthesisError> {
    let v: Value = serde_json::from_str(body).map_err(|e| SynthesisError::Remote(format!("bad JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| SynthesisError::Remote("response has no choices[0].message.content".into()))
}

impl RemoteSynthesizer {
    /// Fails when the key variable is unset or empty.
    pub fn new(config: RemoteConfig) -> Result<Self, SynthesisError> {
        let key = std::env::var(&config.key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| SynthesisError::MissingKey(config.key_env.clone()))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Gate::new(config.max_concurrent);
        Ok(RemoteSynthesizer { config, key, agent, gate })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }
}

impl Synthesizer for RemoteSynthesizer {
    fn name(&self) -> &str {
        "remote"
    }

    fn complete(&self, prompt: &PromptBundle, _split: &BestRestSplit, _ds: &Dataset) -> Result<Exchange, SynthesisError> {
        let request = request_body(&self.config.model, prompt).to_string();
        let _slot = self.gate.enter();
        let mut resp = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.key))
            .header("Content-Type", "application/json")
            .send(&request)
            .map_err(|e| SynthesisError::Remote(e.to_string()))?;
        let status = resp.status();
        let response = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| SynthesisError::Remote(e.to_string()))?;
        if !status.is_success() {
            return Err(SynthesisError::Remote(format!("HTTP {status}: {response}")));
        }
        let text = completion_text(&response)?;
        Ok(Exchange { request, response, text })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn body_has_model_and_two_messages() {
        let p = PromptBundle {
            system: "sys".into(),
            examples: "ex".into(),
            task: "do".into(),
        };
        let v = request_body("m1", &p);
        assert_eq!(v["model"], "m1");
        assert_eq!(v["messages"][0]["role"], "system");
        assert_eq!(v["messages"][1]["content"], "ex\n\ndo");
    }

    #[test]
    fn extracts_completion() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(completion_text(body).unwrap(), "hi");
        assert!(completion_text("{}").is_err());
        assert!(completion_text("nope").is_err());
    }

    #[test]
    fn missing_key_is_a_config_error() {
        let cfg = RemoteConfig {
            key_env: "FRUGAL_TEST_KEY_THAT_IS_NOT_SET".into(),
            ..RemoteConfig::default()
        };
        assert!(matches!(RemoteSynthesizer::new(cfg), Err(SynthesisError::MissingKey(_))));
    }

    #[test]
    fn gate_bounds_concurrency() {
        let gate = Arc::new(Gate::new(2));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (gate, live, peak) = (gate.clone(), live.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _g = gate.enter();
                    let now = live.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    live.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
