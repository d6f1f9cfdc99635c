//! Chat-completions client with bounded retries. Transport failures, 429 and
//! 5xx are retried with exponential backoff; everything else is terminal.

use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{PlannerConfig, PlannerError, RetryConfig};

/// Bearer token read from the environment at request time, if present.
pub const API_KEY_VAR: &str = "BENCHTOP_API_KEY";

pub struct RemoteClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    max_tokens: u32,
    retry: RetryConfig,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

impl RemoteClient {
    pub fn from_config(config: &PlannerConfig) -> Result<Self, String> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| "remote planner needs an endpoint".to_string())?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| format!("http client: {e}"))?;
        Ok(Self {
            http,
            endpoint,
            model: config.model.clone().unwrap_or_else(|| "default".into()),
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            retry: config.retry.clone(),
        })
    }

    pub fn complete(&self, prompt: &str) -> Result<String, PlannerError> {
        let mut last = PlannerError::Network("no attempt made".into());
        for attempt in 1..=self.retry.max_attempts {
            if attempt > 1 {
                thread::sleep(Duration::from_millis(
                    self.retry.backoff_base_ms << (attempt - 2).min(16),
                ));
            }
            match self.request(prompt) {
                Ok(text) => return Ok(text),
                Err(err) if is_transient(&err) => {
                    log::debug!("planner attempt {attempt} failed: {err}");
                    last = err;
                }
                Err(err) => return Err(err),
            }
        }
        Err(PlannerError::RetriesExhausted {
            attempts: self.retry.max_attempts,
            last: Box::new(last),
        })
    }

    fn request(&self, prompt: &str) -> Result<String, PlannerError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        });
        let mut req = self.http.post(&self.endpoint).json(&body);
        if let Ok(key) = std::env::var(API_KEY_VAR) {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(classify_transport)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(PlannerError::HttpStatus(status.as_u16()));
        }
        let parsed: ChatResponse = resp
            .json()
            .map_err(|e| PlannerError::MalformedResponse(e.to_string()))?;
        parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| PlannerError::MalformedResponse("empty choices array".into()))
    }
}

fn is_transient(err: &PlannerError) -> bool {
    matches!(
        err,
        PlannerError::Timeout
            | PlannerError::Network(_)
            | PlannerError::HttpStatus(429 | 500..=599)
    )
}

fn classify_transport(err: reqwest::Error) -> PlannerError {
    if err.is_timeout() {
        PlannerError::Timeout
    } else {
        PlannerError::Network(err.to_string())
    }
}
