use super::{render_prompt, PromptTemplates, Reasoner, ReasonerDecision, ReasonerQuery, ScriptedReasoner};
use crate::config::RemoteConfig;
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("network error: {0}")]
    Network(String),
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Debug, Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Debug, Deserialize)]
struct RawDecision {
    chosen: serde_json::Value,
    #[serde(default)]
    confidence: Option<f64>,
    #[serde(default)]
    rationale: Option<String>,
}

/// Chat-completion client. Any failure ends in the scripted decision with
/// `fallback` set, so an episode never stops on a reasoner error.
pub struct RemoteReasoner {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    api_key: Option<String>,
    templates: PromptTemplates,
    fallback: ScriptedReasoner,
}

impl RemoteReasoner {
    /// The key is read from the environment variable named in the config.
    pub fn new(cfg: &RemoteConfig, templates: PromptTemplates, fallback: ScriptedReasoner) -> Result<Self, RemoteError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_s))
            .build()
            .map_err(|e| RemoteError::Network(e.to_string()))?;
        Ok(Self {
            client,
            url: cfg.url.clone(),
            model: cfg.model.clone(),
            api_key: std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty()),
            templates,
            fallback,
        })
    }

    fn chat(&self, messages: &[serde_json::Value]) -> Result<String, RemoteError> {
        let body = json!({ "model": self.model, "messages": messages, "temperature": 0 });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| RemoteError::Network(e.to_string()))?;
        let status = resp.status();
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            return Err(RemoteError::Auth(status.as_u16()));
        }
        if !status.is_success() {
            return Err(RemoteError::Network(format!("HTTP {status}")));
        }
        let parsed: ChatResponse = resp.json().map_err(|e| RemoteError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| RemoteError::Malformed("no choices".into()))
    }

    /// One round trip plus at most one format retry.
    pub fn try_decide(&self, query: &ReasonerQuery) -> Result<ReasonerDecision, RemoteError> {
        let mut messages = vec![
            json!({"role": "system", "content": self.templates.system}),
            json!({"role": "user", "content": render_prompt(&self.templates, query)}),
        ];
        let first = self.chat(&messages)?;
        match parse_decision(&first, query) {
            Ok(d) => Ok(d),
            Err(e) => {
                log::warn!("reasoner reply rejected ({e}), retrying once");
                messages.push(json!({"role": "assistant", "content": first}));
                messages.push(json!({"role": "user", "content": self.templates.format_reminder}));
                let second = self.chat(&messages)?;
                parse_decision(&second, query)
            }
        }
    }
}

impl Reasoner for RemoteReasoner {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision {
        match self.try_decide(query) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("{} query fell back to scripted rules: {e}", query.kind.name());
                let mut d = self.fallback.decide(query);
                d.fallback = true;
                d.error = Some(e.to_string());
                d
            }
        }
    }
}

fn strip_fences(s: &str) -> &str {
    let t = s.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.strip_suffix("```").unwrap_or(rest).trim()
}

/// Parses `{"chosen": .., "confidence": .., "rationale": ..}` and checks the
/// indices against the candidate list.
pub(crate) fn parse_decision(content: &str, query: &ReasonerQuery) -> Result<ReasonerDecision, RemoteError> {
    let raw: RawDecision =
        serde_json::from_str(strip_fences(content)).map_err(|e| RemoteError::Malformed(e.to_string()))?;
    let chosen: Vec<usize> = match raw.chosen {
        serde_json::Value::Array(items) => items
            .iter()
            .map(|v| v.as_u64().map(|i| i as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| RemoteError::Malformed("chosen holds a non-index".into()))?,
        v => vec![v.as_u64().ok_or_else(|| RemoteError::Malformed("chosen is not an index".into()))? as usize],
    };
    if !query.kind.allows_many() && chosen.len() != 1 {
        return Err(RemoteError::Malformed(format!("expected one index, got {}", chosen.len())));
    }
    if let Some(&bad) = chosen.iter().find(|&&i| i >= query.candidates.len()) {
        return Err(RemoteError::Malformed(format!(
            "index {bad} out of range for {} candidates",
            query.candidates.len()
        )));
    }
    Ok(ReasonerDecision {
        chosen,
        confidence: raw.confidence.unwrap_or(0.5).clamp(0.0, 1.0),
        rationale: raw.rationale.unwrap_or_default(),
        fallback: false,
        error: None,
    })
}
