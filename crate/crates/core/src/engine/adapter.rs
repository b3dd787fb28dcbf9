//! Chat-model adapters. A session delivers messages strictly in order and
//! keeps no state across sessions.

use std::collections::HashMap;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

pub const API_BASE_VAR: &str = "ROCAR_API_BASE";
pub const API_KEY_VAR: &str = "ROCAR_API_KEY";
pub const MODEL_VAR: &str = "ROCAR_MODEL";
pub const ATTEMPTS: u32 = 3;

/// Reply to any message that is not a question.
pub const ACK: &str = "OK";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdapterError {
    #[error("adapter configuration: {0}")]
    Config(String),
    #[error("transport failure after {attempts} attempts: {reason}")]
    Transport { attempts: u32, reason: String },
    #[error("unexpected response: {0}")]
    Response(String),
}

pub trait ChatSession: Send {
    fn send(&mut self, message: &str) -> Result<String, AdapterError>;
}

pub trait ChatAdapter: Send + Sync {
    /// Adapter name plus a configuration fingerprint.
    fn identity(&self) -> String;
    fn open_session(&self, session_id: &str) -> Result<Box<dyn ChatSession>, AdapterError>;
}

/// Chat-completions client over HTTPS.
#[derive(Debug, Clone)]
pub struct RemoteAdapter {
    base: String,
    key: String,
    model: String,
    agent: ureq::Agent,
}

impl RemoteAdapter {
    pub fn new(base: &str, key: &str, model: &str) -> RemoteAdapter {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .new_agent();
        RemoteAdapter {
            base: base.trim_end_matches('/').to_string(),
            key: key.to_string(),
            model: model.to_string(),
            agent,
        }
    }

    pub fn from_env() -> Result<RemoteAdapter, AdapterError> {
        let var = |name: &str| {
            std::env::var(name).map_err(|_| AdapterError::Config(format!("{name} is not set")))
        };
        let model = std::env::var(MODEL_VAR).unwrap_or_else(|_| "default".to_string());
        Ok(RemoteAdapter::new(
            &var(API_BASE_VAR)?,
            &var(API_KEY_VAR)?,
            &model,
        ))
    }

    fn complete(&self, messages: &[Value]) -> Result<String, AdapterError> {
        let url = format!("{}/chat/completions", self.base);
        let body = json!({ "model": self.model, "messages": messages });
        let mut last = String::new();
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(200 << attempt));
            }
            let sent = self
                .agent
                .post(&url)
                .header("Authorization", &format!("Bearer {}", self.key))
                .send_json(&body);
            match sent {
                Ok(mut resp) => {
                    let v: Value = resp
                        .body_mut()
                        .read_json()
                        .map_err(|e| AdapterError::Response(e.to_string()))?;
                    return v["choices"][0]["message"]["content"]
                        .as_str()
                        .map(str::to_string)
                        .ok_or_else(|| AdapterError::Response(v.to_string()));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(AdapterError::Transport {
            attempts: ATTEMPTS,
            reason: last,
        })
    }
}

struct RemoteSession {
    adapter: RemoteAdapter,
    history: Vec<Value>,
}

impl ChatSession for RemoteSession {
    fn send(&mut self, message: &str) -> Result<String, AdapterError> {
        self.history
            .push(json!({ "role": "user", "content": message }));
        let reply = self.adapter.complete(&self.history)?;
        self.history
            .push(json!({ "role": "assistant", "content": reply }));
        Ok(reply)
    }
}

impl ChatAdapter for RemoteAdapter {
    fn identity(&self) -> String {
        format!("remote:{}@{}", self.model, self.base)
    }

    fn open_session(&self, _session_id: &str) -> Result<Box<dyn ChatSession>, AdapterError> {
        Ok(Box::new(RemoteSession {
            adapter: self.clone(),
            history: Vec::new(),
        }))
    }
}

/// Replays `session_id|turn|reply` records; turns count from 1 and
/// unlisted turns get [`ACK`]. `\n` in a reply stands for a newline.
#[derive(Debug, Clone)]
pub struct ScriptedAdapter {
    label: String,
    replies: Arc<HashMap<(String, usize), String>>,
}

impl ScriptedAdapter {
    pub fn parse(label: &str, source: &str) -> Result<ScriptedAdapter, AdapterError> {
        let mut replies = HashMap::new();
        for (i, raw) in source.lines().enumerate() {
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut f = raw.splitn(3, '|');
            let (Some(session), Some(turn), Some(reply)) = (f.next(), f.next(), f.next()) else {
                return Err(AdapterError::Config(format!(
                    "script line {}: expected `session|turn|reply`",
                    i + 1
                )));
            };
            let turn: usize = turn.trim().parse().map_err(|_| {
                AdapterError::Config(format!("script line {}: bad turn `{turn}`", i + 1))
            })?;
            replies.insert(
                (session.trim().to_string(), turn),
                reply.replace("\\n", "\n"),
            );
        }
        Ok(ScriptedAdapter {
            label: label.to_string(),
            replies: Arc::new(replies),
        })
    }
}

struct ScriptedSession {
    id: String,
    turn: usize,
    replies: Arc<HashMap<(String, usize), String>>,
}

impl ChatSession for ScriptedSession {
    fn send(&mut self, _message: &str) -> Result<String, AdapterError> {
        self.turn += 1;
        Ok(self
            .replies
            .get(&(self.id.clone(), self.turn))
            .cloned()
            .unwrap_or_else(|| ACK.to_string()))
    }
}

impl ChatAdapter for ScriptedAdapter {
    fn identity(&self) -> String {
        format!("scripted:{}", self.label)
    }

    fn open_session(&self, session_id: &str) -> Result<Box<dyn ChatSession>, AdapterError> {
        Ok(Box::new(ScriptedSession {
            id: session_id.to_string(),
            turn: 0,
            replies: Arc::clone(&self.replies),
        }))
    }
}

/// Answers known question texts from a table and acknowledges everything
/// else. Backs the `oracle` and `always_wrong` adapters.
#[derive(Debug, Clone)]
pub struct TableAdapter {
    name: String,
    table: Arc<HashMap<String, String>>,
}

impl TableAdapter {
    pub fn new(name: &str, table: HashMap<String, String>) -> TableAdapter {
        TableAdapter {
            name: name.to_string(),
            table: Arc::new(table),
        }
    }
}

struct TableSession {
    table: Arc<HashMap<String, String>>,
}

impl ChatSession for TableSession {
    fn send(&mut self, message: &str) -> Result<String, AdapterError> {
        Ok(self
            .table
            .get(message.trim())
            .cloned()
            .unwrap_or_else(|| ACK.to_string()))
    }
}

impl ChatAdapter for TableAdapter {
    fn identity(&self) -> String {
        self.name.clone()
    }

    fn open_session(&self, _session_id: &str) -> Result<Box<dyn ChatSession>, AdapterError> {
        Ok(Box::new(TableSession {
            table: Arc::clone(&self.table),
        }))
    }
}

/// Adapter selection as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterSpec {
    Remote,
    Scripted(String),
    Oracle,
    AlwaysWrong,
}

impl AdapterSpec {
    pub fn parse(s: &str) -> Result<AdapterSpec, AdapterError> {
        match s {
            "remote" => Ok(AdapterSpec::Remote),
            "oracle" => Ok(AdapterSpec::Oracle),
            "always_wrong" => Ok(AdapterSpec::AlwaysWrong),
            _ => match s.strip_prefix("scripted:") {
                Some(path) if !path.is_empty() => Ok(AdapterSpec::Scripted(path.to_string())),
                _ => Err(AdapterError::Config(format!("unknown adapter `{s}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_replays_by_turn() {
        let a = ScriptedAdapter::parse("t", "s1|2|hello\\nthere\ns2|1|other\n").unwrap();
        let mut s = a.open_session("s1").unwrap();
        assert_eq!(s.send("x").unwrap(), ACK);
        assert_eq!(s.send("y").unwrap(), "hello\nthere");
        let mut s2 = a.open_session("s2").unwrap();
        assert_eq!(s2.send("x").unwrap(), "other");
        assert_eq!(a.identity(), "scripted:t");
    }

    #[test]
    fn scripted_rejects_bad_lines() {
        assert!(ScriptedAdapter::parse("t", "s1|x|hi").is_err());
        assert!(ScriptedAdapter::parse("t", "s1 hi").is_err());
    }

    #[test]
    fn table_answers_known_questions() {
        let mut t = HashMap::new();
        t.insert("Q?".to_string(), "A.".to_string());
        let a = TableAdapter::new("oracle", t);
        let mut s = a.open_session("x").unwrap();
        assert_eq!(s.send("Q?").unwrap(), "A.");
        assert_eq!(s.send("rules").unwrap(), ACK);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(AdapterSpec::parse("oracle"), Ok(AdapterSpec::Oracle));
        assert_eq!(
            AdapterSpec::parse("scripted:r.txt"),
            Ok(AdapterSpec::Scripted("r.txt".into()))
        );
        assert!(AdapterSpec::parse("scripted:").is_err());
        assert!(AdapterSpec::parse("gpt").is_err());
    }

    #[test]
    fn remote_unreachable_fails_after_retries() {
        let a = RemoteAdapter::new("http://127.0.0.1:9", "k", "m");
        let mut s = a.open_session("x").unwrap();
        match s.send("hi") {
            Err(AdapterError::Transport { attempts, .. }) => assert_eq!(attempts, ATTEMPTS),
            other => panic!("{other:?}"),
        }
    }
}
