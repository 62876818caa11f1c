//! HTTP provider speaking the two common JSON inference protocols: bare
//! text completion and chat messages. Authentication is a bearer token
//! read from an environment variable, checked before any network traffic.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{CallError, GenerationError, GenerationRequest, Provider, RawCompletion};

/// Which request/response shape the endpoint expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApiStyle {
    /// `{"prompt": ...}` in, `choices[].text` out.
    Completion,
    /// `{"messages": [...]}` in, `choices[].message.content` out.
    Chat,
}

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    /// Stable identifier stamped into evaluation records.
    pub id: String,
    /// Full URL of the inference endpoint.
    pub endpoint: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub model: String,
    pub style: ApiStyle,
    pub max_n_per_call: usize,
    /// Upper bound applied to `request.max_tokens`.
    pub max_tokens_cap: u32,
    pub timeout: Duration,
    /// Pacing hint consumed when assembling the client; the provider
    /// itself does not throttle.
    pub requests_per_second: Option<f64>,
}

impl HttpProviderConfig {
    /// Text-completion endpoint defaults: small batches, tight token cap.
    pub fn completion(
        id: impl Into<String>,
        endpoint: impl Into<String>,
        api_key_env: impl Into<String>,
        model: impl Into<String>,
    ) -> Self {
        HttpProviderConfig {
            id: id.into(),
            endpoint: endpoint.into(),
            api_key_env: api_key_env.into(),
            model: model.into(),
            style: ApiStyle::Completion,
            max_n_per_call: 5,
            max_tokens_cap: 256,
            timeout: Duration::from_secs(120),
            requests_per_second: None,
        }
    }

    /// Chat endpoint defaults: roomier token cap for message overhead.
    pub fn chat(
        id: impl Into<String>,
        endpoint: impl Into<String>,
        api_key_env: impl Into<String>,
        model: impl Into<String>,
    ) -> Self {
        HttpProviderConfig {
            style: ApiStyle::Chat,
            max_tokens_cap: 900,
            ..Self::completion(id, endpoint, api_key_env, model)
        }
    }
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpProvider {
    /// Reads the bearer token from the configured environment variable.
    /// Failing here, before any request, keeps credential problems from
    /// surfacing mid-sweep.
    pub fn from_env(config: HttpProviderConfig) -> Result<Self, GenerationError> {
        match std::env::var(&config.api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(Self::with_api_key(config, key)),
            _ => Err(GenerationError::MissingCredential {
                provider_id: config.id.clone(),
                variable: config.api_key_env.clone(),
            }),
        }
    }

    /// Bypasses the environment; used by tests and explicit wiring.
    pub fn with_api_key(config: HttpProviderConfig, api_key: impl Into<String>) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        HttpProvider { config, api_key: api_key.into(), agent }
    }

    fn body(&self, request: &GenerationRequest, n: usize) -> serde_json::Value {
        let max_tokens = request.max_tokens.min(self.config.max_tokens_cap);
        let mut body = json!({
            "model": self.config.model,
            "temperature": request.temperature.value(),
            "n": n,
            "max_tokens": max_tokens,
        });
        match self.config.style {
            ApiStyle::Completion => {
                body["prompt"] = json!(request.prompt);
            }
            ApiStyle::Chat => {
                let mut messages = Vec::new();
                if let Some(system) = request.system_prompt_mode.text() {
                    messages.push(json!({"role": "system", "content": system}));
                }
                messages.push(json!({"role": "user", "content": request.prompt}));
                body["messages"] = json!(messages);
            }
        }
        if let Some(seed) = request.request_seed {
            body["seed"] = json!(seed);
        }
        body
    }

    fn parse(&self, text: &str) -> Result<Vec<RawCompletion>, CallError> {
        #[derive(Deserialize)]
        struct ApiResponse {
            choices: Vec<Choice>,
        }
        #[derive(Deserialize)]
        struct Choice {
            #[serde(default)]
            text: Option<String>,
            #[serde(default)]
            message: Option<ChatMessage>,
            #[serde(default)]
            finish_reason: Option<String>,
        }
        #[derive(Deserialize)]
        struct ChatMessage {
            content: String,
        }

        let parsed: ApiResponse = serde_json::from_str(text)
            .map_err(|e| CallError::fatal(format!("unparseable response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .enumerate()
            .map(|(i, choice)| {
                let text = match self.config.style {
                    ApiStyle::Completion => choice.text,
                    ApiStyle::Chat => choice.message.map(|m| m.content),
                };
                let text = text.ok_or_else(|| {
                    CallError::fatal(format!("choice {i} is missing its content field"))
                })?;
                Ok(RawCompletion {
                    text,
                    finish_reason: choice.finish_reason.unwrap_or_else(|| "unknown".to_string()),
                })
            })
            .collect()
    }
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn max_n_per_call(&self) -> usize {
        self.config.max_n_per_call
    }

    fn call(
        &self,
        request: &GenerationRequest,
        n: usize,
    ) -> Result<Vec<RawCompletion>, CallError> {
        let body = self.body(request, n).to_string();
        let response = self
            .agent
            .post(&self.config.endpoint)
            .set("authorization", &format!("Bearer {}", self.api_key))
            .set("content-type", "application/json")
            .send_string(&body);
        match response {
            Ok(resp) => {
                let text = resp
                    .into_string()
                    .map_err(|e| CallError::transport(format!("reading response: {e}")))?;
                self.parse(&text)
            }
            Err(ureq::Error::Status(code, resp)) => {
                let snippet: String =
                    resp.into_string().unwrap_or_default().chars().take(200).collect();
                let retryable = code >= 500 || code == 429;
                Err(CallError {
                    retryable,
                    message: format!("HTTP {code}: {snippet}"),
                })
            }
            Err(ureq::Error::Transport(t)) => {
                Err(CallError::transport(format!("transport: {t}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generation::{
        CompletionService, ProviderClient, RetryPolicy, SystemPromptMode, Temperature,
    };
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// Minimal HTTP/1.1 server: answers `responses` in order, one
    /// connection each, recording every request body.
    fn serve(
        responses: Vec<(u16, String)>,
    ) -> (String, Arc<Mutex<Vec<String>>>, std::thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let seen = Arc::clone(&bodies);
        let handle = std::thread::spawn(move || {
            for (status, payload) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = Vec::new();
                let mut chunk = [0u8; 1024];
                let header_end = loop {
                    let got = stream.read(&mut chunk).unwrap();
                    assert!(got > 0, "client closed mid-request");
                    buf.extend_from_slice(&chunk[..got]);
                    if let Some(pos) =
                        buf.windows(4).position(|w| w == b"\r\n\r\n")
                    {
                        break pos + 4;
                    }
                };
                let head = String::from_utf8_lossy(&buf[..header_end]).to_string();
                let content_length: usize = head
                    .lines()
                    .find_map(|l| {
                        let (name, value) = l.split_once(':')?;
                        name.eq_ignore_ascii_case("content-length")
                            .then(|| value.trim().parse().ok())?
                    })
                    .unwrap_or(0);
                while buf.len() < header_end + content_length {
                    let got = stream.read(&mut chunk).unwrap();
                    assert!(got > 0, "client closed mid-body");
                    buf.extend_from_slice(&chunk[..got]);
                }
                let body =
                    String::from_utf8_lossy(&buf[header_end..header_end + content_length])
                        .to_string();
                seen.lock().unwrap().push(body);
                let reason = if status == 200 { "OK" } else { "Error" };
                let reply = format!(
                    "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\n\
                     content-length: {}\r\nconnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (url, bodies, handle)
    }

    fn completion_choices(texts: &[&str]) -> String {
        let choices: Vec<_> = texts
            .iter()
            .map(|t| serde_json::json!({"text": t, "finish_reason": "stop"}))
            .collect();
        serde_json::json!({ "choices": choices }).to_string()
    }

    #[test]
    fn completion_style_round_trip_caps_max_tokens() {
        let (url, bodies, server) = serve(vec![(200, completion_choices(&["a", "b"]))]);
        let config = HttpProviderConfig::completion("svc", url, "UNUSED", "m-1");
        let provider = HttpProvider::with_api_key(config, "k");

        let mut request =
            GenerationRequest::new("module top;", Temperature(0.5), 2);
        request.max_tokens = 900;
        let out = provider.call(&request, 2).unwrap();
        server.join().unwrap();

        assert_eq!(out.len(), 2);
        assert_eq!(out[0].text, "a");
        assert_eq!(out[0].finish_reason, "stop");

        let body: serde_json::Value =
            serde_json::from_str(&bodies.lock().unwrap()[0]).unwrap();
        assert_eq!(body["max_tokens"], 256, "cap must win over the request");
        assert_eq!(body["prompt"], "module top;");
        assert_eq!(body["model"], "m-1");
        assert_eq!(body["n"], 2);
        assert!(body.get("messages").is_none());
    }

    #[test]
    fn chat_style_sends_system_message_and_reads_content() {
        let payload = serde_json::json!({
            "choices": [
                {"message": {"role": "assistant", "content": "endmodule"},
                 "finish_reason": "length"}
            ]
        })
        .to_string();
        let (url, bodies, server) = serve(vec![(200, payload)]);
        let config = HttpProviderConfig::chat("svc", url, "UNUSED", "m-chat");
        let provider = HttpProvider::with_api_key(config, "k");

        let mut request = GenerationRequest::new("module top;", Temperature(1.0), 1);
        request.system_prompt_mode = SystemPromptMode::GuidedV1;
        let out = provider.call(&request, 1).unwrap();
        server.join().unwrap();

        assert_eq!(out[0].text, "endmodule");
        assert_eq!(out[0].finish_reason, "length");

        let body: serde_json::Value =
            serde_json::from_str(&bodies.lock().unwrap()[0]).unwrap();
        let messages = body["messages"].as_array().unwrap();
        assert_eq!(messages.len(), 2);
        assert_eq!(messages[0]["role"], "system");
        assert!(messages[0]["content"].as_str().unwrap().contains("Verilog"));
        assert_eq!(messages[1]["role"], "user");
        assert_eq!(messages[1]["content"], "module top;");
        assert!(body.get("prompt").is_none());
    }

    #[test]
    fn server_error_retries_and_then_succeeds() {
        let (url, bodies, server) = serve(vec![
            (500, "{\"error\": \"overloaded\"}".to_string()),
            (200, completion_choices(&["ok"])),
        ]);
        let config = HttpProviderConfig::completion("svc", url, "UNUSED", "m-1");
        let client = ProviderClient::new(HttpProvider::with_api_key(config, "k"))
            .with_retry(RetryPolicy::immediate(3));

        let out = client
            .generate(&GenerationRequest::new("p", Temperature(0.5), 1))
            .unwrap();
        server.join().unwrap();

        assert_eq!(out[0].raw_text, "ok");
        assert_eq!(bodies.lock().unwrap().len(), 2, "one failure, one success");
    }

    #[test]
    fn client_error_is_fatal() {
        let (url, _bodies, server) =
            serve(vec![(400, "{\"error\": \"bad model\"}".to_string())]);
        let config = HttpProviderConfig::completion("svc", url, "UNUSED", "m-1");
        let provider = HttpProvider::with_api_key(config, "k");

        let err = provider
            .call(&GenerationRequest::new("p", Temperature(0.5), 1), 1)
            .unwrap_err();
        server.join().unwrap();

        assert!(!err.retryable);
        assert!(err.message.contains("HTTP 400"));
        assert!(err.message.contains("bad model"));
    }

    #[test]
    fn missing_credential_fails_before_any_request() {
        let config = HttpProviderConfig::completion(
            "svc",
            "http://127.0.0.1:1/never-contacted",
            "VBENCH_TEST_UNSET_CREDENTIAL_VAR",
            "m-1",
        );
        match HttpProvider::from_env(config) {
            Err(GenerationError::MissingCredential { provider_id, variable }) => {
                assert_eq!(provider_id, "svc");
                assert_eq!(variable, "VBENCH_TEST_UNSET_CREDENTIAL_VAR");
            }
            _ => panic!("expected MissingCredential"),
        }
    }
}
