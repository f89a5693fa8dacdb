//! Blocking HTTP backends: judge, generation and perplexity scoring.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use lyricar_core::corpus::Paragraph;
use lyricar_core::difficulty::PerplexityScorer;
use lyricar_core::policy::Candidate;
use lyricar_core::rewards::{parse_verdict, JudgeClient, JudgeError, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

/// Caps concurrent requests from one client.
#[derive(Debug)]
pub struct InFlight {
    max: usize,
    current: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a InFlight);

impl InFlight {
    pub fn new(max: usize) -> Self {
        InFlight { max: max.max(1), current: Mutex::new(0), freed: Condvar::new() }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.current.lock().expect("in-flight lock");
        while *n >= self.max {
            n = self.freed.wait(n).expect("in-flight lock");
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.current.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::AgentBuilder::new().timeout(timeout).build()
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis(50 * (1u64 << attempt.min(6)))
}

/// POSTs `body` and returns the response text; transport errors and
/// non-2xx statuses are reported as strings for the caller's retry loop.
fn post(agent: &ureq::Agent, url: &str, body: &serde_json::Value) -> std::result::Result<String, String> {
    match agent.post(url).send_json(body) {
        Ok(resp) => resp.into_string().map_err(|e| e.to_string()),
        Err(ureq::Error::Status(code, resp)) => {
            let text = resp.into_string().unwrap_or_default();
            Err(format!("status {code}: {}", text.chars().take(200).collect::<String>()))
        }
        Err(e) => Err(e.to_string()),
    }
}

/// Renders `{source}` and `{candidate}` placeholders.
pub fn render_template(template: &str, source: &str, candidate: &str) -> String {
    template.replace("{source}", source).replace("{candidate}", candidate)
}

pub const DEFAULT_JUDGE_TEMPLATE: &str = include_str!("../templates/judge_v1.txt");

/// Judge LLM over HTTP.
///
/// Request body: `{"source", "candidate", "template_id", "prompt"}`; the
/// response text is searched for a verdict label. Unparseable responses
/// count against the retry budget like transport errors.
pub struct HttpJudge {
    url: String,
    agent: ureq::Agent,
    retries: u32,
    template: String,
    boundary: String,
    in_flight: InFlight,
}

impl HttpJudge {
    pub fn new(url: impl Into<String>, timeout: Duration, retries: u32, max_in_flight: usize, template: String, boundary: &str) -> Self {
        HttpJudge {
            url: url.into(),
            agent: agent(timeout),
            retries,
            template,
            boundary: boundary.into(),
            in_flight: InFlight::new(max_in_flight),
        }
    }
}

impl JudgeClient for HttpJudge {
    fn judge(&self, source: &Paragraph, candidate: &str, template_id: &str) -> std::result::Result<Verdict, JudgeError> {
        let src = source.joined(&self.boundary);
        let body = json!({
            "source": src,
            "candidate": candidate,
            "template_id": template_id,
            "prompt": render_template(&self.template, &src, candidate),
        });
        let _permit = self.in_flight.acquire();
        let attempts = self.retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(backoff(attempt));
            }
            match post(&self.agent, &self.url, &body) {
                Ok(text) => match parse_verdict(&text) {
                    Ok(v) => return Ok(v),
                    Err(e) => last = e.to_string(),
                },
                Err(e) => last = e,
            }
            log::debug!("judge attempt {} failed: {last}", attempt + 1);
        }
        Err(JudgeError::Exhausted { attempts, last })
    }
}

#[derive(Debug, Deserialize)]
struct Completion {
    text: String,
    #[serde(default)]
    logprob: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct GenerationResponse {
    completions: Vec<Completion>,
}

#[derive(Debug, Serialize)]
struct GenerationRequest<'a> {
    prompt: &'a str,
    n: usize,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// LLM generation endpoint: one request returns `n` completions.
///
/// Request `{"prompt", "n", "max_tokens", "seed"?}`, response
/// `{"completions": [{"text", "logprob"?}]}`. Without log-probabilities the
/// candidates can be scored but not trained on.
pub struct ExternalPolicy {
    url: String,
    agent: ureq::Agent,
    retries: u32,
    pub max_tokens: u32,
}

impl ExternalPolicy {
    pub fn new(url: impl Into<String>, timeout: Duration, retries: u32, max_tokens: u32) -> Self {
        ExternalPolicy { url: url.into(), agent: agent(timeout), retries, max_tokens }
    }

    pub fn generate(&self, prompt: &str, n: usize, seed: Option<u64>) -> Result<Vec<Candidate>> {
        let body = serde_json::to_value(GenerationRequest { prompt, n, max_tokens: self.max_tokens, seed })?;
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(backoff(attempt));
            }
            let text = match post(&self.agent, &self.url, &body) {
                Ok(t) => t,
                Err(e) => {
                    last = e;
                    continue;
                }
            };
            let resp: GenerationResponse = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => {
                    last = format!("bad response: {e}");
                    continue;
                }
            };
            let mut out = Vec::with_capacity(resp.completions.len());
            for c in resp.completions {
                if c.text.trim().is_empty() {
                    log::warn!("dropping empty completion from {}", self.url);
                    continue;
                }
                out.push(Candidate {
                    text: c.text,
                    log_prob: c.logprob.filter(|l| l.is_finite() && *l <= 0.0),
                    variant: None,
                });
            }
            return Ok(out);
        }
        Err(Error::Http { url: self.url.clone(), message: format!("failed after {} attempts: {last}", self.retries + 1) })
    }
}

/// Masked-LM pseudo-perplexity (or any scorer) behind HTTP.
///
/// Request `{"id", "lines"}`, response `{"perplexity": <positive number>}`.
pub struct HttpPerplexity {
    url: String,
    agent: ureq::Agent,
    retries: u32,
}

impl HttpPerplexity {
    pub fn new(url: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        HttpPerplexity { url: url.into(), agent: agent(timeout), retries }
    }
}

impl PerplexityScorer for HttpPerplexity {
    fn perplexity(&self, paragraph: &Paragraph) -> lyricar_core::Result<f64> {
        #[derive(Deserialize)]
        struct Resp {
            perplexity: f64,
        }
        let lines: Vec<&str> = paragraph.lines.iter().map(|l| l.text.as_str()).collect();
        let body = json!({ "id": paragraph.id, "lines": lines });
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(backoff(attempt));
            }
            match post(&self.agent, &self.url, &body).and_then(|t| serde_json::from_str::<Resp>(&t).map_err(|e| e.to_string())) {
                Ok(r) if r.perplexity.is_finite() && r.perplexity > 0.0 => return Ok(r.perplexity),
                Ok(r) => last = format!("invalid perplexity {}", r.perplexity),
                Err(e) => last = e,
            }
        }
        Err(lyricar_core::Error::Scorer(format!("{}: {last}", self.url)))
    }
}
