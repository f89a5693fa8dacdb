use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use lyricar::core::corpus::{Lang, Paragraph};
use lyricar::core::difficulty::PerplexityScorer;
use lyricar::core::rewards::{JudgeClient, JudgeError, RewardConfig, RewardEngine, CandidateScorer, TxtqSource, Verdict};
use lyricar::http::{ExternalPolicy, HttpJudge, HttpPerplexity};
use lyricar::Error;

/// Minimal HTTP/1.1 server answering each request with the next scripted
/// `(status, body, delay)`; the last entry repeats.
struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<serde_json::Value>>>,
    peak: Arc<AtomicUsize>,
}

fn stub(script: Vec<(u16, &'static str, Duration)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let peak = Arc::new(AtomicUsize::new(0));
    let active = Arc::new(AtomicUsize::new(0));
    let counter = Arc::new(AtomicUsize::new(0));
    let (req, pk) = (requests.clone(), peak.clone());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let (req, pk, active, counter, script) = (req.clone(), pk.clone(), active.clone(), counter.clone(), script.clone());
            std::thread::spawn(move || {
                let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                pk.fetch_max(now, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        active.fetch_sub(1, Ordering::SeqCst);
                        return;
                    }
                    if line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                req.lock().unwrap().push(serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null));
                let i = counter.fetch_add(1, Ordering::SeqCst).min(script.len() - 1);
                let (status, text, delay) = script[i];
                std::thread::sleep(delay);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Length: {}\r\nContent-Type: text/plain\r\nConnection: close\r\n\r\n{text}",
                    text.len()
                );
                active.fetch_sub(1, Ordering::SeqCst);
            });
        }
    });
    Stub { url, requests, peak }
}

const NOW: Duration = Duration::ZERO;

fn source() -> Paragraph {
    Paragraph::new("s1", Lang::En, ["the moon is bright", "the night is long"]).unwrap()
}

fn judge(url: &str, retries: u32, timeout: Duration) -> HttpJudge {
    HttpJudge::new(url, timeout, retries, 4, "S={source} C={candidate}".into(), " / ")
}

#[test]
fn judge_parses_label_and_sends_contract() {
    let s = stub(vec![(200, "Verdict: Acceptable. Mostly faithful.", NOW)]);
    let v = judge(&s.url, 0, Duration::from_secs(5)).judge(&source(), "月亮 / 夜晚", "judge_v1").unwrap();
    assert_eq!(v, Verdict::Acceptable);
    let body = &s.requests.lock().unwrap()[0];
    assert_eq!(body["source"], "the moon is bright / the night is long");
    assert_eq!(body["candidate"], "月亮 / 夜晚");
    assert_eq!(body["template_id"], "judge_v1");
    assert_eq!(body["prompt"], "S=the moon is bright / the night is long C=月亮 / 夜晚");
}

#[test]
fn judge_retries_server_errors_and_unparseable_replies() {
    let s = stub(vec![(500, "boom", NOW), (200, "no label here", NOW), (200, "good", NOW)]);
    let v = judge(&s.url, 2, Duration::from_secs(5)).judge(&source(), "x", "judge_v1").unwrap();
    assert_eq!(v, Verdict::Good);
    assert_eq!(s.requests.lock().unwrap().len(), 3);
}

#[test]
fn judge_exhaustion_degrades_text_quality() {
    let s = stub(vec![(503, "busy", NOW)]);
    let j = judge(&s.url, 1, Duration::from_secs(5));
    assert!(matches!(j.judge(&source(), "x", "judge_v1"), Err(JudgeError::Exhausted { attempts: 2, .. })));
    let engine = RewardEngine::new(RewardConfig::default(), &j).unwrap();
    // the automatic subscore of this candidate falls inside the band
    let scored = engine.score(&source(), "月亮明光啊 / 夜晚很你").unwrap();
    assert!(scored.judge_called);
    assert_eq!((scored.breakdown.txtq, scored.breakdown.txtq_source), (0, TxtqSource::Judge));
    assert!(scored.degraded.is_some());
}

#[test]
fn judge_timeout_counts_as_failure() {
    let s = stub(vec![(200, "good", Duration::from_millis(800))]);
    let j = judge(&s.url, 0, Duration::from_millis(100));
    assert!(j.judge(&source(), "x", "judge_v1").is_err());
}

#[test]
fn judge_bounds_in_flight_requests() {
    let s = stub(vec![(200, "poor", Duration::from_millis(60))]);
    let j = HttpJudge::new(&s.url, Duration::from_secs(5), 0, 2, "{source}".into(), " / ");
    let src = source();
    std::thread::scope(|scope| {
        for _ in 0..6 {
            scope.spawn(|| assert_eq!(j.judge(&src, "x", "t").unwrap(), Verdict::Poor));
        }
    });
    assert_eq!(s.requests.lock().unwrap().len(), 6);
    assert!(s.peak.load(Ordering::SeqCst) <= 2, "peak {}", s.peak.load(Ordering::SeqCst));
}

#[test]
fn generation_returns_completions_in_order() {
    let s = stub(vec![(
        200,
        r#"{"completions": [{"text": "月亮 / 夜晚", "logprob": -1.5}, {"text": "  "}, {"text": "星星 / 天空", "logprob": -0.5}]}"#,
        NOW,
    )]);
    let p = ExternalPolicy::new(&s.url, Duration::from_secs(5), 0, 64);
    let out = p.generate("translate", 3, Some(9)).unwrap();
    assert_eq!(out.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), ["月亮 / 夜晚", "星星 / 天空"]);
    assert_eq!(out[0].log_prob, Some(-1.5));
    // no pool index: scoreable, never trainable
    assert!(out.iter().all(|c| !c.is_trainable()));
    let body = &s.requests.lock().unwrap()[0];
    assert_eq!((body["n"].as_u64(), body["seed"].as_u64(), body["max_tokens"].as_u64()), (Some(3), Some(9), Some(64)));
}

#[test]
fn generation_without_logprobs_marks_unavailable() {
    let s = stub(vec![(200, r#"{"completions": [{"text": "a"}, {"text": "b"}]}"#, NOW)]);
    let out = ExternalPolicy::new(&s.url, Duration::from_secs(5), 0, 64).generate("p", 2, None).unwrap();
    assert!(out.iter().all(|c| c.log_prob.is_none() && !c.is_trainable()));
    assert!(s.requests.lock().unwrap()[0].get("seed").is_none());
}

#[test]
fn generation_errors_after_retries() {
    let s = stub(vec![(200, "not json", NOW)]);
    let err = ExternalPolicy::new(&s.url, Duration::from_secs(5), 1, 64).generate("p", 2, None).unwrap_err();
    assert!(matches!(err, Error::Http { .. }), "{err}");
    assert_eq!(s.requests.lock().unwrap().len(), 2);
}

#[test]
fn perplexity_backend() {
    let s = stub(vec![(200, r#"{"perplexity": 12.5}"#, NOW)]);
    let scorer = HttpPerplexity::new(&s.url, Duration::from_secs(5), 0);
    assert_eq!(scorer.perplexity(&source()).unwrap(), 12.5);
    assert_eq!(s.requests.lock().unwrap()[0]["lines"][1], "the night is long");
    let bad = stub(vec![(200, r#"{"perplexity": -1}"#, NOW)]);
    assert!(HttpPerplexity::new(&bad.url, Duration::from_secs(5), 0).perplexity(&source()).is_err());
}
