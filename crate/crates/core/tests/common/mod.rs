#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;

use vecot::backend::ScriptedBackend;
use vecot::demo::Scenario;
use vecot::{Pipeline, TemplateSet};

/// A request as seen by [`MockServer`].
#[derive(Debug, Clone)]
pub struct Seen {
    pub method: String,
    /// Path plus query string.
    pub target: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Seen {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).expect("request body is JSON")
    }
}

pub struct Reply {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Reply {
    pub fn json(status: u16, body: serde_json::Value) -> Self {
        Self {
            status,
            headers: vec![("Content-Type".into(), "application/json".into())],
            body: body.to_string(),
        }
    }

    pub fn with_header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }
}

type Handler = dyn Fn(&Seen) -> Reply + Send + Sync;

/// Minimal HTTP/1.1 server on a loopback port. One request per connection.
pub struct MockServer {
    pub base_url: String,
    seen: Arc<Mutex<Vec<Seen>>>,
}

impl MockServer {
    pub fn start(handler: impl Fn(&Seen) -> Reply + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let log = seen.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = handler.clone();
                let log = log.clone();
                thread::spawn(move || serve(stream, handler.as_ref(), &log));
            }
        });
        Self { base_url, seen }
    }

    pub fn requests(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<Seen>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or("").to_string();
    let target = parts.next().unwrap_or("").to_string();
    let mut headers = Vec::new();
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h).unwrap_or(0) == 0 || h.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let find = |name: &str| {
        headers
            .iter()
            .find(|(k, _): &&(String, String)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.clone())
    };
    let body = if let Some(len) = find("content-length").and_then(|v| v.parse::<usize>().ok()) {
        let mut buf = vec![0; len];
        reader.read_exact(&mut buf).unwrap();
        buf
    } else if find("transfer-encoding").is_some_and(|v| v.eq_ignore_ascii_case("chunked")) {
        let mut buf = Vec::new();
        loop {
            let mut size = String::new();
            reader.read_line(&mut size).unwrap();
            let size = usize::from_str_radix(size.trim(), 16).unwrap_or(0);
            let mut chunk = vec![0; size + 2];
            reader.read_exact(&mut chunk).unwrap();
            if size == 0 {
                break;
            }
            buf.extend_from_slice(&chunk[..size]);
        }
        buf
    } else {
        Vec::new()
    };
    let seen = Seen {
        method,
        target,
        headers,
        body: String::from_utf8_lossy(&body).into_owned(),
    };
    let reply = handler(&seen);
    log.lock().unwrap().push(seen);

    let mut out = stream;
    let mut head = format!(
        "HTTP/1.1 {} Mock\r\nContent-Length: {}\r\nConnection: close\r\n",
        reply.status,
        reply.body.len()
    );
    for (k, v) in &reply.headers {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    let _ = out.write_all(head.as_bytes());
    let _ = out.write_all(reply.body.as_bytes());
    let _ = out.flush();
}

/// Pipeline over a scenario's strict scripted backend.
pub fn scenario_pipeline(scenario: &Scenario) -> (Pipeline, Arc<ScriptedBackend>) {
    let backend = Arc::new(ScriptedBackend::new(scenario.fixture.clone()));
    let pipeline = Pipeline::new(
        backend.clone(),
        scenario.retriever.clone(),
        Arc::new(TemplateSet::builtin()),
        scenario.config.clone(),
    )
    .unwrap();
    (pipeline, backend)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares `actual` with the golden file, rewriting it when
/// `UPDATE_GOLDEN=1`. Returns whether they matched.
pub fn golden_matches(relative: &str, actual: &str) -> bool {
    let path = golden_dir().join(relative);
    if std::env::var("UPDATE_GOLDEN").as_deref() == Ok("1") {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return true;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) => expected == actual,
        Err(e) => panic!("missing golden file {}: {e} (run with UPDATE_GOLDEN=1)", path.display()),
    }
}

pub fn assert_golden(relative: &str, actual: &str) {
    assert!(
        golden_matches(relative, actual),
        "{relative} differs from golden (UPDATE_GOLDEN=1 regenerates)"
    );
}

/// Every prompt the pipeline renders, for each task, keyed by the golden
/// file path `prompts/<task>/<kind>.txt`.
pub fn rendered_prompts() -> Vec<(String, String)> {
    use vecot::backend::{FixtureMode, ScriptedFixture};
    use vecot::demo::nyskohus_corpus;
    use vecot::editor::Method;
    use vecot::retrieval::gather_evidence;
    use vecot::{PipelineConfig, Task, TemplateKind};

    let corpus = Arc::new(nyskohus_corpus());
    let mut out = Vec::new();
    for task in Task::ALL {
        let (input, sentence, vq) = match task {
            Task::Fever => (
                "John Nyskohus played for Odd Grenland.",
                "First, John Nyskohus played for Odd Grenland.",
                "What team did John Nyskohus play for?",
            ),
            _ => (
                "John Nyskohus played for which football club?",
                "First, John Nyskohus played for the Norwegian football team Odd Grenland.",
                "What team did John Nyskohus play for?",
            ),
        };
        let pipeline = Pipeline::new(
            Arc::new(ScriptedBackend::new(ScriptedFixture::new(FixtureMode::Strict))),
            corpus.clone(),
            Arc::new(TemplateSet::builtin()),
            PipelineConfig::for_task(task),
        )
        .unwrap();
        let evidence = gather_evidence(corpus.as_ref(), vq, &[], &pipeline.config().ranker).unwrap();
        let requests = [
            (
                TemplateKind::Standard.as_str(),
                pipeline.sampling_request(input, Method::Standard).unwrap(),
            ),
            (
                TemplateKind::Cot.as_str(),
                pipeline.sampling_request(input, Method::Cot).unwrap(),
            ),
            (
                TemplateKind::VerifyingQuestion.as_str(),
                pipeline.verifying_question_request(input, sentence).unwrap(),
            ),
            (
                TemplateKind::VerifyingAnswer.as_str(),
                pipeline.verifying_answer_request(vq, &evidence).unwrap(),
            ),
            (
                "reanswer",
                pipeline
                    .reanswer_request(
                        input,
                        "John Nyskohus played for Adelaide City in the National Soccer League.",
                    )
                    .unwrap(),
            ),
        ];
        for (kind, req) in requests {
            out.push((format!("prompts/{}/{kind}.txt", task.as_str()), req.prompt));
        }
    }
    out
}
