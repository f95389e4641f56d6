//! Exercises the real HTTP transport against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use cohere_llm::client::Client;
use cohere_llm::prompt::{PromptBundle, Template};
use cohere_llm::{EndpointConfig, LlmError};

struct Captured {
    request_line: String,
    headers: Vec<String>,
    body: String,
}

/// Serves one scripted `(status, body)` per connection, recording requests.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    let handle = thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut headers = Vec::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end().to_string();
                if line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Captured {
                request_line: request_line.trim_end().to_string(),
                headers,
                body: String::from_utf8(buf).unwrap(),
            });
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1"), seen, handle)
}

fn config(base_url: String, key_file: &std::path::Path) -> EndpointConfig {
    EndpointConfig {
        base_url,
        model: "test-model".into(),
        credentials_file: Some(key_file.to_path_buf()),
        backoff_ms: 1,
        ..EndpointConfig::mock("unused")
    }
}

fn bundle() -> PromptBundle {
    PromptBundle { text: "say hi".into(), problem_id: "p".into(), variant: "base".into(), template: Template::Benchmark }
}

fn key_file() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "sk-test-123").unwrap();
    f
}

#[test]
fn posts_chat_completion_and_retries_429() {
    let ok = r#"{"choices":[{"message":{"role":"assistant","content":"[('a', 'b', 0)]"}}]}"#;
    let (url, seen, server) = serve(vec![(429, "{}".into()), (200, ok.into())]);
    let key = key_file();
    let client = Client::from_config(config(url, key.path())).unwrap();
    let c = client.complete(&bundle(), 0).unwrap();
    server.join().unwrap();
    assert_eq!(c.text, "[('a', 'b', 0)]");
    assert_eq!(c.tries, 2);

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 2);
    assert_eq!(seen[1].request_line, "POST /v1/chat/completions HTTP/1.1");
    assert!(seen[1].headers.iter().any(|h| h == "authorization: Bearer sk-test-123" || h == "Authorization: Bearer sk-test-123"));
    let body: serde_json::Value = serde_json::from_str(&seen[1].body).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0]["content"], "say hi");
    assert!(body.get("temperature").is_none());
}

#[test]
fn client_errors_are_fatal() {
    let (url, seen, server) = serve(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let key = key_file();
    let client = Client::from_config(config(url, key.path())).unwrap();
    let err = client.complete(&bundle(), 0).unwrap_err();
    server.join().unwrap();
    assert_eq!(seen.lock().unwrap().len(), 1);
    match err {
        LlmError::Transport { attempts } => {
            assert_eq!(attempts.len(), 1);
            assert!(attempts[0].contains("401"));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn refused_connection_is_transient() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let key = key_file();
    let mut c = config(format!("http://127.0.0.1:{port}/v1"), key.path());
    c.max_retries = 1;
    let client = Client::from_config(c).unwrap();
    match client.complete(&bundle(), 0) {
        Err(LlmError::Transport { attempts }) => assert_eq!(attempts.len(), 2),
        other => panic!("unexpected {other:?}"),
    }
}
