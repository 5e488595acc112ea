#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use assess_core::question::{parse_question, Question};

pub const BIN: &str = env!("CARGO_BIN_EXE_assess");

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn question_path(name: &str) -> PathBuf {
    fixtures().join("questions").join(format!("{name}.json"))
}

pub fn question(name: &str) -> Question {
    parse_question(&std::fs::read_to_string(question_path(name)).unwrap()).unwrap()
}

pub fn submission_path(dir: &str, file: &str) -> PathBuf {
    fixtures().join("submissions").join(dir).join(file)
}

pub fn submission(dir: &str, file: &str) -> String {
    std::fs::read_to_string(submission_path(dir, file)).unwrap()
}

/// Every submission file under `submissions/<dir>`, sorted by name.
pub fn corpus(dir: &str) -> Vec<(String, String)> {
    let Ok(entries) = std::fs::read_dir(fixtures().join("submissions").join(dir)) else {
        return Vec::new();
    };
    let mut out: Vec<(String, String)> = entries
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

pub fn assess(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("run assess")
}

pub fn grade_args<'a>(question: &'a Path, submission: &'a Path) -> Vec<String> {
    vec![
        "grade".into(),
        "--question".into(),
        question.display().to_string(),
        "--submission".into(),
        submission.display().to_string(),
    ]
}

pub fn assess_owned(args: &[String]) -> Output {
    Command::new(BIN).args(args).output().expect("run assess")
}

pub fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

/// A running `assess serve`, killed on drop.
pub struct Server {
    pub child: Child,
    pub port: u16,
    stderr: Option<std::thread::JoinHandle<String>>,
}

impl Server {
    pub fn start(config: &Path, extra: &[&str]) -> Server {
        let port = free_port();
        let child = Command::new(BIN)
            .args(["serve", "--config"])
            .arg(config)
            .args(["--port", &port.to_string()])
            .args(extra)
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .expect("spawn server");
        let mut child = child;
        let mut pipe = child.stderr.take().unwrap();
        // Drained continuously so a chatty server never blocks on a full pipe.
        let stderr = std::thread::spawn(move || {
            let mut log = String::new();
            let _ = pipe.read_to_string(&mut log);
            log
        });
        let server = Server {
            child,
            port,
            stderr: Some(stderr),
        };
        let deadline = Instant::now() + Duration::from_secs(20);
        while TcpStream::connect(("127.0.0.1", port)).is_err() {
            assert!(Instant::now() < deadline, "server did not come up");
            std::thread::sleep(Duration::from_millis(50));
        }
        server
    }

    /// Everything the server wrote to stderr. Only returns once it has exited.
    pub fn log(&mut self) -> String {
        self.stderr.take().map(|h| h.join().unwrap()).unwrap_or_default()
    }

    pub fn request(&self, method: &str, path: &str, body: Option<&str>) -> (u16, String) {
        http(self.port, method, path, body, None)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Minimal HTTP/1.1 client: one request per connection.
pub fn http(port: u16, method: &str, path: &str, body: Option<&str>, token: Option<&str>) -> (u16, String) {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(120))).unwrap();
    let body = body.unwrap_or("");
    let auth = token
        .map(|t| format!("Authorization: Bearer {t}\r\n"))
        .unwrap_or_default();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n{auth}Content-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let (head, rest) = raw.split_once("\r\n\r\n").unwrap_or((&raw, ""));
    let status = head.split(' ').nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let chunked = head.to_ascii_lowercase().contains("transfer-encoding: chunked");
    let body = if chunked { dechunk(rest) } else { rest.to_string() };
    (status, body)
}

fn dechunk(mut s: &str) -> String {
    let mut out = String::new();
    while let Some((size, rest)) = s.split_once("\r\n") {
        let n = usize::from_str_radix(size.trim(), 16).unwrap_or(0);
        if n == 0 {
            break;
        }
        out.push_str(&rest[..n]);
        s = rest[n..].trim_start_matches("\r\n");
    }
    out
}

/// Service config pointing at the fixture questions and a fresh data dir.
pub fn write_config(dir: &Path, token: Option<&str>) -> PathBuf {
    let config = serde_json::json!({
        "data_dir": dir.join("data"),
        "questions_dir": fixtures().join("questions"),
        "token": token,
    });
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    path
}
