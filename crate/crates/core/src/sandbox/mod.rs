//! Isolated execution of submitted code.
//!
//! Every plan runs in a fresh temporary workspace as a child process in its
//! own process group, with a wall-clock deadline, a CPU rlimit, an
//! address-space cap for the run phase, and a byte cap on each captured
//! stream. Container or jail integration would sit behind the same contract.

mod pool;
mod process;
mod toolchain;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pool::{PoolPermit, WorkerPool};
pub use toolchain::{Toolchain, DEFAULT_CXX_FLAGS};

use crate::question::{GradedLanguage, ResourceLimits};

/// Appended to a stream that hit the output cap. Counted inside the cap.
pub const TRUNCATION_MARKER: &str = "\n[output truncated]\n";

const PYTHON_SYNTAX_CHECK: &str = r#"import sys, traceback
path = sys.argv[1]
with open(path, encoding="utf-8") as fh:
    source = fh.read()
try:
    compile(source, path, "exec")
except (SyntaxError, ValueError) as exc:
    traceback.print_exception(type(exc), exc, None)
    sys.exit(1)
"#;

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("{language} toolchain `{}` not found or not executable", program.display())]
    MissingToolchain { language: GradedLanguage, program: PathBuf },
    #[error("workspace: {0}")]
    Workspace(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    SyntaxCheck,
    Compile,
    Run,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ok,
    NonzeroExit,
    Timeout,
    MemoryExceeded,
    OutputTruncated,
    CompileError,
    InternalError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SandboxRequest {
    pub language: GradedLanguage,
    pub files: BTreeMap<String, String>,
    pub phase: Phase,
    pub entry: String,
    pub limits: ResourceLimits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandboxResult {
    pub verdict: Verdict,
    pub stdout: String,
    pub stderr: String,
    pub exit_code: Option<i32>,
    /// Seconds.
    pub wall_time: f64,
}

impl SandboxResult {
    pub fn is_ok(&self) -> bool {
        self.verdict == Verdict::Ok
    }

    fn internal(message: impl Into<String>) -> Self {
        SandboxResult {
            verdict: Verdict::InternalError,
            stdout: String::new(),
            stderr: message.into(),
            exit_code: None,
            wall_time: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SandboxConfig {
    pub toolchain: Toolchain,
    pub worker_pool_size: usize,
    /// Parent directory for per-execution workspaces; the system temp dir when unset.
    pub temp_root: Option<PathBuf>,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        SandboxConfig {
            toolchain: Toolchain::default(),
            worker_pool_size: 4,
            temp_root: None,
        }
    }
}

/// Cheap to clone; clones share the worker pool.
#[derive(Debug, Clone)]
pub struct Sandbox {
    inner: Arc<Inner>,
}

#[derive(Debug)]
struct Inner {
    toolchain: Toolchain,
    pool: WorkerPool,
    temp_root: PathBuf,
}

impl Sandbox {
    pub fn new(config: SandboxConfig) -> Self {
        Sandbox {
            inner: Arc::new(Inner {
                pool: WorkerPool::new(config.worker_pool_size),
                temp_root: config.temp_root.unwrap_or_else(std::env::temp_dir),
                toolchain: config.toolchain,
            }),
        }
    }

    pub fn toolchain(&self) -> &Toolchain {
        &self.inner.toolchain
    }

    pub fn pool(&self) -> &WorkerPool {
        &self.inner.pool
    }

    pub fn execute(&self, req: &SandboxRequest) -> SandboxResult {
        self.execute_plan(std::slice::from_ref(req))
            .pop()
            .unwrap_or_else(|| SandboxResult::internal("empty plan"))
    }

    /// Run requests in order in one shared workspace, so a compile step's
    /// binary is visible to the following run step. Stops after the first
    /// request whose verdict is not `ok`.
    pub fn execute_plan(&self, reqs: &[SandboxRequest]) -> Vec<SandboxResult> {
        let _permit = self.inner.pool.acquire();
        let workspace = match Workspace::create(&self.inner.temp_root) {
            Ok(ws) => ws,
            Err(e) => return vec![SandboxResult::internal(format!("cannot create workspace: {e}"))],
        };
        let mut results = Vec::with_capacity(reqs.len());
        for req in reqs {
            let result = self.execute_in(&workspace, req);
            let stop = !result.is_ok();
            results.push(result);
            if stop {
                break;
            }
        }
        results
    }

    /// Parse (python3) or compile (cpp14) `source` alone without running it.
    pub fn syntax_check(&self, language: GradedLanguage, source: &str, limits: &ResourceLimits) -> SandboxResult {
        let entry = language.student_file().to_string();
        self.execute(&SandboxRequest {
            language,
            files: BTreeMap::from([(entry.clone(), source.to_string())]),
            phase: Phase::SyntaxCheck,
            entry,
            limits: *limits,
        })
    }

    fn execute_in(&self, ws: &Workspace, req: &SandboxRequest) -> SandboxResult {
        if !req.files.contains_key(&req.entry) && req.phase != Phase::Run {
            return SandboxResult::internal(format!("entry `{}` is not among the request files", req.entry));
        }
        for (name, text) in &req.files {
            if let Err(e) = ws.write(name, text) {
                return SandboxResult::internal(format!("cannot write `{name}`: {e}"));
            }
        }
        let tool = match self.inner.toolchain.resolve(req.language) {
            Ok(p) => p,
            Err(e) => return SandboxResult::internal(e.to_string()),
        };
        let (program, args) = match self.command_for(req, &tool, ws) {
            Ok(c) => c,
            Err(msg) => return SandboxResult::internal(msg),
        };
        let (timeout, memory_cap) = match req.phase {
            Phase::Run => (req.limits.run_timeout, Some(req.limits.memory_cap)),
            Phase::SyntaxCheck | Phase::Compile => (req.limits.compile_timeout, None),
        };
        let limits = process::Limits {
            timeout,
            memory_cap,
            output_cap: req.limits.output_cap,
        };
        match process::run(&program, &args, ws.path(), &limits) {
            Ok(done) => classify(req.phase, done, req.limits.output_cap),
            Err(e) => SandboxResult::internal(format!("cannot start `{}`: {e}", program.display())),
        }
    }

    fn command_for(&self, req: &SandboxRequest, tool: &Path, ws: &Workspace) -> Result<(PathBuf, Vec<String>), String> {
        let entry = req.entry.clone();
        let cmd = match (req.language, req.phase) {
            (GradedLanguage::Python3, Phase::SyntaxCheck | Phase::Compile) => (
                tool.to_path_buf(),
                vec!["-B".into(), "-c".into(), PYTHON_SYNTAX_CHECK.into(), entry],
            ),
            (GradedLanguage::Python3, Phase::Run) => (tool.to_path_buf(), vec!["-B".into(), entry]),
            (GradedLanguage::Cpp14, Phase::SyntaxCheck) => {
                let mut args = self.inner.toolchain.cxx_flags.clone();
                args.extend(["-fsyntax-only".into(), entry]);
                (tool.to_path_buf(), args)
            }
            (GradedLanguage::Cpp14, Phase::Compile) => {
                let mut args = self.inner.toolchain.cxx_flags.clone();
                args.extend(["-o".into(), binary_name(&entry), entry]);
                (tool.to_path_buf(), args)
            }
            (GradedLanguage::Cpp14, Phase::Run) => {
                let binary = ws.path().join(binary_name(&entry));
                if !binary.is_file() {
                    return Err(format!("`{}` has not been compiled in this workspace", req.entry));
                }
                (binary, Vec::new())
            }
        };
        Ok(cmd)
    }
}

/// Name of the executable produced from a C++ source file.
pub fn binary_name(entry: &str) -> String {
    let stem = Path::new(entry).file_stem().and_then(|s| s.to_str()).unwrap_or("a");
    format!("{stem}.bin")
}

fn classify(phase: Phase, done: process::Finished, cap: usize) -> SandboxResult {
    let stdout_over = done.stdout.len() > cap;
    let stderr_over = done.stderr.len() > cap;
    let stdout = bounded_text(&done.stdout, cap);
    let stderr = bounded_text(&done.stderr, cap);
    let signal = process::signal_of(&done.status);

    let verdict = if done.timed_out || signal == Some(libc::SIGXCPU) {
        Verdict::Timeout
    } else if done.overflowed || stdout_over || stderr_over {
        Verdict::OutputTruncated
    } else if done.status.success() {
        Verdict::Ok
    } else if matches!(phase, Phase::SyntaxCheck | Phase::Compile) {
        Verdict::CompileError
    } else if looks_like_oom(&stderr, signal) {
        Verdict::MemoryExceeded
    } else {
        Verdict::NonzeroExit
    };

    SandboxResult {
        verdict,
        stdout,
        stderr,
        exit_code: done.status.code(),
        wall_time: done.wall_time.as_secs_f64(),
    }
}

fn looks_like_oom(stderr: &str, signal: Option<i32>) -> bool {
    const MARKERS: &[&str] = &[
        "MemoryError",
        "std::bad_alloc",
        "Cannot allocate memory",
        "out of memory",
    ];
    signal == Some(libc::SIGKILL) || MARKERS.iter().any(|m| stderr.contains(m))
}

/// Lossy UTF-8 text of at most `cap` bytes; over-cap input ends with
/// [`TRUNCATION_MARKER`].
pub(crate) fn bounded_text(bytes: &[u8], cap: usize) -> String {
    if bytes.len() <= cap {
        let text = String::from_utf8_lossy(bytes).into_owned();
        if text.len() <= cap {
            return text;
        }
    }
    let budget = cap.saturating_sub(TRUNCATION_MARKER.len());
    let mut text = String::from_utf8_lossy(&bytes[..bytes.len().min(cap)]).into_owned();
    let mut cut = budget.min(text.len());
    while !text.is_char_boundary(cut) {
        cut -= 1;
    }
    text.truncate(cut);
    if cap >= TRUNCATION_MARKER.len() {
        text.push_str(TRUNCATION_MARKER);
    }
    text
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn create(root: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(root)?;
        let dir = tempfile::Builder::new().prefix("assess-").tempdir_in(root)?;
        Ok(Workspace { dir })
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn write(&self, name: &str, text: &str) -> std::io::Result<()> {
        let rel = Path::new(name);
        if rel.is_absolute() || rel.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "file name escapes the workspace",
            ));
        }
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_text_respects_cap() {
        let bytes = vec![b'x'; 1000];
        let t = bounded_text(&bytes, 100);
        assert!(t.len() <= 100);
        assert!(t.ends_with(TRUNCATION_MARKER));
        assert_eq!(bounded_text(b"hello\n", 100), "hello\n");
    }

    #[test]
    fn bounded_text_handles_multibyte_boundaries() {
        let bytes = "é".repeat(100).into_bytes();
        for cap in 20..60 {
            let t = bounded_text(&bytes, cap);
            assert!(t.len() <= cap, "cap {cap} produced {}", t.len());
        }
    }

    #[test]
    fn bounded_text_counts_replacement_chars() {
        let bytes = vec![0xffu8; 50];
        let t = bounded_text(&bytes, 60);
        assert!(t.len() <= 60);
    }

    #[test]
    fn binary_names() {
        assert_eq!(binary_name("harness.cpp"), "harness.bin");
    }

    #[test]
    fn workspace_rejects_escaping_paths() {
        let ws = Workspace::create(&std::env::temp_dir()).unwrap();
        assert!(ws.write("../evil", "x").is_err());
        assert!(ws.write("/etc/evil", "x").is_err());
        assert!(ws.write("ok/nested.txt", "x").is_ok());
    }
}
