//! Child-process spawning with rlimits, a wall-clock deadline, and bounded
//! stream capture.

use std::io::{self, Read};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

const SEARCH_PATH: &str = "/usr/local/bin:/usr/bin:/bin";
const POLL_INTERVAL: Duration = Duration::from_millis(5);
/// Largest file a child may create.
const FILE_SIZE_CAP: u64 = 64 * 1024 * 1024;

pub(crate) struct Limits {
    pub timeout: Duration,
    pub memory_cap: Option<u64>,
    pub output_cap: usize,
}

pub(crate) struct Finished {
    pub status: ExitStatus,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub timed_out: bool,
    pub overflowed: bool,
    pub wall_time: Duration,
}

pub(crate) fn run(program: &Path, args: &[String], workdir: &Path, limits: &Limits) -> io::Result<Finished> {
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(workdir)
        .env_clear()
        .env("PATH", SEARCH_PATH)
        .env("HOME", workdir)
        .env("LANG", "C.UTF-8")
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONHASHSEED", "0")
        .env("PYTHONIOENCODING", "utf-8")
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());

    let cpu_secs = limits.timeout.as_secs() + 1;
    let memory_cap = limits.memory_cap;
    unsafe {
        cmd.pre_exec(move || {
            if libc::setpgid(0, 0) != 0 {
                return Err(io::Error::last_os_error());
            }
            set_limit(libc::RLIMIT_CPU, cpu_secs)?;
            set_limit(libc::RLIMIT_CORE, 0)?;
            set_limit(libc::RLIMIT_FSIZE, FILE_SIZE_CAP)?;
            if let Some(bytes) = memory_cap {
                set_limit(libc::RLIMIT_AS, bytes)?;
            }
            Ok(())
        });
    }

    let started = Instant::now();
    let mut child = cmd.spawn()?;
    let overflow = Arc::new(AtomicBool::new(false));
    let stdout = capture(child.stdout.take(), limits.output_cap, Arc::clone(&overflow));
    let stderr = capture(child.stderr.take(), limits.output_cap, Arc::clone(&overflow));

    let (status, timed_out) = wait(&mut child, limits.timeout, &overflow)?;
    let wall_time = started.elapsed();
    // Take down anything the child left behind in its process group.
    kill_group(&child);

    Ok(Finished {
        status,
        stdout: stdout.join().unwrap_or_default(),
        stderr: stderr.join().unwrap_or_default(),
        timed_out,
        overflowed: overflow.load(Ordering::SeqCst),
        wall_time,
    })
}

fn set_limit(resource: libc::__rlimit_resource_t, value: u64) -> io::Result<()> {
    let lim = libc::rlimit {
        rlim_cur: value as libc::rlim_t,
        rlim_max: value as libc::rlim_t,
    };
    if unsafe { libc::setrlimit(resource, &lim) } != 0 {
        return Err(io::Error::last_os_error());
    }
    Ok(())
}

fn kill_group(child: &Child) {
    let pid = child.id() as libc::pid_t;
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
}

fn wait(child: &mut Child, timeout: Duration, overflow: &AtomicBool) -> io::Result<(ExitStatus, bool)> {
    let deadline = Instant::now() + timeout;
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok((status, false));
        }
        if overflow.load(Ordering::SeqCst) {
            kill_group(child);
            return Ok((child.wait()?, false));
        }
        if Instant::now() >= deadline {
            kill_group(child);
            return Ok((child.wait()?, true));
        }
        thread::sleep(POLL_INTERVAL);
    }
}

/// Keeps at most `cap + 1` bytes (the extra byte marks overflow) and drains the
/// rest so the child never blocks on a full pipe.
fn capture<R: Read + Send + 'static>(stream: Option<R>, cap: usize, overflow: Arc<AtomicBool>) -> JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut kept = Vec::new();
        let Some(mut stream) = stream else {
            return kept;
        };
        let mut buf = [0u8; 8192];
        loop {
            match stream.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    let room = (cap + 1).saturating_sub(kept.len());
                    kept.extend_from_slice(&buf[..n.min(room)]);
                    if kept.len() > cap {
                        overflow.store(true, Ordering::SeqCst);
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(_) => break,
            }
        }
        kept
    })
}

pub(crate) fn signal_of(status: &ExitStatus) -> Option<i32> {
    status.signal()
}
