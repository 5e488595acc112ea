//! Append-only JSON-lines event log, one file per attempt.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use assess_core::grader::GradeReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created {
        attempt_id: String,
        question_id: String,
        student_id: String,
        code: String,
    },
    CodeUpdated {
        code: String,
    },
    /// Unredacted report; redaction happens at the response boundary.
    Report {
        report: GradeReport,
    },
    Closed {
        final_mark: f64,
    },
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn dir(data_dir: &Path) -> PathBuf {
        data_dir.join("attempts")
    }

    /// Open (creating if needed) the log for `attempt_id`.
    pub fn open(data_dir: &Path, attempt_id: &str) -> io::Result<Self> {
        let dir = Self::dir(data_dir);
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(format!("{attempt_id}.jsonl"));
        if path.exists() {
            drop_torn_tail(&path)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(EventLog { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Write one event as a single line and flush it to disk.
    pub fn append(&mut self, event: &Event) -> io::Result<()> {
        let mut line = serde_json::to_string(event).map_err(io::Error::other)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }
}

/// Cut a final line left incomplete by a crash so later appends start on a
/// fresh line.
fn drop_torn_tail(path: &Path) -> io::Result<()> {
    let bytes = std::fs::read(path)?;
    let mut keep = bytes.len();
    if !bytes.ends_with(b"\n") {
        keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    }
    let body = &bytes[..keep];
    let last_start = body[..body.len().saturating_sub(1)]
        .iter()
        .rposition(|b| *b == b'\n')
        .map_or(0, |i| i + 1);
    if last_start < keep && serde_json::from_slice::<Event>(&body[last_start..]).is_err() {
        keep = last_start;
    }
    if keep < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}

/// Events from one log file. A final line that is cut short or does not
/// parse was being written during a crash and is dropped; an unparsable line
/// anywhere else is an error.
pub fn read_events(path: &Path) -> io::Result<Vec<Event>> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    let mut events = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(e) => events.push(e),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}: line {}: {e}", path.display(), i + 1),
                ))
            }
        }
    }
    Ok(events)
}

/// All attempt logs under `data_dir`, sorted by path.
pub fn log_files(data_dir: &Path) -> io::Result<Vec<PathBuf>> {
    let dir = EventLog::dir(data_dir);
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = EventLog::open(dir.path(), "a1").unwrap();
        let events = vec![
            Event::Created {
                attempt_id: "a1".into(),
                question_id: "q".into(),
                student_id: "s".into(),
                code: "x = 1\n".into(),
            },
            Event::CodeUpdated { code: "y".into() },
            Event::Closed { final_mark: 2.5 },
        ];
        for e in &events {
            log.append(e).unwrap();
        }
        assert_eq!(read_events(log.path()).unwrap(), events);
        assert_eq!(log_files(dir.path()).unwrap(), vec![log.path().to_path_buf()]);
    }

    #[test]
    fn floats_survive_replay_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = EventLog::open(dir.path(), "a1").unwrap();
        let marks = [0.114163533, 0.1 + 0.2, 6.333333333333333, f64::MIN_POSITIVE, 1e300];
        for m in marks {
            log.append(&Event::Closed { final_mark: m }).unwrap();
        }
        let back: Vec<f64> = read_events(log.path())
            .unwrap()
            .into_iter()
            .map(|e| match e {
                Event::Closed { final_mark } => final_mark,
                other => panic!("{other:?}"),
            })
            .collect();
        assert_eq!(
            back.iter().map(|f| f.to_bits()).collect::<Vec<_>>(),
            marks.map(f64::to_bits)
        );
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = EventLog::open(dir.path(), "a1").unwrap();
        log.append(&Event::CodeUpdated { code: "y".into() }).unwrap();
        std::fs::OpenOptions::new()
            .append(true)
            .open(log.path())
            .unwrap()
            .write_all(b"{\"event\":\"code_upd")
            .unwrap();
        assert_eq!(read_events(log.path()).unwrap().len(), 1);

        let mut reopened = EventLog::open(dir.path(), "a1").unwrap();
        reopened.append(&Event::Closed { final_mark: 1.0 }).unwrap();
        assert_eq!(read_events(log.path()).unwrap().len(), 2);
    }

    #[test]
    fn unparsable_complete_tail_is_dropped_on_open() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = EventLog::open(dir.path(), "a1").unwrap();
        log.append(&Event::CodeUpdated { code: "y".into() }).unwrap();
        std::fs::OpenOptions::new()
            .append(true)
            .open(log.path())
            .unwrap()
            .write_all(b"{\"event\":\"nonsense\"}\n")
            .unwrap();
        let mut reopened = EventLog::open(dir.path(), "a1").unwrap();
        reopened.append(&Event::Closed { final_mark: 1.0 }).unwrap();
        assert_eq!(read_events(log.path()).unwrap().len(), 2);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        std::fs::write(&path, "garbage\n{\"event\":\"closed\",\"final_mark\":1.0}\n").unwrap();
        assert!(read_events(&path).is_err());
    }
}
