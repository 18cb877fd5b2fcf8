//! Line-delimited JSON trial logs.
//!
//! The first line is a header object carrying `schema_version` and `kind`;
//! every later line is one [`TrialRecord`]. Records are appended through an
//! `O_APPEND` handle with one `write` per line, so concurrent appenders never
//! interleave inside a line.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::types::{validate_trial, TrialRecord};
use crate::{Error, Result};

pub const TRIAL_LOG_SCHEMA_VERSION: u32 = 1;
const TRIAL_LOG_KIND: &str = "trial_log";

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    kind: String,
}

fn header_line() -> String {
    let h = Header {
        schema_version: TRIAL_LOG_SCHEMA_VERSION,
        kind: TRIAL_LOG_KIND.into(),
    };
    serde_json::to_string(&h).expect("header serializes") + "\n"
}

/// Append handle on a trial log.
#[derive(Debug)]
pub struct TrialLogWriter {
    path: PathBuf,
    file: File,
}

impl TrialLogWriter {
    /// Open `path` for appending, creating it with a header if it does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ensure_header(path)?;
        Self::append_handle(path)
    }

    /// Create a fresh log at `path`; an existing file is an error.
    pub fn create_new(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !publish_header(path)? {
            return Err(Error::InvalidArgument(format!(
                "{} already exists; refusing to overwrite a trial log",
                path.display()
            )));
        }
        Self::append_handle(path)
    }

    fn append_handle(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append(&mut self, record: &TrialRecord) -> Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn ensure_header(path: &Path) -> Result<()> {
    if path.exists() {
        return Ok(());
    }
    publish_header(path).map(|_| ())
}

/// Atomically create `path` holding only the header: write a private temp
/// file, then hard-link it into place. Returns false if `path` already existed.
fn publish_header(path: &Path) -> Result<bool> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let unique = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".{name}.{}.{unique}.tmp", std::process::id()));
    fs::write(&tmp, header_line()).map_err(|e| Error::io(&tmp, e))?;
    let linked = fs::hard_link(&tmp, path);
    let _ = fs::remove_file(&tmp);
    match linked {
        Ok(()) => Ok(true),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Ok(false),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Append `records` to the log at `path`, creating it if needed.
pub fn persist_trials(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = TrialLogWriter::open(path)?;
    for r in records {
        w.append(r)?;
    }
    Ok(())
}

/// Read every record of a trial log. A malformed line is an error naming
/// its line number, except an unterminated final line, which is dropped
/// with a warning (a writer was interrupted mid-line).
pub fn load_trials(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trial_log(&text, path)
}

fn parse_trial_log(text: &str, path: &Path) -> Result<Vec<TrialRecord>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let terminated = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let Some(first) = lines.first() else {
        return Err(err(1, "empty file, expected a trial_log header".into()));
    };
    let header: Header = serde_json::from_str(first).map_err(|e| err(1, format!("bad header: {e}")))?;
    if header.kind != TRIAL_LOG_KIND {
        return Err(err(1, format!("expected kind {TRIAL_LOG_KIND:?}, found {:?}", header.kind)));
    }
    if header.schema_version != TRIAL_LOG_SCHEMA_VERSION {
        return Err(err(1, format!("unsupported schema_version {}", header.schema_version)));
    }

    let mut records = Vec::with_capacity(lines.len() - 1);
    for (i, line) in lines.iter().enumerate().skip(1) {
        let number = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrialRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) if number == lines.len() && !terminated => {
                log::warn!("{}: ignoring partial final line {number}: {e}", path.display());
                break;
            }
            Err(e) => return Err(err(number, e.to_string())),
        };
        if rec.is_ok() {
            let v = validate_trial(&rec);
            if !v.is_empty() {
                let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
                return Err(err(number, format!("invalid trial: {}", msgs.join("; "))));
            }
        }
        records.push(rec);
    }
    Ok(records)
}
