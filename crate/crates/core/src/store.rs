//! Workspace directory holding every pipeline stage as plain files.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::matching::MappingKind;
use crate::report::{ExportFormat, ReportKind};

pub const PACKAGES_FILE: &str = "packages.ndjson";
pub const VERSIONS_FILE: &str = "versions.ndjson";
pub const CVES_FILE: &str = "cves.ndjson";
pub const REJECTS_FILE: &str = "rejects.ndjson";
pub const INGEST_SUMMARY_FILE: &str = "ingest_summary.json";
pub const MAP_SUMMARY_FILE: &str = "map_summary.json";
pub const LOCK_FILE: &str = ".vulnmap.lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Decode { path: PathBuf, line: u64, message: String },
    #[error("{}: missing; run `vulnmap {stage}` first", path.display())]
    Missing { path: PathBuf, stage: &'static str },
    #[error("workspace is locked by another run ({})", path.display())]
    Locked { path: PathBuf },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    /// Open `root`, creating it if needed.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.root.join(file)
    }

    pub fn mappings_path(&self, kind: MappingKind) -> PathBuf {
        self.path(&kind.file_name())
    }

    pub fn report_path(&self, kind: ReportKind, format: ExportFormat) -> PathBuf {
        self.path(&format!("report_{}.{}", kind.name(), format.extension()))
    }

    /// Error unless the ingest stage has written its files.
    pub fn require_store(&self) -> Result<(), StoreError> {
        for file in [PACKAGES_FILE, CVES_FILE] {
            let path = self.path(file);
            if !path.is_file() {
                return Err(StoreError::Missing { path, stage: "ingest" });
            }
        }
        Ok(())
    }

    pub fn require_mappings(&self, kind: MappingKind) -> Result<PathBuf, StoreError> {
        let path = self.mappings_path(kind);
        if path.is_file() {
            Ok(path)
        } else {
            Err(StoreError::Missing { path, stage: "map" })
        }
    }

    /// Take the workspace lock; released when the guard drops.
    pub fn lock(&self) -> Result<WorkspaceLock, StoreError> {
        let path = self.path(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WorkspaceLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Locked { path }),
            Err(e) => Err(io_err(&path)(e)),
        }
    }
}

#[derive(Debug)]
pub struct WorkspaceLock {
    path: PathBuf,
}

impl Drop for WorkspaceLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes to `<path>.tmp` and renames over `path` on [`AtomicFile::commit`],
/// so readers never observe a half-written stage. Dropping without a commit
/// removes the temporary file.
pub struct AtomicFile {
    path: PathBuf,
    tmp: PathBuf,
    out: Option<BufWriter<File>>,
}

impl AtomicFile {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let mut tmp = path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        Ok(Self {
            path,
            tmp,
            out: Some(BufWriter::with_capacity(1 << 16, file)),
        })
    }

    pub fn commit(mut self) -> Result<(), StoreError> {
        let out = self.out.take().expect("uncommitted");
        let file = out.into_inner().map_err(|e| io_err(&self.tmp)(e.into_error()))?;
        file.sync_all().map_err(io_err(&self.tmp))?;
        fs::rename(&self.tmp, &self.path).map_err(io_err(&self.path))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn writer(&mut self) -> &mut BufWriter<File> {
        self.out.as_mut().expect("uncommitted")
    }
}

impl Write for AtomicFile {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.writer().write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.writer().flush()
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if self.out.take().is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

/// One JSON document per line.
pub struct NdjsonWriter<W: Write> {
    out: W,
    lines: u64,
}

impl<W: Write> NdjsonWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, lines: 0 }
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, value)?;
        self.out.write_all(b"\n")?;
        self.lines += 1;
        Ok(())
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_ndjson<'a, T: Serialize + 'a>(
    path: &Path,
    values: impl IntoIterator<Item = &'a T>,
) -> Result<u64, StoreError> {
    let mut w = NdjsonWriter::new(AtomicFile::create(path)?);
    for v in values {
        w.write(v).map_err(io_err(path))?;
    }
    let lines = w.lines();
    w.into_inner().commit()?;
    Ok(lines)
}

/// Streams records from an NDJSON file; blank lines are skipped.
pub struct NdjsonReader<T> {
    path: PathBuf,
    lines: io::Lines<BufReader<File>>,
    line: u64,
    _marker: std::marker::PhantomData<fn() -> T>,
}

impl<T: DeserializeOwned> Iterator for NdjsonReader<T> {
    type Item = Result<T, StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(io_err(&self.path)(e))),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            return Some(serde_json::from_str(&text).map_err(|e| StoreError::Decode {
                path: self.path.clone(),
                line: self.line,
                message: e.to_string(),
            }));
        }
    }
}

pub fn ndjson_reader<T: DeserializeOwned>(path: &Path) -> Result<NdjsonReader<T>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(NdjsonReader {
        path: path.to_path_buf(),
        lines: BufReader::with_capacity(1 << 16, file).lines(),
        line: 0,
        _marker: std::marker::PhantomData,
    })
}

pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    ndjson_reader(path)?.collect()
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let mut f = AtomicFile::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| io_err(path)(e.into()))?;
    f.write_all(b"\n").map_err(io_err(path))?;
    f.commit()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Decode {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })
}
