use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};

/// An output file written to a temporary sibling and renamed into place on
/// [`Staged::commit`]. Dropping it uncommitted removes the temporary file.
pub struct Staged {
    path: PathBuf,
    writer: BufWriter<NamedTempFile>,
}

impl Staged {
    pub fn create(path: &Path) -> Result<Self> {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
        Ok(Staged {
            path: path.to_path_buf(),
            writer: BufWriter::with_capacity(1 << 16, tmp),
        })
    }

    pub fn commit(self) -> Result<()> {
        let path = self.path;
        let tmp = self.writer.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(&path, e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(())
    }
}

impl Write for Staged {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.writer.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.writer.flush()
    }
}

/// All outputs of one invocation, committed together once the command
/// has succeeded.
#[derive(Default)]
pub struct Outputs(Vec<Staged>);

impl Outputs {
    pub fn add(&mut self, staged: Staged) {
        self.0.push(staged);
    }

    pub fn commit(self) -> Result<()> {
        self.0.into_iter().try_for_each(Staged::commit)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut raw = serde_json::to_vec_pretty(value)?;
    raw.push(b'\n');
    Ok(raw)
}

/// Stages `value` as pretty JSON at `path`, or prints it when no path is
/// given.
pub fn emit_json<T: Serialize>(outputs: &mut Outputs, path: Option<&Path>, value: &T) -> Result<()> {
    let raw = to_json(value)?;
    match path {
        Some(p) => {
            let mut s = Staged::create(p)?;
            s.write_all(&raw)?;
            outputs.add(s);
        }
        None => std::io::stdout().lock().write_all(&raw)?,
    }
    Ok(())
}

/// JSON-lines run log on stderr; silent unless enabled.
#[derive(Debug, Clone, Copy)]
pub struct RunLog {
    enabled: bool,
}

impl RunLog {
    pub fn new(enabled: bool) -> Self {
        RunLog { enabled }
    }

    pub fn event(&self, event: &str, fields: serde_json::Value) {
        if !self.enabled {
            return;
        }
        let mut obj = serde_json::Map::new();
        obj.insert("event".into(), event.into());
        if let serde_json::Value::Object(extra) = fields {
            obj.extend(extra);
        }
        eprintln!("{}", serde_json::Value::Object(obj));
    }
}

pub fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_output_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        {
            let mut s = Staged::create(&p).unwrap();
            s.write_all(b"partial").unwrap();
        }
        assert!(!p.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        let mut s = Staged::create(&p).unwrap();
        s.write_all(b"done").unwrap();
        s.commit().unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "done");
    }
}
