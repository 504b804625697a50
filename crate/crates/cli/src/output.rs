use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// A file that only appears at its destination once [`AtomicFile::commit`]
/// succeeds. Dropping it uncommitted removes the temporary.
pub struct AtomicFile<'a> {
    dest: &'a Path,
    tmp: NamedTempFile,
}

impl<'a> AtomicFile<'a> {
    pub fn create(dest: &'a Path) -> Result<Self> {
        let dir = match dest.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot create a file next to {}", dest.display()))?;
        Ok(AtomicFile { dest, tmp })
    }

    pub fn commit(mut self) -> Result<()> {
        self.tmp.flush()?;
        self.tmp.as_file().sync_all()?;
        self.tmp
            .persist(self.dest)
            .with_context(|| format!("cannot write {}", self.dest.display()))?;
        Ok(())
    }
}

impl Write for AtomicFile<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.tmp.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.tmp.flush()
    }
}

pub fn write_atomic(dest: &Path, contents: &[u8]) -> Result<()> {
    let mut f = AtomicFile::create(dest)?;
    f.write_all(contents)?;
    f.commit()
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Opens a path, or standard input for `-`.
pub fn open_input(spec: &str) -> Result<Box<dyn BufRead + Send>> {
    if spec == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = fs::File::open(spec).with_context(|| format!("cannot open {spec}"))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

pub fn read_bytes(spec: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    open_input(spec)?.read_to_end(&mut buf)?;
    Ok(buf)
}
