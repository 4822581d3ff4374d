use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Output files staged next to their destination and renamed into place
/// together, so a failed run leaves nothing behind.
#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn add(&mut self, dest: &Path, body: &[u8]) -> Result<()> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp =
            NamedTempFile::new_in(dir).with_context(|| format!("creating output in {}", dir.display()))?;
        tmp.write_all(body)?;
        tmp.flush()?;
        self.files.push((tmp, dest.to_path_buf()));
        Ok(())
    }

    pub fn commit(self) -> Result<()> {
        for (tmp, dest) in self.files {
            tmp.persist(&dest).with_context(|| format!("writing {}", dest.display()))?;
        }
        Ok(())
    }
}

/// Writes `body` to `dest`, or to stdout without one.
pub fn emit(dest: Option<&Path>, body: &[u8]) -> Result<()> {
    match dest {
        Some(p) => {
            let mut s = Staged::default();
            s.add(p, body)?;
            s.commit()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(body)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// `dir/stem.truth.json` for `dir/stem.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}
