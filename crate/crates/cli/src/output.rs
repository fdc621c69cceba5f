use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::Failure;

/// Output tree staged next to its destination and moved into place only
/// when the command succeeds. Dropping it unpublished removes the staging
/// directory.
pub struct Staged {
    dir: TempDir,
    dest: PathBuf,
}

impl Staged {
    /// Fails if `dest` exists and is not an empty directory.
    pub fn new(dest: &Path) -> Result<Self, Failure> {
        if dest.exists() {
            let empty = dest.is_dir()
                && std::fs::read_dir(dest)
                    .map_err(|e| io_failure(dest, e))?
                    .next()
                    .is_none();
            if !empty {
                return Err(Failure::user(
                    "io",
                    format!("{}: output path exists and is not an empty directory", dest.display()),
                ));
            }
        }
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        std::fs::create_dir_all(&parent).map_err(|e| io_failure(&parent, e))?;
        let dir = tempfile::Builder::new()
            .prefix(".retina-staging-")
            .tempdir_in(&parent)
            .map_err(|e| io_failure(&parent, e))?;
        Ok(Self {
            dir,
            dest: dest.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn publish(self) -> Result<(), Failure> {
        let staged = self.dir.keep();
        if self.dest.is_dir() {
            std::fs::remove_dir(&self.dest).map_err(|e| io_failure(&self.dest, e))?;
        }
        std::fs::rename(&staged, &self.dest).map_err(|e| {
            let _ = std::fs::remove_dir_all(&staged);
            io_failure(&self.dest, e)
        })
    }
}

pub fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::user("io", format!("{}: {e}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| io_failure(path, e))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}
