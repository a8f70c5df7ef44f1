//! File formats and run plumbing for the command-line tools.
//!
//! Everything a run touches on disk lives here: the clip container
//! ([`clip_file`]), tab-separated manifests ([`manifest`]), the key=value run
//! configuration ([`config`]), probe checkpoints ([`checkpoint`]), and the
//! seed-derivation scheme that keys every random decision to the master seed
//! ([`seeds`]). Binary formats are little-endian and fixed-layout; text
//! formats are line-oriented so artifacts diff cleanly.
//!
//! All writers go through [`atomic_write`]: content lands in a temp file in
//! the destination directory and is renamed into place, so readers never see
//! a half-written artifact and a crashed run leaves the previous version
//! intact.

pub mod checkpoint;
pub mod clip_file;
pub mod config;
pub mod manifest;
pub mod seeds;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use clip_file::{read_clip, write_clip};
pub use config::RunConfig;
pub use manifest::{
    read_corpus_manifest, read_dataset_manifest, write_corpus_manifest, write_dataset_manifest,
    CorpusRecord, DatasetRecord,
};
pub use seeds::{child_rng, child_seed};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Wraps an io error with the path it came from; `std::io::Error` alone
/// ("No such file or directory") is useless in a CLI message.
pub(crate) fn io_ctx(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Reads a whole file, reporting the path on failure.
pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_ctx(path, e))
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename. The temp name carries the pid so concurrent processes
/// writing *different* targets in one directory cannot collide.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!("{}: not a file path", path.display()),
        )))?
        .to_os_string();

    let mut tmp_name = std::ffi::OsString::from(format!(".{}-", std::process::id()));
    tmp_name.push(&name);
    tmp_name.push(".tmp");
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => Path::new(&tmp_name).to_path_buf(),
    };

    fs::write(&tmp, bytes).map_err(|e| io_ctx(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_ctx(path, e)
    })
}
