//! Trajectory CSV files, SVG plots and atomic file writes.

mod csv;
pub mod svg;

pub use self::csv::{read_trajectory, write_trajectory, COLUMNS};

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Write `contents` to a temporary file next to `path`, then rename it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
