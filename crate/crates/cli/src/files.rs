use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// First line of every file this tool writes.
pub const FORMAT_LINE: &str = "lpgraph-format v1";

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn check_format_line(path: &Path, first: Option<&str>) -> CliResult<()> {
    match first {
        Some(FORMAT_LINE) => Ok(()),
        Some(other) => Err(CliError::format(path, 1, format!("expected `{FORMAT_LINE}`, found `{other}`"))),
        None => Err(CliError::format(path, 1, "empty file")),
    }
}
