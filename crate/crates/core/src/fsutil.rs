use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Creates the parent directory of an output file if it is missing.
pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}
