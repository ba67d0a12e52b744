pub mod fit;
pub mod ingest;
pub mod report;
pub mod simulate;

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Creates the output directory and returns it.
pub(crate) fn ensure_output_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot create {}: {e}", dir.display())))
}

pub(crate) fn write_file(path: &Path, content: &[u8]) -> CliResult<()> {
    std::fs::write(path, content)
        .map_err(|e| CliError::data(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}
