//! Atomic artifact writing: every file lands via temp-file + rename so a
//! failed run never leaves truncated output behind.

use anyhow::Context;
use std::path::{Path, PathBuf};

/// Resolves the output directory, honoring the `CAMPAIGN_OUTPUT_ROOT`
/// environment override.
pub fn output_dir(configured: &str) -> PathBuf {
    match std::env::var_os("CAMPAIGN_OUTPUT_ROOT") {
        Some(root) => Path::new(&root).join(configured),
        None => PathBuf::from(configured),
    }
}

pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let final_path = dir.join(name);
    let tmp_path = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp_path, contents)
        .with_context(|| format!("writing {}", tmp_path.display()))?;
    std::fs::rename(&tmp_path, &final_path)
        .with_context(|| format!("renaming into {}", final_path.display()))?;
    Ok(final_path)
}
