use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.txt";

/// `(relative path, sha256 hex)` of every file under `dir`, sorted by path.
/// Hidden entries and the manifest itself are skipped.
pub fn hash_tree(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let walker = WalkDir::new(dir).sort_by_file_name().into_iter().filter_entry(|e| {
        e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.')
    });
    for entry in walker {
        let entry = entry.map_err(|e| CliError::Missing(format!("cannot walk {}: {e}", dir.display())))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path()).to_string_lossy().replace('\\', "/");
        if rel == MANIFEST_NAME {
            continue;
        }
        let bytes = std::fs::read(entry.path()).map_err(|e| CliError::io(entry.path(), e))?;
        out.push((rel, format!("{:x}", Sha256::digest(&bytes))));
    }
    out.sort();
    Ok(out)
}

pub fn render(command: &str, config_toml: &str, files: &[(String, String)]) -> String {
    let mut s = format!("command: {command}\n\n[config]\n{config_toml}");
    if !config_toml.ends_with('\n') {
        s.push('\n');
    }
    s.push_str("\n[files]\n");
    for (path, hash) in files {
        let _ = writeln!(s, "{hash}  {path}");
    }
    s
}

pub fn write_manifest(dir: &Path, command: &str, config_toml: &str) -> Result<(), CliError> {
    let files = hash_tree(dir)?;
    let path = dir.join(MANIFEST_NAME);
    std::fs::write(&path, render(command, config_toml, &files)).map_err(|e| CliError::io(&path, e))
}
