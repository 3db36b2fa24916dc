//! Content-addressed result cache for the single-case subcommands.
//!
//! A key is the SHA-256 of (operation, canonical parameters, crate
//! version); the value is the exact JSON text the command prints, so
//! a cache hit is byte-identical to the original run. Entries are
//! written once, atomically (temp file plus rename). An entry that
//! fails to parse or carries the wrong schema tag is reported on
//! stderr and recomputed in place.

use crate::errors::CliError;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "FORMCLASS_CACHE_DIR";
pub const CACHE_DEFAULT: &str = ".formclass-cache";

/// Flag beats environment beats the default directory name.
pub fn resolve_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var(CACHE_ENV) {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(CACHE_DEFAULT)
}

pub fn cache_key(op: &str, params: &str) -> String {
    let mut h = Sha256::new();
    h.update(op.as_bytes());
    h.update([0]);
    h.update(params.as_bytes());
    h.update([0]);
    h.update(formclass::VERSION.as_bytes());
    hex(&h.finalize())
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serves the stored bytes when a valid entry exists, otherwise runs
/// `compute` and stores the result. Returns the JSON text and whether
/// it came from the cache.
pub fn fetch_or_compute<F>(
    dir: &Path,
    op: &str,
    params: &str,
    schema: &str,
    compute: F,
) -> Result<(String, bool), CliError>
where
    F: FnOnce() -> Result<String, CliError>,
{
    let key = cache_key(op, params);
    let path = dir.join(format!("{key}.json"));
    if let Ok(bytes) = fs::read_to_string(&path) {
        match serde_json::from_str::<serde_json::Value>(&bytes) {
            Ok(v) if v.get("schema").and_then(|s| s.as_str()) == Some(schema) => {
                return Ok((bytes, true));
            }
            _ => {
                eprintln!(
                    "warning: corrupt cache entry {}; recomputing",
                    path.display()
                );
            }
        }
    }
    let bytes = compute()?;
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create cache dir {}: {e}", dir.display())))?;
    let tmp = dir.join(format!(".tmp-{}-{key}", std::process::id()));
    fs::write(&tmp, &bytes)
        .map_err(|e| CliError::Io(format!("cannot write cache entry {}: {e}", tmp.display())))?;
    fs::rename(&tmp, &path)
        .map_err(|e| CliError::Io(format!("cannot finalize cache entry {}: {e}", path.display())))?;
    Ok((bytes, false))
}
