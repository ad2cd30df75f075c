//! CSV and manifest emission. Every CSV starts with a comment line naming
//! the tool version and the hash of the canonical config text, so a result
//! file can always be traced to the run that produced it.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of SHA-256 of the canonical config text.
pub fn config_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest-round-trip decimal; CSV cells parse back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>], config_hash: &str) -> String {
    let mut out = String::new();
    writeln!(out, "# nslab {TOOL_VERSION} config {config_hash}").unwrap();
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        assert_eq!(row.len(), header.len(), "ragged CSV row");
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    config_hash: &str,
) -> Result<()> {
    std::fs::write(path, csv_text(header, rows, config_hash))?;
    Ok(())
}

/// `manifest.txt`: one line per produced file with its digest and size,
/// so whole runs can be compared by diffing two small files.
pub fn write_manifest(dir: &Path, files: &[String], config_hash: &str) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# nslab {TOOL_VERSION} config {config_hash}").unwrap();
    for name in files {
        let bytes = std::fs::read(dir.join(name))?;
        let digest = Sha256::digest(&bytes);
        let short: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        writeln!(out, "{short}  {:>10}  {name}", bytes.len()).unwrap();
    }
    std::fs::write(dir.join("manifest.txt"), out)?;
    Ok(())
}
