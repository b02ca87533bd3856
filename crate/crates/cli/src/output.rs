//! Atomic file output and small CSV helpers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Writes `bytes` to a temporary sibling and renames it over `path`, so
/// readers never see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// One column per run plus a leading `epoch` column. Runs shorter than the
/// longest leave their trailing cells empty.
pub fn trajectory_csv(labels: &[String], columns: &[Vec<f64>]) -> String {
    let mut out = String::from("epoch");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for r in 0..rows {
        let _ = write!(out, "{}", r + 1);
        for col in columns {
            out.push(',');
            if let Some(v) = col.get(r) {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}

/// Confusion matrix with true classes as rows:
/// `true_class,pred_0,..,pred_{C-1}`.
pub fn confusion_csv(matrix: &[Vec<usize>]) -> String {
    let mut out = String::from("true_class");
    for c in 0..matrix.len() {
        let _ = write!(out, ",pred_{c}");
    }
    out.push('\n');
    for (t, row) in matrix.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}
