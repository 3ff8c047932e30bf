//! Boundary label files: a `LABELS <n>` header and one `BOUND <id>` line
//! per boundary node.

use std::fmt::Write as _;
use std::path::Path;

use kkboundary::{BoundaryLabeling, Error, Result};

pub fn format_labels(labels: &BoundaryLabeling) -> String {
    let mut out = format!("LABELS {}\n", labels.len());
    for id in labels.boundary_ids() {
        let _ = writeln!(out, "BOUND {id}");
    }
    out
}

pub fn parse_labels(text: &str, origin: &Path) -> Result<BoundaryLabeling> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut flags: Option<Vec<bool>> = None;
    for (i, raw) in text.lines().enumerate() {
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        match (toks.as_slice(), flags.as_mut()) {
            ([], _) => {}
            (["LABELS", n], None) => {
                let n: usize = n.parse().map_err(|_| err(i + 1, "bad node count".into()))?;
                flags = Some(vec![false; n]);
            }
            (["BOUND", id], Some(f)) => {
                let id: usize = id.parse().map_err(|_| err(i + 1, "bad node id".into()))?;
                *f.get_mut(id).ok_or_else(|| err(i + 1, format!("unknown node id {id}")))? = true;
            }
            _ => return Err(err(i + 1, format!("unexpected line {raw:?}"))),
        }
    }
    flags
        .map(BoundaryLabeling::new)
        .ok_or_else(|| err(1, "missing LABELS header".into()))
}

pub fn write_labels(labels: &BoundaryLabeling, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_labels(labels))?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<BoundaryLabeling> {
    let path = path.as_ref();
    parse_labels(&std::fs::read_to_string(path)?, path)
}
