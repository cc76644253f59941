//! Atomic files, CSV tables, snapshots and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use axiring_core::{Grid, RingField};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Writes `bytes` to a temporary sibling, syncs it and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(HarnessError::io(path, e));
    }
    Ok(())
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let fail = |e: csv::Error| HarnessError::Format { path: "<csv>".into(), message: e.to_string() };
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| HarnessError::Format { path: "<csv>".into(), message: e.to_string() })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| HarnessError::Format { path: path.display().to_string(), message: e.to_string() })?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format { path: path.display().to_string(), message: e.to_string() })
}

/// Sidecar of a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub index: usize,
    pub t: f64,
    pub grid: Grid,
    pub ring_indices: Vec<usize>,
    pub t_eps_fired: bool,
    /// `"f64-le"`: ring after ring, each `nz·nr` values of `η` in row-major order.
    pub encoding: String,
}

pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn snapshot_paths(dir: &Path, index: usize) -> (PathBuf, PathBuf) {
    let stem = format!("snap_{index:05}");
    (dir.join(format!("{stem}.bin")), dir.join(format!("{stem}.json")))
}

pub fn write_snapshot(dir: &Path, index: usize, t: f64, fields: &[RingField], t_eps_fired: bool) -> Result<(), HarnessError> {
    let grid = fields.first().map(|f| f.grid.clone()).ok_or_else(|| HarnessError::Format {
        path: dir.display().to_string(),
        message: "snapshot without fields".into(),
    })?;
    let mut bytes = Vec::with_capacity(8 * grid.len() * fields.len());
    for f in fields {
        for v in &f.eta {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let (bin, side) = snapshot_paths(dir, index);
    atomic_write(&bin, &bytes)?;
    let meta = SnapshotMeta {
        index,
        t,
        grid,
        ring_indices: fields.iter().map(|f| f.ring_index).collect(),
        t_eps_fired,
        encoding: "f64-le".into(),
    };
    write_json(&side, &meta)
}

pub fn read_snapshot(dir: &Path, index: usize) -> Result<(SnapshotMeta, Vec<RingField>), HarnessError> {
    let (bin, side) = snapshot_paths(dir, index);
    let meta: SnapshotMeta = read_json(&side)?;
    let bytes = fs::read(&bin).map_err(|e| HarnessError::io(&bin, e))?;
    let n = meta.grid.len();
    if meta.encoding != "f64-le" || bytes.len() != 8 * n * meta.ring_indices.len() {
        return Err(HarnessError::Format {
            path: bin.display().to_string(),
            message: format!("expected {} rings of {n} f64 values", meta.ring_indices.len()),
        });
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let fields = meta
        .ring_indices
        .iter()
        .enumerate()
        .map(|(k, &ring_index)| RingField { grid: meta.grid.clone(), eta: values[k * n..(k + 1) * n].to_vec(), ring_index })
        .collect();
    Ok((meta, fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use axiring_core::grid::make_grid;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid([-0.3, 0.3, 0.5, 1.1], 0.1).unwrap().shifted(3);
        let mut f = RingField::zeros(&g, 1);
        f.eta.iter_mut().enumerate().for_each(|(k, e)| *e = (k as f64 * 0.37).sin() * 1e-7 + 1.0 / 3.0);
        write_snapshot(dir.path(), 7, 0.1 + 0.2, &[f.clone()], true).unwrap();
        let (meta, back) = read_snapshot(dir.path(), 7).unwrap();
        assert_eq!(meta.t, 0.1 + 0.2);
        assert!(meta.t_eps_fired);
        assert_eq!(back, vec![f]);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(atomic_write(&dir.path().join("missing/x.csv"), b"x").is_err());
    }

    #[test]
    fn csv_quotes_per_rfc4180() {
        let b = csv_bytes(&["a".into(), "b,c".into()], &[vec!["1".into(), "x\"y".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,\"b,c\"\r\n1,\"x\"\"y\"\r\n");
    }
}
