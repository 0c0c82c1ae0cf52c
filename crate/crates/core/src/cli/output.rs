//! Atomic file output and CSV rendering.

use crate::oracle::ContourSample;
use crate::solver::{DecayDiagnostic, Trajectory};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn trajectory_csv(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let mut s = String::with_capacity(traj.len() / stride * 64 + 16);
    s.push_str("t,x1,x2,x3\n");
    let last = traj.len().saturating_sub(1);
    for i in (0..traj.len()).filter(|&i| i % stride == 0 || i == last) {
        let x = traj.x[i];
        let _ = writeln!(s, "{},{},{},{}", traj.t[i], x[0], x[1], x[2]);
    }
    s
}

pub fn decay_csv(d: &DecayDiagnostic) -> String {
    let mut s = String::from("t,scaled_norm\n");
    for (t, v) in &d.series {
        let _ = writeln!(s, "{t},{v}");
    }
    s
}

pub fn contour_csv(samples: &[ContourSample]) -> String {
    let mut s = String::from("segment,t,re,im\n");
    for p in samples {
        let _ = writeln!(s, "{},{},{},{}", p.segment.label(), p.t, p.q.re, p.q.im);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn stride_keeps_last_row() {
        let tr = Trajectory {
            t: (0..=10).map(|i| i as f64).collect(),
            x: vec![[0.0; 3]; 11],
        };
        let csv = trajectory_csv(&tr, 4);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "t,x1,x2,x3");
        assert_eq!(rows.len(), 1 + 4); // 0, 4, 8, 10
        assert!(rows[4].starts_with("10,"));
    }
}
