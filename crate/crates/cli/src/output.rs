//! CSV output: particle snapshots and result tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use srdem::integrate::Snapshot;

pub const SNAPSHOT_HEADER: &str = "time,id,x,y,z,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz";

/// Float formatting of every CSV cell. Deterministic output uses 17
/// significant digits; otherwise the shortest round-trip form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Number {
    pub deterministic: bool,
}

impl Number {
    pub fn fmt(self, v: f64) -> String {
        if self.deterministic {
            format!("{v:.16e}")
        } else {
            format!("{v:e}")
        }
    }

    pub fn row(self, values: &[f64]) -> String {
        values
            .iter()
            .map(|&v| self.fmt(v))
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn snapshot_csv(snapshot: &Snapshot, num: Number) -> String {
    let mut out = String::with_capacity(64 + 300 * snapshot.particles.len());
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for p in &snapshot.particles {
        let q = p.orientation;
        let (x, v, w) = (p.position, p.velocity, p.angular_velocity);
        let _ = writeln!(
            out,
            "{},{},{}",
            num.fmt(snapshot.time),
            p.id,
            num.row(&[x.x, x.y, x.z, q.w, q.i, q.j, q.k, v.x, v.y, v.z, w.x, w.y, w.z])
        );
    }
    out
}

/// Write each snapshot to `snapshot_NNNNN.csv` under `dir`, plus an
/// `index.csv` listing them. Returns the snapshot paths.
pub fn write_snapshot(
    series: &[Snapshot],
    dir: &Path,
    num: Number,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut index = String::from("index,time,step,particles,seed,file\n");
    let mut paths = Vec::with_capacity(series.len());
    for (k, s) in series.iter().enumerate() {
        let name = format!("snapshot_{k:05}.csv");
        let path = dir.join(&name);
        fs::write(&path, snapshot_csv(s, num))
            .with_context(|| format!("writing {}", path.display()))?;
        let _ = writeln!(
            index,
            "{k},{},{},{},{seed},{name}",
            num.fmt(s.time),
            s.step,
            s.particles.len()
        );
        paths.push(path);
    }
    let path = dir.join("index.csv");
    fs::write(&path, index).with_context(|| format!("writing {}", path.display()))?;
    Ok(paths)
}

/// A result table. The first line is a `# seed = N` comment.
pub struct Table {
    text: String,
    num: Number,
}

impl Table {
    pub fn new(header: &str, seed: u64, num: Number) -> Self {
        Self {
            text: format!("# seed = {seed}\n{header}\n"),
            num,
        }
    }

    pub fn push(&mut self, values: &[f64]) {
        self.text.push_str(&self.num.row(values));
        self.text.push('\n');
    }

    /// Row with leading text cells.
    pub fn push_tagged(&mut self, tags: &[&str], values: &[f64]) {
        self.text.push_str(&tags.join(","));
        if !values.is_empty() {
            self.text.push(',');
            self.text.push_str(&self.num.row(values));
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(path, &self.text).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_numbers_have_17_digits() {
        let n = Number {
            deterministic: true,
        };
        assert_eq!(n.fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(n.fmt(0.0), "0.0000000000000000e0");
        let s = n.fmt(std::f64::consts::PI);
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }
}
