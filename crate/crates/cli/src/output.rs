//! Serialization helpers: 17-significant-digit CSV and JSON documents,
//! written to a file or stdout.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anisobec::SweepRecord;
use serde::Serialize;

use crate::Failure;

pub const SWEEP_HEADER: &str = "T,phi,z,frac0,frac1,frac2,frac3,eird,x1,x2,x3,xi_ratio";

/// A real with 17 significant digits (round-trips any `f64`).
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::with_capacity(256 * (records.len() + 1));
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for r in records {
        let cols = [
            real(r.temperature),
            real(r.phi),
            real(r.z),
            real(r.frac0),
            real(r.frac1),
            real(r.frac2),
            real(r.frac3),
            r.eird.to_string(),
            real(r.x1),
            real(r.x2),
            real(r.x3),
            real(r.xi_ratio),
        ];
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Numerical(format!("serialization failed: {e}")))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Sidecar file holding the metadata of a CSV output: `<out>.meta.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5] {
            let s = real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(real(0.05), "5.0000000000000003e-2");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("/tmp/a.csv")), PathBuf::from("/tmp/a.csv.meta.json"));
    }
}
