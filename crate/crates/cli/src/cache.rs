//! Write-once CSV cache of saddle-connection tables, keyed by the origami
//! and the length bound.
//!
//! Every row is re-traced on load: the stored direction must reproduce the
//! stored end point and the stored length.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use vge_core::origami::{assemble_saddles, trace_separatrix, Origami, SaddleConnection, Surface};

use crate::formats::{fmt_num, Table};
use crate::CliError;

pub const HEADER: [&str; 10] = [
    "start_cone",
    "start_corner",
    "start_offset_num",
    "start_offset_den_code",
    "p",
    "q",
    "m",
    "end_cone",
    "end_corner",
    "length",
];

/// `VGE_CACHE_DIR`, or `./vge-cache`.
pub fn cache_dir() -> PathBuf {
    std::env::var_os("VGE_CACHE_DIR").map_or_else(|| PathBuf::from("vge-cache"), PathBuf::from)
}

pub fn origami_key(o: &Origami, marked: bool) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "{}|{:?}|{:?}|{}",
        o.n(),
        o.sigma_h(),
        o.sigma_v(),
        marked
    ));
    hex::encode(&h.finalize()[..8])
}

pub fn cache_path(dir: &Path, o: &Origami, marked: bool, max_len: f64) -> PathBuf {
    dir.join(format!(
        "saddles_{}_{}.csv",
        origami_key(o, marked),
        fmt_num(max_len)
    ))
}

pub fn saddle_table(saddles: &[SaddleConnection]) -> Table {
    let mut t = Table::new(&HEADER);
    for s in saddles {
        let (u, v) = s.start_offset_ratio();
        t.push(vec![
            s.start.cone.to_string(),
            s.start.corner_index.to_string(),
            v.to_string(),
            u.to_string(),
            s.direction.0.to_string(),
            s.direction.1.to_string(),
            s.multiplicity.to_string(),
            s.end.cone.to_string(),
            s.end.corner_index.to_string(),
            // full precision: this is a cache, not a report
            format!("{:?}", s.length),
        ]);
    }
    t
}

pub fn write_saddles(path: &Path, saddles: &[SaddleConnection]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(saddle_table(saddles).to_csv().as_bytes())?;
        f.sync_all()?;
    }
    if path.exists() {
        // written by someone else in the meantime; keep theirs
        fs::remove_file(&tmp)?;
    } else {
        fs::rename(&tmp, path)?;
    }
    Ok(())
}

fn bad(path: &Path, line: usize, what: &str) -> CliError {
    CliError::Input(format!("{}:{line}: {what}", path.display()))
}

pub fn read_saddles(path: &Path, surface: &Surface) -> Result<Vec<SaddleConnection>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(HEADER.join(",").as_str()) {
        return Err(bad(path, 1, "unexpected header"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != HEADER.len() {
            return Err(bad(path, ln, "wrong number of fields"));
        }
        let int = |k: usize| -> Result<i64, CliError> {
            f[k].parse().map_err(|_| bad(path, ln, HEADER[k]))
        };
        let idx = |k: usize| -> Result<usize, CliError> {
            f[k].parse().map_err(|_| bad(path, ln, HEADER[k]))
        };
        let (cone, corner) = (idx(0)?, idx(1)?);
        let (v, u, p, q, m) = (int(2)?, int(3)?, int(4)?, int(5)?, int(6)?);
        let (end_cone, end_corner) = (idx(7)?, idx(8)?);
        let length: f64 = f[9].parse().map_err(|_| bad(path, ln, "length"))?;
        if m < 1 || length <= 0.0 {
            return Err(bad(path, ln, "nonpositive multiplicity or length"));
        }
        let s = trace_separatrix(surface, cone, corner, p, q, length * (1.0 + 1e-9))
            .map_err(|e| bad(path, ln, &e.to_string()))?
            .ok_or_else(|| bad(path, ln, "no saddle connection in that direction"))?;
        let expect = (m as f64) * ((p * p + q * q) as f64).sqrt();
        if s.multiplicity as i64 != m
            || s.end.cone != end_cone
            || s.end.corner_index != end_corner
            || s.start_offset_ratio() != (u, v)
            || (length - expect).abs() > 1e-12 * expect
            || s.length != length
        {
            return Err(bad(
                path,
                ln,
                "row does not match the traced saddle connection",
            ));
        }
        out.push(s);
    }
    Ok(assemble_saddles(out)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Written,
}

pub fn saddles_cached(
    surface: &Surface,
    marked: bool,
    max_len: f64,
    dir: &Path,
) -> Result<(Vec<SaddleConnection>, CacheStatus, PathBuf), CliError> {
    let path = cache_path(dir, surface.origami(), marked, max_len);
    if path.exists() {
        return Ok((read_saddles(&path, surface)?, CacheStatus::Hit, path));
    }
    let saddles = vge_core::origami::enumerate_saddles(surface, max_len)?;
    write_saddles(&path, &saddles)?;
    Ok((saddles, CacheStatus::Written, path))
}
