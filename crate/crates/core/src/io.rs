//! Ensemble persistence: PGM images for grids, CSV for point sets, and a
//! provenance JSON sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{input, Result};
use crate::simulate::{GridSpec, Layout, RealizationEnsemble, Values};

/// Binary PGM (P5), one byte per node, 0 ↦ 0 and 1 ↦ 255, rows by `iy`.
pub fn pgm_bytes(grid: &GridSpec, values: &[u8]) -> Result<Vec<u8>> {
    if values.len() != grid.len() {
        return input(format!("{} values for a {} x {} grid", values.len(), grid.nx, grid.ny));
    }
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    out.extend(values.iter().map(|&v| if v == 0 { 0u8 } else { 255 }));
    Ok(out)
}

/// Parses a binary PGM written by [`pgm_bytes`].
pub fn read_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return input("truncated PGM header");
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return input("only 8-bit P5 images are supported");
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| crate::Error::Input(format!("bad PGM size {s}")));
    let (nx, ny) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = &bytes[pos + 1..];
    if data.len() != nx * ny {
        return input(format!("PGM has {} pixels, header says {}", data.len(), nx * ny));
    }
    Ok((nx, ny, data.iter().map(|&b| u8::from(b > 127)).collect()))
}

/// `point_index,realization,value`, realization-major.
pub fn ensemble_csv(ens: &RealizationEnsemble) -> String {
    let mut out = String::from("point_index,realization,value\n");
    for i in 0..ens.n_real() {
        for p in 0..ens.layout.len() {
            match &ens.values {
                Values::Binary(v) => {
                    let _ = writeln!(out, "{p},{i},{}", v[i][p]);
                }
                Values::Real(v) => {
                    let _ = writeln!(out, "{p},{i},{}", v[i][p]);
                }
            }
        }
    }
    out
}

/// Writes the ensemble under `dir` with file stem `stem`: one PGM per
/// realization for binary grids, otherwise one CSV. Returns the paths.
pub fn write_ensemble(ens: &RealizationEnsemble, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    match (&ens.layout, &ens.values) {
        (Layout::Grid(grid), Values::Binary(v)) => {
            let width = ens.n_real().saturating_sub(1).to_string().len().max(3);
            for (i, real) in v.iter().enumerate() {
                let path = dir.join(format!("{stem}_{i:0width$}.pgm"));
                fs::write(&path, pgm_bytes(grid, real)?)?;
                paths.push(path);
            }
        }
        _ => {
            let path = dir.join(format!("{stem}.csv"));
            fs::write(&path, ensemble_csv(ens))?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn provenance_json(ens: &RealizationEnsemble) -> Value {
    serde_json::to_value(&ens.provenance).expect("provenance serializes")
}
