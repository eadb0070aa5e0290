//! ESRI ASCII grid reader and writer.
//!
//! The header carries the south-west corner; the grid spec anchors at the
//! north-west corner, so the writer emits
//! `yllcorner = origin_y - nrows * cellsize` and the reader adds the
//! height back. Values are written with 17 significant digits, which
//! makes read(write(r)) bit-identical. A `.prj` sidecar next to the data
//! file carries the CRS tag verbatim.

use std::fmt::Write as _;
use std::path::Path;

use washmap_core::{GridSpec, Raster};

use crate::error::{CliError, Result};
use crate::format::fmt_f64;

pub const NODATA: f64 = -9999.0;

/// Hard cap on cells per raster, to fail cleanly on a corrupt header
/// instead of attempting an absurd allocation.
const MAX_CELLS: usize = 64_000_000;

pub fn write(path: &Path, raster: &Raster) -> Result<()> {
    let spec = raster.spec();
    let mut out = String::new();
    let yll = spec.origin_y - spec.n_rows as f64 * spec.cell_size;
    let _ = writeln!(out, "ncols {}", spec.n_cols);
    let _ = writeln!(out, "nrows {}", spec.n_rows);
    let _ = writeln!(out, "xllcorner {}", fmt_f64(spec.origin_x));
    let _ = writeln!(out, "yllcorner {}", fmt_f64(yll));
    let _ = writeln!(out, "cellsize {}", fmt_f64(spec.cell_size));
    let _ = writeln!(out, "NODATA_value {NODATA}");
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            if col > 0 {
                out.push(' ');
            }
            match raster.get(col, row) {
                Some(v) if v == NODATA => {
                    return Err(CliError::data(
                        path,
                        format!(
                            "cell ({col}, {row}) holds the no-data sentinel {NODATA} as a real value"
                        ),
                    ));
                }
                Some(v) => out.push_str(&fmt_f64(v)),
                None => {
                    let _ = write!(out, "{NODATA}");
                }
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))?;
    let prj = path.with_extension("prj");
    std::fs::write(&prj, format!("{}\n", spec.crs_tag)).map_err(|e| CliError::io(&prj, e))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Raster> {
    if !path.is_file() {
        return Err(CliError::missing(path, "raster file"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, message: String| CliError::data(path, format!("line {line}: {message}"));

    let mut lines = text.lines().enumerate();
    let mut header = |key: &str| -> Result<(usize, String)> {
        let (idx, line) = lines
            .next()
            .ok_or_else(|| bad(0, format!("file ended before header field '{key}'")))?;
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(idx + 1, format!("expected '{key} <value>', got '{line}'")));
        };
        if !name.eq_ignore_ascii_case(key) {
            return Err(bad(idx + 1, format!("expected header field '{key}', got '{name}'")));
        }
        Ok((idx + 1, value.to_string()))
    };

    let parse_count = |(line, v): (usize, String), key: &str| -> Result<usize> {
        v.parse::<usize>().map_err(|_| bad(line, format!("{key} must be a positive integer, got '{v}'")))
    };
    let parse_float = |(line, v): (usize, String), key: &str| -> Result<f64> {
        let f: f64 =
            v.parse().map_err(|_| bad(line, format!("{key} must be a number, got '{v}'")))?;
        if f.is_finite() {
            Ok(f)
        } else {
            Err(bad(line, format!("{key} must be finite, got '{v}'")))
        }
    };

    let n_cols = parse_count(header("ncols")?, "ncols")?;
    let n_rows = parse_count(header("nrows")?, "nrows")?;
    let xll = parse_float(header("xllcorner")?, "xllcorner")?;
    let yll = parse_float(header("yllcorner")?, "yllcorner")?;
    let cell_size = parse_float(header("cellsize")?, "cellsize")?;
    let nodata = parse_float(header("NODATA_value")?, "NODATA_value")?;
    if n_cols == 0 || n_rows == 0 {
        return Err(bad(2, "grid must have at least one column and row".into()));
    }
    if n_cols.saturating_mul(n_rows) > MAX_CELLS {
        return Err(bad(2, format!("grid of {n_cols} x {n_rows} cells is beyond this tool")));
    }
    if cell_size.is_nan() || cell_size <= 0.0 {
        return Err(bad(5, format!("cellsize must be positive, got {cell_size}")));
    }

    let crs_tag = read_prj(path)?;
    let origin_y = yll + n_rows as f64 * cell_size;
    let spec = GridSpec::new(xll, origin_y, cell_size, n_cols, n_rows, crs_tag)
        .map_err(|e| CliError::data(path, e.to_string()))?;

    let n = spec.n_cells();
    let mut values = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    let mut last_line = 6;
    for (idx, line) in lines {
        last_line = idx + 1;
        for token in line.split_whitespace() {
            if values.len() == n {
                return Err(bad(idx + 1, format!("more than {n} values")));
            }
            let v: f64 = token
                .parse()
                .map_err(|_| bad(idx + 1, format!("expected a number, got '{token}'")))?;
            if v == nodata {
                values.push(0.0);
                mask.push(true);
            } else if v.is_finite() {
                values.push(v);
                mask.push(false);
            } else {
                return Err(bad(idx + 1, format!("non-finite value '{token}'")));
            }
        }
    }
    if values.len() != n {
        return Err(bad(last_line, format!("expected {n} values, found {}", values.len())));
    }
    Raster::from_parts(spec, values, mask).map_err(|e| CliError::data(path, e.to_string()))
}

/// The CRS tag from the `.prj` sidecar; an absent sidecar reads as an
/// empty tag.
fn read_prj(path: &Path) -> Result<String> {
    let prj = path.with_extension("prj");
    if !prj.is_file() {
        return Ok(String::new());
    }
    let text = std::fs::read_to_string(&prj).map_err(|e| CliError::io(&prj, e))?;
    Ok(text.trim().to_string())
}
