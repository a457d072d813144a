//! CSV formats and the `start:stop:step` range syntax.

use std::fmt::Write as _;

use mapcfo_core::{CMatrix, Complex64, Frame, MimoConfig};

use crate::simulation::SweepRecord;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("x,mode,mse,trials,bcrlb,crlb\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.x),
            r.mode.name(),
            fmt_f64(r.mse),
            r.trials,
            fmt_f64(r.bcrlb),
            fmt_f64(r.crlb)
        );
    }
    out
}

/// `row,col,re,im` with zero-based indices, row major.
pub fn matrix_csv(m: &CMatrix) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{i},{j},{},{}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

pub fn parse_matrix_csv(text: &str) -> Result<CMatrix, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "row,col,re,im" => {}
        other => return Err(format!("expected header `row,col,re,im`, found {other:?}")),
    }
    let mut entries = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(format!("line {}: expected 4 fields, found {}", n + 2, fields.len()));
        }
        let bad = |what: &str| format!("line {}: bad {what} `{line}`", n + 2);
        let i: usize = fields[0].parse().map_err(|_| bad("row"))?;
        let j: usize = fields[1].parse().map_err(|_| bad("col"))?;
        let re: f64 = fields[2].parse().map_err(|_| bad("real part"))?;
        let im: f64 = fields[3].parse().map_err(|_| bad("imaginary part"))?;
        entries.push((i, j, Complex64::new(re, im)));
    }
    if entries.is_empty() {
        return Err("matrix CSV has no entries".into());
    }
    let rows = entries.iter().map(|e| e.0).max().unwrap() + 1;
    let cols = entries.iter().map(|e| e.1).max().unwrap() + 1;
    let mut m = CMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    for (i, j, z) in entries {
        if std::mem::replace(&mut seen[i * cols + j], true) {
            return Err(format!("entry ({i},{j}) appears twice"));
        }
        m[(i, j)] = z;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(format!("entry ({},{}) is missing", missing / cols, missing % cols));
    }
    Ok(m)
}

/// Reads a frame (`row` = symbol, `col` = receive antenna) for `l_t` antennas.
pub fn parse_frame_csv(text: &str, tx_antennas: usize) -> Result<Frame, String> {
    let m = parse_matrix_csv(text)?;
    let cfg = MimoConfig::new(tx_antennas, m.ncols(), m.nrows()).map_err(|e| e.to_string())?;
    Frame::new(m, cfg).map_err(|e| e.to_string())
}

/// A single value or `start:stop:step`. Points are `start + i step`; `stop`
/// is included when it lies on the grid, up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("bad number `{p}` in range `{s}`"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                return Err(format!("range `{s}` needs a positive finite step"));
            }
            if stop < start {
                return Err(format!("range `{s}` has stop below start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(format!("range `{s}` has too many points"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("range `{s}` must be `value` or `start:stop:step`")),
    }
}

/// Accepts `inf` (any case) for the flat prior.
pub fn parse_variance(s: &str) -> Result<Option<f64>, String> {
    let t = s.trim().to_ascii_lowercase();
    if t == "inf" || t == "infinity" || t == "+inf" {
        return Ok(None);
    }
    let v: f64 = t.parse().map_err(|_| format!("bad variance `{s}`"))?;
    if v.is_infinite() && v > 0.0 {
        Ok(None)
    } else if v > 0.0 {
        Ok(Some(v))
    } else {
        Err(format!("variance must be positive or `inf`, got `{s}`"))
    }
}
