//! CSV, PGM and JSON file plumbing.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use copgauss::DataMatrix;
use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Shortest decimal form that parses back to the same double; exponent
/// notation for very small or very large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Formats an optional value, leaving the cell empty when absent or NaN.
pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if !x.is_nan() => fmt_f64(x),
        _ => String::new(),
    }
}

pub fn default_header(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("x{i}")).collect()
}

pub fn write_matrix_csv<W: Write>(out: W, header: &[String], m: &DataMatrix) -> Result<()> {
    let csv_err = |e: csv::Error| HarnessError::Csv { path: "<output>".into(), message: e.to_string() };
    if header.len() != m.ncols() {
        return Err(HarnessError::Data(format!(
            "header has {} names for {} columns",
            header.len(),
            m.ncols()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    let mut row = vec![0.0; m.ncols()];
    for r in 0..m.nrows() {
        m.row_into(r, &mut row);
        w.write_record(row.iter().map(|&v| fmt_f64(v))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::Csv { path: "<output>".into(), message: e.to_string() })
}

pub fn write_matrix_csv_file(path: &Path, header: &[String], m: &DataMatrix) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_matrix_csv(std::io::BufWriter::new(file), header, m).map_err(|e| match e {
        HarnessError::Csv { message, .. } => HarnessError::Csv { path: path.display().to_string(), message },
        other => other,
    })
}

/// Reads a numeric CSV with a mandatory header row. Errors name the data row
/// (1-based), the file line and the column.
pub fn read_matrix_csv<R: Read>(input: R, name: &str) -> Result<(Vec<String>, DataMatrix)> {
    let err = |message: String| HarnessError::Csv { path: name.into(), message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(err("missing header row".into()));
    }
    let p = header.len();
    let mut columns = vec![Vec::new(); p];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let line = rec.position().map_or(0, |pos| pos.line());
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                err(format!("row {} (line {line}), column {:?}: cannot parse {cell:?} as a number", i + 1, header[c]))
            })?;
            if !v.is_finite() {
                return Err(err(format!(
                    "row {} (line {line}), column {:?}: non-finite value {cell:?}",
                    i + 1,
                    header[c]
                )));
            }
            columns[c].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(err("no data rows".into()));
    }
    Ok((header, DataMatrix::from_columns(columns)?))
}

pub fn read_matrix_csv_file(path: &Path) -> Result<(Vec<String>, DataMatrix)> {
    let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_matrix_csv(std::io::BufReader::new(file), &path.display().to_string())
}

/// Grayscale frames of equal size with pixel values in `[0, 1]`, flattened
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    height: usize,
    width: usize,
    frames: Vec<Vec<f64>>,
}

impl ImageSet {
    pub fn new(height: usize, width: usize, frames: Vec<Vec<f64>>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(HarnessError::Data(format!("empty frame size {height}x{width}")));
        }
        for (k, f) in frames.iter().enumerate() {
            if f.len() != height * width {
                return Err(HarnessError::Data(format!(
                    "frame {k} has {} pixels, expected {}",
                    f.len(),
                    height * width
                )));
            }
            if let Some(i) = f.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(HarnessError::Data(format!("frame {k}, pixel {i}: value {} outside [0, 1]", f[i])));
            }
        }
        Ok(Self { height, width, frames })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    /// One row per frame, one column per pixel.
    pub fn to_data_matrix(&self) -> Result<DataMatrix> {
        let buf: Vec<f64> = self.frames.concat();
        Ok(DataMatrix::from_row_major(self.frames.len(), self.height * self.width, &buf)?)
    }

    /// Inverse of [`ImageSet::to_data_matrix`], clamping pixels to `[0, 1]`.
    pub fn from_data_matrix(height: usize, width: usize, m: &DataMatrix) -> Result<Self> {
        if m.ncols() != height * width {
            return Err(HarnessError::Data(format!(
                "{} columns cannot form {height}x{width} frames",
                m.ncols()
            )));
        }
        let frames = (0..m.nrows())
            .map(|r| m.row(r).into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect();
        Self::new(height, width, frames)
    }
}

struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    name: &'a str,
}

impl PgmCursor<'_> {
    fn err(&self, message: impl Into<String>) -> HarnessError {
        HarnessError::Pgm { path: self.name.into(), offset: self.pos, message: message.into() }
    }

    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(format!("{what} out of range")))
    }
}

/// Parses a binary (P5) PGM with maxval ≤ 255 into `(height, width, pixels)`
/// with pixels scaled to `[0, 1]`.
pub fn parse_pgm(bytes: &[u8], name: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut cur = PgmCursor { bytes, pos: 0, name };
    if !bytes.starts_with(b"P5") {
        return Err(cur.err("not a binary PGM (expected magic P5)"));
    }
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(cur.err(format!("unsupported maxval {maxval} (1..=255)")));
    }
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(cur.err("expected a single whitespace before the raster"));
    }
    cur.pos += 1;
    let need = width * height;
    let raster = &bytes[cur.pos..];
    if raster.len() < need {
        cur.pos = bytes.len();
        return Err(cur.err(format!("raster truncated: {} of {need} bytes", raster.len())));
    }
    let scale = maxval as f64;
    let mut pixels = Vec::with_capacity(need);
    for (i, &b) in raster[..need].iter().enumerate() {
        if b as usize > maxval {
            cur.pos += i;
            return Err(cur.err(format!("pixel value {b} exceeds maxval {maxval}")));
        }
        pixels.push(b as f64 / scale);
    }
    Ok((height, width, pixels))
}

/// Encodes a frame as P5 with maxval 255.
pub fn encode_pgm(height: usize, width: usize, pixels: &[f64]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn read_pgm_file(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    parse_pgm(&bytes, &path.display().to_string())
}

/// Loads every `*.pgm` file of a directory in file-name order.
pub fn read_pgm_dir(dir: &Path) -> Result<ImageSet> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    let mut frames = Vec::with_capacity(paths.len());
    let mut size = None;
    for path in &paths {
        let (h, w, px) = read_pgm_file(path)?;
        match size {
            None => size = Some((h, w)),
            Some(s) if s != (h, w) => {
                return Err(HarnessError::Data(format!(
                    "{}: frame is {h}x{w}, earlier frames are {}x{}",
                    path.display(),
                    s.0,
                    s.1
                )))
            }
            _ => {}
        }
        frames.push(px);
    }
    let (h, w) = size.ok_or_else(|| HarnessError::Data(format!("{}: no .pgm files", dir.display())))?;
    ImageSet::new(h, w, frames)
}

/// Writes frames as `<prefix>_0000.pgm`, `<prefix>_0001.pgm`, ...
pub fn write_pgm_dir(dir: &Path, prefix: &str, images: &ImageSet) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    for (k, f) in images.frames().iter().enumerate() {
        let path = dir.join(format!("{prefix}_{k:04}.pgm"));
        fs::write(&path, encode_pgm(images.height(), images.width(), f)).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Data(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

/// Serializes rows of string cells with the given header.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| HarnessError::Data(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Data(e.to_string()))
}
