//! Grayscale PNG/PGM and CSV input/output for grid fields.
//!
//! Reading maps sample codes linearly to `[0, 1]` (`code / maxcode`).
//! Writing rescales `[min, max]` of the field (or a caller-supplied range)
//! onto `[0, maxcode]`. Image row 0 is grid row 0.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_code(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReadOptions {
    /// Convert color images to luma instead of rejecting them.
    pub luma: bool,
    /// Physical extent of the returned grid; unit cells when absent.
    pub extent: Option<[[f64; 2]; 2]>,
}

/// Outcome of an image write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WriteReport {
    /// The mapped range was empty, so every pixel was written as 0.
    pub degenerate_range: bool,
}

fn image_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

enum Format {
    Png,
    Pgm,
}

fn format_of(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(Format::Png),
        Some("pgm") => Ok(Format::Pgm),
        other => Err(Error::UnsupportedImage(format!(
            "{}: extension {:?} (expected .png or .pgm)",
            path.display(),
            other
        ))),
    }
}

/// Reads a grayscale PNG (8/16 bit) or PGM (P2/P5) into `[0, 1]`.
pub fn read_image<T: Real>(path: impl AsRef<Path>, opts: &ReadOptions) -> Result<ScalarField<T>> {
    let path = path.as_ref();
    let (rows, cols, samples) = match format_of(path)? {
        Format::Png => read_png(path, opts.luma)?,
        Format::Pgm => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_pgm(&bytes).map_err(|m| image_err(path, m))?
        }
    };
    let spec = match opts.extent {
        Some(extent) => GridSpec::new(rows, cols, extent)?,
        None => GridSpec::unit_cells(rows, cols)?,
    };
    ScalarField::new(spec, samples.into_iter().map(T::lit).collect())
}

fn read_png(path: &Path, luma: bool) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::open(path).map_err(|e| image_err(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let samples: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|c| c as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|c| c as f64 / 65535.0).collect(),
        other if luma => other
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|c| c as f64 / 65535.0)
            .collect(),
        other => {
            return Err(Error::UnsupportedImage(format!(
                "{}: {:?} is not grayscale; pass the luma conversion flag",
                path.display(),
                other.color()
            )))
        }
    };
    Ok((h, w, samples))
}

/// Parses P2 (ASCII) or P5 (binary, 1 or 2 bytes big-endian) PGM data.
pub(crate) fn decode_pgm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<f64>), String> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> std::result::Result<String, String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err("truncated PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    let num = |s: String| s.parse::<usize>().map_err(|_| format!("bad PGM header field {s:?}"));
    let cols = num(token(&mut pos)?)?;
    let rows = num(token(&mut pos)?)?;
    let maxval = num(token(&mut pos)?)?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("PGM maxval {maxval} out of range"));
    }
    let n = rows * cols;
    let mut codes = Vec::with_capacity(n);
    match magic.as_str() {
        "P2" => {
            for _ in 0..n {
                codes.push(num(token(&mut pos)?)?);
            }
        }
        "P5" => {
            // exactly one whitespace byte separates maxval from the raster
            pos += 1;
            let width = if maxval < 256 { 1 } else { 2 };
            let raster = bytes.get(pos..pos + n * width).ok_or("truncated PGM raster")?;
            if width == 1 {
                codes.extend(raster.iter().map(|&b| b as usize));
            } else {
                codes.extend(raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as usize));
            }
        }
        other => return Err(format!("unsupported PGM magic {other:?}")),
    }
    if let Some(bad) = codes.iter().find(|&&c| c > maxval) {
        return Err(format!("PGM sample {bad} exceeds maxval {maxval}"));
    }
    Ok((rows, cols, codes.into_iter().map(|c| c as f64 / maxval as f64).collect()))
}

fn quantize<T: Real>(f: &ScalarField<T>, range: Option<(f64, f64)>, depth: BitDepth) -> (Vec<u32>, bool) {
    let (lo, hi) = range.unwrap_or((f.min().as_f64(), f.max().as_f64()));
    let max_code = depth.max_code() as f64;
    if !(hi > lo) {
        return (vec![0; f.values().len()], true);
    }
    let codes = f
        .values()
        .iter()
        .map(|v| {
            let t = ((v.as_f64() - lo) / (hi - lo)).clamp(0.0, 1.0);
            (t * max_code).round() as u32
        })
        .collect();
    (codes, false)
}

/// Writes a PNG or PGM (by extension), mapping `[min, max]` to the full code range.
pub fn write_image<T: Real>(f: &ScalarField<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<WriteReport> {
    write_image_in_range(f, path, depth, None)
}

/// Like [`write_image`] but with a fixed value range; values outside are clipped.
pub fn write_image_in_range<T: Real>(
    f: &ScalarField<T>,
    path: impl AsRef<Path>,
    depth: BitDepth,
    range: Option<(f64, f64)>,
) -> Result<WriteReport> {
    let path = path.as_ref();
    let format = format_of(path)?;
    let (codes, degenerate_range) = quantize(f, range, depth);
    let (w, h) = (f.spec().cols() as u32, f.spec().rows() as u32);
    match format {
        Format::Png => {
            let result = match depth {
                BitDepth::Eight => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, codes.iter().map(|&c| c as u8).collect::<Vec<u8>>())
                    .expect("buffer size matches grid")
                    .save(path),
                BitDepth::Sixteen => {
                    ImageBuffer::<Luma<u16>, _>::from_raw(w, h, codes.iter().map(|&c| c as u16).collect::<Vec<u16>>())
                        .expect("buffer size matches grid")
                        .save(path)
                }
            };
            result.map_err(|e| image_err(path, e.to_string()))?;
        }
        Format::Pgm => {
            let mut bytes = format!("P5\n{w} {h}\n{}\n", depth.max_code()).into_bytes();
            for c in codes {
                match depth {
                    BitDepth::Eight => bytes.push(c as u8),
                    BitDepth::Sixteen => bytes.extend_from_slice(&(c as u16).to_be_bytes()),
                }
            }
            fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(WriteReport { degenerate_range })
}

/// One line per grid row, comma-separated, shortest round-trip decimal form.
pub fn write_csv<T: Real>(f: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    write_csv_rows(f.values(), f.spec().cols(), path)
}

pub(crate) fn write_csv_rows<T: Real>(values: &[T], cols: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{}", v.as_f64())).collect();
        writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`write_csv`] onto the given grid.
pub fn read_csv<T: Real>(path: impl AsRef<Path>, spec: GridSpec) -> Result<ScalarField<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(spec.len());
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| image_err(path, format!("line {}: bad number {cell:?}", lineno + 1)))?;
            values.push(T::lit(v));
        }
        if values.len() - before != spec.cols() {
            return Err(image_err(
                path,
                format!("line {}: {} columns, expected {}", lineno + 1, values.len() - before, spec.cols()),
            ));
        }
    }
    if rows != spec.rows() {
        return Err(image_err(path, format!("{rows} rows, expected {}", spec.rows())));
    }
    ScalarField::new(spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field(rows: usize, cols: usize, values: Vec<f64>) -> ScalarField<f64> {
        ScalarField::new(GridSpec::unit_cells(rows, cols).unwrap(), values).unwrap()
    }

    #[test]
    fn ascii_pgm_with_small_maxval() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ramp.pgm");
        let mut text = String::from("P2\n# comment\n4 4\n15\n");
        for k in 0..16 {
            text.push_str(&format!("{k} "));
        }
        fs::write(&path, text).unwrap();
        let f: ScalarField<f64> = read_image(&path, &ReadOptions::default()).unwrap();
        for k in 0..16 {
            assert!((f.values()[k] - k as f64 / 15.0).abs() < 1e-15);
        }
    }

    #[test]
    fn binary_pgm_sixteen_bit() {
        let bytes = [b"P5 2 1 65535\n".as_slice(), &[0x00, 0x00, 0xff, 0xff]].concat();
        let (rows, cols, v) = decode_pgm(&bytes).unwrap();
        assert_eq!((rows, cols), (1, 2));
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn constant_image_writes_zero_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.png");
        let f = field(2, 2, vec![3.0; 4]);
        let report = write_image(&f, &path, BitDepth::Eight).unwrap();
        assert!(report.degenerate_range);
        let back: ScalarField<f64> = read_image(&path, &ReadOptions::default()).unwrap();
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn color_png_needs_luma_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        image::RgbImage::from_pixel(2, 2, image::Rgb([10, 200, 30])).save(&path).unwrap();
        assert!(matches!(read_image::<f64>(&path, &ReadOptions::default()), Err(Error::UnsupportedImage(_))));
        let opts = ReadOptions { luma: true, extent: None };
        let f: ScalarField<f64> = read_image(&path, &opts).unwrap();
        assert!(f.values().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn unsupported_extension_and_unwritable_path() {
        let f = field(1, 1, vec![0.0]);
        assert!(write_image(&f, "/tmp/x.bmp", BitDepth::Eight).is_err());
        assert!(write_csv(&f, "/nonexistent-dir/x.csv").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = field(2, 3, vec![0.1, -2.5e-17, 3.0, 1.0 / 3.0, 7.0, f64::MAX]);
        write_csv(&f, &path).unwrap();
        let back: ScalarField<f64> = read_csv(&path, *f.spec()).unwrap();
        assert_eq!(back, f);
        assert!(read_csv::<f64>(&path, GridSpec::unit_cells(3, 2).unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn image_round_trip_within_quantization(
            values in proptest::collection::vec(-50.0f64..50.0, 12),
            sixteen in any::<bool>(),
            pgm in any::<bool>(),
        ) {
            let f = field(3, 4, values);
            let range = f.range();
            prop_assume!(range > 1e-6);
            let depth = if sixteen { BitDepth::Sixteen } else { BitDepth::Eight };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join(if pgm { "f.pgm" } else { "f.png" });
            write_image(&f, &path, depth).unwrap();
            let back: ScalarField<f64> = read_image(&path, &ReadOptions::default()).unwrap();
            let bound = range / (2.0 * depth.max_code() as f64) * (1.0 + 1e-9);
            for (a, b) in f.values().iter().zip(back.values()) {
                let restored = f.min() + b * range;
                prop_assert!((a - restored).abs() <= bound, "{a} vs {restored}");
            }
        }
    }
}
