//! PGM (P5) and grayscale PNG reading and writing.
//!
//! Files whose extension is `.png` go through the PNG codec; everything else
//! is treated as binary PGM.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma};

use super::{GrayImage, RawCtSlice};
use crate::error::{Error, Result};

/// Anything that can be written as a unit-range grayscale raster.
pub trait UnitRaster {
    fn dims(&self) -> (usize, usize);
    fn unit_value(&self, index: usize) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedImage {
    Gray(GrayImage),
    Raw(RawCtSlice),
}

impl LoadedImage {
    /// 8-bit data as is; 16-bit data rescaled by `1 / 65535` without
    /// windowing. Use this for masks saved at 16-bit.
    pub fn into_unit(self) -> GrayImage {
        match self {
            LoadedImage::Gray(g) => g,
            LoadedImage::Raw(r) => r.to_unit(),
        }
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    if is_png(path) {
        load_png(path)
    } else {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_pgm(&bytes).map_err(|reason| match reason {
            PgmError::Malformed(reason) => Error::MalformedImage {
                path: path.to_path_buf(),
                reason,
            },
            PgmError::Depth(d) => Error::UnsupportedDepth(d),
        })
    }
}

/// Loads any supported file onto the unit interval (see [`LoadedImage::into_unit`]).
pub fn load_unit_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    load_image(path).map(LoadedImage::into_unit)
}

/// Writes `img` with `round(v * (2^depth - 1))` quantization. The file is
/// written to a sibling temporary and renamed into place.
pub fn save_image<R: UnitRaster + ?Sized>(img: &R, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let (width, height) = img.dims();
    let max = f64::from(depth.max_value());
    let levels: Vec<u16> = (0..width * height)
        .map(|i| (img.unit_value(i).clamp(0.0, 1.0) * max).round() as u16)
        .collect();

    let bytes = if is_png(path) {
        encode_png(width, height, &levels, depth)?
    } else {
        encode_pgm(width, height, &levels, depth)
    };
    write_atomic(path, &bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn encode_pgm(width: usize, height: usize, levels: &[u16], depth: BitDepth) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{}\n", depth.max_value()).into_bytes();
    match depth {
        BitDepth::Eight => out.extend(levels.iter().map(|&v| v as u8)),
        BitDepth::Sixteen => out.extend(levels.iter().flat_map(|v| v.to_be_bytes())),
    }
    out
}

fn encode_png(width: usize, height: usize, levels: &[u16], depth: BitDepth) -> Result<Vec<u8>> {
    let (w, h) = (width as u32, height as u32);
    let dynamic = match depth {
        BitDepth::Eight => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, levels.iter().map(|&v| v as u8).collect())
                .expect("buffer length matches dimensions"),
        ),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, levels.to_vec())
                .expect("buffer length matches dimensions"),
        ),
    };
    let mut cursor = std::io::Cursor::new(Vec::new());
    dynamic
        .write_to(&mut cursor, ImageFormat::Png)
        .map_err(|e| Error::InvalidArgument(format!("png encode failed: {e}")))?;
    Ok(cursor.into_inner())
}

fn load_png(path: &Path) -> Result<LoadedImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let decoded = reader.with_guessed_format().map_err(|e| Error::io(path, e))?.decode().map_err(|e| {
        Error::MalformedImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect();
            Ok(LoadedImage::Gray(GrayImage::new(w, h, data)?))
        }
        DynamicImage::ImageLuma16(buf) => Ok(LoadedImage::Raw(RawCtSlice::new(w, h, buf.into_raw())?)),
        other => Err(Error::UnsupportedColor(format!("{:?}", other.color()))),
    }
}

enum PgmError {
    Malformed(String),
    Depth(String),
}

fn malformed(msg: impl Into<String>) -> PgmError {
    PgmError::Malformed(msg.into())
}

/// Header tokens are separated by whitespace, `#` starts a comment running to
/// the end of the line, and exactly one whitespace byte precedes the raster.
fn parse_pgm(bytes: &[u8]) -> std::result::Result<LoadedImage, PgmError> {
    let mut pos = 0usize;
    let next_token = |pos: &mut usize| -> std::result::Result<String, PgmError> {
        loop {
            match bytes.get(*pos) {
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("truncated header")),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            *pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos)?;
    if magic != "P5" {
        return Err(malformed(format!("expected P5 magic, found {magic:?}")));
    }
    let number = |pos: &mut usize, what: &str| -> std::result::Result<usize, PgmError> {
        let tok = next_token(pos)?;
        tok.parse::<usize>()
            .map_err(|_| malformed(format!("invalid {what} {tok:?}")))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval = number(&mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::Depth(format!("maxval {maxval}")));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(malformed("missing whitespace after maxval")),
    }

    let n = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dimensions overflow"))?;
    let raster = &bytes[pos..];
    if maxval < 256 {
        if raster.len() < n {
            return Err(malformed(format!("expected {n} data bytes, found {}", raster.len())));
        }
        let scale = maxval as f64;
        let data = raster[..n]
            .iter()
            .map(|&v| (f64::from(v) / scale).min(1.0))
            .collect();
        let img = GrayImage::new(width, height, data).map_err(|e| malformed(e.to_string()))?;
        Ok(LoadedImage::Gray(img))
    } else {
        if raster.len() < 2 * n {
            return Err(malformed(format!(
                "expected {} data bytes, found {}",
                2 * n,
                raster.len()
            )));
        }
        let data = raster[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        let slice = RawCtSlice::new(width, height, data).map_err(|e| malformed(e.to_string()))?;
        Ok(LoadedImage::Raw(slice))
    }
}
