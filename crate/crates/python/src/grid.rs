//! Row-list conversions, independent of the interpreter.

use softmask::imaging::{BinaryMask, UnitRaster};
use softmask::matting::Trimap;
use softmask::{Error, Result};

/// Flattens equal-length rows into `(width, height, data)`.
pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<(usize, usize, Vec<f64>)> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if width == 0 {
        return Err(Error::InvalidArgument("image must have at least one row and column".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::InvalidArgument(format!(
            "row {i} has {} values, expected {width}",
            rows[i].len()
        )));
    }
    Ok((width, height, rows.into_iter().flatten().collect()))
}

pub fn rows<R: UnitRaster + ?Sized>(img: &R) -> Vec<Vec<f64>> {
    let (w, h) = img.dims();
    (0..h).map(|y| (0..w).map(|x| img.unit_value(y * w + x)).collect()).collect()
}

pub fn mask_rows(m: &BinaryMask) -> Vec<Vec<bool>> {
    m.data().chunks(m.width()).map(<[bool]>::to_vec).collect()
}

pub fn trimap_rows(t: &Trimap) -> Vec<Vec<u8>> {
    t.labels().chunks(t.width()).map(|r| r.iter().map(|l| l.level()).collect()).collect()
}
