use super::GrayImage;
use crate::error::{Error, Result};

/// Align-corners bilinear resize: destination corner pixels sample source
/// corner pixels exactly, `x_src = x_dst * (W - 1) / (W' - 1)`.
pub fn bilinear_resize(img: &GrayImage, new_width: usize, new_height: usize) -> Result<GrayImage> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidArgument(format!(
            "target dimensions must be positive, got {new_width}x{new_height}"
        )));
    }
    let (w, h) = img.dims();
    let xs = sample_positions(w, new_width);
    let ys = sample_positions(h, new_height);
    let src = img.data();

    let mut data = Vec::with_capacity(new_width * new_height);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            let top = lerp(src[y0 * w + x0], src[y0 * w + x1], tx);
            let bottom = lerp(src[y1 * w + x0], src[y1 * w + x1], tx);
            data.push(lerp(top, bottom, ty));
        }
    }
    GrayImage::new(new_width, new_height, data)
}

fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|i| {
            if dst == 1 || src == 1 {
                return (0, 0, 0.0);
            }
            let pos = (i * (src - 1)) as f64 / (dst - 1) as f64;
            let i0 = (pos.floor() as usize).min(src - 1);
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        return a;
    }
    let v = a + (b - a) * t;
    v.clamp(a.min(b), a.max(b))
}
