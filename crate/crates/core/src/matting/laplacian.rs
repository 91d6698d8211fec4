use rayon::prelude::*;

use super::sparse::SparseSymmetricMatrix;
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Grayscale matting Laplacian over `(2r+1)²` windows lying fully inside the
/// image. Each window `w` with mean `μ` and variance `σ²` contributes
///
/// `δ_ij − (1 + (I_i − μ)(I_j − μ) / (σ² + ε/|w|)) / |w|`
///
/// to every pixel pair it contains.
pub fn build_matting_laplacian(img: &GrayImage, window_radius: usize, eps: f64) -> Result<SparseSymmetricMatrix> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if window_radius == 0 {
        return Err(Error::InvalidArgument("window radius must be >= 1".into()));
    }
    let (w, h) = img.dims();
    let r = window_radius;
    let side = 2 * r + 1;
    if w < side || h < side {
        return Err(Error::InvalidArgument(format!(
            "{w}x{h} image is smaller than one {side}x{side} window"
        )));
    }
    let pix = img.data();
    let size = (side * side) as f64;

    // per-window (mean, 1 / (σ² + ε/|w|)), indexed by window centre
    let stats: Vec<(f64, f64)> = (0..w * h)
        .into_par_iter()
        .map(|c| {
            let (cx, cy) = (c % w, c / w);
            if cx < r || cy < r || cx + r >= w || cy + r >= h {
                return (0.0, 0.0);
            }
            let window = || (cy - r..=cy + r).flat_map(|y| pix[y * w + cx - r..=y * w + cx + r].iter());
            let mean = window().sum::<f64>() / size;
            let var = window().map(|v| (v - mean).powi(2)).sum::<f64>() / size;
            (mean, 1.0 / (var + eps / size))
        })
        .collect();

    let span = 4 * r + 1;
    let rows: Vec<Vec<(usize, f64)>> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let mut acc = vec![0.0; span * span];
            let mut touched = vec![false; span * span];
            let lo = |p: usize, n: usize| p.saturating_sub(r).max(r).min(n - 1 - r);
            let (cx0, cx1) = (lo(x, w), (x + r).min(w - 1 - r));
            let (cy0, cy1) = (lo(y, h), (y + r).min(h - 1 - r));
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    let (mean, inv) = stats[cy * w + cx];
                    let zi = pix[i] - mean;
                    for yj in cy - r..=cy + r {
                        for xj in cx - r..=cx + r {
                            let j = yj * w + xj;
                            let zj = pix[j] - mean;
                            let mut v = -(1.0 + zi * zj * inv) / size;
                            if i == j {
                                v += 1.0;
                            }
                            let k = (yj + 2 * r - y) * span + (xj + 2 * r - x);
                            acc[k] += v;
                            touched[k] = true;
                        }
                    }
                }
            }
            let mut row = Vec::new();
            for dy in 0..span {
                for dx in 0..span {
                    let k = dy * span + dx;
                    if touched[k] {
                        let j = (y + dy - 2 * r) * w + (x + dx - 2 * r);
                        row.push((j, acc[k]));
                    }
                }
            }
            row
        })
        .collect();

    Ok(SparseSymmetricMatrix::from_rows(w * h, rows))
}
