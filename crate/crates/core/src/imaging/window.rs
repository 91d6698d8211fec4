use serde::{Deserialize, Serialize};

use super::{GrayImage, RawCtSlice};
use crate::error::{Error, Result};

/// Offset between stored 16-bit values and Hounsfield units.
pub const HU_OFFSET: i32 = 32768;

/// CT display window in Hounsfield units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub level: f64,
    pub width: f64,
}

impl Window {
    /// Lung window.
    pub const LUNG: Window = Window {
        level: -600.0,
        width: 1500.0,
    };
}

impl Default for Window {
    fn default() -> Self {
        Window::LUNG
    }
}

/// Maps `[level - width/2, level + width/2]` HU linearly onto `[0, 1]`,
/// clamping outside.
pub fn hu_window(slice: &RawCtSlice, window: Window) -> Result<GrayImage> {
    if !(window.width > 0.0) || !window.width.is_finite() || !window.level.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "window width must be positive and finite, got {}",
            window.width
        )));
    }
    let low = window.level - window.width / 2.0;
    let data = slice
        .data()
        .iter()
        .map(|&stored| {
            let hu = f64::from(i32::from(stored) - HU_OFFSET);
            ((hu - low) / window.width).clamp(0.0, 1.0)
        })
        .collect();
    GrayImage::new(slice.width(), slice.height(), data)
}
