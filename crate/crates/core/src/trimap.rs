//! Trimap generation from the three kinds of weak annotation: RECIST axes,
//! several raters' masks, or a single binary mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcut::{default_frame, grabcut_segment, seeds_from_recist, GrabCutParams, RecistAnnotation};
use crate::imaging::{dilate, ensure_same_dims, erode, BinaryMask, GrayImage, SeShape, StructuringElement};
use crate::matting::Trimap;

/// Size of the unknown band cut around a mask boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandParams {
    /// Radius as a fraction of `√area`: `r = max(1, round(se_scale·√area))`.
    pub se_scale: f64,
    pub se_shape: SeShape,
    /// Fixed radius, overriding `se_scale` when set.
    pub se_radius: Option<usize>,
}

impl Default for BandParams {
    fn default() -> Self {
        BandParams {
            se_scale: 0.05,
            se_shape: SeShape::Disk,
            se_radius: None,
        }
    }
}

impl BandParams {
    pub fn radius_for(&self, area: usize) -> usize {
        self.se_radius
            .unwrap_or_else(|| ((self.se_scale * (area as f64).sqrt()).round() as usize).max(1))
            .max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecistTrimapParams {
    pub grabcut: GrabCutParams,
    /// Dilation applied to the rasterized axes before seeding.
    pub band: usize,
    /// Background frame width; `None` means `max(1, 3%)` of the short side.
    pub frame: Option<usize>,
    pub morphology: BandParams,
}

impl Default for RecistTrimapParams {
    fn default() -> Self {
        RecistTrimapParams {
            grabcut: GrabCutParams::default(),
            band: 1,
            frame: None,
            morphology: BandParams::default(),
        }
    }
}

/// Erodes the mask into sure foreground and dilates it into the complement
/// of sure background; the ring between is unknown.
pub fn trimap_from_binary(mask: &BinaryMask, params: &BandParams) -> Result<Trimap> {
    let area = mask.area();
    if area == 0 {
        return Err(Error::InvalidArgument("mask is empty".into()));
    }
    if !(params.se_scale >= 0.0) {
        return Err(Error::InvalidArgument(format!("se_scale must be >= 0, got {}", params.se_scale)));
    }
    let radius = params.radius_for(area);
    let se = StructuringElement::new(params.se_shape, radius)?;
    let fg = erode(mask, &se);
    if fg.area() == 0 {
        return Err(Error::EmptyForeground { radius });
    }
    let bg = dilate(mask, &se).complement();
    if bg.area() == 0 {
        return Err(Error::NoBackground);
    }
    Trimap::from_masks(&fg, &bg)
}

/// Foreground where at least `min_raters` masks agree (all of them by
/// default), background where no rater marked the pixel, unknown elsewhere.
pub fn trimap_from_multirater(masks: &[BinaryMask], min_raters: Option<usize>) -> Result<Trimap> {
    if masks.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two rater masks, got {}",
            masks.len()
        )));
    }
    let dims = masks[0].dims();
    for m in masks {
        ensure_same_dims(dims, m.dims())?;
    }
    let k = min_raters.unwrap_or(masks.len());
    if k == 0 || k > masks.len() {
        return Err(Error::InvalidArgument(format!(
            "min_raters must be in 1..={}, got {k}",
            masks.len()
        )));
    }
    let n = dims.0 * dims.1;
    let mut votes = vec![0usize; n];
    for m in masks {
        for (v, &b) in votes.iter_mut().zip(m.data()) {
            *v += usize::from(b);
        }
    }
    let fg = BinaryMask::new(dims.0, dims.1, votes.iter().map(|&v| v >= k).collect())?;
    if fg.area() == 0 {
        return Err(Error::DisjointRaters);
    }
    let bg = BinaryMask::new(dims.0, dims.1, votes.iter().map(|&v| v == 0).collect())?;
    if bg.area() == 0 {
        return Err(Error::NoBackground);
    }
    Trimap::from_masks(&fg, &bg)
}

/// GrabCut from the RECIST seeds, then the binary-mask band around its
/// result.
pub fn trimap_from_recist(img: &GrayImage, annotation: &RecistAnnotation, params: &RecistTrimapParams) -> Result<Trimap> {
    let segmentation = segment_recist(img, annotation, params)?;
    trimap_from_binary(&segmentation, &params.morphology)
}

/// The grabcut stage of [`trimap_from_recist`] on its own.
pub fn segment_recist(img: &GrayImage, annotation: &RecistAnnotation, params: &RecistTrimapParams) -> Result<BinaryMask> {
    let (w, h) = img.dims();
    let frame = params.frame.unwrap_or_else(|| default_frame(w, h));
    let seeds = seeds_from_recist(annotation, w, h, params.band, frame)?;
    let segmentation = grabcut_segment(img, &seeds, &params.grabcut)?;
    if segmentation.area() == 0 {
        return Err(Error::EmptySegmentation);
    }
    Ok(segmentation)
}
