//! Label-space operators and the loss arithmetic used to train soft-mask
//! segmentors: pixelwise softening, thresholding, label mixing, rater
//! consensus, and the MSE / L1 / least-squares adversarial losses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, BinaryMask, SoftMask};

/// Default binarization threshold, 128 on the 8-bit scale.
pub const DEFAULT_THRESHOLD: f64 = 128.0 / 255.0;

/// Default weight of the L1 term in the segmentor objective.
pub const DEFAULT_L1_WEIGHT: f64 = 100.0;

/// `max(soft, binary)` per pixel: a hard mask wins wherever it is set.
pub fn soften_binary(soft: &SoftMask, binary: &BinaryMask) -> Result<SoftMask> {
    ensure_same_dims(soft.dims(), binary.dims())?;
    let data = soft
        .data()
        .iter()
        .zip(binary.data())
        .map(|(&s, &b)| if b { 1.0 } else { s })
        .collect();
    SoftMask::new(soft.width(), soft.height(), data)
}

/// Pixels with `alpha >= threshold` are foreground.
pub fn binarize(soft: &SoftMask, threshold: f64) -> BinaryMask {
    let data = soft.data().iter().map(|&a| a >= threshold).collect();
    BinaryMask::new(soft.width(), soft.height(), data).expect("same dimensions as input")
}

/// A probability vector over a fixed class set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution(Vec<f64>);

impl LabelDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("distribution needs at least one class".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("probabilities must be finite and >= 0".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(LabelDistribution(probs))
    }

    pub fn uniform(classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::InvalidArgument("distribution needs at least one class".into()));
        }
        Ok(LabelDistribution(vec![1.0 / classes as f64; classes]))
    }

    pub fn one_hot(classes: usize, class: usize) -> Result<Self> {
        if class >= classes {
            return Err(Error::InvalidArgument(format!("class {class} out of {classes}")));
        }
        let mut p = vec![0.0; classes];
        p[class] = 1.0;
        Ok(LabelDistribution(p))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }
}

/// `(1 − ε)·q + ε·u`
pub fn mix_labels(q: &LabelDistribution, u: &LabelDistribution, epsilon: f64) -> Result<LabelDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon must be in [0, 1], got {epsilon}")));
    }
    if q.classes() != u.classes() {
        return Err(Error::InvalidArgument(format!(
            "class sets differ: {} vs {}",
            q.classes(),
            u.classes()
        )));
    }
    Ok(LabelDistribution(
        q.0.iter().zip(&u.0).map(|(&a, &b)| (1.0 - epsilon) * a + epsilon * b).collect(),
    ))
}

/// Pixel is on when at least `ceil(fraction · raters)` masks mark it.
pub fn consensus(masks: &[BinaryMask], fraction: f64) -> Result<BinaryMask> {
    let first = masks
        .first()
        .ok_or_else(|| Error::InvalidArgument("consensus needs at least one mask".into()))?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("fraction must be in (0, 1], got {fraction}")));
    }
    for m in masks {
        ensure_same_dims(first.dims(), m.dims())?;
    }
    let needed = ((fraction * masks.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut votes = vec![0usize; first.len()];
    for m in masks {
        for (v, &b) in votes.iter_mut().zip(m.data()) {
            *v += usize::from(b);
        }
    }
    BinaryMask::new(first.width(), first.height(), votes.iter().map(|&v| v >= needed).collect())
}

fn check_pair(pred: &SoftMask, target: &SoftMask) -> Result<()> {
    ensure_same_dims(target.dims(), pred.dims())
}

/// Super-resolved prediction size: predictions are `r·W × r·H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpscaleGeometry {
    pub r: usize,
    pub width: usize,
    pub height: usize,
}

impl UpscaleGeometry {
    fn check(&self, m: &SoftMask) -> Result<f64> {
        if self.r == 0 || self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("upscale geometry must be positive".into()));
        }
        ensure_same_dims((self.r * self.width, self.r * self.height), m.dims())?;
        Ok((self.r * self.r * self.width * self.height) as f64)
    }
}

/// `Σ (target − pred)² / (r²WH)`
pub fn mse_loss(pred: &SoftMask, target: &SoftMask, geometry: UpscaleGeometry) -> Result<f64> {
    check_pair(pred, target)?;
    let norm = geometry.check(pred)?;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (t - p).powi(2))
        .sum::<f64>()
        / norm)
}

/// `∂mse/∂pred_i = −2(target_i − pred_i) / (r²WH)`
pub fn grad_mse(pred: &SoftMask, target: &SoftMask, geometry: UpscaleGeometry) -> Result<Vec<f64>> {
    check_pair(pred, target)?;
    let norm = geometry.check(pred)?;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| -2.0 * (t - p) / norm)
        .collect())
}

/// Mean absolute difference.
pub fn l1_loss(pred: &SoftMask, target: &SoftMask) -> Result<f64> {
    check_pair(pred, target)?;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}

/// Subgradient `sign(pred − target) / n`, zero at ties.
pub fn grad_l1(pred: &SoftMask, target: &SoftMask) -> Result<Vec<f64>> {
    check_pair(pred, target)?;
    let n = pred.len() as f64;
    Ok(pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            if p > t {
                1.0 / n
            } else if p < t {
                -1.0 / n
            } else {
                0.0
            }
        })
        .collect())
}

/// Least-squares GAN losses `(generator, discriminator)`:
/// `mean((D(fake) − 1)²)` and `mean((D(real) − 1)²) + mean(D(fake)²)`.
pub fn adversarial_losses(d_on_fake: &[f64], d_on_real: &[f64]) -> Result<(f64, f64)> {
    if d_on_fake.len() != d_on_real.len() || d_on_fake.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "discriminator maps must be equal and non-empty, got {} and {}",
            d_on_fake.len(),
            d_on_real.len()
        )));
    }
    if d_on_fake.iter().chain(d_on_real).any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("discriminator outputs must lie in [0, 1]".into()));
    }
    let n = d_on_fake.len() as f64;
    let generator = d_on_fake.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / n;
    let discriminator = d_on_real.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / n
        + d_on_fake.iter().map(|d| d * d).sum::<f64>() / n;
    Ok((generator, discriminator))
}

/// `adv_generator + λ·l1`
pub fn total_objective(adv_generator: f64, l1: f64, lambda: f64) -> Result<f64> {
    if !(adv_generator >= 0.0) || !(l1 >= 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidArgument("loss components and weight must be >= 0".into()));
    }
    Ok(adv_generator + lambda * l1)
}

/// `α·l_soft + (1 − α)·l_hard`
pub fn distill_combine(l_soft: f64, l_hard: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    if !(l_soft >= 0.0) || !(l_hard >= 0.0) {
        return Err(Error::InvalidArgument("losses must be >= 0".into()));
    }
    Ok(alpha * l_soft + (1.0 - alpha) * l_hard)
}

/// Every loss reported for one prediction; `total` is the generator-side
/// objective and `mse` is tracked separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub mse: f64,
    pub l1: f64,
    pub adversarial: f64,
    pub total: f64,
    pub lambda: f64,
    pub r: usize,
}

impl LossBreakdown {
    pub fn compute(
        pred: &SoftMask,
        target: &SoftMask,
        geometry: UpscaleGeometry,
        d_on_fake: &[f64],
        lambda: f64,
    ) -> Result<Self> {
        if d_on_fake.is_empty() || d_on_fake.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("discriminator outputs must be non-empty and in [0, 1]".into()));
        }
        let mse = mse_loss(pred, target, geometry)?;
        let l1 = l1_loss(pred, target)?;
        let adversarial = d_on_fake.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / d_on_fake.len() as f64;
        Ok(LossBreakdown {
            mse,
            l1,
            adversarial,
            total: total_objective(adversarial, l1, lambda)?,
            lambda,
            r: geometry.r,
        })
    }
}
