use serde::{Deserialize, Serialize};

use super::gmm::{fit_gmm, GmmModel, EM_MAX_ITERS};
use super::maxflow::GraphCut;
use super::seeds::{Seed, SeedLabels};
use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, BinaryMask, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrabCutParams {
    /// Mixture components per class.
    pub components: usize,
    /// Smoothness weight.
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GrabCutParams {
    fn default() -> Self {
        GrabCutParams {
            components: 5,
            gamma: 50.0,
            iterations: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrabCutOutcome {
    pub mask: BinaryMask,
    /// Energy after each cut.
    pub energies: Vec<f64>,
    pub iterations: usize,
    pub foreground_model: GmmModel,
    pub background_model: GmmModel,
}

/// 4-neighbour contrast weights, horizontal then vertical.
struct Smoothness {
    right: Vec<f64>,
    down: Vec<f64>,
}

impl Smoothness {
    fn new(img: &GrayImage, gamma: f64) -> Self {
        let (w, h) = img.dims();
        let v = img.data();
        let mut sum = 0.0;
        let mut count = 0usize;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    sum += (v[i] - v[i + 1]).powi(2);
                    count += 1;
                }
                if y + 1 < h {
                    sum += (v[i] - v[i + w]).powi(2);
                    count += 1;
                }
            }
        }
        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
        let beta = if mean > 0.0 { 1.0 / (2.0 * mean) } else { 0.0 };
        let weight = |a: f64, b: f64| gamma * (-beta * (a - b).powi(2)).exp();
        let mut right = vec![0.0; w * h];
        let mut down = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    right[i] = weight(v[i], v[i + 1]);
                }
                if y + 1 < h {
                    down[i] = weight(v[i], v[i + w]);
                }
            }
        }
        Smoothness { right, down }
    }

    fn energy(&self, labels: &[bool], w: usize, h: usize) -> f64 {
        let mut e = 0.0;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w && labels[i] != labels[i + 1] {
                    e += self.right[i];
                }
                if y + 1 < h && labels[i] != labels[i + w] {
                    e += self.down[i];
                }
            }
        }
        e
    }
}

fn data_cost(model: &GmmModel, v: f64) -> f64 {
    -model.log_likelihood(v)
}

/// Total energy: data terms under the class models plus the smoothness
/// penalty on every 4-neighbour pair with differing labels.
fn energy(img: &GrayImage, labels: &[bool], fg: &GmmModel, bg: &GmmModel, s: &Smoothness) -> f64 {
    let data: f64 = img
        .data()
        .iter()
        .zip(labels)
        .map(|(&v, &l)| if l { data_cost(fg, v) } else { data_cost(bg, v) })
        .sum();
    data + s.energy(labels, img.width(), img.height())
}

fn samples(img: &GrayImage, take: impl Fn(usize) -> bool) -> Vec<f64> {
    img.data()
        .iter()
        .enumerate()
        .filter(|(i, _)| take(*i))
        .map(|(_, &v)| v)
        .collect()
}

fn cut(img: &GrayImage, seeds: &SeedLabels, fg: &GmmModel, bg: &GmmModel, s: &Smoothness) -> Vec<bool> {
    let (w, h) = img.dims();
    let n = w * h;
    let mut g = GraphCut::with_capacity(n, 2 * n);
    let mut costs = Vec::with_capacity(n);
    let mut max_diff: f64 = 0.0;
    for &v in img.data() {
        let (cf, cb) = (data_cost(fg, v), data_cost(bg, v));
        max_diff = max_diff.max((cf - cb).abs());
        costs.push((cf, cb));
    }
    // exceeds anything a seed pixel could save by flipping
    let max_smooth = s.right.iter().chain(&s.down).cloned().fold(0.0, f64::max);
    let hard = 1.0 + max_diff + 4.0 * max_smooth;
    for (i, &(cf, cb)) in costs.iter().enumerate() {
        match seeds.labels()[i] {
            Seed::SureForeground => g.add_terminal_weights(i, hard, 0.0),
            Seed::SureBackground => g.add_terminal_weights(i, 0.0, hard),
            // cutting the source link labels the pixel background
            Seed::Undecided => {
                let m = cf.min(cb);
                g.add_terminal_weights(i, cb - m, cf - m);
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w && s.right[i] > 0.0 {
                g.add_edge(i, i + 1, s.right[i], s.right[i]);
            }
            if y + 1 < h && s.down[i] > 0.0 {
                g.add_edge(i, i + w, s.down[i], s.down[i]);
            }
        }
    }
    g.solve();
    (0..n).map(|i| g.is_source_side(i)).collect()
}

pub fn grabcut_segment(img: &GrayImage, seeds: &SeedLabels, params: &GrabCutParams) -> Result<BinaryMask> {
    grabcut_with_trace(img, seeds, params).map(|o| o.mask)
}

/// Alternates appearance fitting and min-cut. The first models come from
/// the seed pixels alone; later rounds refit by EM warm-started from the
/// previous models on the current partition, so the energy cannot rise.
pub fn grabcut_with_trace(img: &GrayImage, seeds: &SeedLabels, params: &GrabCutParams) -> Result<GrabCutOutcome> {
    ensure_same_dims(img.dims(), seeds.dims())?;
    if params.components == 0 {
        return Err(Error::InvalidArgument("grabcut needs at least one mixture component".into()));
    }
    if !(params.gamma >= 0.0) || !params.gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be >= 0, got {}", params.gamma)));
    }
    let (w, h) = img.dims();
    let labels_of = |i: usize| seeds.labels()[i];
    let smooth = Smoothness::new(img, params.gamma);

    let mut fg = fit_gmm(&samples(img, |i| labels_of(i) == Seed::SureForeground), params.components, params.seed)?;
    let mut bg = fit_gmm(
        &samples(img, |i| labels_of(i) == Seed::SureBackground),
        params.components,
        params.seed.wrapping_add(1),
    )?;

    let mut labels = cut(img, seeds, &fg, &bg, &smooth);
    let mut energies = vec![energy(img, &labels, &fg, &bg, &smooth)];
    let mut rounds = 1;
    while rounds < params.iterations.max(1) {
        let fg_samples = samples(img, |i| labels[i]);
        let bg_samples = samples(img, |i| !labels[i]);
        if fg_samples.is_empty() || bg_samples.is_empty() {
            break;
        }
        fg = fg.refit(&fg_samples, EM_MAX_ITERS)?;
        bg = bg.refit(&bg_samples, EM_MAX_ITERS)?;
        let next = cut(img, seeds, &fg, &bg, &smooth);
        let e = energy(img, &next, &fg, &bg, &smooth);
        let prev = *energies.last().unwrap();
        assert!(
            e <= prev + 1e-9 * prev.abs().max(1.0),
            "grabcut energy increased from {prev} to {e}"
        );
        energies.push(e);
        rounds += 1;
        let fixed = next == labels;
        labels = next;
        if fixed {
            break;
        }
    }

    Ok(GrabCutOutcome {
        mask: BinaryMask::new(w, h, labels)?,
        energies,
        iterations: rounds,
        foreground_model: fg,
        background_model: bg,
    })
}
