//! Independent reference implementations and random instance generators
//! shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softmask::graphcut::FlowNetwork;
use softmask::imaging::{BinaryMask, GrayImage};
use softmask::matting::{Trimap, TrimapLabel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(w: usize, h: usize, rng: &mut impl Rng) -> GrayImage {
    GrayImage::new(w, h, (0..w * h).map(|_| rng.random::<f64>()).collect()).unwrap()
}

/// Labels drawn independently, then one foreground and one background
/// pixel forced at distinct random positions.
pub fn random_trimap(w: usize, h: usize, rng: &mut impl Rng) -> Trimap {
    let n = w * h;
    let mut labels: Vec<TrimapLabel> = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => TrimapLabel::Background,
            1 => TrimapLabel::Unknown,
            _ => TrimapLabel::Foreground,
        })
        .collect();
    let fg = rng.random_range(0..n);
    let bg = (fg + rng.random_range(1..n)) % n;
    labels[fg] = TrimapLabel::Foreground;
    labels[bg] = TrimapLabel::Background;
    Trimap::new(w, h, labels).unwrap()
}

/// Union of 1 to 3 random disks, clipped to the image.
pub fn random_blob_mask(w: usize, h: usize, rng: &mut impl Rng) -> BinaryMask {
    let blobs: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            (
                rng.random_range(0.25..0.75) * w as f64,
                rng.random_range(0.25..0.75) * h as f64,
                rng.random_range(0.12..0.25) * w.min(h) as f64,
            )
        })
        .collect();
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            blobs.iter().any(|&(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) <= r * r)
        })
        .collect();
    BinaryMask::new(w, h, data).unwrap()
}

/// Dense matting Laplacian accumulated window by window.
pub fn dense_laplacian(img: &GrayImage, r: usize, eps: f64) -> DMatrix<f64> {
    let (w, h) = img.dims();
    let n = w * h;
    let v = img.data();
    let size = ((2 * r + 1) * (2 * r + 1)) as f64;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for cy in r..h - r {
        for cx in r..w - r {
            let idx: Vec<usize> = (cy - r..=cy + r)
                .flat_map(|y| (cx - r..=cx + r).map(move |x| y * w + x))
                .collect();
            let mean = idx.iter().map(|&i| v[i]).sum::<f64>() / size;
            let var = idx.iter().map(|&i| v[i] * v[i]).sum::<f64>() / size - mean * mean;
            let denom = var + eps / size;
            for &i in &idx {
                for &j in &idx {
                    let kron = if i == j { 1.0 } else { 0.0 };
                    l[(i, j)] += kron - (1.0 + (v[i] - mean) * (v[j] - mean) / denom) / size;
                }
            }
        }
    }
    l
}

/// Direct solve of `(L + λD) α = λ b`, clamped to `[0, 1]`.
pub fn dense_alpha(l: &DMatrix<f64>, trimap: &Trimap, lambda: f64) -> Vec<f64> {
    let n = trimap.len();
    let mut a = l.clone();
    let mut b = DVector::<f64>::zeros(n);
    for (i, label) in trimap.labels().iter().enumerate() {
        match label {
            TrimapLabel::Foreground => {
                a[(i, i)] += lambda;
                b[i] = lambda;
            }
            TrimapLabel::Background => a[(i, i)] += lambda,
            TrimapLabel::Unknown => {}
        }
    }
    let x = a.lu().solve(&b).expect("system is nonsingular");
    x.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// Random network on `2 + inner` nodes, source 0 and sink 1, with integer
/// capacities in `1..=max_cap`.
pub fn random_network(inner: usize, max_cap: u32, density: f64, rng: &mut impl Rng) -> FlowNetwork {
    let n = inner + 2;
    let mut net = FlowNetwork::new(n, 0, 1).unwrap();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(density) {
                net.add_edge(u, v, f64::from(rng.random_range(1..=max_cap))).unwrap();
            }
        }
    }
    net
}

/// Minimum capacity over every cut separating source from sink.
pub fn brute_force_min_cut(net: &FlowNetwork) -> f64 {
    let inner: Vec<usize> = (0..net.node_count())
        .filter(|&v| v != net.source() && v != net.sink())
        .collect();
    let mut best = f64::INFINITY;
    for bits in 0u64..(1 << inner.len()) {
        let mut side = vec![false; net.node_count()];
        side[net.source()] = true;
        for (k, &v) in inner.iter().enumerate() {
            side[v] = bits >> k & 1 == 1;
        }
        let cap: f64 = net
            .edges()
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c)
            .sum();
        best = best.min(cap);
    }
    best
}

/// ROC curve swept over distinct thresholds, integrated with trapezoids.
pub fn trapezoid_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut prev = (0.0, 0.0);
    let mut area = 0.0;
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|&(&s, &l)| l && s >= t).count() as f64;
        let fp = scores.iter().zip(labels).filter(|&(&s, &l)| !l && s >= t).count() as f64;
        let point = (fp / neg, tp / pos);
        area += (point.0 - prev.0) * (point.1 + prev.1) / 2.0;
        prev = point;
    }
    area
}

pub fn dice_of(a: &BinaryMask, b: &BinaryMask) -> f64 {
    softmask::metrics::confusion(a, b).unwrap().dice()
}
