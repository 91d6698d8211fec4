//! One-dimensional Gaussian mixtures fitted by EM.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const EM_MAX_ITERS: usize = 300;
pub const EM_TOLERANCE: f64 = 1e-6;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Component {
    #[inline]
    fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * (LN_2PI + self.variance.ln() + d * d / self.variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    components: Vec<Component>,
}

/// Samples collapsed to distinct values with multiplicities. EM on this
/// form is the same computation as on the raw list.
#[derive(Debug, Clone)]
struct Histogram {
    values: Vec<f64>,
    counts: Vec<f64>,
    total: f64,
}

impl Histogram {
    fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for v in sorted {
            if values.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1.0;
            } else {
                values.push(v);
                counts.push(1.0);
            }
        }
        Histogram {
            values,
            counts,
            total: samples.len() as f64,
        }
    }
}

impl GmmModel {
    /// Validates weights (non-negative, summing to one) and the variance floor.
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > 1e-9 || components.iter().any(|c| !(c.weight >= 0.0)) {
            return Err(Error::InvalidArgument(format!("weights must sum to 1, got {sum}")));
        }
        if components.iter().any(|c| !(c.variance >= VARIANCE_FLOOR) || !c.mean.is_finite()) {
            return Err(Error::InvalidArgument("variance below floor".into()));
        }
        Ok(GmmModel { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `log p(x)` under the mixture.
    pub fn log_likelihood(&self, x: f64) -> f64 {
        let mut terms = [f64::NEG_INFINITY; 16];
        let mut buf;
        let logs: &mut [f64] = if self.components.len() <= terms.len() {
            &mut terms[..self.components.len()]
        } else {
            buf = vec![f64::NEG_INFINITY; self.components.len()];
            &mut buf
        };
        for (l, c) in logs.iter_mut().zip(&self.components) {
            *l = if c.weight > 0.0 {
                c.weight.ln() + c.log_density(x)
            } else {
                f64::NEG_INFINITY
            };
        }
        log_sum_exp(logs)
    }

    /// Sum of `log p(x)` over `samples`.
    pub fn total_log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.log_likelihood(x)).sum()
    }

    #[cfg(test)]
    fn hist_log_likelihood(&self, h: &Histogram) -> f64 {
        h.values
            .iter()
            .zip(&h.counts)
            .map(|(&x, &n)| n * self.log_likelihood(x))
            .sum()
    }

    /// One EM step, returning the mean log-likelihood of the parameters it
    /// started from. Components whose responsibility mass vanishes keep their
    /// mean and variance with zero weight.
    fn em_step(&mut self, h: &Histogram, resp: &mut Vec<f64>) -> f64 {
        let k = self.components.len();
        // log(weight) - log(σ√2π) and 1/(2σ²) per component
        let consts: Vec<(f64, f64)> = self
            .components
            .iter()
            .map(|c| {
                let offset = if c.weight > 0.0 {
                    c.weight.ln() - 0.5 * (LN_2PI + c.variance.ln())
                } else {
                    f64::NEG_INFINITY
                };
                (offset, 0.5 / c.variance)
            })
            .collect();
        let means: Vec<f64> = self.components.iter().map(|c| c.mean).collect();
        resp.clear();
        resp.resize(h.values.len() * k, 0.0);
        let mut mass = vec![0.0; k];
        let mut first = vec![0.0; k];
        let mut ll = 0.0;
        for ((&x, &n), row) in h.values.iter().zip(&h.counts).zip(resp.chunks_exact_mut(k)) {
            let mut top = f64::NEG_INFINITY;
            for j in 0..k {
                let d = x - means[j];
                row[j] = consts[j].0 - d * d * consts[j].1;
                top = top.max(row[j]);
            }
            let mut sum = 0.0;
            for r in row.iter_mut() {
                *r = (*r - top).exp();
                sum += *r;
            }
            ll += n * (top + sum.ln());
            let scale = n / sum;
            for j in 0..k {
                let r = row[j] * scale;
                row[j] = r;
                mass[j] += r;
                first[j] += r * x;
            }
        }
        let new_means: Vec<f64> = (0..k)
            .map(|j| if mass[j] > 0.0 { first[j] / mass[j] } else { means[j] })
            .collect();
        let mut second = vec![0.0; k];
        for (&x, row) in h.values.iter().zip(resp.chunks_exact(k)) {
            for j in 0..k {
                let d = x - new_means[j];
                second[j] += row[j] * d * d;
            }
        }
        let total_mass: f64 = mass.iter().sum();
        for j in 0..k {
            let c = &mut self.components[j];
            c.weight = mass[j] / total_mass;
            if mass[j] > 0.0 {
                c.mean = new_means[j];
                c.variance = (second[j] / mass[j]).max(VARIANCE_FLOOR);
            }
        }
        ll / h.total
    }

    /// Runs up to `max_iters` EM updates, stopping once an update gains less
    /// than `EM_TOLERANCE` in mean log-likelihood.
    fn run_em(&mut self, h: &Histogram, max_iters: usize) -> usize {
        let mut resp = Vec::new();
        if max_iters == 0 {
            return 0;
        }
        let mut prev = self.em_step(h, &mut resp);
        for it in 1..max_iters {
            // likelihood of the parameters produced by the previous update
            let ll = self.em_step(h, &mut resp);
            if ll - prev < EM_TOLERANCE {
                return it + 1;
            }
            prev = ll;
        }
        max_iters
    }

    /// Continues EM from the current parameters on new samples. The data
    /// log-likelihood of `samples` never decreases relative to `self`.
    pub fn refit(&self, samples: &[f64], max_iters: usize) -> Result<GmmModel> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("cannot fit a mixture to no samples".into()));
        }
        let h = Histogram::new(samples);
        let mut next = self.clone();
        next.run_em(&h, max_iters);
        Ok(next)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Fits a `k`-component mixture: k-means++ seeding from `seed`, then EM
/// until the mean log-likelihood improves by less than `1e-6` or 300
/// iterations pass. `k` is clamped to the number of distinct sample values.
pub fn fit_gmm(samples: &[f64], k: usize, seed: u64) -> Result<GmmModel> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot fit a mixture to no samples".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("component count must be >= 1".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let h = Histogram::new(samples);
    let k = k.min(h.values.len());
    let centers = kmeans_pp(&h, k, seed);

    // hard assignment to the nearest centre gives the starting parameters
    let mut mass = vec![0.0; k];
    let mut first = vec![0.0; k];
    let mut second = vec![0.0; k];
    let mut owner = Vec::with_capacity(h.values.len());
    for (&x, &n) in h.values.iter().zip(&h.counts) {
        let j = nearest(&centers, x);
        owner.push(j);
        mass[j] += n;
        first[j] += n * x;
    }
    let means: Vec<f64> = (0..k)
        .map(|j| if mass[j] > 0.0 { first[j] / mass[j] } else { centers[j] })
        .collect();
    for ((&x, &n), &j) in h.values.iter().zip(&h.counts).zip(&owner) {
        second[j] += n * (x - means[j]).powi(2);
    }
    let components = (0..k)
        .map(|j| Component {
            weight: mass[j] / h.total,
            mean: means[j],
            variance: if mass[j] > 0.0 {
                (second[j] / mass[j]).max(VARIANCE_FLOOR)
            } else {
                VARIANCE_FLOOR
            },
        })
        .collect();
    let mut model = GmmModel { components };
    model.run_em(&h, EM_MAX_ITERS);
    Ok(model)
}

fn nearest(centers: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, &c) in centers.iter().enumerate() {
        if (x - c).abs() < (x - centers[best]).abs() {
            best = j;
        }
    }
    best
}

/// k-means++ over distinct values, weighted by multiplicity.
fn kmeans_pp(h: &Histogram, k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, weights: &[f64]| -> usize {
        let total: f64 = weights.iter().sum();
        let mut target = rng.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if target < w {
                return i;
            }
            target -= w;
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    };
    let mut centers = vec![h.values[pick(&mut rng, &h.counts)]];
    let mut d2: Vec<f64> = h.values.iter().map(|&x| (x - centers[0]).powi(2)).collect();
    while centers.len() < k {
        let weights: Vec<f64> = d2.iter().zip(&h.counts).map(|(&d, &n)| d * n).collect();
        let c = h.values[pick(&mut rng, &weights)];
        centers.push(c);
        for (d, &x) in d2.iter_mut().zip(&h.values) {
            *d = d.min((x - c).powi(2));
        }
    }
    centers
}
