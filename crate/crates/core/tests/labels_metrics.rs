mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{rng, trapezoid_auc};
use softmask::imaging::{BinaryMask, SoftMask};
use softmask::labels::{
    binarize, consensus, grad_l1, grad_mse, l1_loss, mix_labels, mse_loss, soften_binary, LabelDistribution,
    UpscaleGeometry,
};
use softmask::metrics::{auc, auc_from_slices, confusion, ConfusionCounts};

fn soft(w: usize, h: usize, data: Vec<f64>) -> SoftMask {
    SoftMask::new(w, h, data).unwrap()
}

fn perturbed(m: &SoftMask, i: usize, delta: f64) -> SoftMask {
    let mut d = m.data().to_vec();
    d[i] += delta;
    soft(m.width(), m.height(), d)
}

fn central_difference(f: impl Fn(&SoftMask) -> f64, m: &SoftMask, i: usize, h: f64) -> f64 {
    (f(&perturbed(m, i, h)) - f(&perturbed(m, i, -h))) / (2.0 * h)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

#[test]
fn mse_gradient_matches_finite_differences() {
    let mut r = rng(31);
    let step = 1e-6;
    for _ in 0..100 {
        let geometry = UpscaleGeometry {
            r: r.random_range(1..=3),
            width: r.random_range(1..=4),
            height: r.random_range(1..=4),
        };
        let (w, h) = (geometry.r * geometry.width, geometry.r * geometry.height);
        let pred = soft(w, h, (0..w * h).map(|_| r.random_range(0.01..0.99)).collect());
        let target = soft(w, h, (0..w * h).map(|_| r.random::<f64>()).collect());
        let g = grad_mse(&pred, &target, geometry).unwrap();
        for (i, &gi) in g.iter().enumerate() {
            let fd = central_difference(|p| mse_loss(p, &target, geometry).unwrap(), &pred, i, step);
            assert!(relative_gap(gi, fd) <= 1e-4, "{gi} vs {fd}");
        }
    }
}

#[test]
fn l1_gradient_matches_finite_differences_off_ties() {
    let mut r = rng(32);
    let step = 1e-6;
    let mut checked = 0;
    for _ in 0..100 {
        let (w, h) = (r.random_range(1..=5), r.random_range(1..=5));
        let pred = soft(w, h, (0..w * h).map(|_| r.random_range(0.01..0.99)).collect());
        let mut target: Vec<f64> = (0..w * h).map(|_| r.random::<f64>()).collect();
        // plant exact ties, which have no derivative
        target[0] = pred.data()[0];
        let target = soft(w, h, target);
        let g = grad_l1(&pred, &target).unwrap();
        assert_eq!(g[0], 0.0);
        for (i, &gi) in g.iter().enumerate() {
            if (pred.data()[i] - target.data()[i]).abs() <= 10.0 * step {
                continue;
            }
            let fd = central_difference(|p| l1_loss(p, &target).unwrap(), &pred, i, step);
            assert!(relative_gap(gi, fd) <= 1e-4, "{gi} vs {fd}");
            checked += 1;
        }
    }
    assert!(checked > 500);
}

#[test]
fn single_pixel_mse() {
    let g = UpscaleGeometry {
        r: 1,
        width: 1,
        height: 1,
    };
    let (p, t) = (soft(1, 1, vec![0.5]), soft(1, 1, vec![1.0]));
    assert_eq!(mse_loss(&p, &t, g).unwrap(), 0.25);
    assert_eq!(grad_mse(&p, &t, g).unwrap(), vec![-1.0]);
}

#[test]
fn metric_identities_on_random_counts() {
    let mut r = rng(33);
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: r.random_range(0..1000),
            tn: r.random_range(0..1000),
            fp: r.random_range(0..1000),
            fn_: r.random_range(0..1000),
        };
        let iou = c.iou();
        assert!((c.dice() - 2.0 * iou / (1.0 + iou)).abs() <= 1e-12);
        assert!((0.0..=1.0).contains(&c.acc()));
    }
}

fn random_scores(r: &mut impl Rng, n: usize, levels: u32) -> (Vec<f64>, Vec<bool>) {
    loop {
        let scores: Vec<f64> = (0..n).map(|_| f64::from(r.random_range(0..levels)) / f64::from(levels)).collect();
        let labels: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            return (scores, labels);
        }
    }
}

#[test]
fn rank_auc_equals_trapezoid_roc() {
    let mut r = rng(34);
    for k in 0..100 {
        // few levels force ties, many levels make them rare
        let levels = if k % 2 == 0 { 5 } else { 1_000_000 };
        let n = r.random_range(2..200);
        let (scores, labels) = random_scores(&mut r, n, levels);
        let rank = auc_from_slices(&scores, &labels).unwrap();
        assert!((rank - trapezoid_auc(&scores, &labels)).abs() <= 1e-10);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        assert!((rank + auc_from_slices(&scores, &flipped).unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn worked_metric_values() {
    let c = ConfusionCounts { tp: 2, tn: 0, fp: 1, fn_: 1 };
    assert_eq!(c.dice(), 2.0 / 3.0);
    assert_eq!(c.iou(), 0.5);
    assert_eq!(ConfusionCounts { tp: 2, tn: 5, fp: 1, fn_: 2 }.acc(), 0.7);
    let scores = soft(4, 1, vec![0.9, 0.7, 0.4, 0.2]);
    let gt = BinaryMask::from_u8(4, 1, &[1, 0, 1, 0]).unwrap();
    assert_eq!(auc(&scores, &gt).unwrap(), 0.75);
}

fn mask_and_soft(r: &mut impl Rng, w: usize, h: usize) -> (SoftMask, BinaryMask) {
    let s = soft(w, h, (0..w * h).map(|_| r.random::<f64>()).collect());
    let m = BinaryMask::new(w, h, (0..w * h).map(|_| r.random_bool(0.3)).collect()).unwrap();
    (s, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn soften_laws(seed in any::<u64>(), w in 1usize..12, h in 1usize..12) {
        let mut r = rng(seed);
        let (s, m) = mask_and_soft(&mut r, w, h);
        let out = soften_binary(&s, &m).unwrap();
        for ((&o, &si), &mi) in out.data().iter().zip(s.data()).zip(m.data()) {
            prop_assert!(o >= si && o >= f64::from(u8::from(mi)));
        }
        prop_assert_eq!(&soften_binary(&out, &m).unwrap(), &out);
        prop_assert!(m.is_subset_of(&binarize(&out, 0.999)));
    }

    #[test]
    fn mixing_laws(seed in any::<u64>(), classes in 1usize..8, eps in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let raw: Vec<f64> = (0..classes).map(|_| r.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let q = LabelDistribution::new(raw.iter().map(|v| v / total).collect()).unwrap();
        let u = LabelDistribution::uniform(classes).unwrap();
        prop_assert_eq!(&mix_labels(&q, &u, 0.0).unwrap(), &q);
        let mixed = mix_labels(&q, &u, eps).unwrap();
        prop_assert!(LabelDistribution::new(mixed.probs().to_vec()).is_ok());
    }

    #[test]
    fn half_consensus_of_four(seed in any::<u64>(), w in 1usize..10, h in 1usize..10) {
        let mut r = rng(seed);
        let raters: Vec<BinaryMask> = (0..4)
            .map(|_| BinaryMask::new(w, h, (0..w * h).map(|_| r.random_bool(0.5)).collect()).unwrap())
            .collect();
        let c = consensus(&raters, 0.5).unwrap();
        for i in 0..w * h {
            let votes = raters.iter().filter(|m| m.data()[i]).count();
            prop_assert_eq!(c.data()[i], votes >= 2);
        }
    }

    #[test]
    fn confusion_partitions_pixels(seed in any::<u64>(), w in 1usize..10, h in 1usize..10) {
        let mut r = rng(seed);
        let a = BinaryMask::new(w, h, (0..w * h).map(|_| r.random_bool(0.5)).collect()).unwrap();
        let b = BinaryMask::new(w, h, (0..w * h).map(|_| r.random_bool(0.5)).collect()).unwrap();
        let c = confusion(&a, &b).unwrap();
        prop_assert_eq!(c.total() as usize, w * h);
        prop_assert_eq!(c, {
            let t = confusion(&b, &a).unwrap();
            ConfusionCounts { fp: t.fn_, fn_: t.fp, ..t }
        });
    }

    #[test]
    fn auc_ignores_monotone_rescaling(seed in any::<u64>(), n in 2usize..120) {
        let mut r = rng(seed);
        let (scores, labels) = random_scores(&mut r, n, 7);
        let squashed: Vec<f64> = scores.iter().map(|s| 0.1 + 0.5 * s.powi(3)).collect();
        let base = auc_from_slices(&scores, &labels).unwrap();
        prop_assert!((base - auc_from_slices(&squashed, &labels).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn auc_ignores_joint_permutation(seed in any::<u64>(), n in 2usize..120) {
        let mut r = rng(seed);
        let (scores, labels) = random_scores(&mut r, n, 7);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let s2: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
        let l2: Vec<bool> = order.iter().map(|&i| labels[i]).collect();
        let base = auc_from_slices(&scores, &labels).unwrap();
        prop_assert!((base - auc_from_slices(&s2, &l2).unwrap()).abs() <= 1e-12);
    }
}
