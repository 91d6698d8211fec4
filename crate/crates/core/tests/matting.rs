mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::{dense_alpha, dense_laplacian, random_image, random_trimap, rng};
use softmask::imaging::{BinaryMask, GrayImage};
use softmask::labels::binarize;
use softmask::matting::{build_matting_laplacian, matte, solve_alpha, MattingParams, SparseSymmetricMatrix, Trimap, TrimapLabel};

#[test]
fn laplacian_matches_dense_reference() {
    let mut r = rng(1);
    for (w, h) in [(6, 6), (5, 7), (8, 8)] {
        let img = random_image(w, h, &mut r);
        let sparse = build_matting_laplacian(&img, 1, 1e-7).unwrap();
        let dense = dense_laplacian(&img, 1, 1e-7);
        let n = w * h;
        let got = sparse.to_dense();
        for i in 0..n {
            for j in 0..n {
                let d = (got[i * n + j] - dense[(i, j)]).abs();
                assert!(d <= 1e-12 * dense[(i, j)].abs().max(1.0), "({i},{j}): {d}");
            }
        }
    }
}

#[test]
fn radius_two_matches_dense_reference() {
    let img = random_image(7, 6, &mut rng(2));
    let sparse = build_matting_laplacian(&img, 2, 1e-4).unwrap();
    let dense = dense_laplacian(&img, 2, 1e-4);
    let got = sparse.to_dense();
    for (k, v) in got.iter().enumerate() {
        assert!((v - dense[(k / 42, k % 42)]).abs() <= 1e-12);
    }
}

#[test]
fn cg_matches_dense_solve_up_to_eight() {
    let mut r = rng(3);
    let params = MattingParams {
        tol: 1e-10,
        ..Default::default()
    };
    for case in 0..30 {
        let (w, h) = (r.random_range(3..=8), r.random_range(3..=8));
        let img = random_image(w, h, &mut r);
        let trimap = random_trimap(w, h, &mut r);
        let l = build_matting_laplacian(&img, 1, params.eps).unwrap();
        let cg = solve_alpha(&l, &trimap, &params).unwrap();
        let direct = dense_alpha(&dense_laplacian(&img, 1, params.eps), &trimap, params.lambda_c);
        let err = cg
            .alpha
            .data()
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "case {case} ({w}x{h}): {err}");
    }
}

#[test]
fn fully_constrained_trimap() {
    // constraints follow the image edge, so the Laplacian does not fight them
    let img = GrayImage::new(8, 8, (0..64).map(|i| if i % 8 < 3 { 0.7 } else { 0.3 }).collect()).unwrap();
    let labels: Vec<_> = (0..64)
        .map(|i| if i % 8 < 3 { TrimapLabel::Foreground } else { TrimapLabel::Background })
        .collect();
    let trimap = Trimap::new(8, 8, labels).unwrap();
    let params = MattingParams::default();
    let alpha = matte(&img, &trimap, &params).unwrap();
    for (a, l) in alpha.alpha().data().iter().zip(trimap.labels()) {
        let target = if *l == TrimapLabel::Foreground { 1.0 } else { 0.0 };
        assert!((a - target).abs() <= 1.0 / params.lambda_c, "{a} vs {target}");
    }
}

fn two_tone_alpha(params: &MattingParams) -> (BinaryMask, softmask::imaging::SoftMask) {
    let (w, h) = (16, 16);
    let img = GrayImage::new(w, h, (0..w * h).map(|i| if i % w < 8 { 0.9 } else { 0.1 }).collect()).unwrap();
    let labels = (0..w * h)
        .map(|i| match i % w {
            x if x < 4 => TrimapLabel::Foreground,
            x if x >= 12 => TrimapLabel::Background,
            _ => TrimapLabel::Unknown,
        })
        .collect();
    let trimap = Trimap::new(w, h, labels).unwrap();
    let out = matte(&img, &trimap, params).unwrap();
    let truth = BinaryMask::new(w, h, (0..w * h).map(|i| i % w < 8).collect()).unwrap();
    (truth, out.solve.alpha)
}

fn max_rise(alpha: &softmask::imaging::SoftMask) -> f64 {
    let mut rise: f64 = 0.0;
    for y in 0..alpha.height() {
        for x in 1..alpha.width() {
            rise = rise.max(alpha.get(x, y) - alpha.get(x - 1, y));
        }
    }
    rise
}

#[test]
fn two_tone_split() {
    let params = MattingParams::default();
    let (truth, alpha) = two_tone_alpha(&params);
    assert!(common::dice_of(&binarize(&alpha, 0.5), &truth) >= 0.99);
    // the ideal matte is a step; CG leaves noise on the order of its tolerance
    assert!(max_rise(&alpha) <= 10.0 * params.tol, "{}", max_rise(&alpha));
}

#[test]
fn two_tone_split_tight_solve() {
    let (truth, alpha) = two_tone_alpha(&MattingParams {
        tol: 1e-13,
        max_iters: 10_000,
        ..Default::default()
    });
    assert_eq!(common::dice_of(&binarize(&alpha, 0.5), &truth), 1.0);
    assert!(max_rise(&alpha) <= 1e-9, "{}", max_rise(&alpha));
}

#[test]
fn matte_equals_build_then_solve() {
    let mut r = rng(5);
    let img = random_image(10, 9, &mut r);
    let trimap = random_trimap(10, 9, &mut r);
    let params = MattingParams::default();
    let composed = matte(&img, &trimap, &params).unwrap();
    let l = build_matting_laplacian(&img, params.window_radius, params.eps).unwrap();
    assert_eq!(composed.solve, solve_alpha(&l, &trimap, &params).unwrap());
}

#[test]
fn constraint_fidelity_on_phantoms() {
    let mut r = rng(6);
    let params = MattingParams::default();
    for _ in 0..10 {
        let img = random_image(12, 12, &mut r);
        let trimap = random_trimap(12, 12, &mut r);
        let alpha = matte(&img, &trimap, &params).unwrap();
        for (a, l) in alpha.alpha().data().iter().zip(trimap.labels()) {
            assert!((0.0..=1.0).contains(a));
            match l {
                TrimapLabel::Foreground => assert!(*a >= 1.0 - 10.0 / params.lambda_c),
                TrimapLabel::Background => assert!(*a <= 10.0 / params.lambda_c),
                TrimapLabel::Unknown => {}
            }
        }
    }
}

#[test]
fn permutation_equivariance() {
    let mut r = rng(7);
    let (w, h) = (7, 6);
    let n = w * h;
    let img = random_image(w, h, &mut r);
    let trimap = random_trimap(w, h, &mut r);
    let params = MattingParams {
        tol: 1e-10,
        ..Default::default()
    };
    let l = build_matting_laplacian(&img, 1, params.eps).unwrap();
    let base = solve_alpha(&l, &trimap, &params).unwrap();

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    // pixel i moves to slot perm[i]
    let triplets: Vec<_> = l.entries().map(|(i, j, v)| (perm[i], perm[j], v)).collect();
    let lp = SparseSymmetricMatrix::from_triplets(n, &triplets).unwrap();
    let mut labels = vec![TrimapLabel::Unknown; n];
    for (i, &l) in trimap.labels().iter().enumerate() {
        labels[perm[i]] = l;
    }
    let tp = Trimap::new(n, 1, labels).unwrap();
    let permuted = solve_alpha(&lp, &tp, &params).unwrap();
    for (i, &j) in perm.iter().enumerate() {
        assert!((base.alpha.data()[i] - permuted.alpha.data()[j]).abs() <= 1e-8);
    }
}

#[test]
fn not_converged_reports_residual() {
    let mut r = rng(8);
    let img = random_image(12, 12, &mut r);
    let trimap = random_trimap(12, 12, &mut r);
    let params = MattingParams {
        max_iters: 1,
        tol: 1e-14,
        ..Default::default()
    };
    match matte(&img, &trimap, &params) {
        Err(softmask::Error::NotConverged { iterations: 1, residual }) => assert!(residual > 1e-14),
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacian_is_symmetric_psd_with_zero_rows(
        w in 3usize..10,
        h in 3usize..10,
        seed in any::<u64>(),
        eps_exp in -7i32..-1,
    ) {
        let mut r = rng(seed);
        let img = random_image(w, h, &mut r);
        let l = build_matting_laplacian(&img, 1, 10f64.powi(eps_exp)).unwrap();
        prop_assert!(l.max_asymmetry() <= 1e-12);
        prop_assert!(l.max_abs_row_sum() <= 1e-10);
        for _ in 0..10 {
            let x: Vec<f64> = (0..w * h).map(|_| r.random_range(-1.0..1.0)).collect();
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!(l.quadratic_form(&x) >= -1e-8 * norm2);
        }
    }

    #[test]
    fn alpha_is_clamped(w in 3usize..9, h in 3usize..9, seed in any::<u64>()) {
        let mut r = rng(seed);
        let img = random_image(w, h, &mut r);
        let trimap = random_trimap(w, h, &mut r);
        let out = matte(&img, &trimap, &MattingParams::default()).unwrap();
        prop_assert!(out.alpha().data().iter().all(|a| (0.0..=1.0).contains(a)));
    }
}
