mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{brute_force_min_cut, dice_of, random_network, rng};
use softmask::graphcut::{
    default_frame, grabcut_with_trace, max_flow, seeds_from_recist, FlowNetwork, GrabCutParams, Seed,
};
use softmask::pipeline::PhantomSpec;

#[test]
fn worked_network() {
    let mut net = FlowNetwork::new(4, 0, 3).unwrap();
    for (u, v, c) in [(0, 1, 3.0), (0, 2, 1.0), (1, 3, 2.0), (2, 3, 4.0), (1, 2, 1.0), (2, 1, 1.0)] {
        net.add_edge(u, v, c).unwrap();
    }
    let flow = max_flow(&net);
    assert_eq!(flow.value, 4.0);
    assert_eq!(brute_force_min_cut(&net), 4.0);
}

#[test]
fn random_networks_match_enumeration() {
    let mut r = rng(21);
    for _ in 0..300 {
        let inner = r.random_range(0..=10);
        let net = random_network(inner, 10, r.random_range(0.1..0.6), &mut r);
        let flow = max_flow(&net);
        assert_eq!(flow.value, brute_force_min_cut(&net));
        assert_eq!(net.cut_capacity(&flow.source_side), flow.value);
        assert!(flow.source_side[net.source()] && !flow.source_side[net.sink()]);
    }
}

#[test]
fn grabcut_disk_phantoms() {
    let spec = PhantomSpec::disk(64, 20.0);
    let truth = spec.truth().unwrap();
    for seed in 0..10u64 {
        let phantom = spec.render(seed).unwrap();
        let seeds = seeds_from_recist(&phantom.recist, 64, 64, 1, default_frame(64, 64)).unwrap();
        let params = GrabCutParams {
            seed,
            ..Default::default()
        };
        let out = grabcut_with_trace(&phantom.image, &seeds, &params).unwrap();
        let d = dice_of(&out.mask, &truth);
        assert!(d >= 0.95, "seed {seed}: dice {d}");
        for pair in out.energies.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs().max(1.0), "{:?}", out.energies);
        }
        for (i, s) in seeds.labels().iter().enumerate() {
            match s {
                Seed::SureForeground => assert!(out.mask.data()[i]),
                Seed::SureBackground => assert!(!out.mask.data()[i]),
                Seed::Undecided => {}
            }
        }
    }
}

#[test]
fn grabcut_ellipse_phantoms() {
    let mut r = rng(22);
    for seed in 0..6u64 {
        let spec = PhantomSpec::random(64, true, &mut r);
        let phantom = spec.render(seed).unwrap();
        let seeds = seeds_from_recist(&phantom.recist, 64, 64, 1, default_frame(64, 64)).unwrap();
        let out = grabcut_with_trace(&phantom.image, &seeds, &GrabCutParams::default()).unwrap();
        let d = dice_of(&out.mask, &phantom.truth);
        assert!(d >= 0.95, "seed {seed}: dice {d}");
    }
}

#[test]
fn grabcut_is_deterministic() {
    let phantom = PhantomSpec::disk(48, 14.0).render(5).unwrap();
    let seeds = seeds_from_recist(&phantom.recist, 48, 48, 1, 2).unwrap();
    let params = GrabCutParams::default();
    let a = grabcut_with_trace(&phantom.image, &seeds, &params).unwrap();
    let b = grabcut_with_trace(&phantom.image, &seeds, &params).unwrap();
    assert_eq!(a.mask, b.mask);
    assert_eq!(a.energies, b.energies);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_equals_min_cut(seed in any::<u64>(), inner in 0usize..=8, density in 0.05f64..0.8) {
        let mut r = rng(seed);
        let net = random_network(inner, 10, density, &mut r);
        let flow = max_flow(&net);
        prop_assert_eq!(flow.value, brute_force_min_cut(&net));
        prop_assert_eq!(net.cut_capacity(&flow.source_side), flow.value);
    }
}
