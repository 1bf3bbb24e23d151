mod common;

use common::{cut_rate_ref, cut_value_ref, masks};
use hdsched::generate::{random_network, Topology};
use hdsched::submodular::{is_submodular, FnSetFunction, SubmodularCheck};
use hdsched::{
    cut_rate, g_normalized, ifix, CutMask, CutRateTable, NetworkModel, Schedule, StateMask,
};
use proptest::prelude::*;

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::General), Just(Topology::Diamond)]
}

fn schedule_strategy(n: usize) -> impl Strategy<Value = Schedule> {
    prop::collection::vec(0.0f64..1.0, 1 << n).prop_filter_map("all zero", move |w| {
        let pairs: Vec<(u32, f64)> = w.iter().enumerate().map(|(s, &p)| (s as u32, p)).collect();
        let total: f64 = w.iter().sum();
        if total < 1e-6 {
            return None;
        }
        let pairs: Vec<_> = pairs.into_iter().map(|(s, p)| (s, p / total)).collect();
        Schedule::from_pairs(n, &pairs).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cut_rate_matches_reference(n in 1usize..=4, seed in any::<u64>(), topo in topology()) {
        let net = random_network(n, topo, seed).unwrap();
        let table = CutRateTable::new(&net);
        for s in masks(n) {
            for a in masks(n) {
                let want = cut_rate_ref(&net, s, a);
                let got = cut_rate(&net, StateMask(s), CutMask(a)).unwrap();
                prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "s={s} a={a}: {got} vs {want}");
                prop_assert_eq!(table.get(StateMask(s), CutMask(a)), got);
                prop_assert!(got >= 0.0);
            }
        }
    }

    #[test]
    fn every_state_rate_is_submodular(n in 2usize..=4, seed in any::<u64>(), topo in topology()) {
        let net = random_network(n, topo, seed).unwrap();
        for s in masks(n) {
            let f = FnSetFunction::new(n, |a| cut_rate_ref(&net, s, a));
            let check = is_submodular(&f, 1e-9).unwrap();
            prop_assert_eq!(check, SubmodularCheck::Pass, "state {}", s);
        }
    }

    #[test]
    fn mixed_cut_value_is_submodular(
        (n, sched) in (1usize..=4).prop_flat_map(|n| (Just(n), schedule_strategy(n))),
        seed in any::<u64>(),
    ) {
        let net = random_network(n, Topology::General, seed).unwrap();
        let f = FnSetFunction::new(n, |a| ifix(&net, &sched, CutMask(a)).unwrap());
        prop_assert!(is_submodular(&f, 1e-9).unwrap().passed());
        for a in masks(n) {
            let want = cut_value_ref(&net, &sched, a);
            let got = ifix(&net, &sched, CutMask(a)).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want));
            let g = g_normalized(&net, &sched, CutMask(a)).unwrap();
            prop_assert!((g - (got - ifix(&net, &sched, CutMask::EMPTY).unwrap())).abs() <= 1e-12);
        }
        prop_assert_eq!(g_normalized(&net, &sched, CutMask::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn rates_grow_with_power(n in 1usize..=3, seed in any::<u64>(), scale in 1.0f64..10.0) {
        let net = random_network(n, Topology::General, seed).unwrap();
        let louder = net.scaled(scale);
        for s in masks(n) {
            for a in masks(n) {
                let lo = cut_rate(&net, StateMask(s), CutMask(a)).unwrap();
                let hi = cut_rate(&louder, StateMask(s), CutMask(a)).unwrap();
                prop_assert!(hi >= lo - 1e-12);
            }
        }
    }
}

#[test]
fn single_link_capacity() {
    // source to destination only: log2(1 + |h|^2) in every state and cut
    let mut rows = NetworkModel::zeros(1).unwrap().gain_rows();
    rows[2][0] = num_complex::Complex64::new(0.0, 3.0);
    let net = NetworkModel::new(1, rows).unwrap();
    for s in 0..2 {
        for a in 0..2 {
            let r = cut_rate(&net, StateMask(s), CutMask(a)).unwrap();
            assert!((r - 10f64.log2()).abs() < 1e-12);
        }
    }
}

#[test]
fn diamond_cut_rates() {
    let net = NetworkModel::diamond(&[1.0], &[1.0]).unwrap();
    let expect = [(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)];
    for (s, a, want) in expect {
        let got = cut_rate(&net, StateMask(s), CutMask(a)).unwrap();
        assert!((got - want).abs() < 1e-12, "s={s} a={a}");
        assert!((cut_rate_ref(&net, s, a) - want).abs() < 1e-12);
    }
}

#[test]
fn invalid_arguments_rejected() {
    let net = NetworkModel::zeros(2).unwrap();
    assert!(cut_rate(&net, StateMask(4), CutMask(0)).is_err());
    assert!(cut_rate(&net, StateMask(0), CutMask(4)).is_err());
    let wrong = Schedule::uniform(3);
    assert!(ifix(&net, &wrong, CutMask(0)).is_err());
}
