#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use proptest::prelude::*;
use stabsim::adversary::{admits_prefix, delay_pattern, silence_free_core, AdversarySpec};
use stabsim::conflict::{drive_conflict_dll, lift_dll_prefix, verify_conflict_trace};
use stabsim::graphs::{iis_graphs, oplus, CommGraph, LinkGraph, ProcSet};
use stabsim::protocols::{
    averaging_series, gap, make_patient, patience, ConstMap, DecisionMap, IdentityMap, MinMax,
    PatienceParams, Rounding,
};
use stabsim::tasks::{is_conflicted, is_valid_output};
use stabsim::views::{kernel_estimate, stable_value_round, views_equal, KnowledgeState, Run};

fn link() -> impl Strategy<Value = LinkGraph> {
    prop_oneof![
        Just(LinkGraph::None),
        Just(LinkGraph::Pq),
        Just(LinkGraph::Both),
        Just(LinkGraph::Qp)
    ]
}

fn comm_link() -> impl Strategy<Value = LinkGraph> {
    prop_oneof![
        Just(LinkGraph::Pq),
        Just(LinkGraph::Both),
        Just(LinkGraph::Qp)
    ]
}

fn graph(n: usize) -> impl Strategy<Value = CommGraph> {
    proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
        let mut g = CommGraph::empty(n);
        for a in 0..n {
            for b in 0..n {
                if bits[a * n + b] {
                    g.add_edge(a, b);
                }
            }
        }
        g
    })
}

fn iis3() -> impl Strategy<Value = CommGraph> {
    (0..13usize).prop_map(|i| iis_graphs(3).unwrap()[i].clone())
}

fn graphs_of(links: &[LinkGraph]) -> Vec<CommGraph> {
    links.iter().map(|g| g.graph()).collect()
}

fn maps() -> Vec<Arc<dyn DecisionMap>> {
    vec![
        Arc::new(MinMax::plain()),
        Arc::new(MinMax::fixed(1)),
        Arc::new(MinMax::fixed(3)),
        Arc::new(MinMax::growing(Rounding::Floor)),
        Arc::new(MinMax::growing(Rounding::Ceil)),
        Arc::new(ConstMap(0)),
        Arc::new(IdentityMap),
        Arc::new(make_patient(
            Arc::new(MinMax::plain()),
            PatienceParams::default(),
        )),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oplus_is_associative_and_keeps_edges(
        g1 in graph(6), g2 in graph(6), g3 in graph(6), owner in proptest::collection::vec(0..3usize, 6)
    ) {
        let sets: Vec<ProcSet> = (0..3)
            .map(|i| (0..6).filter(|&v| owner[v] == i).collect())
            .collect();
        let left = oplus(&oplus(&g1, sets[0], &g2, sets[1]).unwrap(), sets[0].union(sets[1]), &g3, sets[2]).unwrap();
        let right = oplus(&g1, sets[0], &oplus(&g2, sets[1], &g3, sets[2]).unwrap(), sets[1].union(sets[2])).unwrap();
        prop_assert_eq!(&left, &right);
        for (g, s) in [(&g1, sets[0]), (&g2, sets[1]), (&g3, sets[2])] {
            for (a, b) in g.edges() {
                if s.contains(a) && s.contains(b) {
                    prop_assert!(left.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn two_process_alphabet_chain(gs in proptest::collection::vec(link(), 0..12), k in 0u64..4) {
        let prefix = graphs_of(&gs);
        let ll = admits_prefix(&AdversarySpec::ll(), &prefix);
        let bdll = admits_prefix(&AdversarySpec::bdll(k), &prefix);
        let bdll_next = admits_prefix(&AdversarySpec::bdll(k + 1), &prefix);
        let dll = admits_prefix(&AdversarySpec::dll(), &prefix);
        prop_assert!(!ll || bdll);
        prop_assert!(!bdll || bdll_next);
        prop_assert!(!bdll_next || dll);
        prop_assert!(dll);
        let bliis = admits_prefix(&AdversarySpec::bliis(2, 1, k).unwrap(), &prefix);
        prop_assert_eq!(bliis, bdll);
        prop_assert_eq!(admits_prefix(&AdversarySpec::liis(2, 1).unwrap(), &prefix), dll);
    }

    #[test]
    fn snapshot_alphabet_chain(gs in proptest::collection::vec(iis3(), 0..10), k in 0u64..3) {
        prop_assert!(admits_prefix(&AdversarySpec::iis(3).unwrap(), &gs));
        prop_assert!(admits_prefix(&AdversarySpec::bliis(3, 1, k).unwrap(), &gs));
        prop_assert!(admits_prefix(&AdversarySpec::liis(3, 1).unwrap(), &gs));
        prop_assert!(admits_prefix(&AdversarySpec::liis(3, 2).unwrap(), &gs));
    }

    #[test]
    fn lossy_snapshot_chain(seed in any::<u64>(), k in 0u64..3) {
        let spec = AdversarySpec::bliis(3, 1, k).unwrap();
        let p = stabsim::adversary::sample_pattern(&spec, seed, 30, Default::default()).unwrap();
        prop_assert!(admits_prefix(&spec, &p));
        prop_assert!(admits_prefix(&AdversarySpec::bliis(3, 1, k + 1).unwrap(), &p));
        prop_assert!(admits_prefix(&AdversarySpec::liis(3, 1).unwrap(), &p));
    }

    #[test]
    fn delay_then_core_is_identity(
        core in proptest::collection::vec(comm_link(), 0..20),
        seed in proptest::collection::vec(0u64..5, 20)
    ) {
        let core = graphs_of(&core);
        let schedule = &seed[..core.len()];
        let delayed = delay_pattern(&core, schedule).unwrap();
        prop_assert_eq!(silence_free_core(&delayed), core);
        prop_assert!(admits_prefix(&AdversarySpec::dll(), &delayed));
    }

    #[test]
    fn knowledge_is_monotone_and_settles(
        gs in proptest::collection::vec(graph(4), 1..25),
        inputs in proptest::collection::vec(0i64..3, 4)
    ) {
        let run = Run::from_prefix(inputs, &gs).unwrap();
        let mut changes = [0usize; 4];
        for r in 1..=run.len() {
            let before = run.state_at(r - 1).unwrap();
            let after = run.state_at(r).unwrap();
            for a in 0..4 {
                prop_assert!(before.heard0[a].is_subset(after.heard0[a]));
                prop_assert!(after.heard0[a].contains(a));
                if before.heard0[a] != after.heard0[a] {
                    changes[a] += 1;
                }
                for b in 0..4 {
                    prop_assert!(before.latest_known[a][b] <= after.latest_known[a][b]);
                    prop_assert!(after.latest_known[a][b] <= r as i64);
                }
            }
        }
        prop_assert!(changes.iter().all(|&c| c <= 3));
    }

    #[test]
    fn run_length_encoding_is_exact(
        blocks in proptest::collection::vec((graph(3), 1u64..9), 1..8),
        inputs in proptest::collection::vec(0i64..3, 3)
    ) {
        let mut run = Run::new(inputs.clone()).unwrap();
        let mut naive = vec![KnowledgeState::initial(3)];
        for (g, count) in &blocks {
            run.step_repeat(g, *count).unwrap();
            for _ in 0..*count {
                let next = naive.last().unwrap().advance(g);
                naive.push(next);
            }
        }
        for (r, st) in naive.iter().enumerate() {
            prop_assert_eq!(&run.state_at(r as u64).unwrap(), st);
        }
    }

    #[test]
    fn views_equal_is_an_equivalence(
        a in proptest::collection::vec(link(), 1..7),
        b in proptest::collection::vec(link(), 1..7),
        c in proptest::collection::vec(link(), 1..7),
        ia in proptest::collection::vec(0i64..2, 2),
        ib in proptest::collection::vec(0i64..2, 2),
    ) {
        let r = a.len().min(b.len()).min(c.len()) as u64;
        let ra = Run::from_prefix(ia.clone(), &graphs_of(&a)).unwrap();
        let rb = Run::from_prefix(ib, &graphs_of(&b)).unwrap();
        let rc = Run::from_prefix(ia, &graphs_of(&c)).unwrap();
        for p in 0..2 {
            prop_assert!(views_equal(&ra, p, &ra, p, r));
            let ab = views_equal(&ra, p, &rb, p, r);
            prop_assert_eq!(ab, views_equal(&rb, p, &ra, p, r));
            let bc = views_equal(&rb, p, &rc, p, r);
            if ab && bc {
                prop_assert!(views_equal(&ra, p, &rc, p, r));
            }
            if ab {
                prop_assert_eq!(ra.leafs(p, r).unwrap(), rb.leafs(p, r).unwrap());
                for q in 0..2 {
                    prop_assert_eq!(ra.latest_known(p, q, r).unwrap(), rb.latest_known(p, q, r).unwrap());
                }
            }
        }
    }

    #[test]
    fn decisions_depend_only_on_views(
        a in proptest::collection::vec(link(), 1..6),
        b in proptest::collection::vec(link(), 1..6),
        ia in proptest::collection::vec(0i64..2, 2),
        ib in proptest::collection::vec(0i64..2, 2),
    ) {
        let r = a.len().min(b.len()) as u64;
        let ra = Run::from_prefix(ia, &graphs_of(&a)).unwrap();
        let rb = Run::from_prefix(ib, &graphs_of(&b)).unwrap();
        for p in 0..2 {
            if views_equal(&ra, p, &rb, p, r) {
                for map in maps() {
                    prop_assert_eq!(map.decide(&ra, p, r), map.decide(&rb, p, r), "{}", map.name());
                }
            }
        }
    }

    #[test]
    fn minmax_decisions_are_inputs(
        gs in proptest::collection::vec(iis3(), 1..15),
        inputs in proptest::collection::vec(0i64..5, 3)
    ) {
        let run = Run::from_prefix(inputs.clone(), &gs).unwrap();
        for map in [MinMax::plain(), MinMax::fixed(2), MinMax::growing(Rounding::Floor)] {
            for r in 0..=run.len() {
                for v in map.decisions(&run, r) {
                    prop_assert!(inputs.contains(&v));
                }
            }
        }
    }

    #[test]
    fn kernel_members_share_the_smallest_heard_of_set(
        gs in proptest::collection::vec(iis3(), 30..40),
        inputs in proptest::collection::vec(0i64..3, 3)
    ) {
        let run = Run::from_prefix(inputs, &gs).unwrap();
        let starts: Vec<u64> = (1..=10).collect();
        let horizon = run.len();
        if (0..3).all(|p| stable_value_round(&run, p) <= 10) {
            let ker = kernel_estimate(&run, &starts);
            prop_assert!(!ker.is_empty());
            for k in ker.iter() {
                for q in 0..3 {
                    prop_assert!(run.leafs(k, horizon).unwrap().is_subset(run.leafs(q, horizon).unwrap()));
                }
            }
        }
    }

    #[test]
    fn averaging_contracts(gs in proptest::collection::vec(link(), 1..40), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let series = averaging_series(&[x, y], &graphs_of(&gs));
        for (i, g) in gs.iter().enumerate() {
            let before = gap(&series[i]);
            let after = gap(&series[i + 1]);
            prop_assert!(after <= before);
            match g {
                LinkGraph::Both => prop_assert_eq!(after, 0.0),
                LinkGraph::Pq | LinkGraph::Qp => prop_assert!((after - before / 2.0).abs() <= 1e-12 * before.max(1.0)),
                LinkGraph::None => prop_assert_eq!(after, before),
            }
        }
    }

    #[test]
    fn patient_maps_have_zero_patience(gs in proptest::collection::vec(link(), 1..6), k in 0u64..3) {
        let params = PatienceParams::default();
        let wrapped = make_patient(Arc::new(MinMax::fixed(k)), params);
        let run = Run::from_prefix(vec![0, 1], &graphs_of(&gs)).unwrap();
        prop_assert_eq!(patience(&run, &wrapped, params).unwrap(), 0);
        prop_assert!(patience(&run, &MinMax::fixed(k), params).unwrap() <= k + 1);
    }

    #[test]
    fn conflicted_is_invalid_output(gs in proptest::collection::vec(link(), 0..6), inputs in proptest::collection::vec(0i64..3, 2)) {
        let run = Run::from_prefix(inputs.clone(), &graphs_of(&gs)).unwrap();
        for map in maps() {
            for r in 0..=run.len() {
                let direct = map.decisions(&run, r);
                let valid = direct[0] == direct[1] && inputs.contains(&direct[0]);
                prop_assert_eq!(is_conflicted(&run, map.as_ref(), r), !valid);
                prop_assert_eq!(is_valid_output(&inputs, &direct).unwrap(), valid);
            }
        }
    }

    #[test]
    fn lifted_prefixes_preserve_views(gs in proptest::collection::vec(link(), 0..20), n in 3usize..5) {
        let prefix = graphs_of(&gs);
        let lifted = lift_dll_prefix(&prefix, n).unwrap();
        prop_assert!(admits_prefix(&AdversarySpec::liis(n, 1).unwrap(), &lifted));
        let two = Run::from_prefix(vec![0, 1], &prefix).unwrap();
        let mut inputs = vec![0, 1];
        inputs.resize(n, 1);
        let many = Run::from_prefix(inputs, &lifted).unwrap();
        for r in 0..=two.len() {
            for p in 0..2 {
                prop_assert!(views_equal(&two, p, &many, p, r));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn driven_traces_replay(k in 0u64..4, steps in 1u64..25) {
        let map = MinMax::fixed(k);
        let trace = drive_conflict_dll(&map, &[0, 1], steps, PatienceParams::default()).unwrap();
        prop_assert_eq!(trace.conflicted_steps() as u64, steps);
        prop_assert!(verify_conflict_trace(&trace, &map).clean);
        let blocks = trace.blocks();
        prop_assert!(AdversarySpec::dll().check_runs(blocks.iter().map(|(g, c)| (g, *c))).is_ok());
    }
}
