use hypermis::bench::{check_scs_reduction, generate::bridge_ring_with};
use hypermis::mis::{compute_zeta, kuw_sqrt_mis_with, solve, Engine, MisInstance};
use hypermis::netsim::{Mode, Representation};
use hypermis::oracles::{
    independent_prefix, is_maximal_independent, is_minimal_hitting_set, zeta_by_enumeration,
};
use hypermis::{Graph, Hypergraph};
use proptest::prelude::*;

fn hypergraph(max_n: usize, max_m: usize, max_dim: usize) -> impl Strategy<Value = Hypergraph> {
    (1..=max_n).prop_flat_map(move |n| {
        let edge = proptest::collection::btree_set(0..n, 1..=max_dim.min(n));
        proptest::collection::vec(edge, 0..=max_m)
            .prop_map(move |edges| Hypergraph::build(n, edges).unwrap())
    })
}

fn repr() -> impl Strategy<Value = Representation> {
    prop_oneof![Just(Representation::ServerClient), Just(Representation::VertexCentric)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(h in hypergraph(15, 20, 5)) {
        prop_assert_eq!(Hypergraph::parse(&h.serialize()).unwrap(), h);
    }

    #[test]
    fn induced_keeps_exactly_inner_edges(h in hypergraph(12, 15, 4), mask in proptest::collection::vec(any::<bool>(), 12)) {
        let keep: Vec<usize> = (0..h.n()).filter(|&v| mask[v]).collect();
        let view = h.induced(keep.iter().copied()).unwrap();
        for (j, e) in h.edges().iter().enumerate() {
            let inside = e.iter().all(|&v| mask[v]);
            prop_assert_eq!(view.kept_edges.contains(&j), inside);
        }
    }

    #[test]
    fn server_graph_links_co_members(h in hypergraph(10, 12, 4)) {
        let g = h.server_graph();
        for u in 0..h.n() {
            for v in 0..h.n() {
                let share = u != v && h.edges().iter().any(|e| e.contains(&u) && e.contains(&v));
                prop_assert_eq!(g.has_edge(u, v), share);
            }
        }
    }

    #[test]
    fn mis_complement_is_minimal_hitting_set(h in hypergraph(12, 16, 4), r in repr(), seed in any::<u64>()) {
        let res = solve(&MisInstance::full(&h, r, Mode::congest()), &Engine::KuwSqrt, seed).unwrap();
        prop_assert!(is_maximal_independent(&h, &res.set).pass);
        let rest: Vec<usize> = (0..h.n()).filter(|v| !res.set.contains(v)).collect();
        // edges of size one force their vertex out, so the duality holds for every edge
        prop_assert!(is_minimal_hitting_set(&h, &rest).pass);
        prop_assert_eq!(res.metrics.violations, 0);
    }

    #[test]
    fn first_round_marks_cover_independent_prefix(
        h in hypergraph(12, 16, 4),
        r in repr(),
        raw in proptest::collection::vec(1u64..=144, 12),
    ) {
        let first: Vec<u64> = raw[..h.n()].to_vec();
        let res = kuw_sqrt_mis_with(&MisInstance::full(&h, r, Mode::congest()), 0, &first).unwrap();
        let mut order: Vec<usize> = (0..h.n()).collect();
        order.sort_by_key(|&v| (first[v], v));
        let marks = res.first_marks.unwrap();
        for v in independent_prefix(&h, &order) {
            prop_assert!(marks.contains(&v), "{} not marked", v);
        }
    }

    #[test]
    fn zeta_matches_enumeration(h in hypergraph(9, 12, 4), extra in 0usize..=2) {
        let d = h.dim().max(2) + extra;
        let prof = compute_zeta(&MisInstance::full(&h, Representation::ServerClient, Mode::congest()), d).unwrap();
        let want = zeta_by_enumeration(&h, d).unwrap();
        prop_assert!((prof.zeta - want.value()).abs() < 1e-9);
    }

    #[test]
    fn runs_repeat_under_a_seed(h in hypergraph(10, 12, 4), seed in any::<u64>()) {
        for engine in [Engine::BeameLuby { d: None }, Engine::KuwSqrt] {
            let inst = MisInstance::full(&h, Representation::VertexCentric, Mode::congest());
            let a = solve(&inst, &engine, seed).unwrap();
            let b = solve(&inst, &engine, seed).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn ring_degrees(spacing in 2usize..6, quarter in 1usize..4) {
        let r = bridge_ring_with(4 * spacing * quarter, spacing).unwrap();
        for v in 0..r.graph.n() {
            let deg = r.graph.degree(v);
            let ok = if v % spacing == 0 { deg > 2 } else { deg == 2 };
            prop_assert!(ok, "vertex {} degree {}", v, deg);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subdivision_lemma_on_trees_plus_edge(n in 2usize..5, pick in any::<u64>()) {
        let g = Graph::path(n);
        let edges = g.edges();
        let drop = (pick as usize) % edges.len();
        let h: Vec<(usize, usize)> = edges.iter().enumerate().filter(|&(i, _)| i != drop || pick % 2 == 0).map(|(_, &e)| e).collect();
        prop_assert!(check_scs_reduction(&g, &h).unwrap().pass);
    }
}
