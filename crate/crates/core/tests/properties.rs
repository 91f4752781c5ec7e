use ndarray::Array2;
use proptest::prelude::*;

use vnsgm::assignment::max_assignment;
use vnsgm::graph::{induced_subgraph, load_edge_list, neighborhood, save_edge_list, Graph, Hops, VertexSet};
use vnsgm::nomination::{Candidate, NominationList};
use vnsgm::rng;
use vnsgm::soft_sgm::random_start;
use vnsgm::{evaluate_tau, SeedMap, VnConfig};

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (2usize..25).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 1..60).prop_map(move |edges| {
            let labels = (0..n).map(|i| format!("q{i}")).collect();
            let simple: Vec<(usize, usize)> = edges.into_iter().filter(|(a, b)| a != b).collect();
            Graph::from_edges(labels, simple).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignment_beats_every_sampled_permutation(
        k in 1usize..8,
        seed in any::<u64>(),
        perm_seed in any::<u64>(),
    ) {
        use rand::Rng as _;
        use rand::seq::SliceRandom;
        let mut r = rng::stream(seed, 0);
        let m = Array2::from_shape_fn((k, k), |_| r.gen_range(-100.0..100.0));
        let best = max_assignment(m.view()).unwrap();
        let mut p: Vec<usize> = (0..k).collect();
        let mut pr = rng::stream(perm_seed, 0);
        for _ in 0..10 {
            p.shuffle(&mut pr);
            let v: f64 = p.iter().enumerate().map(|(i, &j)| m[[i, j]]).sum();
            prop_assert!(best.objective >= v - 1e-9);
        }
    }

    #[test]
    fn whole_vertex_set_induces_same_graph(g in graph_strategy()) {
        let sub = induced_subgraph(&g, &VertexSet::all(&g)).unwrap();
        prop_assert_eq!(sub.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn neighborhoods_nest(g in graph_strategy(), start in 0usize..25, h in 0u32..6) {
        let s = VertexSet::new([start % g.n_vertices()]);
        let small = neighborhood(&g, &s, Hops::Finite(h)).unwrap();
        let big = neighborhood(&g, &s, Hops::Finite(h + 1)).unwrap();
        prop_assert!(s.is_subset(&small));
        prop_assert!(small.is_subset(&big));
        prop_assert!(big.is_subset(&neighborhood(&g, &s, Hops::Infinite).unwrap()));
    }

    #[test]
    fn edge_list_round_trip(g in graph_strategy()) {
        prop_assume!(g.n_edges() > 0);
        let mut buf = Vec::new();
        save_edge_list(&g, &mut buf).unwrap();
        let back = load_edge_list(buf.as_slice()).unwrap().graph;
        prop_assert_eq!(back.n_edges(), g.n_edges());
        for (u, v) in g.edges() {
            let a = back.index_of(g.label(u)).unwrap();
            let b = back.index_of(g.label(v)).unwrap();
            prop_assert!(back.has_edge(a, b));
        }
    }

    #[test]
    fn random_starts_are_doubly_stochastic(dim in 1usize..12, gamma in 0.0f64..=1.0, seed in any::<u64>()) {
        let p = random_start(dim, gamma, &mut rng::stream(seed, 3));
        prop_assert!(p.max_marginal_error() < 1e-12);
        prop_assert!(p.view().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn tau_stays_in_unit_interval(scores in prop::collection::vec(0u8..5, 1..30), pick in any::<prop::sample::Index>()) {
        let list = NominationList {
            voi: "x".into(),
            candidates: scores.iter().enumerate().map(|(i, &s)| Candidate { label: i.to_string(), score: s as f64 }).collect(),
            local_seeds: SeedMap::empty(),
            s_x: 1,
            gx_size: 0,
            g2x_size: 0,
            candidate_count: scores.len(),
            pad_mass: 0.0,
            config: VnConfig::default(),
        };
        let target = pick.index(scores.len());
        let t = evaluate_tau(&list, &target.to_string());
        let tau = t.tau.unwrap();
        prop_assert!((0.0..=1.0).contains(&tau));
        let top = *scores.iter().max().unwrap();
        let unique_top = scores.iter().filter(|&&s| s == top).count() == 1;
        prop_assert_eq!(tau == 0.0, scores.len() == 1 || (scores[target] == top && unique_top));
    }
}
