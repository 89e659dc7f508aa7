//! Invariants of Laplacians, cost tests and partition search on random
//! connected graphs.

mod common;

use common::{node, random_connected, rng};
use metacut::certify::{fiedler_identity_residual, fiedler_sum_check, necessary_internal_cost, Check, SumOutcome};
use metacut::spectral::{algebraic_connectivity, oracle_eigenvalues};
use metacut::{
    certify_partition, eig_symmetric, enumerate_bipartitions, fiedler, refine_moves, search_stable_cuts, Bipartition,
    Cut, Partition, SearchMode, StabilityThreshold, WeightedGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn tau(t: f64) -> StabilityThreshold {
    StabilityThreshold::new(t).unwrap()
}

fn lambda2(g: &WeightedGraph) -> f64 {
    fiedler(g).unwrap().value
}

fn sub_lambda2(g: &WeightedGraph, part: &[usize]) -> Option<f64> {
    algebraic_connectivity(&g.induced_subgraph(part)).unwrap()
}

fn random_bipartition<R: Rng>(rng: &mut R, g: &WeightedGraph) -> Option<Partition> {
    let all: Vec<Partition> = enumerate_bipartitions(g).ok()?.collect();
    all.choose(rng).cloned()
}

fn with_extra_weight(g: &WeightedGraph, a: usize, b: usize, w: f64) -> WeightedGraph {
    let mut edges: Vec<(String, String, f64)> = g
        .edges()
        .map(|e| (g.node_name(e.u).to_string(), g.node_name(e.v).to_string(), e.weight))
        .collect();
    match edges
        .iter_mut()
        .find(|(u, v, _)| (u == g.node_name(a) && v == g.node_name(b)) || (u == g.node_name(b) && v == g.node_name(a)))
    {
        Some(e) => e.2 += w,
        None => edges.push((g.node_name(a).into(), g.node_name(b).into(), w)),
    }
    WeightedGraph::with_nodes(g.nodes().iter().cloned(), &edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn laplacian_is_symmetric_psd_with_zero_row_sums(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 14);
        let l = g.laplacian();
        prop_assert_eq!(l.asymmetry(), 0.0);
        for i in 0..l.rows() {
            prop_assert!(l.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
        let ev = eig_symmetric(&l).unwrap().eigenvalues;
        let scale = l.max_abs();
        prop_assert!(ev[0].abs() < 1e-9 * scale);
        prop_assert!(ev.iter().all(|&x| x > -1e-9 * scale));
        prop_assert!(ev[1] > 1e-9 * scale, "connected graph has a simple zero eigenvalue");
    }

    #[test]
    fn internal_plus_external_cost_is_degree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 2, 12);
        let k = r.gen_range(1..=g.node_count());
        let labels: Vec<usize> = (0..g.node_count()).map(|_| r.gen_range(0..k)).collect();
        let parts: Vec<Vec<String>> = (0..k)
            .map(|c| (0..g.node_count()).filter(|&i| labels[i] == c).map(node).collect())
            .filter(|p: &Vec<String>| !p.is_empty())
            .collect();
        let p = Partition::from_parts_relaxed(&g, &parts).unwrap();
        for i in 0..g.node_count() {
            let s = g.node_name(i);
            let total = g.internal_cost(&p, s).unwrap() + g.external_cost(&p, s).unwrap();
            prop_assert!((total - g.degree(i)).abs() < 1e-12 * (1.0 + g.degree(i)));
        }
    }

    #[test]
    fn fiedler_value_bounded_by_two_smallest_degrees(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 14);
        let mut d: Vec<f64> = (0..g.node_count()).map(|i| g.degree(i)).collect();
        d.sort_by(f64::total_cmp);
        let ev = eig_symmetric(&g.laplacian()).unwrap().eigenvalues;
        prop_assert!(ev[0] + ev[1] <= d[0] + d[1] + 1e-9);
    }

    #[test]
    fn adding_weight_never_lowers_the_fiedler_value(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 3, 12);
        let n = g.node_count();
        let a = r.gen_range(0..n);
        let b = (a + r.gen_range(1..n)) % n;
        let h = with_extra_weight(&g, a, b, r.gen_range(0.01..3.0));
        let (before, after) = (lambda2(&g), lambda2(&h));
        prop_assert!(after >= before - 1e-9 * (1.0 + before));
        // and all eigenvalues move up
        let e0 = eig_symmetric(&g.laplacian()).unwrap().eigenvalues;
        let e1 = eig_symmetric(&h.laplacian()).unwrap().eigenvalues;
        for (x, y) in e0.iter().zip(&e1) {
            prop_assert!(y >= &(x - 1e-9 * (1.0 + x.abs())));
        }
    }

    #[test]
    fn principal_submatrix_eigenvalues_interlace(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 3, 12);
        let n = g.node_count();
        let l = g.laplacian();
        let mut keep: Vec<usize> = (0..n).collect();
        keep.remove(r.gen_range(0..n));
        let full = eig_symmetric(&l).unwrap().eigenvalues;
        let sub = eig_symmetric(&l.principal_submatrix(&keep)).unwrap().eigenvalues;
        let eps = 1e-9 * (1.0 + l.max_abs());
        for k in 0..n - 1 {
            prop_assert!(full[k] <= sub[k] + eps && sub[k] <= full[k + 1] + eps);
        }
    }

    #[test]
    fn jacobi_matches_inertia_oracle(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 6);
        let l = g.laplacian();
        let jacobi = eig_symmetric(&l).unwrap().eigenvalues;
        let oracle = oracle_eigenvalues(&l).unwrap();
        for (a, b) in jacobi.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-7, "{} vs {}", a, b);
        }
    }

    #[test]
    fn fiedler_vector_satisfies_eigen_equation(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 16);
        let f = fiedler(&g).unwrap();
        let lv = g.laplacian().mul_vec(&f.vector);
        let resid = lv.iter().zip(&f.vector).map(|(a, b)| (a - f.value * b).abs()).fold(0.0, f64::max);
        prop_assert!(resid < 1e-8 * (1.0 + g.laplacian().max_abs()));
        prop_assert!((f.vector.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(f.vector.iter().sum::<f64>().abs() < 1e-8);
    }

    #[test]
    fn component_fiedler_value_bounded_by_external_cost(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 3, 10);
        let Some(p) = random_bipartition(&mut r, &g) else { return Ok(()); };
        let graph_l2 = lambda2(&g);
        for comp in p.components() {
            let Some(l2) = sub_lambda2(&g, comp) else { continue };
            let max_ext = comp.iter().map(|&i| g.external_cost(&p, g.node_name(i)).unwrap()).fold(0.0, f64::max);
            prop_assert!(graph_l2 <= l2 + max_ext + 1e-9);
        }
    }

    #[test]
    fn cost_tests_are_sound(seed in any::<u64>(), t in 0.0f64..8.0) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 4, 10);
        let Some(p) = random_bipartition(&mut r, &g) else { return Ok(()); };
        let cert = certify_partition(&g, &p, tau(t)).unwrap();
        let necessary = necessary_internal_cost(&g, &p, tau(t));
        for (c, nec) in cert.per_component.iter().zip(necessary) {
            let Some(l2) = c.exact_lambda2 else { continue };
            if c.sufficient == Check::Pass {
                prop_assert!(l2 >= t - 1e-8, "sufficient test passed but lambda2 {} < {}", l2, t);
            }
            if nec == Check::Fail {
                prop_assert!(l2 < t + 1e-8, "necessary test failed but lambda2 {} >= {}", l2, t);
            }
        }
    }

    #[test]
    fn identity_residual_vanishes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 2, 10);
        let Some(p) = random_bipartition(&mut r, &g) else { return Ok(()); };
        let b = Bipartition::from_partition(&p).unwrap();
        let scale = 1.0 + g.laplacian().max_abs();
        prop_assert!(fiedler_identity_residual(&g, &b).unwrap() <= 1e-8 * scale);
    }

    #[test]
    fn fiedler_sum_test_decides_against_graph_lambda2(seed in any::<u64>(), offset in prop_oneof![-2.0f64..-0.01, 0.01f64..2.0]) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 2, 10);
        let Some(p) = random_bipartition(&mut r, &g) else { return Ok(()); };
        let b = Bipartition::from_partition(&p).unwrap();
        let l2 = lambda2(&g);
        let t = (l2 + offset).max(0.0);
        prop_assume!((l2 - t).abs() > 1e-3);
        for s in fiedler_sum_check(&g, &b, tau(t)).unwrap() {
            match s.outcome {
                SumOutcome::Holds => prop_assert!(l2 >= t),
                SumOutcome::Fails => prop_assert!(l2 < t),
                SumOutcome::Indeterminate => {}
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 10);
        let n = g.node_count();
        let mut expected = Vec::new();
        for mask in 1u32..(1 << n) - 1 {
            if mask & 1 == 0 {
                continue;
            }
            let first: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let second: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 0).collect();
            if g.is_connected_subset(&first) && g.is_connected_subset(&second) {
                expected.push(first);
            }
        }
        let mut got: Vec<Vec<usize>> = enumerate_bipartitions(&g).unwrap().map(|p| p.components()[0].clone()).collect();
        got.sort();
        expected.sort();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn heuristic_results_are_exhaustive_results(seed in any::<u64>(), t in 0.0f64..3.0) {
        let g = random_connected(&mut rng(seed), 4, 10);
        let ex = search_stable_cuts(&g, tau(t), SearchMode::Exhaustive, 2).unwrap();
        let he = search_stable_cuts(&g, tau(t), SearchMode::Heuristic, 2).unwrap();
        let ex_parts: Vec<_> = ex.certified.iter().map(|c| c.partition.components().to_vec()).collect();
        for c in &he.certified {
            prop_assert!(ex_parts.contains(&c.partition.components().to_vec()));
        }
        for w in ex.certified.windows(2) {
            prop_assert!(w[0].cut_weight <= w[1].cut_weight);
        }
    }

    #[test]
    fn refinement_lowers_cut_weight_and_keeps_sides_connected(seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut r = rng(seed);
        let g = random_connected(&mut r, 4, 12);
        let Some(p) = random_bipartition(&mut r, &g) else { return Ok(()); };
        let before = g.cut_weight(&Cut::between(&g, &p)).unwrap();
        let out = refine_moves(&g, &p, tau(t));
        let after = g.cut_weight(&Cut::between(&g, &out.partition)).unwrap();
        prop_assert!(after <= before + 1e-12);
        let gained: f64 = out.moves.iter().map(|m| m.gain).sum();
        prop_assert!((before - after - gained).abs() < 1e-9 * (1.0 + before));
        for comp in out.partition.components() {
            prop_assert!(g.is_connected_subset(comp));
        }
    }

    #[test]
    fn zero_threshold_certifies_every_split_without_singletons(seed in any::<u64>()) {
        let g = random_connected(&mut rng(seed), 2, 10);
        let expected = enumerate_bipartitions(&g)
            .unwrap()
            .filter(|p| p.components().iter().all(|c| c.len() >= 2))
            .count();
        let report = search_stable_cuts(&g, tau(0.0), SearchMode::Exhaustive, 2).unwrap();
        prop_assert_eq!(report.certified.len(), expected);
        for c in &report.certified {
            for comp in c.partition.components() {
                prop_assert!(sub_lambda2(&g, comp).unwrap() >= -1e-9);
            }
        }
    }
}
