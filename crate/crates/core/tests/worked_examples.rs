//! Hand-checked values on the small fixture networks.

use approx::assert_abs_diff_eq;
use metacut::certify::{fiedler_sum_check, SumCase, SumOutcome};
use metacut::formats::{parse_cut_for, parse_graph, parse_model};
use metacut::spectral::{algebraic_connectivity, oracle_eigenvalues};
use metacut::{
    certify_partition, eig_symmetric, fiedler, Bipartition, Partition, StabilityThreshold, Verdict, WeightedGraph,
};

const FIVE_PATCH: &str = include_str!("../../../fixtures/five_patch.graph");
const FOUR_CYCLE: &str = include_str!("../../../fixtures/four_cycle.graph");

fn component_lambda2(g: &WeightedGraph, names: &[&str]) -> f64 {
    let idx: Vec<usize> = names.iter().map(|n| g.node_index(n).unwrap()).collect();
    algebraic_connectivity(&g.induced_subgraph(&idx)).unwrap().unwrap()
}

fn tau(t: f64) -> StabilityThreshold {
    StabilityThreshold::new(t).unwrap()
}

#[test]
fn five_patch_fiedler_value() {
    let g = parse_graph(FIVE_PATCH).unwrap();
    let f = fiedler(&g).unwrap();
    assert_abs_diff_eq!(f.value, 3.625043365, epsilon = 1e-8);
    let oracle = oracle_eigenvalues(&g.laplacian()).unwrap();
    assert_abs_diff_eq!(oracle[1], f.value, epsilon = 1e-9);
}

#[test]
fn four_cycle_fiedler_value() {
    let g = parse_graph(FOUR_CYCLE).unwrap();
    assert_abs_diff_eq!(fiedler(&g).unwrap().value, 0.952908945, epsilon = 1e-8);
}

#[test]
fn component_values() {
    let g = parse_graph(FIVE_PATCH).unwrap();
    assert_abs_diff_eq!(component_lambda2(&g, &["v1", "v2"]), 6.0, epsilon = 1e-9);
    assert_abs_diff_eq!(
        component_lambda2(&g, &["v1", "v2", "v3"]),
        2.3542486889354093,
        epsilon = 1e-9
    );
    assert_abs_diff_eq!(component_lambda2(&g, &["v4", "v5"]), 10.0, epsilon = 1e-9);
    let c = parse_graph(FOUR_CYCLE).unwrap();
    assert_abs_diff_eq!(component_lambda2(&c, &["v1", "v4"]), 0.2, epsilon = 1e-9);
}

#[test]
fn three_node_component_matches_closed_form() {
    let g = parse_graph(FIVE_PATCH).unwrap();
    let idx: Vec<usize> = ["v3", "v4", "v5"].iter().map(|n| g.node_index(n).unwrap()).collect();
    let l = g.induced_subgraph(&idx).laplacian();
    let expected = [0.0, (16.0 - 76f64.sqrt()) / 2.0, (16.0 + 76f64.sqrt()) / 2.0];
    let jacobi = eig_symmetric(&l).unwrap().eigenvalues;
    let oracle = oracle_eigenvalues(&l).unwrap();
    for k in 0..3 {
        assert_abs_diff_eq!(jacobi[k], expected[k], epsilon = 1e-7);
        assert_abs_diff_eq!(oracle[k], expected[k], epsilon = 1e-7);
    }
    // neighbouring candidate {v1, v2, v5} has the larger value 4.2679...
    assert_abs_diff_eq!(
        algebraic_connectivity(&g.induced_subgraph(&[0, 1, 4]))
            .unwrap()
            .unwrap(),
        4.267949192431123,
        epsilon = 1e-9
    );
}

#[test]
fn cut_weights() {
    let g = parse_graph(FIVE_PATCH).unwrap();
    let c1 = parse_cut_for(include_str!("../../../fixtures/five_patch_c1.cut"), &g).unwrap();
    let c2 = parse_cut_for(include_str!("../../../fixtures/five_patch_c2.cut"), &g).unwrap();
    assert_eq!(g.cut_weight(&c1).unwrap(), 5.0);
    assert_eq!(g.cut_weight(&c2).unwrap(), 6.0);
    let p2 = g.apply_cut(&c2).unwrap();
    assert_eq!(p2.component_names(&g), vec![vec!["v1", "v2", "v3"], vec!["v4", "v5"]]);
}

#[test]
fn certificates_on_fixture_cuts() {
    let g = parse_graph(FIVE_PATCH).unwrap();
    let c1 = parse_cut_for(include_str!("../../../fixtures/five_patch_c1.cut"), &g).unwrap();
    let c2 = parse_cut_for(include_str!("../../../fixtures/five_patch_c2.cut"), &g).unwrap();
    let p1 = g.apply_cut(&c1).unwrap();
    assert_eq!(
        certify_partition(&g, &p1, tau(3.0)).unwrap().overall,
        Verdict::CertifiedStable
    );
    // {v1,v2,v3} has lambda2 2.354 < 3
    let p2 = g.apply_cut(&c2).unwrap();
    assert_eq!(
        certify_partition(&g, &p2, tau(3.0)).unwrap().overall,
        Verdict::CertifiedUnstable
    );

    let c = parse_graph(FOUR_CYCLE).unwrap();
    let cut = parse_cut_for(include_str!("../../../fixtures/four_cycle_c.cut"), &c).unwrap();
    let p = c.apply_cut(&cut).unwrap();
    assert_eq!(
        certify_partition(&c, &p, tau(0.2)).unwrap().overall,
        Verdict::CertifiedStable
    );
    assert_eq!(
        certify_partition(&c, &p, tau(0.3)).unwrap().overall,
        Verdict::CertifiedUnstable
    );
}

#[test]
fn symmetric_fiedler_vector_gives_zero_side_sums() {
    let c = parse_graph(FOUR_CYCLE).unwrap();
    let p = Partition::from_parts(&c, &[vec!["v1", "v4"], vec!["v2", "v3"]]).unwrap();
    let b = Bipartition::from_partition(&p).unwrap();
    for check in fiedler_sum_check(&c, &b, tau(0.3)).unwrap() {
        assert_eq!(check.case, SumCase::Zero);
        assert_eq!(check.outcome, SumOutcome::Indeterminate);
    }
}

#[test]
fn rm_fixture_models_parse() {
    let spec = parse_model(include_str!("../../../fixtures/three_patch.model")).unwrap();
    assert_eq!(spec.build().unwrap().state_len(), 6);
    let single = parse_model(include_str!("../../../fixtures/single_patch.model")).unwrap();
    assert_eq!(single.build().unwrap().state_len(), 2);
}
