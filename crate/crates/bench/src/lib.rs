//! Inputs shared by the benchmarks.

use metacut::{rosenzweig_macarthur, MetapopModel, RMParams, WeightedGraph};

/// Ring of `n` nodes with a chord from every fifth node in the first half to
/// the opposite side.
pub fn ring_with_chords(n: usize) -> WeightedGraph {
    let name = |i: usize| format!("n{i:03}");
    let mut edges: Vec<(String, String, f64)> = (0..n).map(|i| (name(i), name((i + 1) % n), 1.0)).collect();
    for i in (0..n / 2).step_by(5) {
        let j = i + n / 2;
        if j > i + 1 && (j + 1) % n != i {
            edges.push((name(i), name(j), 0.5));
        }
    }
    WeightedGraph::from_edges(&edges).expect("valid ring")
}

pub fn three_patch_model() -> MetapopModel {
    let prey = WeightedGraph::from_edges(&[("1", "2", 1.0), ("1", "3", 1.0), ("2", "3", 2.0)]).expect("prey graph");
    let pred = WeightedGraph::from_edges(&[("1", "2", 2.0), ("1", "3", 1.0), ("2", "3", 1.0)]).expect("predator graph");
    let params = RMParams::new(2.0, 0.2, 0.3, 0.4, 0.2).expect("parameters");
    rosenzweig_macarthur(params, prey, pred).expect("model")
}
