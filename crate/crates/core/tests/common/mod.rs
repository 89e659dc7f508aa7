#![allow(dead_code)]

use metacut::WeightedGraph;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn node(i: usize) -> String {
    format!("n{i:02}")
}

/// Connected graph on `n` nodes: a random spanning tree plus extra edges
/// with probability `extra`, weights uniform in `[0.1, 5)`.
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        present.insert((j, i));
        edges.push((node(j), node(i), rng.gen_range(0.1..5.0)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.gen_bool(extra) {
                edges.push((node(i), node(j), rng.gen_range(0.1..5.0)));
            }
        }
    }
    WeightedGraph::with_nodes((0..n).map(node), &edges).unwrap()
}

pub fn random_connected<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> WeightedGraph {
    let n = rng.gen_range(min_n..=max_n);
    let extra = rng.gen_range(0.0..0.6);
    connected_graph(rng, n, extra)
}
