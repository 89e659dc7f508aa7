//! Search for cuts whose components are all certified stable.
//!
//! Exhaustive mode walks every bipartition with both sides connected (and,
//! for more components, recursively splits parts of certified partitions).
//! Heuristic mode seeds with the sign pattern of the Fiedler vector and
//! improves it with greedy single-node moves. Both report only partitions
//! that carry a `CertifiedStable` certificate, cheapest cut first.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::certify::{
    certify_partition, necessary_internal_cost, Check, StabilityCertificate, StabilityThreshold, Verdict,
};
use crate::error::{Error, Result};
use crate::graph::{Cut, Partition, WeightedGraph};
use crate::spectral::fiedler;

/// Largest graph the exhaustive enumeration accepts.
pub const EXHAUSTIVE_MAX_NODES: usize = 20;

/// Adjacency as bit masks; only valid for graphs within the exhaustive cap.
struct MaskGraph {
    adj: Vec<u32>,
}

impl MaskGraph {
    fn new(g: &WeightedGraph) -> Self {
        let adj = (0..g.node_count())
            .map(|i| g.neighbors(i).fold(0u32, |m, (j, _)| m | (1 << j)))
            .collect();
        Self { adj }
    }

    fn connected(&self, set: u32) -> bool {
        if set == 0 {
            return false;
        }
        let mut seen = set & set.wrapping_neg();
        let mut frontier = seen;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.adj[i] & set & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen == set
    }
}

fn check_enumerable(g: &WeightedGraph) -> Result<()> {
    let n = g.node_count();
    if n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::TooLarge {
            limit: EXHAUSTIVE_MAX_NODES,
            got: n,
        });
    }
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

fn bits_to_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Lazily yields every bipartition of a connected graph with both sides
/// connected. Node 0 is always on the first side, so each split appears once.
pub struct Bipartitions {
    graph: MaskGraph,
    full: u32,
    next: u32,
    end: u32,
}

impl Iterator for Bipartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        while self.next < self.end {
            let mask = self.next;
            self.next += 1;
            if let Some(p) = split_from_mask(&self.graph, self.full, mask) {
                return Some(p);
            }
        }
        None
    }
}

/// `mask` selects the second side among nodes `1..n` (bit `k` is node `k+1`).
fn split_from_mask(graph: &MaskGraph, full: u32, mask: u32) -> Option<Partition> {
    let second = mask << 1;
    let first = full & !second;
    (graph.connected(first) && graph.connected(second))
        .then(|| Partition::from_indices(vec![bits_to_indices(first), bits_to_indices(second)]))
}

pub fn enumerate_bipartitions(g: &WeightedGraph) -> Result<Bipartitions> {
    check_enumerable(g)?;
    let n = g.node_count();
    Ok(Bipartitions {
        graph: MaskGraph::new(g),
        full: ((1u64 << n) - 1) as u32,
        next: 1,
        end: 1u32 << (n - 1),
    })
}

/// All connected bipartitions, in enumeration order, computed in parallel.
fn all_bipartitions(g: &WeightedGraph) -> Result<Vec<Partition>> {
    check_enumerable(g)?;
    let n = g.node_count();
    let graph = MaskGraph::new(g);
    let full = ((1u64 << n) - 1) as u32;
    Ok((1u32..1u32 << (n - 1))
        .into_par_iter()
        .filter_map(|mask| split_from_mask(&graph, full, mask))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Heuristic,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Heuristic => "heuristic",
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "heuristic" => Ok(SearchMode::Heuristic),
            other => Err(Error::BadParams(format!("unknown search mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankedPartition {
    pub partition: Partition,
    pub cut: Cut,
    pub cut_weight: f64,
    /// Smallest component Fiedler value.
    pub min_lambda2: f64,
    pub certificate: StabilityCertificate,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub mode: SearchMode,
    pub tau: f64,
    pub max_components: usize,
    pub candidates_examined: usize,
    /// Ascending cut weight; ties by larger smallest Fiedler value.
    pub certified: Vec<RankedPartition>,
}

fn cut_weight_of(g: &WeightedGraph, p: &Partition) -> f64 {
    let labels = p.labels(g.node_count());
    g.edges().filter(|e| labels[e.u] != labels[e.v]).map(|e| e.weight).sum()
}

/// Certifies `p` and returns a ranked entry if every component is stable.
fn rank(g: &WeightedGraph, p: Partition, tau: StabilityThreshold) -> Result<Option<RankedPartition>> {
    let certificate = certify_partition(g, &p, tau)?;
    if certificate.overall != Verdict::CertifiedStable {
        return Ok(None);
    }
    let min_lambda2 = certificate
        .per_component
        .iter()
        .filter_map(|c| c.exact_lambda2)
        .fold(f64::INFINITY, f64::min);
    let cut = Cut::between(g, &p);
    let cut_weight = cut_weight_of(g, &p);
    Ok(Some(RankedPartition {
        partition: p.with_origin(cut.clone()),
        cut,
        cut_weight,
        min_lambda2,
        certificate,
    }))
}

fn certify_all(g: &WeightedGraph, candidates: Vec<Partition>, tau: StabilityThreshold) -> Result<Vec<RankedPartition>> {
    let ranked: Vec<Option<RankedPartition>> = candidates
        .into_par_iter()
        .map(|p| rank(g, p, tau))
        .collect::<Result<_>>()?;
    Ok(ranked.into_iter().flatten().collect())
}

/// Replaces component `k` of `p` by the two given pieces (indices local to
/// that component).
fn split_component(p: &Partition, k: usize, a: &[usize], b: &[usize]) -> Partition {
    let comp = &p.components()[k];
    let mut parts: Vec<Vec<usize>> = p
        .components()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, c)| c.clone())
        .collect();
    parts.push(a.iter().map(|&t| comp[t]).collect());
    parts.push(b.iter().map(|&t| comp[t]).collect());
    Partition::from_indices(parts)
}

/// Exhaustive or heuristic search for certified-stable partitions with at
/// most `max_components` parts.
pub fn search_stable_cuts(
    g: &WeightedGraph,
    tau: StabilityThreshold,
    mode: SearchMode,
    max_components: usize,
) -> Result<SearchReport> {
    if max_components < 2 {
        return Err(Error::BadParams(format!(
            "max_components must be at least 2, got {max_components}"
        )));
    }
    if g.node_count() < 2 {
        return Err(Error::TooSmall {
            need: 2,
            got: g.node_count(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }

    let mut seen: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
    let mut examined = 0;
    let mut certified = Vec::new();
    let mut frontier = match mode {
        SearchMode::Exhaustive => {
            let candidates = all_bipartitions(g)?;
            examined += candidates.len();
            certify_all(g, candidates, tau)?
        }
        SearchMode::Heuristic => {
            let all: Vec<usize> = (0..g.node_count()).collect();
            let mut found = Vec::new();
            if let Some(p) = heuristic_split(g, &Partition::from_indices(vec![all]), 0, tau)? {
                examined += 1;
                found.extend(rank(g, p, tau)?);
            }
            found
        }
    };

    for _ in 2..max_components {
        let mut candidates = Vec::new();
        for r in &frontier {
            let p = &r.partition;
            for k in 0..p.len() {
                let comp = &p.components()[k];
                if comp.len() < 2 {
                    continue;
                }
                match mode {
                    SearchMode::Exhaustive => {
                        let sub = g.induced_subgraph(comp);
                        for s in all_bipartitions(&sub)? {
                            let parts = s.components();
                            candidates.push(split_component(p, k, &parts[0], &parts[1]));
                        }
                    }
                    SearchMode::Heuristic => {
                        if let Some(q) = heuristic_split(g, p, k, tau)? {
                            candidates.push(q);
                        }
                    }
                }
            }
        }
        candidates.retain(|c| seen.insert(c.components().to_vec()));
        examined += candidates.len();
        let next = certify_all(g, candidates, tau)?;
        certified.append(&mut frontier);
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    certified.append(&mut frontier);
    certified.sort_by(|a, b| {
        a.cut_weight
            .total_cmp(&b.cut_weight)
            .then(b.min_lambda2.total_cmp(&a.min_lambda2))
    });
    Ok(SearchReport {
        mode,
        tau: tau.value(),
        max_components,
        candidates_examined: examined,
        certified,
    })
}

/// Splits component `k` of `p` by the Fiedler sign pattern of its induced
/// subgraph, repairs disconnected sides, then refines.
fn heuristic_split(g: &WeightedGraph, p: &Partition, k: usize, tau: StabilityThreshold) -> Result<Option<Partition>> {
    let comp = &p.components()[k];
    let sub = g.induced_subgraph(comp);
    let Some([a, b]) = spectral_seed(&sub)? else {
        return Ok(None);
    };
    let seed = Partition::from_indices(vec![a, b]);
    let refined = refine_moves(&sub, &seed, tau).partition;
    let parts = refined.components();
    Ok(Some(split_component(p, k, &parts[0], &parts[1])))
}

/// Sign split of the Fiedler vector (zeros join the non-negative side), with
/// stray pieces of either side moved across so both sides are connected.
pub fn spectral_seed(g: &WeightedGraph) -> Result<Option<[Vec<usize>; 2]>> {
    if g.node_count() < 2 {
        return Ok(None);
    }
    let f = fiedler(g)?;
    let scale = f.vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-12 * scale;
    let mut side: Vec<bool> = f.vector.iter().map(|&v| v < -zero).collect();
    for flip in [false, true] {
        let members: Vec<usize> = (0..side.len()).filter(|&i| side[i] == flip).collect();
        if members.is_empty() {
            return Ok(None);
        }
        let comps = g.components_within(&members);
        let keep = comps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.len().cmp(&y.1.len()).then(y.0.cmp(&x.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        for (i, c) in comps.iter().enumerate() {
            if i != keep {
                for &v in c {
                    side[v] = !flip;
                }
            }
        }
    }
    let a: Vec<usize> = (0..side.len()).filter(|&i| !side[i]).collect();
    let b: Vec<usize> = (0..side.len()).filter(|&i| side[i]).collect();
    if a.is_empty() || b.is_empty() {
        return Ok(None);
    }
    Ok(Some([a, b]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub node: usize,
    /// Reduction in cut weight.
    pub gain: f64,
}

#[derive(Debug, Clone)]
pub struct Refinement {
    pub partition: Partition,
    pub moves: Vec<Move>,
    /// False when the input was not a bipartition with both sides of size at
    /// least two; the input is then returned unchanged.
    pub precondition_met: bool,
}

/// Greedy single-node moves. Each step takes the move with the largest
/// positive gain `external - internal` (lowest node index on ties) that keeps
/// both sides connected with at least two nodes and keeps the internal-cost
/// test passing on both sides.
pub fn refine_moves(g: &WeightedGraph, p: &Partition, tau: StabilityThreshold) -> Refinement {
    let ok = p.len() == 2 && p.components().iter().all(|c| c.len() >= 2);
    if !ok {
        return Refinement {
            partition: p.clone(),
            moves: Vec::new(),
            precondition_met: false,
        };
    }
    let n = g.node_count();
    let mut labels = p.labels(n);
    let mut moves = Vec::new();
    loop {
        let sizes = [0, 1].map(|s| labels.iter().filter(|&&l| l == s).count());
        let mut best: Option<(usize, f64)> = None;
        for s in 0..n {
            let (internal, external) = g.split_cost_labels(&labels, s);
            let gain = external - internal;
            if gain <= 0.0 || best.is_some_and(|(_, b)| gain <= b) {
                continue;
            }
            if sizes[labels[s]] < 3 {
                continue;
            }
            let mut trial = labels.clone();
            trial[s] = 1 - trial[s];
            let from: Vec<usize> = (0..n).filter(|&i| trial[i] == labels[s]).collect();
            if !g.is_connected_subset(&from) {
                continue;
            }
            let q = partition_from_labels(&trial);
            if necessary_internal_cost(g, &q, tau).iter().any(|&c| c != Check::Pass) {
                continue;
            }
            best = Some((s, gain));
        }
        match best {
            Some((s, gain)) => {
                labels[s] = 1 - labels[s];
                moves.push(Move { node: s, gain });
            }
            None => break,
        }
    }
    Refinement {
        partition: partition_from_labels(&labels),
        moves,
        precondition_met: true,
    }
}

fn partition_from_labels(labels: &[usize]) -> Partition {
    let a: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    let b: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    Partition::from_indices(vec![a, b])
}
