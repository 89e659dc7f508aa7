//! Weighted undirected dispersal graphs, cuts and partitions.
//!
//! Nodes are stored in canonical (lexicographic) order; row `k` of every matrix
//! built from a graph refers to the `k`-th canonical node.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    /// `adj[i]` maps neighbour index to edge weight.
    adj: Vec<BTreeMap<usize, f64>>,
}

/// An edge between two canonical node indices with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. The node set is the set of endpoints.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S, f64)]) -> Result<Self> {
        Self::with_nodes(std::iter::empty::<&str>(), edges)
    }

    /// Builds a graph with an explicit node list (which may contain isolated
    /// nodes) plus an edge list. Edge endpoints not in `nodes` are added.
    pub fn with_nodes<N, S>(nodes: N, edges: &[(S, S, f64)]) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: AsRef<str>,
        S: AsRef<str>,
    {
        let mut names = BTreeSet::new();
        for n in nodes {
            if !names.insert(n.as_ref().to_string()) {
                return Err(Error::DuplicateNode(n.as_ref().to_string()));
            }
        }
        for (u, v, w) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            if u == v {
                return Err(Error::SelfLoop(u.to_string()));
            }
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::NonPositiveWeight(u.to_string(), v.to_string(), *w));
            }
            names.insert(u.to_string());
            names.insert(v.to_string());
        }
        let nodes: Vec<String> = names.into_iter().collect();
        let index: BTreeMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut adj = vec![BTreeMap::new(); nodes.len()];
        for (u, v, w) in edges {
            let (iu, iv) = (index[u.as_ref()], index[v.as_ref()]);
            if adj[iu].insert(iv, *w).is_some() {
                let (a, b) = canonical_pair(&nodes, iu, iv);
                return Err(Error::DuplicateEdge(a, b));
            }
            adj[iv].insert(iu, *w);
        }
        Ok(Self { nodes, index, adj })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Edges in canonical order: by `u`, then by `v`, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |(&v, &weight)| Edge { u, v, weight }))
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[i].iter().map(|(&j, &w)| (j, w))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i].get(&j).copied()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.adj[i].values().sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|e| e.weight).sum()
    }

    /// Weighted Laplacian `D - A` in canonical node order.
    pub fn laplacian(&self) -> Matrix {
        let n = self.nodes.len();
        let mut l = Matrix::zeros(n, n);
        for (i, nbrs) in self.adj.iter().enumerate() {
            for (&j, &w) in nbrs {
                l[(i, j)] = -w;
                l[(i, i)] += w;
            }
        }
        l
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.node_count()).collect();
        self.is_connected_subset(&all)
    }

    /// Whether the subgraph induced by `subset` is connected. The empty set is
    /// reported as disconnected.
    pub fn is_connected_subset(&self, subset: &[usize]) -> bool {
        if subset.is_empty() {
            return false;
        }
        let members: BTreeSet<usize> = subset.iter().copied().collect();
        self.reach_within(subset[0], |j| members.contains(&j)).len() == members.len()
    }

    fn reach_within(&self, start: usize, allowed: impl Fn(usize) -> bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in self.adj[i].keys() {
                if allowed(j) && seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// Connected components of the subgraph induced by `subset`, each sorted,
    /// ordered by smallest member.
    pub fn components_within(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let members: BTreeSet<usize> = subset.iter().copied().collect();
        let mut assigned = BTreeSet::new();
        let mut out = Vec::new();
        for &s in &members {
            if assigned.contains(&s) {
                continue;
            }
            let comp = self.reach_within(s, |j| members.contains(&j));
            assigned.extend(comp.iter().copied());
            out.push(comp.into_iter().collect());
        }
        out
    }

    /// Induced subgraph on `subset`, with node names carried over.
    pub fn induced_subgraph(&self, subset: &[usize]) -> WeightedGraph {
        let members: BTreeSet<usize> = subset.iter().copied().collect();
        let names: Vec<&str> = members.iter().map(|&i| self.nodes[i].as_str()).collect();
        let edges: Vec<(&str, &str, f64)> = self
            .edges()
            .filter(|e| members.contains(&e.u) && members.contains(&e.v))
            .map(|e| (self.nodes[e.u].as_str(), self.nodes[e.v].as_str(), e.weight))
            .collect();
        WeightedGraph::with_nodes(names, &edges).expect("subgraph of a valid graph is valid")
    }

    /// The graph with the cut's edges removed; the node set is unchanged.
    pub fn residual(&self, cut: &Cut) -> Result<WeightedGraph> {
        let removed = cut.resolve(self)?;
        let edges: Vec<(&str, &str, f64)> = self
            .edges()
            .filter(|e| !removed.contains(&(e.u, e.v)))
            .map(|e| (self.nodes[e.u].as_str(), self.nodes[e.v].as_str(), e.weight))
            .collect();
        WeightedGraph::with_nodes(&self.nodes, &edges)
    }

    /// Connected components left after removing the cut's edges.
    pub fn apply_cut(&self, cut: &Cut) -> Result<Partition> {
        let residual = self.residual(cut)?;
        let all: Vec<usize> = (0..self.node_count()).collect();
        Ok(Partition {
            components: residual.components_within(&all),
            origin: Some(cut.clone()),
        })
    }

    /// Total weight of the cut's edges.
    pub fn cut_weight(&self, cut: &Cut) -> Result<f64> {
        let removed = cut.resolve(self)?;
        Ok(removed.iter().map(|&(u, v)| self.adj[u][&v]).sum())
    }

    /// Sum of weights from `s` to nodes in the same component of `p`.
    pub fn internal_cost(&self, p: &Partition, s: &str) -> Result<f64> {
        let i = self.node_index(s)?;
        Ok(self.split_cost(p, i).0)
    }

    /// Sum of weights from `s` to nodes outside its component of `p`.
    pub fn external_cost(&self, p: &Partition, s: &str) -> Result<f64> {
        let i = self.node_index(s)?;
        Ok(self.split_cost(p, i).1)
    }

    /// `(internal, external)` cost of node index `i` under `p`.
    pub(crate) fn split_cost(&self, p: &Partition, i: usize) -> (f64, f64) {
        let label = p.labels(self.node_count());
        self.split_cost_labels(&label, i)
    }

    pub(crate) fn split_cost_labels(&self, label: &[usize], i: usize) -> (f64, f64) {
        let mut internal = 0.0;
        let mut external = 0.0;
        for (&j, &w) in &self.adj[i] {
            if label[j] == label[i] {
                internal += w;
            } else {
                external += w;
            }
        }
        (internal, external)
    }
}

fn canonical_pair(nodes: &[String], a: usize, b: usize) -> (String, String) {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    (nodes[a].clone(), nodes[b].clone())
}

/// A set of edges to remove, named by endpoint identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cut {
    /// Each pair is stored with the lexicographically smaller name first.
    removed: BTreeSet<(String, String)>,
}

impl Cut {
    pub fn new<S: AsRef<str>>(pairs: &[(S, S)]) -> Self {
        let removed = pairs
            .iter()
            .map(|(u, v)| {
                let (u, v) = (u.as_ref().to_string(), v.as_ref().to_string());
                if u <= v {
                    (u, v)
                } else {
                    (v, u)
                }
            })
            .collect();
        Self { removed }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.removed.iter().map(|(u, v)| (u.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    /// Index pairs `(u, v)` with `u < v`; fails if any pair is not an edge.
    pub(crate) fn resolve(&self, g: &WeightedGraph) -> Result<BTreeSet<(usize, usize)>> {
        let mut out = BTreeSet::new();
        for (u, v) in &self.removed {
            let unknown = || Error::UnknownEdge(u.clone(), v.clone());
            let iu = g.node_index(u).map_err(|_| unknown())?;
            let iv = g.node_index(v).map_err(|_| unknown())?;
            if g.weight(iu, iv).is_none() {
                return Err(unknown());
            }
            out.insert((iu.min(iv), iu.max(iv)));
        }
        Ok(out)
    }

    /// The cut separating the parts of `p`: every edge whose endpoints lie in
    /// different parts.
    pub fn between(g: &WeightedGraph, p: &Partition) -> Cut {
        let label = p.labels(g.node_count());
        let removed = g
            .edges()
            .filter(|e| label[e.u] != label[e.v])
            .map(|e| (g.node_name(e.u).to_string(), g.node_name(e.v).to_string()))
            .collect();
        Cut { removed }
    }
}

/// Disjoint node sets covering a graph. Components hold canonical node
/// indices, each sorted, ordered by smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    components: Vec<Vec<usize>>,
    origin: Option<Cut>,
}

impl Partition {
    /// Builds a partition from named parts. Parts must be disjoint, non-empty,
    /// cover the graph, and each induce a connected subgraph.
    pub fn from_parts<S: AsRef<str>>(g: &WeightedGraph, parts: &[Vec<S>]) -> Result<Self> {
        let p = Self::from_parts_relaxed(g, parts)?;
        for c in &p.components {
            if !g.is_connected_subset(c) {
                return Err(Error::InvalidPartition(format!(
                    "part containing {} is not connected",
                    g.node_name(c[0])
                )));
            }
        }
        Ok(p)
    }

    /// Like [`Partition::from_parts`] but parts need not be connected.
    pub fn from_parts_relaxed<S: AsRef<str>>(g: &WeightedGraph, parts: &[Vec<S>]) -> Result<Self> {
        let mut seen = vec![false; g.node_count()];
        let mut components = Vec::with_capacity(parts.len());
        for part in parts {
            if part.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            let mut comp = Vec::with_capacity(part.len());
            for name in part {
                let i = g.node_index(name.as_ref())?;
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("node {} appears twice", name.as_ref())));
                }
                comp.push(i);
            }
            comp.sort_unstable();
            components.push(comp);
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "node {} is not covered",
                g.node_name(i)
            )));
        }
        Ok(Self::from_indices(components))
    }

    /// Canonicalises index sets; callers guarantee disjoint coverage.
    pub(crate) fn from_indices(mut components: Vec<Vec<usize>>) -> Self {
        for c in &mut components {
            c.sort_unstable();
        }
        components.sort_by_key(|c| c[0]);
        Self {
            components,
            origin: None,
        }
    }

    pub(crate) fn with_origin(mut self, cut: Cut) -> Self {
        self.origin = Some(cut);
        self
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn origin(&self) -> Option<&Cut> {
        self.origin.as_ref()
    }

    pub fn component_names<'g>(&self, g: &'g WeightedGraph) -> Vec<Vec<&'g str>> {
        self.components
            .iter()
            .map(|c| c.iter().map(|&i| g.node_name(i)).collect())
            .collect()
    }

    /// Component label for every node index.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut label = vec![usize::MAX; n];
        for (k, c) in self.components.iter().enumerate() {
            for &i in c {
                label[i] = k;
            }
        }
        label
    }

    /// Sum of edge weights inside each component.
    pub fn intra_weights(&self, g: &WeightedGraph) -> Vec<f64> {
        let label = self.labels(g.node_count());
        let mut out = vec![0.0; self.components.len()];
        for e in g.edges() {
            if label[e.u] == label[e.v] {
                out[label[e.u]] += e.weight;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_patch() -> WeightedGraph {
        WeightedGraph::from_edges(&[
            ("v1", "v2", 3.0),
            ("v2", "v3", 2.0),
            ("v3", "v4", 3.0),
            ("v4", "v5", 5.0),
            ("v5", "v1", 2.0),
            ("v5", "v2", 1.0),
        ])
        .unwrap()
    }

    fn four_cycle() -> WeightedGraph {
        WeightedGraph::from_edges(&[
            ("v1", "v2", 1.0),
            ("v2", "v3", 2.0),
            ("v3", "v4", 1.0),
            ("v4", "v1", 0.1),
        ])
        .unwrap()
    }

    #[test]
    fn build_smallest_graph() {
        let g = WeightedGraph::from_edges(&[("v1", "v2", 3.0)]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn build_five_patch() {
        let g = five_patch();
        assert_eq!((g.node_count(), g.edge_count()), (5, 6));
        assert_eq!(g.nodes(), ["v1", "v2", "v3", "v4", "v5"]);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            WeightedGraph::from_edges(&[("v1", "v1", 1.0)]),
            Err(Error::SelfLoop("v1".into()))
        );
        assert!(matches!(
            WeightedGraph::from_edges(&[("a", "b", 1.0), ("b", "a", 2.0)]),
            Err(Error::DuplicateEdge(..))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(&[("a", "b", 0.0)]),
            Err(Error::NonPositiveWeight(..))
        ));
        assert!(matches!(
            WeightedGraph::from_edges(&[("a", "b", -1.0)]),
            Err(Error::NonPositiveWeight(..))
        ));
    }

    #[test]
    fn node_order_is_canonical() {
        let g = WeightedGraph::from_edges(&[("z", "a", 1.0), ("m", "a", 1.0)]).unwrap();
        assert_eq!(g.nodes(), ["a", "m", "z"]);
    }

    #[test]
    fn laplacian_examples() {
        let k2 = WeightedGraph::from_edges(&[("v1", "v2", 3.0)]).unwrap();
        assert_eq!(k2.laplacian(), Matrix::from_rows(&[[3.0, -3.0], [-3.0, 3.0]]));

        let expected = Matrix::from_rows(&[
            [1.1, -1.0, 0.0, -0.1],
            [-1.0, 3.0, -2.0, 0.0],
            [0.0, -2.0, 3.0, -1.0],
            [-0.1, 0.0, -1.0, 1.1],
        ]);
        assert!(four_cycle().laplacian().sub(&expected).max_abs() < 1e-15);

        let single = WeightedGraph::with_nodes(["v1"], &[] as &[(&str, &str, f64)]).unwrap();
        assert_eq!(single.laplacian(), Matrix::zeros(1, 1));
    }

    #[test]
    fn connectivity_examples() {
        assert!(five_patch().is_connected());
        let two = WeightedGraph::with_nodes(["a", "b"], &[] as &[(&str, &str, f64)]).unwrap();
        assert!(!two.is_connected());
        let one = WeightedGraph::with_nodes(["a"], &[] as &[(&str, &str, f64)]).unwrap();
        assert!(one.is_connected());
    }

    #[test]
    fn apply_cut_examples() {
        let g = five_patch();
        let c1 = Cut::new(&[("v2", "v3"), ("v1", "v5"), ("v2", "v5")]);
        let p = g.apply_cut(&c1).unwrap();
        assert_eq!(p.component_names(&g), vec![vec!["v1", "v2"], vec!["v3", "v4", "v5"]]);

        let whole = g.apply_cut(&Cut::empty()).unwrap();
        assert_eq!(whole.len(), 1);

        let b = four_cycle();
        let c = Cut::new(&[("v1", "v2"), ("v3", "v4")]);
        let p = b.apply_cut(&c).unwrap();
        assert_eq!(p.component_names(&b), vec![vec!["v1", "v4"], vec!["v2", "v3"]]);

        assert!(matches!(
            g.apply_cut(&Cut::new(&[("v1", "v3")])),
            Err(Error::UnknownEdge(..))
        ));
    }

    #[test]
    fn costs_match_worked_values() {
        let g = five_patch();
        let p = g
            .apply_cut(&Cut::new(&[("v2", "v3"), ("v1", "v5"), ("v2", "v5")]))
            .unwrap();
        assert_eq!(g.internal_cost(&p, "v2").unwrap(), 3.0);
        assert_eq!(g.external_cost(&p, "v2").unwrap(), 3.0);

        let b = four_cycle();
        let p = b.apply_cut(&Cut::new(&[("v1", "v2"), ("v3", "v4")])).unwrap();
        assert!((b.internal_cost(&p, "v1").unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(b.external_cost(&p, "v2").unwrap(), 1.0);

        let whole = g.apply_cut(&Cut::empty()).unwrap();
        for n in g.nodes() {
            assert_eq!(g.external_cost(&whole, n).unwrap(), 0.0);
        }
        assert!(matches!(g.internal_cost(&p, "nope"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn isolated_node_has_zero_internal_cost() {
        let g = WeightedGraph::from_edges(&[("a", "b", 1.0)]).unwrap();
        let p = g.apply_cut(&Cut::new(&[("a", "b")])).unwrap();
        assert_eq!(g.internal_cost(&p, "a").unwrap(), 0.0);
    }

    #[test]
    fn cut_weight_examples() {
        let g = five_patch();
        let c1 = Cut::new(&[("v2", "v3"), ("v1", "v5"), ("v2", "v5")]);
        assert_eq!(g.cut_weight(&c1).unwrap(), 5.0);
        assert_eq!(g.cut_weight(&Cut::empty()).unwrap(), 0.0);
        let b = four_cycle();
        assert_eq!(b.cut_weight(&Cut::new(&[("v1", "v2"), ("v3", "v4")])).unwrap(), 2.0);
    }

    #[test]
    fn partition_validation() {
        let g = five_patch();
        assert!(Partition::from_parts(&g, &[vec!["v1", "v2"], vec!["v3", "v4", "v5"]]).is_ok());
        // {v1, v3} is not connected in G
        assert!(Partition::from_parts(&g, &[vec!["v1", "v3"], vec!["v2", "v4", "v5"]]).is_err());
        assert!(Partition::from_parts_relaxed(&g, &[vec!["v1", "v3"], vec!["v2", "v4", "v5"]]).is_ok());
        assert!(Partition::from_parts(&g, &[vec!["v1", "v2"], vec!["v3", "v4"]]).is_err());
        assert!(Partition::from_parts(&g, &[vec!["v1", "v2", "v3"], vec!["v3", "v4", "v5"]]).is_err());
    }

    #[test]
    fn between_recovers_cut() {
        let g = five_patch();
        let c1 = Cut::new(&[("v2", "v3"), ("v1", "v5"), ("v2", "v5")]);
        let p = g.apply_cut(&c1).unwrap();
        assert_eq!(Cut::between(&g, &p), c1);
    }
}
