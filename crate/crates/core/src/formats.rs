//! Plain-text file formats.
//!
//! Graph files hold one edge per line, `u v w`; a line with a single token
//! declares a node without edges. Cut files hold one `u v` pair per line.
//! Model files are `key = value` lines grouped into sections:
//!
//! ```text
//! species = 2
//! patches = p1 p2 p3
//! dynamics = rosenzweig_macarthur
//!
//! [dynamics]
//! gamma = 2
//! beta = 0.2
//! alpha = 0.3
//! l1 = 0.4
//! l2 = 0.2
//!
//! [species 1]
//! loss = 0
//! p1 p2 1
//! ```
//!
//! `dynamics = linear` takes one `row = ...` line per species instead and
//! means `f(x) = A x` at every patch. In all formats `#` starts a comment and
//! blank lines are ignored.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::dynamics::{rosenzweig_macarthur, RMParams};
use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};
use crate::linalg::Matrix;
use crate::metapop::{LinearLocal, MetapopModel};

/// Non-empty, comment-stripped lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

fn parse_number(line: usize, token: &str, what: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} '{token}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} '{token}' is not finite")));
    }
    Ok(v)
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    }
}

/// Edge lines shared by graph files and model species sections.
#[derive(Debug, Default, Clone, PartialEq)]
struct EdgeList {
    nodes: Vec<String>,
    edges: Vec<(String, String, f64)>,
    seen_pairs: BTreeSet<(String, String)>,
}

impl EdgeList {
    fn push_line(&mut self, line: usize, tokens: &[&str]) -> Result<()> {
        match tokens {
            [node] => {
                self.nodes.push(node.to_string());
                Ok(())
            }
            [u, v, w] => {
                let w = parse_number(line, w, "weight")?;
                if u == v {
                    return Err(at_line(line, Error::SelfLoop(u.to_string())));
                }
                if w <= 0.0 {
                    return Err(at_line(line, Error::NonPositiveWeight(u.to_string(), v.to_string(), w)));
                }
                let key = if u <= v {
                    (u.to_string(), v.to_string())
                } else {
                    (v.to_string(), u.to_string())
                };
                if !self.seen_pairs.insert(key) {
                    return Err(at_line(line, Error::DuplicateEdge(u.to_string(), v.to_string())));
                }
                self.edges.push((u.to_string(), v.to_string(), w));
                Ok(())
            }
            _ => Err(Error::parse(
                line,
                format!(
                    "expected 'u v weight' or a single node name, got {} fields",
                    tokens.len()
                ),
            )),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut list = EdgeList::default();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        list.push_line(line, &tokens)?;
    }
    let mut nodes: BTreeSet<&str> = list.nodes.iter().map(String::as_str).collect();
    for (u, v, _) in &list.edges {
        nodes.insert(u);
        nodes.insert(v);
    }
    WeightedGraph::with_nodes(nodes, &list.edges)
}

/// Canonical text: edges sorted by endpoint order, then any nodes without
/// edges on their own lines.
pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", g.node_name(e.u), g.node_name(e.v), e.weight);
    }
    for i in 0..g.node_count() {
        if g.degree(i) == 0.0 {
            let _ = writeln!(out, "{}", g.node_name(i));
        }
    }
    out
}

pub fn parse_cut(text: &str) -> Result<Cut> {
    let mut pairs = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, content) in content_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [u, v] = tokens[..] else {
            return Err(Error::parse(
                line,
                format!("expected 'u v', got {} fields", tokens.len()),
            ));
        };
        if u == v {
            return Err(Error::parse(line, format!("'{u} {v}' is not an edge")));
        }
        let key = if u <= v { (u, v) } else { (v, u) };
        if !seen.insert(key) {
            return Err(Error::parse(line, format!("pair {u} {v} listed twice")));
        }
        pairs.push((u, v));
    }
    Ok(Cut::new(&pairs))
}

/// Parses a cut and checks that every pair is an edge of `g`.
pub fn parse_cut_for(text: &str, g: &WeightedGraph) -> Result<Cut> {
    let cut = parse_cut(text)?;
    g.cut_weight(&cut)?;
    Ok(cut)
}

pub fn write_cut(cut: &Cut) -> String {
    cut.pairs().fold(String::new(), |mut out, (u, v)| {
        let _ = writeln!(out, "{u} {v}");
        out
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsSpec {
    RosenzweigMacArthur(RMParams),
    /// `f(x) = A x` per patch.
    Linear(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesSpec {
    pub loss: f64,
    pub edges: Vec<(String, String, f64)>,
}

/// In-memory form of a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub patches: Vec<String>,
    pub dynamics: DynamicsSpec,
    pub species: Vec<SpeciesSpec>,
}

impl ModelSpec {
    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn graphs(&self) -> Result<Vec<WeightedGraph>> {
        self.species
            .iter()
            .map(|s| WeightedGraph::with_nodes(&self.patches, &s.edges))
            .collect()
    }

    pub fn build(&self) -> Result<MetapopModel> {
        let graphs = self.graphs()?;
        match &self.dynamics {
            DynamicsSpec::RosenzweigMacArthur(params) => {
                let [prey, pred]: [WeightedGraph; 2] = graphs
                    .try_into()
                    .map_err(|_| Error::InvalidModel("rosenzweig_macarthur needs exactly 2 species".into()))?;
                rosenzweig_macarthur(*params, prey, pred)
            }
            DynamicsSpec::Linear(a) => {
                let losses = self.species.iter().map(|s| s.loss).collect();
                MetapopModel::new(Arc::new(LinearLocal::new(a.clone())?), graphs, losses)
            }
        }
    }

    /// Per-patch starting state for equilibrium searches.
    pub fn equilibrium_guess(&self) -> Vec<f64> {
        let per_patch = match &self.dynamics {
            DynamicsSpec::RosenzweigMacArthur(p) => crate::dynamics::rm_equilibrium(p)
                .map(|(a, b)| vec![a, b])
                .unwrap_or_else(|_| vec![1.0; 2]),
            DynamicsSpec::Linear(a) => vec![0.0; a.rows()],
        };
        let m = self.patches.len();
        per_patch.iter().flat_map(|&v| std::iter::repeat_n(v, m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Top,
    Dynamics,
    Species(usize),
}

#[derive(Default)]
struct RawModel {
    species: Option<(usize, usize)>,
    patches: Option<(usize, Vec<String>)>,
    dynamics: Option<(usize, String)>,
    params: Vec<(usize, String, String)>,
    sections: Vec<Option<(Option<f64>, EdgeList)>>,
    species_lines: Vec<usize>,
}

fn split_key_value(content: &str) -> Option<(&str, &str)> {
    content.split_once('=').map(|(k, v)| (k.trim(), v.trim()))
}

pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let mut raw = RawModel::default();
    let mut section = Section::Top;
    let mut seen_dynamics_section = false;
    for (line, content) in content_lines(text) {
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line, "unterminated section header"))?
                .trim();
            let words: Vec<&str> = header.split_whitespace().collect();
            section = match words[..] {
                ["dynamics"] => {
                    if std::mem::replace(&mut seen_dynamics_section, true) {
                        return Err(Error::parse(line, "duplicate [dynamics] section"));
                    }
                    Section::Dynamics
                }
                ["species", k] => {
                    let k: usize = k
                        .parse()
                        .ok()
                        .filter(|&k| k >= 1)
                        .ok_or_else(|| Error::parse(line, format!("bad species number '{k}'")))?;
                    if raw.sections.len() < k {
                        raw.sections.resize_with(k, || None);
                        raw.species_lines.resize(k, 0);
                    }
                    if raw.sections[k - 1].is_some() {
                        return Err(Error::parse(line, format!("duplicate [species {k}] section")));
                    }
                    raw.sections[k - 1] = Some((None, EdgeList::default()));
                    raw.species_lines[k - 1] = line;
                    Section::Species(k - 1)
                }
                _ => return Err(Error::parse(line, format!("unknown section [{header}]"))),
            };
            continue;
        }
        match section {
            Section::Top => {
                let (key, value) =
                    split_key_value(content).ok_or_else(|| Error::parse(line, "expected 'key = value'"))?;
                let dup = || Error::parse(line, format!("duplicate key '{key}'"));
                match key {
                    "species" => {
                        let n: usize = value
                            .parse()
                            .ok()
                            .filter(|&n| n >= 1)
                            .ok_or_else(|| Error::parse(line, format!("bad species count '{value}'")))?;
                        if raw.species.replace((line, n)).is_some() {
                            return Err(dup());
                        }
                    }
                    "patches" => {
                        let list: Vec<String> = value.split_whitespace().map(String::from).collect();
                        if raw.patches.replace((line, list)).is_some() {
                            return Err(dup());
                        }
                    }
                    "dynamics" => {
                        if raw.dynamics.replace((line, value.to_string())).is_some() {
                            return Err(dup());
                        }
                    }
                    other => return Err(Error::parse(line, format!("unknown key '{other}'"))),
                }
            }
            Section::Dynamics => {
                let (key, value) =
                    split_key_value(content).ok_or_else(|| Error::parse(line, "expected 'key = value'"))?;
                raw.params.push((line, key.to_string(), value.to_string()));
            }
            Section::Species(k) => {
                let (loss, edges) = raw.sections[k].as_mut().expect("section opened");
                if let Some((key, value)) = split_key_value(content) {
                    if key != "loss" {
                        return Err(Error::parse(line, format!("unknown key '{key}'")));
                    }
                    if loss.replace(parse_number(line, value, "loss")?).is_some() {
                        return Err(Error::parse(line, "duplicate key 'loss'"));
                    }
                } else {
                    let tokens: Vec<&str> = content.split_whitespace().collect();
                    if tokens.len() != 3 {
                        return Err(Error::parse(
                            line,
                            format!("expected 'u v weight', got {} fields", tokens.len()),
                        ));
                    }
                    edges.push_line(line, &tokens)?;
                }
            }
        }
    }
    finish_model(raw)
}

fn finish_model(raw: RawModel) -> Result<ModelSpec> {
    let (_, n) = raw.species.ok_or_else(|| Error::parse(0, "missing key 'species'"))?;
    let (patch_line, patches) = raw.patches.ok_or_else(|| Error::parse(0, "missing key 'patches'"))?;
    let (dyn_line, kind) = raw.dynamics.ok_or_else(|| Error::parse(0, "missing key 'dynamics'"))?;
    if patches.is_empty() {
        return Err(Error::parse(patch_line, "patch list is empty"));
    }
    let mut declared = BTreeSet::new();
    for p in &patches {
        if !declared.insert(p.as_str()) {
            return Err(Error::parse(patch_line, format!("patch {p} declared twice")));
        }
    }
    if raw.sections.len() > n {
        return Err(Error::parse(
            raw.species_lines[n],
            format!("species section {} exceeds species = {n}", raw.sections.len()),
        ));
    }

    let mut species = Vec::with_capacity(n);
    for k in 0..n {
        let (loss, list) = raw
            .sections
            .get(k)
            .cloned()
            .flatten()
            .unwrap_or((None, EdgeList::default()));
        let line = raw.species_lines.get(k).copied().unwrap_or(0);
        if let Some(node) = list.nodes.first() {
            return Err(Error::parse(line, format!("stray token '{node}' in species {}", k + 1)));
        }
        for (u, v, _) in &list.edges {
            for x in [u, v] {
                if !declared.contains(x.as_str()) {
                    return Err(Error::parse(
                        line,
                        format!("species {} uses undeclared patch {x}", k + 1),
                    ));
                }
            }
        }
        let loss = loss.unwrap_or(0.0);
        if loss < 0.0 {
            return Err(Error::parse(line, format!("loss must be >= 0, got {loss}")));
        }
        species.push(SpeciesSpec {
            loss,
            edges: list.edges,
        });
    }

    let dynamics = match kind.as_str() {
        "rosenzweig_macarthur" => {
            if n != 2 {
                return Err(Error::parse(dyn_line, "rosenzweig_macarthur needs species = 2"));
            }
            if let Some(k) = species.iter().position(|s| s.loss != 0.0) {
                return Err(Error::parse(
                    raw.species_lines[k],
                    "rosenzweig_macarthur takes its loss rates as l1 and l2 in [dynamics]",
                ));
            }
            let mut values = [None; 5];
            const KEYS: [&str; 5] = ["gamma", "beta", "alpha", "l1", "l2"];
            for (line, key, value) in &raw.params {
                let slot = KEYS
                    .iter()
                    .position(|k| k == key)
                    .ok_or_else(|| Error::parse(*line, format!("unknown key '{key}'")))?;
                if values[slot].replace(parse_number(*line, value, key)?).is_some() {
                    return Err(Error::parse(*line, format!("duplicate key '{key}'")));
                }
            }
            let get = |i: usize, default: Option<f64>| {
                values[i]
                    .or(default)
                    .ok_or_else(|| Error::parse(dyn_line, format!("missing key '{}'", KEYS[i])))
            };
            let params = RMParams::new(
                get(0, None)?,
                get(1, None)?,
                get(2, None)?,
                get(3, Some(0.0))?,
                get(4, Some(0.0))?,
            )
            .map_err(|e| Error::parse(dyn_line, e.to_string()))?;
            DynamicsSpec::RosenzweigMacArthur(params)
        }
        "linear" => {
            let mut rows = Vec::new();
            for (line, key, value) in &raw.params {
                if key != "row" {
                    return Err(Error::parse(*line, format!("unknown key '{key}'")));
                }
                let row = value
                    .split_whitespace()
                    .map(|t| parse_number(*line, t, "entry"))
                    .collect::<Result<Vec<f64>>>()?;
                if row.len() != n {
                    return Err(Error::parse(*line, format!("row needs {n} entries, got {}", row.len())));
                }
                rows.push(row);
            }
            if rows.len() != n {
                return Err(Error::parse(
                    dyn_line,
                    format!("linear dynamics needs {n} rows, got {}", rows.len()),
                ));
            }
            DynamicsSpec::Linear(Matrix::from_fn(n, n, |i, j| rows[i][j]))
        }
        other => return Err(Error::parse(dyn_line, format!("unknown dynamics '{other}'"))),
    };
    Ok(ModelSpec {
        patches,
        dynamics,
        species,
    })
}

pub fn write_model(spec: &ModelSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "species = {}", spec.species.len());
    let _ = writeln!(out, "patches = {}", spec.patches.join(" "));
    match &spec.dynamics {
        DynamicsSpec::RosenzweigMacArthur(p) => {
            let _ = writeln!(out, "dynamics = rosenzweig_macarthur\n\n[dynamics]");
            for (k, v) in [
                ("gamma", p.gamma),
                ("beta", p.beta),
                ("alpha", p.alpha),
                ("l1", p.l1),
                ("l2", p.l2),
            ] {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        DynamicsSpec::Linear(a) => {
            let _ = writeln!(out, "dynamics = linear\n\n[dynamics]");
            for i in 0..a.rows() {
                let row: Vec<String> = a.row(i).iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "row = {}", row.join(" "));
            }
        }
    }
    for (k, s) in spec.species.iter().enumerate() {
        let _ = writeln!(out, "\n[species {}]\nloss = {}", k + 1, s.loss);
        for (u, v, w) in &s.edges {
            let _ = writeln!(out, "{u} {v} {w}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_PATCH: &str = "\
species = 2
patches = 1 2 3
dynamics = rosenzweig_macarthur

[dynamics]
gamma = 2
beta = 0.2
alpha = 0.3
l1 = 0.4
l2 = 0.2

[species 1]   # prey
1 2 1
1 3 1
2 3 2

[species 2]   # predator
1 2 2
1 3 1
2 3 1
";

    #[test]
    fn graph_with_comments_and_blanks() {
        let g = parse_graph("# comment\n\nv1 v2 3   # heavy\n  v2   v3\t2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(write_graph(&g), "v1 v2 3\nv2 v3 2\n");
    }

    #[test]
    fn graph_isolated_node_line() {
        let g = parse_graph("a b 1\nz\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(write_graph(&g), "a b 1\nz\n");
    }

    #[test]
    fn graph_errors_carry_line_numbers() {
        assert_eq!(
            parse_graph("a b 1\na b x\n").unwrap_err(),
            Error::parse(2, "weight 'x' is not a number")
        );
        assert!(matches!(
            parse_graph("a b 1\nb a 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_graph("a a 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("a b 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("a b\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_graph("a b inf\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn cut_parsing() {
        let g = parse_graph("v1 v2 3\nv2 v3 2\n").unwrap();
        let c = parse_cut_for("v2 v1\n", &g).unwrap();
        assert_eq!(write_cut(&c), "v1 v2\n");
        assert!(matches!(parse_cut_for("v1 v3\n", &g), Err(Error::UnknownEdge(..))));
        assert!(matches!(parse_cut("v1 v2\nv2 v1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_cut("v1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn three_patch_model_file() {
        let spec = parse_model(THREE_PATCH).unwrap();
        assert_eq!(spec.patches, ["1", "2", "3"]);
        assert_eq!(
            spec.dynamics,
            DynamicsSpec::RosenzweigMacArthur(RMParams::new(2.0, 0.2, 0.3, 0.4, 0.2).unwrap())
        );
        let model = spec.build().unwrap();
        assert_eq!(model.state_len(), 6);
        for (g, e) in spec.equilibrium_guess().iter().zip([1.0, 1.0, 1.0, 0.2, 0.2, 0.2]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(parse_model(&write_model(&spec)).unwrap(), spec);
    }

    #[test]
    fn linear_model_file() {
        let text =
            "species = 1\npatches = a b\ndynamics = linear\n[dynamics]\nrow = -1\n[species 1]\nloss = 0.5\na b 1\n";
        let spec = parse_model(text).unwrap();
        assert_eq!(spec.dynamics, DynamicsSpec::Linear(Matrix::from_rows(&[[-1.0]])));
        assert_eq!(spec.species[0].loss, 0.5);
        assert_eq!(parse_model(&write_model(&spec)).unwrap(), spec);
    }

    #[test]
    fn model_rejections() {
        let bad_key = THREE_PATCH.replace("gamma = 2", "gama = 2");
        assert!(matches!(parse_model(&bad_key), Err(Error::Parse { line: 6, .. })));
        let top = format!("colour = red\n{THREE_PATCH}");
        assert!(matches!(parse_model(&top), Err(Error::Parse { line: 1, .. })));
        let undeclared = THREE_PATCH.replace("2 3 1\n", "2 4 1\n");
        assert!(matches!(parse_model(&undeclared), Err(Error::Parse { .. })));
        let loss = THREE_PATCH.replace("[species 1]   # prey\n", "[species 1]\nloss = 0.4\n");
        assert!(matches!(parse_model(&loss), Err(Error::Parse { .. })));
        let extra = format!("{THREE_PATCH}[species 3]\n");
        assert!(matches!(parse_model(&extra), Err(Error::Parse { .. })));
        let missing = THREE_PATCH.replace("beta = 0.2\n", "");
        assert!(matches!(parse_model(&missing), Err(Error::Parse { .. })));
        let bad_params = THREE_PATCH.replace("alpha = 0.3", "alpha = 0.9");
        assert!(matches!(parse_model(&bad_params), Err(Error::Parse { .. })));
        let section = format!("{THREE_PATCH}[weather]\n");
        assert!(matches!(parse_model(&section), Err(Error::Parse { .. })));
    }
}
