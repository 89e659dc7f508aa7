//! Text rendering shared by the commands. Every number goes through [`num`]
//! so reports are stable across runs and platforms.

use std::fmt::Write as _;

use metacut::certify::{SumCheck, SumOutcome};
use metacut::dynamics::{CutExperiment, DecayReport, Trajectory};
use metacut::graph::{Cut, Partition, WeightedGraph};
use metacut::metapop::{GershgorinReport, RowKind, SpectrumVerdict};
use metacut::search::SearchReport;
use metacut::{Complex64, StabilityCertificate};

/// Twelve significant digits, trailing zeros dropped; exponent form outside
/// `1e-4 <= |x| < 1e12`, as printf `%.12g` does.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else if z.im > 0.0 {
        format!("{} + {}i", num(z.re), num(z.im))
    } else {
        format!("{} - {}i", num(z.re), num(-z.im))
    }
}

pub fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

fn names(g: &WeightedGraph, nodes: &[usize]) -> String {
    nodes.iter().map(|&i| g.node_name(i)).collect::<Vec<_>>().join(" ")
}

fn cut_pairs(cut: &Cut) -> String {
    if cut.is_empty() {
        return "(none)".into();
    }
    cut.pairs()
        .map(|(u, v)| format!("{u}-{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn fiedler(out: &mut String, g: &WeightedGraph, value: f64, vector: &[f64], degenerate: bool) {
    let _ = writeln!(out, "nodes = {}", g.node_count());
    let _ = writeln!(out, "edges = {}", g.edge_count());
    let _ = writeln!(out, "lambda2 = {}", num(value));
    let _ = writeln!(out, "degenerate = {degenerate}");
    let _ = writeln!(out, "fiedler_vector:");
    for (i, v) in vector.iter().enumerate() {
        let _ = writeln!(out, "  {} {}", g.node_name(i), num(*v));
    }
}

pub fn certificate(
    out: &mut String,
    g: &WeightedGraph,
    cut: &Cut,
    cut_weight: f64,
    cert: &StabilityCertificate,
    sums: Option<&[SumCheck; 2]>,
) {
    let tau = cert.per_component.first().map(|c| c.evidence.tau).unwrap_or(0.0);
    let graph_l2 = cert.per_component.first().and_then(|c| c.evidence.graph_lambda2);
    let _ = writeln!(out, "tau = {}", num(tau));
    let _ = writeln!(out, "cut = {}", cut_pairs(cut));
    let _ = writeln!(out, "cut_weight = {}", num(cut_weight));
    let _ = writeln!(out, "graph_lambda2 = {}", graph_l2.map_or("n/a".into(), num));
    let _ = writeln!(out, "components = {}", cert.per_component.len());
    for (k, c) in cert.per_component.iter().enumerate() {
        let _ = writeln!(out, "component {}: {}", k + 1, names(g, &c.component));
        let _ = writeln!(
            out,
            "  lambda2 = {}",
            c.exact_lambda2.map_or("n/a (single node)".into(), num)
        );
        let status = match c.exact_lambda2 {
            None => "undetermined",
            Some(l) if l >= tau - metacut::certify::CERTIFY_TOL => "stable",
            Some(_) => "unstable",
        };
        let _ = writeln!(out, "  status = {status}");
        let internal = c.evidence.internal_two_smallest.map_or("n/a".into(), num);
        let _ = writeln!(
            out,
            "  internal_cost_test = {} (two smallest internal costs = {internal})",
            c.necessary.as_str()
        );
        let bound = graph_l2.map_or("n/a".into(), |l| num(l - tau));
        let _ = writeln!(
            out,
            "  external_cost_test = {} (max external cost = {}, bound = {bound})",
            c.sufficient.as_str(),
            num(c.evidence.max_external)
        );
    }
    if let Some(sums) = sums {
        for s in sums {
            let outcome = match s.outcome {
                SumOutcome::Holds => "holds",
                SumOutcome::Fails => "fails",
                SumOutcome::Indeterminate => "indeterminate",
            };
            let _ = writeln!(
                out,
                "fiedler_sum side {}: case {} side_sum = {} lhs = {} rhs = {} -> {outcome}",
                s.side + 1,
                s.case.number(),
                num(s.side_sum),
                num(s.lhs),
                num(s.rhs)
            );
        }
    }
    let _ = writeln!(out, "overall = {}", cert.overall.as_str());
}

pub fn search(out: &mut String, g: &WeightedGraph, r: &SearchReport) {
    let _ = writeln!(out, "mode = {}", r.mode.as_str());
    let _ = writeln!(out, "tau = {}", num(r.tau));
    let _ = writeln!(out, "max_components = {}", r.max_components);
    let _ = writeln!(out, "candidates_examined = {}", r.candidates_examined);
    let _ = writeln!(out, "certified = {}", r.certified.len());
    for (k, c) in r.certified.iter().enumerate() {
        let _ = writeln!(
            out,
            "rank {}: cut_weight = {} min_lambda2 = {}",
            k + 1,
            num(c.cut_weight),
            num(c.min_lambda2)
        );
        for comp in &c.certificate.per_component {
            let l2 = comp.exact_lambda2.map_or("n/a".into(), num);
            let _ = writeln!(out, "  part: {} (lambda2 = {l2})", names(g, &comp.component));
        }
        let _ = writeln!(out, "  cut: {}", cut_pairs(&c.cut));
    }
}

pub fn spectrum(out: &mut String, prefix: &str, v: &SpectrumVerdict) {
    let _ = writeln!(out, "{prefix}eigenvalues:");
    for z in &v.eigenvalues {
        let _ = writeln!(out, "{prefix}  {}", complex(*z));
    }
    let _ = writeln!(out, "{prefix}max_real = {}", num(v.max_real));
    let _ = writeln!(
        out,
        "{prefix}spectrum = {}",
        if v.stable { "stable" } else { "unstable" }
    );
}

pub fn gershgorin(out: &mut String, r: &GershgorinReport, patches: usize) {
    let _ = writeln!(out, "gershgorin_lambda2 = {}", r.lambda2.map_or("n/a".into(), num));
    for row in &r.rows {
        let kind = match row.kind {
            RowKind::Zero => "zero",
            RowKind::Positive => "positive",
        };
        let _ = writeln!(
            out,
            "  row {} species {} mode {} {kind}: margin = {} radius = {} {}",
            row.row + 1,
            row.species + 1,
            row.row % patches + 1,
            num(row.margin),
            num(row.radius),
            if row.pass { "pass" } else { "fail" }
        );
    }
    let _ = writeln!(out, "gershgorin_certified = {}", r.certified);
}

pub fn decay(out: &mut String, prefix: &str, d: &DecayReport, delta: f64) {
    let _ = writeln!(out, "{prefix}delta = {}", num(delta));
    let _ = writeln!(out, "{prefix}final_time = {}", num(d.trajectory.last_time()));
    let _ = writeln!(out, "{prefix}ratio = {}", num(d.ratio));
    let _ = writeln!(out, "{prefix}monotone_tail = {}", d.monotone_tail);
    let _ = writeln!(out, "{prefix}truncated = {}", d.trajectory.truncated);
    let status = if d.trajectory.truncated {
        "blew up"
    } else if d.ratio < 1.0 {
        "decaying"
    } else {
        "growing"
    };
    let _ = writeln!(out, "{prefix}summary = {status}");
}

pub fn experiment(out: &mut String, e: &CutExperiment, delta: f64) {
    let _ = writeln!(
        out,
        "pre_cut_spectrum = {}",
        if e.pre.stable { "stable" } else { "unstable" }
    );
    let _ = writeln!(out, "pre_cut_max_real = {}", num(e.pre.max_real));
    let _ = writeln!(out, "post_cut_components = {}", e.components.len());
    for (k, c) in e.components.iter().enumerate() {
        let _ = writeln!(out, "component {}: {}", k + 1, c.patches.join(" "));
        let _ = writeln!(out, "  equilibrium = {}", nums(&c.equilibrium));
        spectrum(out, "  ", &c.retained);
        if let Some((eq, v)) = &c.loss_free {
            let _ = writeln!(out, "  no dispersal partners; loss-free dynamics:");
            let _ = writeln!(out, "    equilibrium = {}", nums(eq));
            spectrum(out, "    ", v);
        }
        let _ = writeln!(out, "  verdict = {}", if c.stable { "stable" } else { "unstable" });
        decay(out, "  ", &c.decay, delta);
    }
    let _ = writeln!(
        out,
        "summary = post-cut components {}",
        if e.post_stable { "stable" } else { "unstable" }
    );
}

pub fn table(out: &mut String, header: &str, columns: &[String], t: &Trajectory) {
    let _ = writeln!(out, "# {header}");
    let _ = writeln!(out, "t {}", columns.join(" "));
    for (time, state) in t.times.iter().zip(&t.states) {
        let _ = writeln!(out, "{} {}", num(*time), nums(state));
    }
}

/// Trajectory column names: `species:patch`, species numbered from 1.
pub fn state_columns(species: usize, patches: &[String]) -> Vec<String> {
    (0..species)
        .flat_map(|i| patches.iter().map(move |p| format!("x{}:{p}", i + 1)))
        .collect()
}

pub fn partition_line(g: &WeightedGraph, p: &Partition) -> String {
    p.components()
        .iter()
        .map(|c| format!("{{{}}}", names(g, c)))
        .collect::<Vec<_>>()
        .join(" | ")
}
