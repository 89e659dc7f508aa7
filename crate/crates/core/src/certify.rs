//! Stability certificates for graph partitions.
//!
//! A connected component is *stable* when its Fiedler value is at least a
//! threshold `tau`. The exact per-component eigenvalue check is authoritative;
//! the cost-based tests are one-directional and are reported as supporting
//! evidence:
//!
//! * internal-cost test: if a component (two or more nodes) is stable then
//!   the sum of its two smallest internal costs is at least `tau`. A failure
//!   refutes stability, a pass proves nothing.
//! * external-cost test: if the largest external cost of a component is at
//!   most `lambda2(G) - tau`, the component is stable. A failure is
//!   inconclusive.
//! * zero-valuation test: the same external-cost bound applied to the
//!   components left after deleting the nodes where the Fiedler vector
//!   vanishes.
//! * Fiedler-sum test: for a bipartition, a sign-dependent comparison of
//!   external-cost weighted Fiedler sums that is equivalent to
//!   `lambda2(G) >= tau` whenever the side sum is non-zero.

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::linalg::norm_inf;
use crate::spectral::{algebraic_connectivity, fiedler, FiedlerPair};

/// Slack allowed when comparing a computed Fiedler value against `tau`.
pub const CERTIFY_TOL: f64 = 1e-9;

/// Default relative tolerance for declaring a Fiedler-vector entry zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Minimum graph size at which the cost-based partition tests apply.
pub const COST_TEST_MIN_NODES: usize = 4;
/// Minimum graph size for the zero-valuation test.
pub const ZERO_SET_MIN_NODES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityThreshold(f64);

impl StabilityThreshold {
    pub fn new(tau: f64) -> Result<Self> {
        if tau >= 0.0 && tau.is_finite() {
            Ok(Self(tau))
        } else {
            Err(Error::BadParams(format!("threshold must be >= 0, got {tau}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn admits(self, lambda2: f64) -> bool {
        lambda2 >= self.0 - CERTIFY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail,
    NotApplicable,
}

impl Check {
    fn from_bool(b: bool) -> Self {
        if b {
            Check::Pass
        } else {
            Check::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Check::Pass => "pass",
            Check::Fail => "fail",
            Check::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedStable,
    CertifiedUnstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedStable => "certified-stable",
            Verdict::CertifiedUnstable => "certified-unstable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    /// Sum of the two smallest internal costs (`None` for singletons).
    pub internal_two_smallest: Option<f64>,
    pub max_external: f64,
    /// Fiedler value of the whole graph, when it is connected.
    pub graph_lambda2: Option<f64>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentVerdict {
    pub component: Vec<usize>,
    /// `None` for singletons.
    pub exact_lambda2: Option<f64>,
    pub necessary: Check,
    pub sufficient: Check,
    /// Singleton components have no Fiedler value.
    pub degenerate: bool,
    pub evidence: Evidence,
}

#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub partition: Partition,
    pub per_component: Vec<ComponentVerdict>,
    pub overall: Verdict,
}

/// Internal-cost test per component. `NotApplicable` for components with
/// fewer than two nodes or graphs below the minimum size.
pub fn necessary_internal_cost(g: &WeightedGraph, p: &Partition, tau: StabilityThreshold) -> Vec<Check> {
    let labels = p.labels(g.node_count());
    p.components()
        .iter()
        .map(|c| {
            if c.len() < 2 || g.node_count() < COST_TEST_MIN_NODES {
                return Check::NotApplicable;
            }
            let sum = two_smallest_internal(g, &labels, c).expect("component has two nodes");
            Check::from_bool(sum >= tau.value() - CERTIFY_TOL)
        })
        .collect()
}

/// External-cost test per component. Needs a connected graph.
pub fn sufficient_external_cost(g: &WeightedGraph, p: &Partition, tau: StabilityThreshold) -> Result<Vec<Check>> {
    let lambda2 = fiedler(g)?.value;
    Ok(sufficient_with(g, p, tau, lambda2))
}

fn sufficient_with(g: &WeightedGraph, p: &Partition, tau: StabilityThreshold, lambda2: f64) -> Vec<Check> {
    let labels = p.labels(g.node_count());
    p.components()
        .iter()
        .map(|c| {
            if c.len() < 2 || g.node_count() < COST_TEST_MIN_NODES {
                return Check::NotApplicable;
            }
            Check::from_bool(max_external(g, &labels, c) <= lambda2 - tau.value() + CERTIFY_TOL)
        })
        .collect()
}

fn two_smallest_internal(g: &WeightedGraph, labels: &[usize], comp: &[usize]) -> Option<f64> {
    let mut costs: Vec<f64> = comp.iter().map(|&i| g.split_cost_labels(labels, i).0).collect();
    if costs.len() < 2 {
        return None;
    }
    costs.sort_by(f64::total_cmp);
    Some(costs[0] + costs[1])
}

fn max_external(g: &WeightedGraph, labels: &[usize], comp: &[usize]) -> f64 {
    comp.iter()
        .map(|&i| g.split_cost_labels(labels, i).1)
        .fold(0.0, f64::max)
}

/// Exact per-component check plus both cost tests.
///
/// Overall verdict: `CertifiedUnstable` if some component's Fiedler value is
/// below `tau`; otherwise `Inconclusive` if a singleton component is present;
/// otherwise `CertifiedStable`.
pub fn certify_partition(g: &WeightedGraph, p: &Partition, tau: StabilityThreshold) -> Result<StabilityCertificate> {
    let graph_lambda2 = if g.node_count() >= 2 && g.is_connected() {
        Some(fiedler(g)?.value)
    } else {
        None
    };
    let labels = p.labels(g.node_count());
    let necessary = necessary_internal_cost(g, p, tau);
    let sufficient = match graph_lambda2 {
        Some(l2) => sufficient_with(g, p, tau, l2),
        None => vec![Check::NotApplicable; p.len()],
    };

    let mut per_component = Vec::with_capacity(p.len());
    for (k, comp) in p.components().iter().enumerate() {
        let sub = g.induced_subgraph(comp);
        if comp.len() >= 2 && !sub.is_connected() {
            return Err(Error::InvalidPartition(format!(
                "part containing {} is not connected",
                g.node_name(comp[0])
            )));
        }
        let exact_lambda2 = algebraic_connectivity(&sub)?;
        per_component.push(ComponentVerdict {
            component: comp.clone(),
            exact_lambda2,
            necessary: necessary[k],
            sufficient: sufficient[k],
            degenerate: comp.len() < 2,
            evidence: Evidence {
                internal_two_smallest: two_smallest_internal(g, &labels, comp),
                max_external: max_external(g, &labels, comp),
                graph_lambda2,
                tau: tau.value(),
            },
        });
    }

    let overall = if per_component
        .iter()
        .any(|c| c.exact_lambda2.is_some_and(|l| !tau.admits(l)))
    {
        Verdict::CertifiedUnstable
    } else if per_component.iter().any(|c| c.degenerate) {
        Verdict::Inconclusive
    } else {
        Verdict::CertifiedStable
    };

    Ok(StabilityCertificate {
        partition: p.clone(),
        per_component,
        overall,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSetComponent {
    pub nodes: Vec<usize>,
    /// Largest cost of edges leaving the component, including edges into the
    /// deleted zero set.
    pub max_external: f64,
    pub sufficient: Check,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroSetOutcome {
    /// The Fiedler vector has no (numerically) zero entry.
    NoZeroSet,
    Found {
        zero_set: Vec<usize>,
        lambda2: f64,
        components: Vec<ZeroSetComponent>,
    },
}

/// Deletes the nodes where the Fiedler vector vanishes (`|Y(v)| <= zero_tol *
/// max|Y|`) and applies the external-cost bound to each remaining component.
pub fn zero_valuation_components(g: &WeightedGraph, tau: StabilityThreshold, zero_tol: f64) -> Result<ZeroSetOutcome> {
    if g.node_count() < ZERO_SET_MIN_NODES {
        return Err(Error::TooSmall {
            need: ZERO_SET_MIN_NODES,
            got: g.node_count(),
        });
    }
    let FiedlerPair { value, vector, .. } = fiedler(g)?;
    let cutoff = zero_tol * norm_inf(&vector);
    let zero_set: Vec<usize> = (0..g.node_count()).filter(|&i| vector[i].abs() <= cutoff).collect();
    if zero_set.is_empty() {
        return Ok(ZeroSetOutcome::NoZeroSet);
    }
    let rest: Vec<usize> = (0..g.node_count()).filter(|i| !zero_set.contains(i)).collect();
    let comps = g.components_within(&rest);
    let mut label = vec![usize::MAX; g.node_count()];
    for (k, c) in comps.iter().enumerate() {
        for &i in c {
            label[i] = k;
        }
    }
    let components = comps
        .into_iter()
        .map(|nodes| {
            let max_external = nodes
                .iter()
                .map(|&i| g.split_cost_labels(&label, i).1)
                .fold(0.0, f64::max);
            let degenerate = nodes.len() < 2;
            let sufficient = if degenerate {
                Check::NotApplicable
            } else {
                Check::from_bool(max_external <= value - tau.value() + CERTIFY_TOL)
            };
            ZeroSetComponent {
                nodes,
                max_external,
                sufficient,
                degenerate,
            }
        })
        .collect();
    Ok(ZeroSetOutcome::Found {
        zero_set,
        lambda2: value,
        components,
    })
}

/// Two node sets covering a graph. Unlike [`Partition`], the sides need not
/// be connected.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Bipartition {
    pub fn from_partition(p: &Partition) -> Result<Self> {
        match p.components() {
            [a, b] => Ok(Self {
                first: a.clone(),
                second: b.clone(),
            }),
            other => Err(Error::NotBipartition(other.len())),
        }
    }

    pub fn from_names<S: AsRef<str>>(g: &WeightedGraph, first: &[S], second: &[S]) -> Result<Self> {
        let p = Partition::from_parts_relaxed(
            g,
            &[
                first.iter().map(|s| s.as_ref()).collect(),
                second.iter().map(|s| s.as_ref()).collect(),
            ],
        )?;
        Self::from_partition(&p)
    }

    fn labels(&self, n: usize) -> Vec<usize> {
        let mut label = vec![0; n];
        for &i in &self.second {
            label[i] = 1;
        }
        label
    }

    fn side(&self, k: usize) -> &[usize] {
        if k == 0 {
            &self.first
        } else {
            &self.second
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumCase {
    /// Side sum of the Fiedler vector is positive.
    Positive,
    /// Side sum is negative.
    Negative,
    /// Side sum is zero within tolerance.
    Zero,
}

impl SumCase {
    pub fn number(self) -> u8 {
        match self {
            SumCase::Positive => 1,
            SumCase::Negative => 2,
            SumCase::Zero => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumOutcome {
    Holds,
    Fails,
    /// The zero-sum case holds identically whatever `tau` is, so it cannot
    /// decide stability.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumCheck {
    /// 0 for the first side, 1 for the second.
    pub side: usize,
    pub case: SumCase,
    pub side_sum: f64,
    /// `sum_{s in side} (E(s) - tau) Y(s)`, or `sum E(s) Y(s)` in the zero case.
    pub lhs: f64,
    /// `sum_{s not in side} E(s) Y(s)`.
    pub rhs: f64,
    pub outcome: SumOutcome,
}

fn external_costs(g: &WeightedGraph, b: &Bipartition) -> Vec<f64> {
    let label = b.labels(g.node_count());
    (0..g.node_count()).map(|i| g.split_cost_labels(&label, i).1).collect()
}

fn check_bipartition(g: &WeightedGraph, b: &Bipartition) -> Result<()> {
    if b.first.is_empty() || b.second.is_empty() {
        return Err(Error::NotBipartition(1));
    }
    if b.first.len() + b.second.len() != g.node_count() {
        return Err(Error::InvalidPartition("bipartition does not cover the graph".into()));
    }
    Ok(())
}

/// Fiedler-sum test on both sides of a bipartition of a connected graph.
pub fn fiedler_sum_check(g: &WeightedGraph, b: &Bipartition, tau: StabilityThreshold) -> Result<[SumCheck; 2]> {
    check_bipartition(g, b)?;
    let FiedlerPair { vector: y, .. } = fiedler(g)?;
    let ext = external_costs(g, b);
    let zeta = 1e-9 * norm_inf(&y) * (1.0 + ext.iter().map(|e| e.abs()).sum::<f64>());
    let t = tau.value();

    let check_side = |k: usize| {
        let side = b.side(k);
        let other = b.side(1 - k);
        let side_sum: f64 = side.iter().map(|&s| y[s]).sum();
        let rhs: f64 = other.iter().map(|&s| ext[s] * y[s]).sum();
        let weighted: f64 = side.iter().map(|&s| ext[s] * y[s]).sum();
        let (case, lhs, outcome) = if side_sum > zeta {
            let lhs = weighted - t * side_sum;
            (SumCase::Positive, lhs, lhs >= rhs - zeta)
        } else if side_sum < -zeta {
            let lhs = weighted - t * side_sum;
            (SumCase::Negative, lhs, lhs <= rhs + zeta)
        } else {
            (SumCase::Zero, weighted, true)
        };
        let outcome = match (case, outcome) {
            (SumCase::Zero, _) => SumOutcome::Indeterminate,
            (_, true) => SumOutcome::Holds,
            (_, false) => SumOutcome::Fails,
        };
        SumCheck {
            side: k,
            case,
            side_sum,
            lhs,
            rhs,
            outcome,
        }
    };
    Ok([check_side(0), check_side(1)])
}

/// `|lambda2 * sum_{G1} Y - (sum_{G1} E Y - sum_{G2} E Y)|`, which vanishes
/// for every bipartition of a connected graph.
pub fn fiedler_identity_residual(g: &WeightedGraph, b: &Bipartition) -> Result<f64> {
    check_bipartition(g, b)?;
    let FiedlerPair { value, vector: y, .. } = fiedler(g)?;
    let ext = external_costs(g, b);
    let lhs = value * b.first.iter().map(|&s| y[s]).sum::<f64>();
    let rhs =
        b.first.iter().map(|&s| ext[s] * y[s]).sum::<f64>() - b.second.iter().map(|&s| ext[s] * y[s]).sum::<f64>();
    Ok((lhs - rhs).abs())
}
