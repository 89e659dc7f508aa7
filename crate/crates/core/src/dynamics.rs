//! Time integration of metapopulation models and the built-in
//! Rosenzweig-MacArthur predator-prey dynamics.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Cut, WeightedGraph};
use crate::linalg::{norm2, Matrix};
use crate::metapop::{find_equilibrium, linearize, spectrum_verdict, LocalDynamics, MetapopModel, SpectrumVerdict};

/// States with a component beyond this magnitude count as blown up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Largest equilibrium residual accepted by [`perturbation_decay`].
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Fraction of the samples, counted from the end, checked for monotone decay.
const TAIL_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMParams {
    /// Prey carrying capacity.
    pub gamma: f64,
    /// Conversion rate.
    pub beta: f64,
    /// Predator mortality.
    pub alpha: f64,
    /// Prey dispersal loss.
    pub l1: f64,
    /// Predator dispersal loss.
    pub l2: f64,
}

impl RMParams {
    pub fn new(gamma: f64, beta: f64, alpha: f64, l1: f64, l2: f64) -> Result<Self> {
        let p = Self {
            gamma,
            beta,
            alpha,
            l1,
            l2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma, self.beta, self.alpha, self.l1, self.l2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParams("parameters must be finite".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::BadParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.beta <= 0.0 {
            return Err(Error::BadParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::BadParams(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.l1 < 0.0 || self.l2 < 0.0 {
            return Err(Error::BadParams("loss rates must be >= 0".into()));
        }
        if self.alpha + self.l2 >= 1.0 {
            return Err(Error::BadParams(format!(
                "alpha + l2 must be < 1, got {}",
                self.alpha + self.l2
            )));
        }
        Ok(())
    }

    /// Same parameters with both loss rates set to zero.
    pub fn loss_free(&self) -> Self {
        Self {
            l1: 0.0,
            l2: 0.0,
            ..*self
        }
    }
}

/// Per-patch predator-prey field with dispersal losses built in:
///
/// ```text
/// prey' = x (1 - x / gamma) - x y / (1 + x) - l1 x
/// pred' = beta (x / (1 + x) - alpha - l2) y
/// ```
#[derive(Debug, Clone)]
pub struct RmLocal {
    params: RMParams,
}

impl RmLocal {
    pub fn new(params: RMParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &RMParams {
        &self.params
    }
}

impl LocalDynamics for RmLocal {
    fn species(&self) -> usize {
        2
    }

    fn eval(&self, _patch: usize, x: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let (prey, pred) = (x[0], x[1]);
        let response = prey / (1.0 + prey);
        out[0] = prey * (1.0 - prey / p.gamma) - response * pred - p.l1 * prey;
        out[1] = p.beta * (response - p.alpha - p.l2) * pred;
    }

    fn jacobian(&self, _patch: usize, x: &[f64], out: &mut Matrix) -> bool {
        let p = &self.params;
        let (prey, pred) = (x[0], x[1]);
        let s = 1.0 + prey;
        out[(0, 0)] = 1.0 - 2.0 * prey / p.gamma - pred / (s * s) - p.l1;
        out[(0, 1)] = -prey / s;
        out[(1, 0)] = p.beta * pred / (s * s);
        out[(1, 1)] = p.beta * (prey / s - p.alpha - p.l2);
        true
    }

    fn without_dispersal_loss(&self) -> Option<Arc<dyn LocalDynamics>> {
        Some(Arc::new(RmLocal {
            params: self.params.loss_free(),
        }))
    }

    fn equilibrium_hint(&self) -> Option<Vec<f64>> {
        rm_equilibrium(&self.params).ok().map(|(a, b)| vec![a, b])
    }

    fn name(&self) -> &str {
        "rosenzweig_macarthur"
    }
}

/// Two-species model (prey = species 0, predator = species 1). The loss
/// terms live inside the local field, so the model's own loss rates are zero.
pub fn rosenzweig_macarthur(
    params: RMParams,
    prey_graph: WeightedGraph,
    pred_graph: WeightedGraph,
) -> Result<MetapopModel> {
    let local = Arc::new(RmLocal::new(params)?);
    MetapopModel::new(local, vec![prey_graph, pred_graph], vec![0.0, 0.0])
}

/// Co-existence equilibrium of a single patch, which is also the spatially
/// homogeneous equilibrium of any dispersal network.
pub fn rm_equilibrium(params: &RMParams) -> Result<(f64, f64)> {
    params.validate()?;
    let a = params.alpha + params.l2;
    let prey = a / (1.0 - a);
    let pred = (1.0 + prey) * (1.0 - params.l1 - prey / params.gamma);
    Ok((prey, pred))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `states[k]` is the state at `times[k]`.
    pub states: Vec<Vec<f64>>,
    /// Set when integration stopped early because the state blew up.
    pub truncated: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

fn check_step(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BadParams(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::BadParams(format!("t_end must be > 0, got {t_end}")));
    }
    Ok(())
}

fn blown_up(x: &[f64]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_LIMIT)
}

fn rk4_step<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let shifted = |k: &[f64], c: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = f(x);
    let k2 = f(&shifted(&k1, 0.5 * h));
    let k3 = f(&shifted(&k2, 0.5 * h));
    let k4 = f(&shifted(&k3, h));
    (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Classical fixed-step RK4 for `x' = f(x)` on `[0, t_end]`. The last step is
/// shortened to land on `t_end`. Every `record_every`-th step is stored, as is
/// the final state.
pub fn integrate_field<F>(f: F, x0: &[f64], t_end: f64, dt: f64, record_every: usize) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    check_step(t_end, dt)?;
    let every = record_every.max(1);
    let full = (t_end / dt).floor() as usize;
    let rest = t_end - full as f64 * dt;
    let steps = if rest > 1e-9 * dt { full + 1 } else { full };

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.to_vec()],
        truncated: blown_up(x0),
    };
    if traj.truncated {
        return Ok(traj);
    }
    let mut x = x0.to_vec();
    for k in 1..=steps {
        let t = if k == steps { t_end } else { k as f64 * dt };
        let h = t - (k - 1) as f64 * dt;
        x = rk4_step(&f, &x, h);
        if blown_up(&x) {
            traj.truncated = true;
            traj.times.push(t);
            traj.states.push(x);
            break;
        }
        if k % every == 0 || k == steps {
            traj.times.push(t);
            traj.states.push(x.clone());
        }
    }
    Ok(traj)
}

/// Integrates `x' = f(x) - L x - E x` recording every step.
pub fn integrate(model: &MetapopModel, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_every(model, x0, t_end, dt, 1)
}

pub fn integrate_every(
    model: &MetapopModel,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if x0.len() != model.state_len() {
        return Err(Error::DimensionMismatch {
            expected: model.state_len(),
            got: x0.len(),
        });
    }
    integrate_field(|x| model.rhs(x), x0, t_end, dt, record_every)
}

/// Unit vector with alternating signs, `(1, -1, 1, ...) / sqrt(N)`.
pub fn alternating_direction(len: usize) -> Vec<f64> {
    let s = 1.0 / (len.max(1) as f64).sqrt();
    (0..len).map(|i| if i % 2 == 0 { s } else { -s }).collect()
}

/// Default perturbation size: one percent of the largest equilibrium entry.
pub fn default_delta(equilibrium: &[f64]) -> f64 {
    1e-2 * crate::linalg::norm_inf(equilibrium)
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    /// `|x(t_end) - x_eq| / |x(0) - x_eq|` in the 2-norm; zero when the
    /// perturbation is zero. Uses the last finite state when truncated.
    pub ratio: f64,
    /// Deviation norm never increases over the last fifth of the samples.
    pub monotone_tail: bool,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Deviation norm at each recorded time.
    pub deviation: Vec<f64>,
    pub trajectory: Trajectory,
}

impl DecayReport {
    pub fn decaying(&self) -> bool {
        !self.trajectory.truncated && self.ratio < 1.0
    }
}

/// Integrates from `x_eq + delta * u` (`u` from [`alternating_direction`])
/// and measures how the deviation from `x_eq` evolves.
pub fn perturbation_decay(
    model: &MetapopModel,
    equilibrium: &[f64],
    delta: f64,
    t_end: f64,
    dt: f64,
) -> Result<DecayReport> {
    perturbation_decay_every(model, equilibrium, delta, t_end, dt, 1)
}

pub fn perturbation_decay_every(
    model: &MetapopModel,
    equilibrium: &[f64],
    delta: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<DecayReport> {
    let u = alternating_direction(equilibrium.len());
    perturbation_decay_along(model, equilibrium, &u, delta, t_end, dt, record_every)
}

/// As [`perturbation_decay`] with a caller-supplied direction (normalised
/// here).
pub fn perturbation_decay_along(
    model: &MetapopModel,
    equilibrium: &[f64],
    direction: &[f64],
    delta: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<DecayReport> {
    if equilibrium.len() != model.state_len() || direction.len() != equilibrium.len() {
        return Err(Error::DimensionMismatch {
            expected: model.state_len(),
            got: if equilibrium.len() != model.state_len() {
                equilibrium.len()
            } else {
                direction.len()
            },
        });
    }
    let residual = model.residual(equilibrium);
    if residual.is_nan() || residual > EQUILIBRIUM_TOL {
        return Err(Error::NotEquilibrium(residual));
    }
    let un = norm2(direction);
    if un == 0.0 {
        return Err(Error::BadParams("perturbation direction is zero".into()));
    }
    let x0: Vec<f64> = equilibrium
        .iter()
        .zip(direction)
        .map(|(e, d)| e + delta * d / un)
        .collect();
    let trajectory = integrate_every(model, &x0, t_end, dt, record_every)?;
    let deviation: Vec<f64> = trajectory
        .states
        .iter()
        .map(|x| {
            let d: Vec<f64> = x.iter().zip(equilibrium).map(|(a, b)| a - b).collect();
            norm2(&d)
        })
        .collect();
    let initial_norm = deviation[0];
    let final_norm = deviation
        .iter()
        .rev()
        .copied()
        .find(|v| v.is_finite())
        .unwrap_or(f64::INFINITY);
    let ratio = if initial_norm > 0.0 {
        final_norm / initial_norm
    } else if final_norm == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let start = ((deviation.len() as f64) * (1.0 - TAIL_FRACTION)).floor() as usize;
    let tail = &deviation[start.min(deviation.len() - 1)..];
    let monotone_tail = !trajectory.truncated && tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    Ok(DecayReport {
        ratio,
        monotone_tail,
        initial_norm,
        final_norm,
        deviation,
        trajectory,
    })
}

/// Outcome for one patch set left connected by a cut.
#[derive(Debug, Clone)]
pub struct ComponentOutcome {
    /// Patch names, canonical order.
    pub patches: Vec<String>,
    pub equilibrium: Vec<f64>,
    /// Verdict for the restricted model as written (losses retained).
    pub retained: SpectrumVerdict,
    /// For a patch left with no dispersal partners: the same patch with the
    /// dispersal-loss terms removed, if the dynamics support it.
    pub loss_free: Option<(Vec<f64>, SpectrumVerdict)>,
    /// The verdict that applies: loss-free when available, else retained.
    pub stable: bool,
    /// Perturbation experiment on the applicable dynamics.
    pub decay: DecayReport,
}

#[derive(Debug, Clone)]
pub struct CutExperiment {
    pub pre: SpectrumVerdict,
    pub components: Vec<ComponentOutcome>,
    /// All components stable.
    pub post_stable: bool,
}

/// Patch components of the union of the species graphs after cutting.
fn residual_components(model: &MetapopModel, cuts: &[Cut]) -> Result<(Vec<WeightedGraph>, Vec<Vec<usize>>)> {
    if cuts.len() != model.species() {
        return Err(Error::DimensionMismatch {
            expected: model.species(),
            got: cuts.len(),
        });
    }
    let residuals = model
        .species_graphs()
        .iter()
        .zip(cuts)
        .map(|(g, c)| g.residual(c))
        .collect::<Result<Vec<_>>>()?;
    let mut union: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for g in &residuals {
        for e in g.edges() {
            *union.entry((e.u, e.v)).or_default() += e.weight;
        }
    }
    let names = model.patches();
    let edges: Vec<(&str, &str, f64)> = union
        .iter()
        .map(|(&(u, v), &w)| (names[u].as_str(), names[v].as_str(), w))
        .collect();
    let coupled = WeightedGraph::with_nodes(names, &edges)?;
    let all: Vec<usize> = (0..model.patch_count()).collect();
    Ok((residuals, coupled.components_within(&all)))
}

fn equilibrium_guess(model: &MetapopModel, fallback: &[f64]) -> Vec<f64> {
    match model.local().equilibrium_hint() {
        Some(h) if h.len() == model.species() => (0..model.species())
            .flat_map(|i| std::iter::repeat_n(h[i], model.patch_count()))
            .collect(),
        _ => fallback.to_vec(),
    }
}

/// Applies one cut per species, re-derives the equilibrium on each resulting
/// patch component and reports spectra before and after plus a perturbation
/// run per component. Components run in parallel.
pub fn cut_experiment(
    model: &MetapopModel,
    equilibrium: &[f64],
    cuts: &[Cut],
    delta: f64,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<CutExperiment> {
    let pre = spectrum_verdict(&linearize(model, equilibrium)?)?;
    let (residuals, comps) = residual_components(model, cuts)?;
    let cut_model = model.with_graphs(residuals)?;

    let components = comps
        .par_iter()
        .map(|comp| -> Result<ComponentOutcome> {
            let sub = cut_model.restrict(comp)?;
            let start = cut_model.restrict_state(equilibrium, comp);
            let eq = find_equilibrium(&sub, &start)?.state;
            let retained = spectrum_verdict(&linearize(&sub, &eq)?)?;

            let isolated = sub.species_graphs().iter().all(|g| g.edge_count() == 0);
            let loss_free = match sub.local().without_dispersal_loss() {
                Some(local) if isolated => {
                    let free = sub.with_local(local)?;
                    let guess = equilibrium_guess(&free, &eq);
                    let free_eq = find_equilibrium(&free, &guess)?.state;
                    let verdict = spectrum_verdict(&linearize(&free, &free_eq)?)?;
                    Some((free, free_eq, verdict))
                }
                _ => None,
            };
            let (run_model, run_eq, stable) = match &loss_free {
                Some((free, free_eq, v)) => (free, free_eq.as_slice(), v.stable),
                None => (&sub, eq.as_slice(), retained.stable),
            };
            let decay = perturbation_decay_every(run_model, run_eq, delta, t_end, dt, record_every)?;
            Ok(ComponentOutcome {
                patches: comp.iter().map(|&j| model.patches()[j].clone()).collect(),
                equilibrium: eq.clone(),
                retained,
                loss_free: loss_free.map(|(_, e, v)| (e, v)),
                stable,
                decay,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let post_stable = components.iter().all(|c| c.stable);
    Ok(CutExperiment {
        pre,
        components,
        post_stable,
    })
}
