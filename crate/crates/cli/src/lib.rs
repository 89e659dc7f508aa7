//! The `metacut` command line: argument parsing, command dispatch and the
//! exit-code contract.
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success; certified stable / spectrum stable         |
//! | 1    | certified unstable / spectrum unstable / growing    |
//! | 2    | unreadable, unparsable or invalid input             |
//! | 3    | graph or species graph disconnected                 |
//! | 4    | certificate inconclusive                            |
//! | 5    | problem too large for exhaustive search             |
//! | 6    | numerical failure (no convergence, singular system) |

pub mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use metacut::certify::{fiedler_sum_check, Bipartition};
use metacut::dynamics::{cut_experiment, default_delta, perturbation_decay_every};
use metacut::formats::{parse_cut, parse_cut_for, parse_graph, parse_model, ModelSpec};
use metacut::metapop::{gershgorin_conditions, tau_threshold, trace_lower_bound};
use metacut::{
    certify_partition, fiedler, find_equilibrium, linearize, search_stable_cuts, spectrum_verdict, Cut, Error,
    MetapopModel, SearchMode, StabilityThreshold, Verdict, WeightedGraph,
};

#[derive(Debug, Parser)]
#[command(
    name = "metacut",
    version,
    about = "Stability certificates for cuts of dispersal networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Fiedler value and vector of a graph.
    Fiedler { graph: PathBuf },
    /// Certify the components left by removing a cut.
    Certify {
        graph: PathBuf,
        cut: PathBuf,
        #[arg(long)]
        tau: f64,
    },
    /// Derive the Fiedler threshold and stability diagnostics of a model.
    Tau { model: PathBuf },
    /// Search for cuts whose components are all certified stable.
    Search {
        graph: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 2)]
        max_components: usize,
    },
    /// Perturb the model equilibrium and integrate, optionally after a cut.
    Simulate {
        model: PathBuf,
        /// Perturbation size; defaults to 1% of the largest equilibrium entry.
        #[arg(long)]
        perturb: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Edges to remove from every species graph that contains them.
        #[arg(long)]
        cut: Option<PathBuf>,
        /// Record every k-th step; by default about 1000 rows are kept.
        #[arg(long)]
        every: Option<usize>,
        /// Skip the trajectory table.
        #[arg(long)]
        no_table: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    Unstable,
    InputError,
    Disconnected,
    Inconclusive,
    TooLarge,
    NumericFailure,
}

impl ExitStatus {
    pub fn as_u8(self) -> u8 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Unstable => 1,
            ExitStatus::InputError => 2,
            ExitStatus::Disconnected => 3,
            ExitStatus::Inconclusive => 4,
            ExitStatus::TooLarge => 5,
            ExitStatus::NumericFailure => 6,
        }
    }

    pub fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::CertifiedStable => ExitStatus::Ok,
            Verdict::CertifiedUnstable => ExitStatus::Unstable,
            Verdict::Inconclusive => ExitStatus::Inconclusive,
        }
    }

    pub fn from_stable(stable: bool) -> Self {
        if stable {
            ExitStatus::Ok
        } else {
            ExitStatus::Unstable
        }
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Disconnected | Error::DisconnectedSpeciesGraph(_) => ExitStatus::Disconnected,
            Error::TooLarge { .. } => ExitStatus::TooLarge,
            Error::NoConvergence(..) | Error::Singular | Error::NotSymmetric(_) | Error::NotEquilibrium(_) => {
                ExitStatus::NumericFailure
            }
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub code: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult = std::result::Result<ExitStatus, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e.to_string()))
}

/// Adds the file name to parse errors.
fn in_file<T>(path: &Path, r: metacut::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Failure::Io(path.to_path_buf(), format!("line {line}: {message}")),
        other => Failure::Core(other),
    })
}

pub fn run(cli: &Cli) -> Outcome {
    let mut stdout = String::new();
    let result = match &cli.command {
        Command::Fiedler { graph } => cmd_fiedler(&mut stdout, graph),
        Command::Certify { graph, cut, tau } => cmd_certify(&mut stdout, graph, cut, *tau),
        Command::Tau { model } => cmd_tau(&mut stdout, model),
        Command::Search {
            graph,
            tau,
            mode,
            max_components,
        } => cmd_search(&mut stdout, graph, *tau, mode, *max_components),
        Command::Simulate {
            model,
            perturb,
            t_end,
            dt,
            cut,
            every,
            no_table,
        } => cmd_simulate(
            &mut stdout,
            &SimulateArgs {
                model,
                perturb: *perturb,
                t_end: *t_end,
                dt: *dt,
                cut: cut.as_deref(),
                every: *every,
                table: !*no_table,
            },
        ),
    };
    match result {
        Ok(code) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Io(path, msg)) => Outcome {
            code: ExitStatus::InputError,
            stdout,
            stderr: format!("error: {}: {msg}\n", path.display()),
        },
        Err(Failure::Core(e)) => Outcome {
            code: ExitStatus::from_error(&e),
            stdout,
            stderr: format!("error: {e}\n"),
        },
    }
}

fn load_graph(path: &Path) -> std::result::Result<WeightedGraph, Failure> {
    in_file(path, parse_graph(&read(path)?))
}

fn load_model(path: &Path) -> std::result::Result<(ModelSpec, MetapopModel), Failure> {
    let spec = in_file(path, parse_model(&read(path)?))?;
    let model = spec.build()?;
    Ok((spec, model))
}

fn cmd_fiedler(out: &mut String, path: &Path) -> CmdResult {
    let g = load_graph(path)?;
    let f = fiedler(&g)?;
    report::fiedler(out, &g, f.value, &f.vector, f.degenerate);
    Ok(ExitStatus::Ok)
}

fn cmd_certify(out: &mut String, graph: &Path, cut: &Path, tau: f64) -> CmdResult {
    let g = load_graph(graph)?;
    let c = in_file(cut, parse_cut_for(&read(cut)?, &g))?;
    let tau = StabilityThreshold::new(tau)?;
    let p = g.apply_cut(&c)?;
    let cert = certify_partition(&g, &p, tau)?;
    let sums = if p.len() == 2 && g.is_connected() {
        Some(fiedler_sum_check(&g, &Bipartition::from_partition(&p)?, tau)?)
    } else {
        None
    };
    report::certificate(out, &g, &c, g.cut_weight(&c)?, &cert, sums.as_ref());
    Ok(ExitStatus::from_verdict(cert.overall))
}

fn cmd_search(out: &mut String, graph: &Path, tau: f64, mode: &str, max_components: usize) -> CmdResult {
    let g = load_graph(graph)?;
    let mode: SearchMode = mode.parse()?;
    let tau = StabilityThreshold::new(tau)?;
    let r = search_stable_cuts(&g, tau, mode, max_components)?;
    report::search(out, &g, &r);
    Ok(ExitStatus::Ok)
}

fn model_header(out: &mut String, model: &MetapopModel) {
    use std::fmt::Write as _;
    let _ = writeln!(out, "dynamics = {}", model.local().name());
    let _ = writeln!(out, "species = {}", model.species());
    let _ = writeln!(out, "patches = {}", model.patches().join(" "));
}

fn cmd_tau(out: &mut String, path: &Path) -> CmdResult {
    use std::fmt::Write as _;
    let (spec, model) = load_model(path)?;
    model_header(out, &model);
    let eq = find_equilibrium(&model, &spec.equilibrium_guess())?;
    let _ = writeln!(out, "equilibrium = {}", report::nums(&eq.state));
    let _ = writeln!(out, "equilibrium_positive = {}", eq.positive);
    let sys = linearize(&model, &eq.state)?;
    let fiedlers: Vec<String> = sys
        .species_fiedler()
        .iter()
        .map(|v| v.map_or("n/a".into(), report::num))
        .collect();
    let _ = writeln!(out, "species_lambda2 = {}", fiedlers.join(" "));
    match tau_threshold(&sys) {
        Ok(t) => {
            let _ = writeln!(out, "tau = {}", report::num(t.tau));
            let _ = writeln!(out, "tau_all_rows = {}", report::num(t.tau_all_rows));
            let _ = writeln!(out, "trace_bound = {}", report::num(trace_lower_bound(&sys)?));
        }
        Err(Error::SinglePatch) => {
            let _ = writeln!(out, "tau = n/a (single patch)");
            let _ = writeln!(out, "tau_all_rows = n/a (single patch)");
            let _ = writeln!(out, "trace_bound = n/a (single patch)");
        }
        Err(e) => return Err(e.into()),
    }
    report::gershgorin(out, &gershgorin_conditions(&sys)?, model.patch_count());
    let v = spectrum_verdict(&sys)?;
    report::spectrum(out, "", &v);
    Ok(ExitStatus::from_stable(v.stable))
}

struct SimulateArgs<'a> {
    model: &'a Path,
    perturb: Option<f64>,
    t_end: f64,
    dt: f64,
    cut: Option<&'a Path>,
    every: Option<usize>,
    table: bool,
}

/// One cut per species: each pair is removed from every species graph that
/// has that edge, and must be an edge of at least one of them.
fn species_cuts(model: &MetapopModel, cut: &Cut) -> metacut::Result<Vec<Cut>> {
    let graphs = model.species_graphs();
    let has = |g: &WeightedGraph, u: &str, v: &str| matches!((g.node_index(u), g.node_index(v)), (Ok(a), Ok(b)) if g.weight(a, b).is_some());
    for (u, v) in cut.pairs() {
        if !graphs.iter().any(|g| has(g, u, v)) {
            return Err(Error::UnknownEdge(u.to_string(), v.to_string()));
        }
    }
    Ok(graphs
        .iter()
        .map(|g| {
            let pairs: Vec<(&str, &str)> = cut.pairs().filter(|(u, v)| has(g, u, v)).collect();
            Cut::new(&pairs)
        })
        .collect())
}

fn cmd_simulate(out: &mut String, a: &SimulateArgs) -> CmdResult {
    use std::fmt::Write as _;
    if a.dt.is_nan() || a.dt <= 0.0 || a.t_end.is_nan() || a.t_end <= 0.0 {
        return Err(Error::BadParams("--dt and --t-end must be positive".into()).into());
    }
    let (spec, model) = load_model(a.model)?;
    let cut = match a.cut {
        Some(p) => Some(in_file(p, parse_cut(&read(p)?))?),
        None => None,
    };
    model_header(out, &model);
    let eq = find_equilibrium(&model, &spec.equilibrium_guess())?.state;
    let _ = writeln!(out, "equilibrium = {}", report::nums(&eq));
    let delta = a.perturb.unwrap_or_else(|| default_delta(&eq));
    let steps = (a.t_end / a.dt).ceil().max(1.0) as usize;
    let every = a.every.unwrap_or_else(|| steps.div_ceil(1000)).max(1);

    match cut {
        None => {
            let v = spectrum_verdict(&linearize(&model, &eq)?)?;
            report::spectrum(out, "", &v);
            let d = perturbation_decay_every(&model, &eq, delta, a.t_end, a.dt, every)?;
            report::decay(out, "", &d, delta);
            if a.table {
                let cols = report::state_columns(model.species(), model.patches());
                report::table(out, "trajectory", &cols, &d.trajectory);
            }
            Ok(ExitStatus::from_stable(!d.trajectory.truncated && d.ratio < 1.0))
        }
        Some(cut) => {
            let cuts = species_cuts(&model, &cut)?;
            let e = cut_experiment(&model, &eq, &cuts, delta, a.t_end, a.dt, every)?;
            report::experiment(out, &e, delta);
            if a.table {
                for (k, c) in e.components.iter().enumerate() {
                    let cols = report::state_columns(model.species(), &c.patches);
                    report::table(
                        out,
                        &format!("trajectory component {}", k + 1),
                        &cols,
                        &c.decay.trajectory,
                    );
                }
            }
            Ok(ExitStatus::from_stable(e.post_stable))
        }
    }
}
