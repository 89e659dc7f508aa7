//! Multi-species metapopulation models on dispersal networks and their
//! linearisation around an equilibrium.
//!
//! State layout: species `i` on patch `j` lives at index `i * m + j`, so the
//! block dispersal operator is the direct sum `L_1 + ... + L_n` of the
//! per-species Laplacians. The full vector field is
//!
//! ```text
//! x' = f(x) - L x - E x
//! ```
//!
//! where `f` acts patch-locally and `E` is diagonal with the per-species
//! dispersal loss `l_i` on block `i`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{norm_inf, Matrix};
use crate::nonsymmetric;
use crate::spectral::{eig_symmetric, normalize_sign};

/// Reaction terms at a single patch.
pub trait LocalDynamics: Send + Sync + fmt::Debug {
    fn species(&self) -> usize;

    /// Writes `f(x)` for the species densities `x` at `patch`.
    fn eval(&self, patch: usize, x: &[f64], out: &mut [f64]);

    /// Writes the `species x species` Jacobian into `out` and returns `true`,
    /// or returns `false` when no analytic form is available.
    fn jacobian(&self, _patch: usize, _x: &[f64], _out: &mut Matrix) -> bool {
        false
    }

    /// The same dynamics with any built-in dispersal-loss terms removed, for
    /// patches that no longer exchange individuals with anyone.
    fn without_dispersal_loss(&self) -> Option<Arc<dyn LocalDynamics>> {
        None
    }

    /// A per-patch state to start equilibrium searches from, if known.
    fn equilibrium_hint(&self) -> Option<Vec<f64>> {
        None
    }

    /// Short identifier used in reports.
    fn name(&self) -> &str;
}

/// `f(x) = A x` at every patch.
#[derive(Debug, Clone)]
pub struct LinearLocal {
    pub a: Matrix,
}

impl LinearLocal {
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::InvalidModel(
                "linear dynamics needs a non-empty square matrix".into(),
            ));
        }
        Ok(Self { a })
    }
}

impl LocalDynamics for LinearLocal {
    fn species(&self) -> usize {
        self.a.rows()
    }

    fn eval(&self, _patch: usize, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.a.mul_vec(x));
    }

    fn jacobian(&self, _patch: usize, _x: &[f64], out: &mut Matrix) -> bool {
        *out = self.a.clone();
        true
    }

    fn name(&self) -> &str {
        "linear"
    }
}

/// Wraps a closure as patch-local dynamics (no analytic Jacobian).
pub struct FnLocal<F> {
    species: usize,
    f: F,
}

impl<F> FnLocal<F>
where
    F: Fn(usize, &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(species: usize, f: F) -> Self {
        Self { species, f }
    }
}

impl<F> fmt::Debug for FnLocal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnLocal").field("species", &self.species).finish()
    }
}

impl<F> LocalDynamics for FnLocal<F>
where
    F: Fn(usize, &[f64], &mut [f64]) + Send + Sync,
{
    fn species(&self) -> usize {
        self.species
    }

    fn eval(&self, patch: usize, x: &[f64], out: &mut [f64]) {
        (self.f)(patch, x, out)
    }

    fn name(&self) -> &str {
        "closure"
    }
}

#[derive(Debug, Clone)]
pub struct MetapopModel {
    patches: Vec<String>,
    species_graphs: Vec<WeightedGraph>,
    losses: Vec<f64>,
    local: Arc<dyn LocalDynamics>,
}

impl MetapopModel {
    /// One dispersal graph and one loss rate per species; every graph must
    /// have the same patch set.
    pub fn new(local: Arc<dyn LocalDynamics>, species_graphs: Vec<WeightedGraph>, losses: Vec<f64>) -> Result<Self> {
        let n = local.species();
        if n == 0 {
            return Err(Error::InvalidModel("at least one species is required".into()));
        }
        if species_graphs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: species_graphs.len(),
            });
        }
        if losses.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: losses.len(),
            });
        }
        if let Some(l) = losses.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(Error::InvalidModel(format!("loss rates must be >= 0, got {l}")));
        }
        let patches = species_graphs[0].nodes().to_vec();
        if patches.is_empty() {
            return Err(Error::InvalidModel("at least one patch is required".into()));
        }
        if species_graphs.iter().any(|g| g.nodes() != patches.as_slice()) {
            return Err(Error::PatchSetMismatch);
        }
        Ok(Self {
            patches,
            species_graphs,
            losses,
            local,
        })
    }

    pub fn species(&self) -> usize {
        self.species_graphs.len()
    }

    pub fn patches(&self) -> &[String] {
        &self.patches
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    pub fn state_len(&self) -> usize {
        self.species() * self.patch_count()
    }

    pub fn index(&self, species: usize, patch: usize) -> usize {
        species * self.patch_count() + patch
    }

    pub fn species_graphs(&self) -> &[WeightedGraph] {
        &self.species_graphs
    }

    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    pub fn local(&self) -> &Arc<dyn LocalDynamics> {
        &self.local
    }

    /// Same model with different dispersal graphs (same patch set).
    pub fn with_graphs(&self, species_graphs: Vec<WeightedGraph>) -> Result<Self> {
        Self::new(self.local.clone(), species_graphs, self.losses.clone())
    }

    /// Same graphs and losses with different local dynamics.
    pub fn with_local(&self, local: Arc<dyn LocalDynamics>) -> Result<Self> {
        Self::new(local, self.species_graphs.clone(), self.losses.clone())
    }

    /// Restriction to a subset of patches (canonical indices).
    pub fn restrict(&self, patches: &[usize]) -> Result<Self> {
        let graphs = self
            .species_graphs
            .iter()
            .map(|g| g.induced_subgraph(patches))
            .collect();
        Self::new(self.local.clone(), graphs, self.losses.clone())
    }

    /// Restricts a full state vector to the given patches.
    pub fn restrict_state(&self, x: &[f64], patches: &[usize]) -> Vec<f64> {
        (0..self.species())
            .flat_map(|i| patches.iter().map(move |&j| (i, j)))
            .map(|(i, j)| x[self.index(i, j)])
            .collect()
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_len() {
            return Err(Error::DimensionMismatch {
                expected: self.state_len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn patch_state(&self, x: &[f64], patch: usize) -> Vec<f64> {
        (0..self.species()).map(|i| x[self.index(i, patch)]).collect()
    }

    /// `f(x)` over all patches.
    pub fn local_field(&self, x: &[f64]) -> Vec<f64> {
        let n = self.species();
        let mut out = vec![0.0; x.len()];
        let mut buf = vec![0.0; n];
        for j in 0..self.patch_count() {
            self.local.eval(j, &self.patch_state(x, j), &mut buf);
            for i in 0..n {
                out[self.index(i, j)] = buf[i];
            }
        }
        out
    }

    /// Full right-hand side `f(x) - L x - E x`.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.local_field(x);
        let m = self.patch_count();
        for (i, g) in self.species_graphs.iter().enumerate() {
            let loss = self.losses[i];
            for j in 0..m {
                let q = self.index(i, j);
                let mut flow = loss * x[q];
                for (k, w) in g.neighbors(j) {
                    flow += w * (x[q] - x[self.index(i, k)]);
                }
                out[q] -= flow;
            }
        }
        out
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        norm_inf(&self.rhs(x))
    }

    /// Block Laplacian `L` and loss matrix `E`.
    pub fn assemble(&self) -> (Matrix, Matrix) {
        let blocks: Vec<Matrix> = self.species_graphs.iter().map(|g| g.laplacian()).collect();
        let l = Matrix::block_diagonal(&blocks);
        let m = self.patch_count();
        let diag: Vec<f64> = self.losses.iter().flat_map(|&li| std::iter::repeat_n(li, m)).collect();
        (l, Matrix::from_diagonal(&diag))
    }

    /// Jacobian of the local field `Df(x)`. Only patch-local couplings are
    /// non-zero. Uses the analytic form when the dynamics provide one.
    pub fn local_jacobian(&self, x: &[f64]) -> Matrix {
        let n = self.species();
        let dim = self.state_len();
        let mut out = Matrix::zeros(dim, dim);
        let mut block = Matrix::zeros(n, n);
        for j in 0..self.patch_count() {
            let xs = self.patch_state(x, j);
            if !self.local.jacobian(j, &xs, &mut block) {
                block = finite_difference_jacobian(self.local.as_ref(), j, &xs);
            }
            for a in 0..n {
                for b in 0..n {
                    out[(self.index(a, j), self.index(b, j))] = block[(a, b)];
                }
            }
        }
        out
    }

    /// Jacobian of the full right-hand side, `Df(x) - L - E`.
    pub fn full_jacobian(&self, x: &[f64]) -> Matrix {
        let (l, e) = self.assemble();
        self.local_jacobian(x).sub(&l).sub(&e)
    }
}

/// Central differences with step `1e-6 * (1 + |x_k|)`.
pub fn finite_difference_jacobian(local: &dyn LocalDynamics, patch: usize, x: &[f64]) -> Matrix {
    let n = x.len();
    let mut out = Matrix::zeros(n, n);
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut probe = x.to_vec();
    for k in 0..n {
        let h = 1e-6 * (1.0 + x[k].abs());
        probe[k] = x[k] + h;
        local.eval(patch, &probe, &mut plus);
        probe[k] = x[k] - h;
        local.eval(patch, &probe, &mut minus);
        probe[k] = x[k];
        for r in 0..n {
            out[(r, k)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    out
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub state: Vec<f64>,
    /// All components strictly positive (co-existence).
    pub positive: bool,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration on `f(x) - L x - E x = 0` with step halving.
pub fn find_equilibrium(model: &MetapopModel, guess: &[f64]) -> Result<Equilibrium> {
    model.check_state(guess)?;
    let mut x = guess.to_vec();
    let mut f = model.rhs(&x);
    let mut res = norm_inf(&f);
    for it in 0..=NEWTON_MAX_ITER {
        if res <= NEWTON_TOL {
            return Ok(Equilibrium {
                positive: x.iter().all(|&v| v > 0.0),
                state: x,
                residual: res,
                iterations: it,
            });
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let jac = model.full_jacobian(&x);
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = jac.solve(&neg)?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + scale * d).collect();
            let ft = model.rhs(&trial);
            let rt = norm_inf(&ft);
            if rt < res {
                accepted = Some((trial, ft, rt));
                break;
            }
            scale *= 0.5;
        }
        let (nx, nf, nr) = accepted.unwrap_or_else(|| {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
            let ft = model.rhs(&trial);
            let rt = norm_inf(&ft);
            (trial, ft, rt)
        });
        if !nr.is_finite() {
            break;
        }
        x = nx;
        f = nf;
        res = nr;
    }
    Err(Error::NoConvergence("newton equilibrium search", NEWTON_MAX_ITER))
}

/// Whether a coefficient-matrix row belongs to the zero Laplacian eigenvalue
/// of its species block or to a positive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Zero,
    Positive,
}

/// The linearised system in original and modal coordinates.
#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    pub species: usize,
    pub patches: usize,
    pub equilibrium: Vec<f64>,
    /// `Df(x_eq)`.
    pub local_jacobian: Matrix,
    pub block_laplacian: Matrix,
    pub loss_matrix: Matrix,
    /// Block-diagonal orthonormal eigenvector matrix `P`.
    pub modal_matrix: Matrix,
    /// Diagonal of `Lambda`: per-block Laplacian eigenvalues, ascending within
    /// each block.
    pub modal_spectrum: Vec<f64>,
    /// `P^T Df P`.
    pub projected_jacobian: Matrix,
    /// `P^T Df P - Lambda - E`.
    pub coefficient_matrix: Matrix,
    /// Loss rate per row.
    pub row_losses: Vec<f64>,
    /// Number of (numerically) zero Laplacian eigenvalues per species block.
    zero_counts: Vec<usize>,
}

impl LinearizedSystem {
    /// `Df - L - E` in original coordinates.
    pub fn jacobian(&self) -> Matrix {
        self.local_jacobian.sub(&self.block_laplacian).sub(&self.loss_matrix)
    }

    fn block_range(&self, species: usize) -> std::ops::Range<usize> {
        species * self.patches..(species + 1) * self.patches
    }

    /// Row classification; fails when a species graph is disconnected (more
    /// than one zero eigenvalue in its block).
    pub fn row_kinds(&self) -> Result<Vec<RowKind>> {
        if let Some(i) = self.zero_counts.iter().position(|&c| c != 1) {
            return Err(Error::DisconnectedSpeciesGraph(i));
        }
        let mut kinds = vec![RowKind::Positive; self.species * self.patches];
        for i in 0..self.species {
            kinds[i * self.patches] = RowKind::Zero;
        }
        Ok(kinds)
    }

    /// Fiedler value of each species block (`None` for single-patch models).
    pub fn species_fiedler(&self) -> Vec<Option<f64>> {
        (0..self.species)
            .map(|i| {
                let r = self.block_range(i);
                (self.patches >= 2).then(|| self.modal_spectrum[r.start + 1])
            })
            .collect()
    }

    /// Smallest Fiedler value over species.
    pub fn min_fiedler(&self) -> Option<f64> {
        self.species_fiedler().into_iter().flatten().reduce(f64::min)
    }

    fn off_diagonal_row_sum(&self, q: usize) -> f64 {
        let a = &self.projected_jacobian;
        (0..a.cols()).filter(|&r| r != q).map(|r| a[(q, r)].abs()).sum()
    }
}

/// Builds `Df(x_eq)`, the modal frame `P`, `Lambda` and the coefficient
/// matrix `P^T Df P - Lambda - E`.
pub fn linearize(model: &MetapopModel, equilibrium: &[f64]) -> Result<LinearizedSystem> {
    model.check_state(equilibrium)?;
    let n = model.species();
    let m = model.patch_count();
    let (block_laplacian, loss_matrix) = model.assemble();
    let local_jacobian = model.local_jacobian(equilibrium);

    let mut blocks = Vec::with_capacity(n);
    let mut modal_spectrum = Vec::with_capacity(n * m);
    let mut zero_counts = Vec::with_capacity(n);
    for g in model.species_graphs() {
        let eig = eig_symmetric(&g.laplacian())?;
        let mut p = eig.eigenvectors.clone();
        for c in 0..m {
            let mut col = p.column(c);
            normalize_sign(&mut col);
            for r in 0..m {
                p[(r, c)] = col[r];
            }
        }
        let scale = eig.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
        zero_counts.push(eig.eigenvalues.iter().filter(|&&v| v.abs() <= 1e-9 * scale).count());
        modal_spectrum.extend_from_slice(&eig.eigenvalues);
        blocks.push(p);
    }
    let modal_matrix = Matrix::block_diagonal(&blocks);
    let projected_jacobian = modal_matrix.transpose().matmul(&local_jacobian).matmul(&modal_matrix);
    let row_losses: Vec<f64> = loss_matrix.diagonal();
    let mut coefficient_matrix = projected_jacobian.clone();
    for q in 0..n * m {
        coefficient_matrix[(q, q)] -= modal_spectrum[q] + row_losses[q];
    }

    Ok(LinearizedSystem {
        species: n,
        patches: m,
        equilibrium: equilibrium.to_vec(),
        local_jacobian,
        block_laplacian,
        loss_matrix,
        modal_matrix,
        modal_spectrum,
        projected_jacobian,
        coefficient_matrix,
        row_losses,
        zero_counts,
    })
}

/// Real parts at or below this count as non-positive.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectrumVerdict {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub max_real: f64,
    pub stable: bool,
}

pub fn spectrum_of(matrix: &Matrix) -> Result<SpectrumVerdict> {
    let eigenvalues = nonsymmetric::eigenvalues(matrix)?;
    let max_real = nonsymmetric::spectral_abscissa(&eigenvalues);
    Ok(SpectrumVerdict {
        stable: max_real <= STABILITY_TOL,
        eigenvalues,
        max_real,
    })
}

/// Eigenvalues of `Df - L - E`; stable iff every real part is `<= 1e-9`.
pub fn spectrum_verdict(sys: &LinearizedSystem) -> Result<SpectrumVerdict> {
    spectrum_of(&sys.jacobian())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GershgorinRow {
    pub row: usize,
    pub species: usize,
    pub kind: RowKind,
    /// `l_q - a_qq` for zero rows, `lambda2 + l_s - a_ss` for positive rows,
    /// with `a = P^T Df P`.
    pub margin: f64,
    /// Off-diagonal absolute row sum of `P^T Df P`.
    pub radius: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GershgorinReport {
    pub rows: Vec<GershgorinRow>,
    /// Smallest species Fiedler value used for the positive rows.
    pub lambda2: Option<f64>,
    /// Every row passes; implies linear stability.
    pub certified: bool,
}

/// Disc conditions on the modal coefficient matrix.
pub fn gershgorin_conditions(sys: &LinearizedSystem) -> Result<GershgorinReport> {
    let kinds = sys.row_kinds()?;
    let lambda2 = sys.min_fiedler();
    let a = &sys.projected_jacobian;
    let rows: Vec<GershgorinRow> = kinds
        .iter()
        .enumerate()
        .map(|(q, &kind)| {
            let base = sys.row_losses[q] - a[(q, q)];
            let margin = match kind {
                RowKind::Zero => base,
                RowKind::Positive => lambda2.expect("positive rows need two patches") + base,
            };
            let radius = sys.off_diagonal_row_sum(q);
            GershgorinRow {
                row: q,
                species: q / sys.patches,
                kind,
                margin,
                radius,
                pass: margin >= radius,
            }
        })
        .collect();
    let certified = rows.iter().all(|r| r.pass);
    Ok(GershgorinReport {
        rows,
        lambda2,
        certified,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauReport {
    /// Maximum over positive rows of `sum_{t != s} |a_st| + a_ss - l_s`.
    pub tau: f64,
    /// Same maximum taken over every row.
    pub tau_all_rows: f64,
}

/// Fiedler threshold derived from the local dynamics: any species graph whose
/// Fiedler value reaches it satisfies every positive-row disc condition.
pub fn tau_threshold(sys: &LinearizedSystem) -> Result<TauReport> {
    if sys.patches < 2 {
        return Err(Error::SinglePatch);
    }
    let kinds = sys.row_kinds()?;
    let a = &sys.projected_jacobian;
    let value = |q: usize| sys.off_diagonal_row_sum(q) + a[(q, q)] - sys.row_losses[q];
    let tau = (0..kinds.len())
        .filter(|&q| kinds[q] == RowKind::Positive)
        .map(value)
        .fold(f64::NEG_INFINITY, f64::max);
    let tau_all_rows = (0..kinds.len()).map(value).fold(f64::NEG_INFINITY, f64::max);
    Ok(TauReport { tau, tau_all_rows })
}

/// `(1 / (n (m - 1))) * sum_q (P^T Df P - E)_qq`; a species Fiedler value at
/// or above it keeps the coefficient-matrix trace non-positive.
pub fn trace_lower_bound(sys: &LinearizedSystem) -> Result<f64> {
    if sys.patches < 2 {
        return Err(Error::SinglePatch);
    }
    let a = &sys.projected_jacobian;
    let sum: f64 = (0..a.rows()).map(|q| a[(q, q)] - sys.row_losses[q]).sum();
    Ok(sum / (sys.species * (sys.patches - 1)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn no_edges(patches: &[&str]) -> WeightedGraph {
        WeightedGraph::with_nodes(patches, &[] as &[(&str, &str, f64)]).unwrap()
    }

    fn linear(a: f64) -> Arc<dyn LocalDynamics> {
        Arc::new(LinearLocal::new(Matrix::from_rows(&[[a]])).unwrap())
    }

    fn edge(d: f64) -> WeightedGraph {
        WeightedGraph::from_edges(&[("p1", "p2", d)]).unwrap()
    }

    #[test]
    fn assemble_single_edge() {
        let model = MetapopModel::new(linear(0.0), vec![edge(2.5)], vec![0.0]).unwrap();
        let (l, e) = model.assemble();
        assert_eq!(l, Matrix::from_rows(&[[2.5, -2.5], [-2.5, 2.5]]));
        assert_eq!(e, Matrix::zeros(2, 2));
    }

    #[test]
    fn assemble_losses_per_block() {
        let a = Matrix::zeros(2, 2);
        let model = MetapopModel::new(
            Arc::new(LinearLocal::new(a).unwrap()),
            vec![edge(1.0), edge(2.0)],
            vec![0.4, 0.2],
        )
        .unwrap();
        let (_, e) = model.assemble();
        assert_eq!(e.diagonal(), vec![0.4, 0.4, 0.2, 0.2]);
    }

    #[test]
    fn mismatched_patch_sets() {
        let a = Matrix::zeros(2, 2);
        let other = WeightedGraph::from_edges(&[("p1", "p3", 1.0)]).unwrap();
        let err = MetapopModel::new(
            Arc::new(LinearLocal::new(a).unwrap()),
            vec![edge(1.0), other],
            vec![0.0, 0.0],
        );
        assert_eq!(err.unwrap_err(), Error::PatchSetMismatch);
    }

    #[test]
    fn linear_equilibrium_is_zero_and_flagged() {
        let model = MetapopModel::new(linear(-1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        let eq = find_equilibrium(&model, &[3.0, 0.5]).unwrap();
        assert!(eq.state.iter().all(|v| v.abs() < 1e-12));
        assert!(!eq.positive);
    }

    #[test]
    fn equilibrium_rejects_wrong_length() {
        let model = MetapopModel::new(linear(-1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        assert!(matches!(
            find_equilibrium(&model, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn linearize_scalar_decay() {
        let model = MetapopModel::new(linear(-1.0), vec![no_edges(&["p"])], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0]).unwrap();
        assert_eq!(sys.coefficient_matrix, Matrix::from_rows(&[[-1.0]]));
    }

    #[test]
    fn decoupled_model_coefficient_is_minus_losses() {
        let local = Arc::new(LinearLocal::new(Matrix::zeros(2, 2)).unwrap());
        let model = MetapopModel::new(local, vec![no_edges(&["p"]), no_edges(&["p"])], vec![0.4, 0.2]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert_eq!(sys.coefficient_matrix, Matrix::from_diagonal(&[-0.4, -0.2]));
    }

    #[test]
    fn single_species_single_patch_spectrum() {
        let local = Arc::new(LinearLocal::new(Matrix::zeros(1, 1)).unwrap());
        let model = MetapopModel::new(local, vec![no_edges(&["p"])], vec![0.4]).unwrap();
        let sys = linearize(&model, &[0.0]).unwrap();
        let v = spectrum_verdict(&sys).unwrap();
        assert_abs_diff_eq!(v.eigenvalues[0].re, -0.4, epsilon = 1e-14);
        assert!(v.stable);
    }

    #[test]
    fn gershgorin_decay_is_certified() {
        let model = MetapopModel::new(linear(-1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert!(sys.projected_jacobian.sub(&Matrix::identity(2).scale(-1.0)).max_abs() < 1e-14);
        let g = gershgorin_conditions(&sys).unwrap();
        assert_eq!(g.rows[0].kind, RowKind::Zero);
        assert_abs_diff_eq!(g.rows[0].margin, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g.rows[1].margin, 3.0, epsilon = 1e-14);
        assert!(g.certified);
    }

    #[test]
    fn gershgorin_growth_fails() {
        let model = MetapopModel::new(linear(1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        let g = gershgorin_conditions(&sys).unwrap();
        assert!(!g.rows[0].pass);
        assert!(!g.certified);
    }

    #[test]
    fn tau_examples() {
        let model = MetapopModel::new(linear(0.5), vec![edge(1.0)], vec![0.2]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(tau_threshold(&sys).unwrap().tau, 0.3, epsilon = 1e-14);

        let model = MetapopModel::new(linear(-1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(tau_threshold(&sys).unwrap().tau, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_bound_examples() {
        let model = MetapopModel::new(linear(-1.0), vec![edge(1.0)], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(trace_lower_bound(&sys).unwrap(), -2.0, epsilon = 1e-14);

        let local = Arc::new(LinearLocal::new(Matrix::zeros(2, 2)).unwrap());
        let tri = WeightedGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap();
        let model = MetapopModel::new(local, vec![tri.clone(), tri], vec![0.3, 0.1]).unwrap();
        let sys = linearize(&model, &[0.0; 6]).unwrap();
        // -(sum_i l_i m) / (n (m - 1))
        assert_abs_diff_eq!(
            trace_lower_bound(&sys).unwrap(),
            -(0.3 * 3.0 + 0.1 * 3.0) / 4.0,
            epsilon = 1e-14
        );

        let single = MetapopModel::new(linear(-1.0), vec![no_edges(&["p"])], vec![0.0]).unwrap();
        let sys = linearize(&single, &[0.0]).unwrap();
        assert_eq!(trace_lower_bound(&sys), Err(Error::SinglePatch));
    }

    #[test]
    fn disconnected_species_graph_is_rejected() {
        let model = MetapopModel::new(linear(-1.0), vec![no_edges(&["a", "b"])], vec![0.0]).unwrap();
        let sys = linearize(&model, &[0.0, 0.0]).unwrap();
        assert_eq!(
            gershgorin_conditions(&sys).unwrap_err(),
            Error::DisconnectedSpeciesGraph(0)
        );
        assert_eq!(tau_threshold(&sys).unwrap_err(), Error::DisconnectedSpeciesGraph(0));
        // the spectrum is still available
        assert!(spectrum_verdict(&sys).unwrap().stable);
    }

    #[test]
    fn finite_difference_matches_closure() {
        let f = FnLocal::new(2, |_, x: &[f64], out: &mut [f64]| {
            out[0] = x[0] * x[1];
            out[1] = x[0].sin();
        });
        let j = finite_difference_jacobian(&f, 0, &[0.5, 2.0]);
        assert_abs_diff_eq!(j[(0, 0)], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(j[(0, 1)], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(j[(1, 0)], 0.5f64.cos(), epsilon = 1e-8);
        assert_abs_diff_eq!(j[(1, 1)], 0.0, epsilon = 1e-8);
    }
}
