//! Symmetric eigendecomposition by cyclic Jacobi rotations, Fiedler pairs, and
//! a small independent eigenvalue oracle for cross-checking.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::Matrix;

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order; column `k` of `eigenvectors` pairs with
/// `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }
}

/// Second-smallest Laplacian eigenpair.
#[derive(Debug, Clone)]
pub struct FiedlerPair {
    pub value: f64,
    /// Unit norm; first component with magnitude above 1e-12 is positive.
    pub vector: Vec<f64>,
    /// Set when the second and third eigenvalues coincide, so the vector is
    /// one arbitrary choice from a higher-dimensional eigenspace.
    pub degenerate: bool,
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to
/// `1e-12 * ||M||_F`. Ties in the eigenvalue sort keep the original column
/// order.
pub fn eig_symmetric(m: &Matrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.rows();
    let mut a = m.clone();
    // symmetrise exactly so rotations stay consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let target = JACOBI_REL_TOL * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence("jacobi", JACOBI_MAX_SWEEPS));
    }

    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Flips `v` so that its first component with magnitude above 1e-12 is
/// positive.
pub fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Fiedler value and sign-normalised Fiedler vector of a connected graph.
pub fn fiedler(g: &WeightedGraph) -> Result<FiedlerPair> {
    if g.node_count() < 2 {
        return Err(Error::TooSmall {
            need: 2,
            got: g.node_count(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    fiedler_of_laplacian(&g.laplacian())
}

pub(crate) fn fiedler_of_laplacian(l: &Matrix) -> Result<FiedlerPair> {
    let eig = eig_symmetric(l)?;
    let value = eig.eigenvalues[1];
    let mut vector = eig.vector(1);
    normalize_sign(&mut vector);
    let scale = eig.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
    let degenerate = eig
        .eigenvalues
        .get(2)
        .is_some_and(|&l3| (l3 - value).abs() <= 1e-9 * scale);
    Ok(FiedlerPair {
        value,
        vector,
        degenerate,
    })
}

/// Second-smallest Laplacian eigenvalue of an arbitrary graph (0 when
/// disconnected). `None` for graphs with fewer than two nodes.
pub fn algebraic_connectivity(g: &WeightedGraph) -> Result<Option<f64>> {
    if g.node_count() < 2 {
        return Ok(None);
    }
    Ok(Some(eig_symmetric(&g.laplacian())?.eigenvalues[1]))
}

pub const ORACLE_MAX_DIM: usize = 6;

/// Eigenvalues of a small symmetric matrix, independent of [`eig_symmetric`].
///
/// The matrix is reduced to tridiagonal form by Householder reflections, then
/// each eigenvalue is bracketed by bisection on the Sturm count inside the
/// Gershgorin interval. Counting rather than locating sign changes keeps
/// repeated roots separable.
pub fn oracle_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let n = m.rows();
    if n > ORACLE_MAX_DIM {
        return Err(Error::TooLarge {
            limit: ORACLE_MAX_DIM,
            got: n,
        });
    }
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.cols(),
        });
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (d, e) = tridiagonalize(m);
    let (mut lo0, mut hi0) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let radius = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo0 = lo0.min(d[i] - radius);
        hi0 = hi0.max(d[i] + radius);
    }
    let scale = lo0.abs().max(hi0.abs()).max(1.0);
    lo0 -= 1.0;
    hi0 += 1.0;
    let pivmin = f64::MIN_POSITIVE.max(e.iter().fold(0.0f64, |acc, x| acc.max(x * x)) * f64::EPSILON);

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&d, &e, mid, pivmin) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Householder reduction to tridiagonal form: diagonal `d` and
/// sub-diagonal `e` (length `n - 1`).
fn tridiagonalize(m: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
        let alpha = -x[0].signum() * crate::linalg::norm2(&x);
        if alpha == 0.0 {
            continue;
        }
        let mut v = x;
        v[0] -= alpha;
        let vnorm = crate::linalg::norm2(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);
        // A <- H A H with H = I - 2 v v^T acting on rows/columns k+1..n
        let idx = |t: usize| k + 1 + t;
        let p: Vec<f64> = (0..n)
            .map(|r| (0..v.len()).map(|t| a[(r, idx(t))] * v[t]).sum())
            .collect();
        for r in 0..n {
            for t in 0..v.len() {
                a[(r, idx(t))] -= 2.0 * p[r] * v[t];
            }
        }
        let q: Vec<f64> = (0..n)
            .map(|c| (0..v.len()).map(|t| v[t] * a[(idx(t), c)]).sum())
            .collect();
        for t in 0..v.len() {
            for c in 0..n {
                a[(idx(t), c)] -= 2.0 * v[t] * q[c];
            }
        }
    }
    let d = (0..n).map(|i| a[(i, i)]).collect();
    let e = (1..n).map(|i| 0.5 * (a[(i, i - 1)] + a[(i - 1, i)])).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal `(d, e)` strictly below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        q = d[i] - x - if i > 0 { e[i - 1] * e[i - 1] / q } else { 0.0 };
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}
