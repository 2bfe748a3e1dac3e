//! Smallest eigenpairs of `A x = lambda M x` by shift-invert block subspace
//! iteration with Rayleigh-Ritz projection.
//!
//! The shifted operator `(A + sigma M)^-1 M` is applied through a sparse
//! Cholesky factorization. Constant modes are not deflated: they are simply
//! the smallest Ritz pairs, and their count is reported as `zero_modes`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_mass, assemble_stiffness, remove_component_means, ScalarField, SparseSymOperator};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::slitmesh::SlitMesh;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Bound on `||A x - lambda M x||_{M^-1}`, relative to `max(1, lambda)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra block columns beyond the requested count.
    pub guard: usize,
    pub seed: u64,
    /// Shift `sigma`; defaults to `0.01 / total mass`.
    pub shift: Option<f64>,
    pub exec: Execution,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 500, guard: 8, seed: DEFAULT_SEED, shift: None, exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal, one per eigenvalue.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub zero_modes: usize,
    /// First eigenvalue above the zero threshold.
    pub lambda1_global: Option<f64>,
    /// First positive eigenvalue of each connected component, in component
    /// order. Empty when no mesh was given.
    pub lambda1_per_component: Vec<f64>,
    pub iterations: usize,
    pub shift: f64,
}

impl EigenResult {
    pub fn zero_threshold(&self) -> f64 {
        zero_threshold(&self.eigenvalues)
    }

    /// Smallest per-component first eigenvalue, or the global one.
    pub fn lambda1_min(&self) -> Option<f64> {
        self.lambda1_per_component.iter().copied().reduce(f64::min).or(self.lambda1_global)
    }
}

fn zero_threshold(eigenvalues: &[f64]) -> f64 {
    let top = eigenvalues.last().copied().unwrap_or(0.0);
    1e-8f64.max(1e-6 * top)
}

/// Sparse Cholesky factor of a symmetric positive definite operator.
pub struct Factor {
    llt: Llt<usize, f64>,
    n: usize,
}

impl Factor {
    pub fn new(op: &SparseSymOperator) -> Result<Self> {
        let lower = op.to_faer_lower()?;
        let llt = lower
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { llt, n: op.dim() })
    }

    /// Solves in place for every column.
    pub fn solve_block(&self, cols: &mut [Vec<f64>]) {
        if cols.is_empty() {
            return;
        }
        let mut rhs = Mat::<f64>::zeros(self.n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            rhs.col_as_slice_mut(j).copy_from_slice(c);
        }
        self.llt.solve_in_place(rhs.as_mut());
        for (j, c) in cols.iter_mut().enumerate() {
            c.copy_from_slice(rhs.col_as_slice(j));
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut cols = vec![b.to_vec()];
        self.solve_block(&mut cols);
        cols.pop().expect("one column")
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// M-orthonormalizes the columns (classical Gram-Schmidt, two passes).
/// Returns `(Q, M Q)`. Columns that collapse are replaced by random vectors.
fn m_orthonormalize(
    mut y: Vec<Vec<f64>>,
    m: &SparseSymOperator,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = m.dim();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    let mut mq: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    for j in 0..y.len() {
        let mut w = std::mem::take(&mut y[j]);
        let mut attempts = 0;
        loop {
            let before = m.quad_form(&w).sqrt();
            for _ in 0..2 {
                let coeffs: Vec<f64> = mq.iter().map(|mqi| dot(mqi, &w)).collect();
                for (c, qi) in coeffs.iter().zip(&q) {
                    axpy(&mut w, -c, qi);
                }
            }
            let mw = m.apply(&w);
            let norm = dot(&w, &mw).max(0.0).sqrt();
            if norm > 1e-10 * before && norm > 0.0 && attempts < 5 {
                w.iter_mut().for_each(|v| *v /= norm);
                q.push(w);
                mq.push(mw.into_iter().map(|v| v / norm).collect());
                break;
            }
            attempts += 1;
            assert!(attempts <= 5, "could not extend an M-orthonormal basis");
            w = random_vector(rng, n);
        }
    }
    (q, mq)
}

fn combine(basis: &[Vec<f64>], w: &Mat<f64>, cols: usize) -> Vec<Vec<f64>> {
    let n = basis[0].len();
    (0..cols)
        .map(|j| {
            let mut x = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                axpy(&mut x, w[(i, j)], b);
            }
            x
        })
        .collect()
}

/// The `k` smallest eigenpairs of `A x = lambda M x`.
pub fn smallest_eigenpairs(
    a: &SparseSymOperator,
    m: &SparseSymOperator,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::Input(format!("A is {n}x{n} but M is {0}x{0}", m.dim())));
    }
    if k == 0 || k > n {
        return Err(Error::Input(format!("cannot compute {k} eigenpairs of a {n}-dimensional problem")));
    }
    let p = (k + opts.guard).min(n);
    let mass_factor = Factor::new(m).map_err(|_| Error::Input("mass matrix is not positive definite".into()))?;
    let sigma = opts.shift.unwrap_or_else(|| 1e-2 / m.total());
    if !(sigma > 0.0) {
        return Err(Error::Input(format!("shift must be positive, got {sigma}")));
    }
    let shifted = Factor::new(&a.add_scaled(m, sigma)?)
        .map_err(|_| Error::Input("A + sigma M is not positive definite; is A positive semidefinite?".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<Vec<f64>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    let (mut q, mut mq) = m_orthonormalize(start, m, &mut rng);

    let mut residuals = vec![f64::INFINITY; k];
    for iter in 1..=opts.max_iter {
        let aq: Vec<Vec<f64>> = map_indexed(opts.exec, p, |j| a.apply(&q[j]));
        let h = Mat::<f64>::from_fn(p, p, |i, j| 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i])));
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let theta: Vec<f64> = (0..p).map(|i| evd.S().column_vector()[i]).collect();
        let w = evd.U().to_owned();

        let x = combine(&q, &w, p);
        let ax = combine(&aq, &w, k);
        let mx = combine(&mq, &w, p);
        let mut r: Vec<Vec<f64>> = (0..k)
            .map(|j| ax[j].iter().zip(&mx[j]).map(|(u, v)| u - theta[j] * v).collect())
            .collect();
        let r_copy = r.clone();
        mass_factor.solve_block(&mut r);
        residuals = (0..k).map(|j| dot(&r_copy[j], &r[j]).max(0.0).sqrt()).collect();
        let converged = (0..k).all(|j| residuals[j] <= opts.tol * theta[j].abs().max(1.0));
        if converged {
            let mut eigenvectors: Vec<Vec<f64>> = x.into_iter().take(k).collect();
            for v in &mut eigenvectors {
                let big = v.iter().copied().fold(0.0f64, |acc, t| if t.abs() > acc.abs() { t } else { acc });
                if big < 0.0 {
                    v.iter_mut().for_each(|t| *t = -*t);
                }
            }
            let eigenvalues: Vec<f64> = theta[..k].to_vec();
            let thr = zero_threshold(&eigenvalues);
            let zero_modes = eigenvalues.iter().filter(|&&l| l.abs() < thr).count();
            let lambda1_global = eigenvalues.iter().copied().find(|&l| l >= thr);
            return Ok(EigenResult {
                eigenvalues,
                eigenvectors,
                residuals,
                zero_modes,
                lambda1_global,
                lambda1_per_component: Vec::new(),
                iterations: iter,
                shift: sigma,
            });
        }
        let mut y = mx;
        shifted.solve_block(&mut y);
        (q, mq) = m_orthonormalize(y, m, &mut rng);
    }
    Err(Error::Convergence { iterations: opts.max_iter, residuals })
}

/// Eigenpairs of the Neumann Laplacian on a mesh, with the per-component
/// first eigenvalues filled in.
pub fn mesh_eigenpairs(mesh: &SlitMesh, k: usize, opts: &EigenOptions) -> Result<EigenResult> {
    if k < mesh.components() + 1 {
        return Err(Error::Input(format!(
            "k = {k} must exceed the number of components ({})",
            mesh.components()
        )));
    }
    let a = assemble_stiffness(mesh, opts.exec)?;
    let m = assemble_mass(mesh, false, opts.exec)?;
    let mut result = smallest_eigenpairs(&a, &m, k, opts)?;
    result.lambda1_per_component = if mesh.components() == 1 {
        result.lambda1_global.into_iter().collect()
    } else {
        let comp = mesh.dof_components();
        (0..mesh.components())
            .map(|c| {
                let dofs: Vec<usize> = (0..comp.len()).filter(|&i| comp[i] == c).collect();
                let sub = smallest_eigenpairs(&a.restrict(&dofs), &m.restrict(&dofs), 2, opts)?;
                Ok(sub.eigenvalues[1])
            })
            .collect::<Result<_>>()?
    };
    Ok(result)
}

/// `v^T A v / vbar^T M vbar`, with `vbar` the field minus its per-component
/// means.
pub fn rayleigh_quotient(
    a: &SparseSymOperator,
    m: &SparseSymOperator,
    mesh: &SlitMesh,
    v: &ScalarField,
) -> Result<f64> {
    if !v.belongs_to(mesh) || a.dim() != mesh.dof_count() || m.dim() != mesh.dof_count() {
        return Err(Error::Input("field and operators do not match the mesh".into()));
    }
    let vbar = remove_component_means(mesh, m, v.values());
    let den = m.quad_form(&vbar);
    let full = m.quad_form(v.values());
    if !(den > 1e-14 * full) {
        return Err(Error::Input("field lies in the span of the component constants".into()));
    }
    Ok(a.quad_form(v.values()) / den)
}

/// First eigenvalue of the sphere of radius `r` from that of the unit sphere.
pub fn eigenvalue_scaling(lambda_unit: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Range(format!("radius must be positive, got {r}")));
    }
    Ok(lambda_unit / (r * r))
}
