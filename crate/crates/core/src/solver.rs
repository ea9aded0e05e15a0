//! Primal-dual active set solution of the discrete obstacle problem.
//!
//! The complementarity system is
//!
//! ```text
//! A u + M σ = F,   u ≥ χ,   σ ≤ 0,   σ_i (u_i − χ_i) = 0,
//! ```
//!
//! with `M` the lumped mass diagonal. With `λ = −σ ≥ 0` the active set of
//! iterate `k` is `{ i : λ_i + c (χ_i − u_i) > τ }`, `u = χ` is imposed on it,
//! `λ = 0` off it, and `λ` is recovered on it from the residual scaled by
//! `M⁻¹`. Iterations stop when the active set repeats.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Side};

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearBackend {
    /// Sparse Cholesky with a reused symbolic analysis and iterative refinement.
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct PdasOptions<T> {
    /// Weight of the primal violation in the active set test.
    pub c: T,
    pub max_iter: usize,
    /// Relative residual target of each linear solve.
    pub linear_tol: T,
    /// Threshold `τ` of the active set test, relative to [`SparseSystem::scale`].
    pub active_tol: T,
    pub backend: LinearBackend,
}

impl<T: Real> Default for PdasOptions<T> {
    fn default() -> Self {
        PdasOptions {
            c: T::one(),
            max_iter: 50,
            // floored at a few ulps so that single precision stays attainable
            linear_tol: T::lit(1e-12).max(T::lit(100.0) * T::epsilon()),
            active_tol: T::lit(1e-13).max(T::lit(10.0) * T::epsilon()),
            backend: LinearBackend::Cholesky,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObstacleSolution<T> {
    /// Nodal values of `u_h`, one per DOF.
    pub u: Vec<T>,
    /// Nodal values of `σ_h`; exactly zero off the active set.
    pub sigma: Vec<T>,
    /// DOFs where `u = χ` was enforced.
    pub active: Vec<bool>,
}

impl<T: Real> ObstacleSolution<T> {
    pub fn num_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinearStats<T> {
    pub iterations: usize,
    pub relative_residual: T,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    /// Number of linear solves, the unconstrained start included.
    pub pdas_iterations: usize,
    /// Active set size of each solve.
    pub active_sizes: Vec<usize>,
    pub linear: Vec<LinearStats<T>>,
    pub converged: bool,
    /// Largest amount by which an inactive DOF was lifted onto the obstacle
    /// in the final projection (bounded by the active set threshold).
    pub projection: T,
}

#[derive(Debug, Clone)]
pub struct LinearSolve<T> {
    pub x: Vec<T>,
    pub stats: LinearStats<T>,
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> Vec<T> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(&bi, axi)| bi - axi).collect()
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite matrix; `‖Ax − b‖₂ ≤ tol ‖b‖₂` on success.
pub fn solve_linear<T: Real>(a: &CsrMatrix<T>, b: &[T], tol: T) -> Result<LinearSolve<T>> {
    solve_linear_from(a, b, vec![T::zero(); b.len()], tol)
}

/// [`solve_linear`] starting from `x0`.
pub fn solve_linear_from<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Vec<T>,
    tol: T,
) -> Result<LinearSolve<T>> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len().min(x0.len()),
        });
    }
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(LinearSolve {
            x: vec![T::zero(); n],
            stats: LinearStats::default(),
        });
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let mut x = x0;
    let mut r = residual(a, &x, b);
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let max_iter = 20 * n + 100;
    let target = tol * bnorm;
    for it in 0..max_iter {
        let rnorm = norm2(&r);
        if rnorm <= target {
            return Ok(LinearSolve {
                x,
                stats: LinearStats {
                    iterations: it,
                    relative_residual: rnorm / bnorm,
                },
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::SingularSystem(format!(
                "conjugate gradient breakdown at iteration {it} (pᵀAp = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        // recompute the true residual now and then to avoid drift
        if it % 50 == 49 {
            r = residual(a, &x, b);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm2(&residual(a, &x, b)) / bnorm;
    Err(Error::LinearSolver {
        iterations: max_iter,
        residual: res.to_f64_lossy(),
    })
}

/// Sparse Cholesky factorizations sharing one symbolic analysis of a fixed pattern.
struct CholeskyFactory {
    symbolic: SymbolicLlt<usize>,
}

impl CholeskyFactory {
    fn new<T: Real>(a: &CsrMatrix<T>) -> Result<Self> {
        // A is structurally symmetric, so its CSR arrays are the CSC arrays of A itself
        let n = a.dim();
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let symbolic = SymbolicLlt::try_new(pattern, Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("symbolic analysis failed: {e:?}")))?;
        Ok(CholeskyFactory { symbolic })
    }

    /// Factorizes `a` (same pattern as at construction) and solves `a x = b`
    /// with up to three steps of iterative refinement.
    fn solve<T: Real>(&self, a: &CsrMatrix<T>, b: &[T], tol: T) -> Result<LinearSolve<T>> {
        let n = a.dim();
        let vals: Vec<f64> = a.values().iter().map(|v| v.to_f64_lossy()).collect();
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let mat = SparseColMatRef::new(pattern, &vals);
        let llt = Llt::try_new_with_symbolic(self.symbolic.clone(), mat, Side::Lower)
            .map_err(|e| Error::SingularSystem(format!("Cholesky factorization failed: {e:?}")))?;
        let apply = |rhs: &[T]| -> Vec<T> {
            let mut col = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i].to_f64_lossy());
            llt.solve_in_place(col.as_mut());
            (0..n).map(|i| T::lit(col[(i, 0)])).collect()
        };
        let bnorm = norm2(b);
        let mut x = apply(b);
        let mut r = residual(a, &x, b);
        let mut rel = if bnorm > T::zero() {
            norm2(&r) / bnorm
        } else {
            norm2(&r)
        };
        let mut steps = 1;
        while rel > tol && steps < 4 {
            let dx = apply(&r);
            let trial: Vec<T> = x.iter().zip(&dx).map(|(&xi, &di)| xi + di).collect();
            let r_trial = residual(a, &trial, b);
            let rel_trial = norm2(&r_trial) / bnorm;
            steps += 1;
            if !(rel_trial < rel) {
                break;
            }
            x = trial;
            r = r_trial;
            rel = rel_trial;
        }
        if !rel.is_finite() {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
        Ok(LinearSolve {
            x,
            stats: LinearStats {
                iterations: steps,
                relative_residual: rel,
            },
        })
    }
}

/// Reduced operator with the same pattern as `A`: rows and columns of active
/// DOFs are replaced by their diagonal, and the right-hand side carries the
/// obstacle values.
fn reduced_system<T: Real>(
    a: &CsrMatrix<T>,
    load: &[T],
    chi: &[T],
    active: &[bool],
) -> (CsrMatrix<T>, Vec<T>) {
    let mut k = a.clone();
    let mut rhs = load.to_vec();
    let row_ptr = a.row_ptr().to_vec();
    let cols = a.col_idx().to_vec();
    let vals = k.values_mut();
    for i in 0..a.dim() {
        let range = row_ptr[i]..row_ptr[i + 1];
        if active[i] {
            let mut diag = T::one();
            for idx in range {
                if cols[idx] == i {
                    diag = vals[idx];
                } else {
                    vals[idx] = T::zero();
                }
            }
            rhs[i] = diag * chi[i];
        } else {
            for idx in range {
                let j = cols[idx];
                if active[j] {
                    rhs[i] = rhs[i] - vals[idx] * chi[j];
                    vals[idx] = T::zero();
                }
            }
        }
    }
    (k, rhs)
}

/// `σ_h = (F − A u) / M`, evaluated DOF by DOF.
pub fn compute_sigma<T: Real>(system: &SparseSystem<T>, u: &[T]) -> Vec<T> {
    let au = system.matrix.mul_vec(u);
    system
        .load
        .iter()
        .zip(au)
        .zip(&system.lumped_mass)
        .map(|((&f, au), &m)| (f - au) / m)
        .collect()
}

/// Solves the discrete obstacle problem, starting from the unconstrained
/// solution. Non-convergence within `max_iter` is reported through
/// [`SolveReport::converged`] with the last iterate returned.
pub fn solve_obstacle<T: Real>(
    system: &SparseSystem<T>,
    chi: &[T],
    options: &PdasOptions<T>,
) -> Result<(ObstacleSolution<T>, SolveReport<T>)> {
    solve_obstacle_from(system, chi, options, &vec![false; system.dim()])
}

/// [`solve_obstacle`] with the first solve on the active set `start`
/// instead of the empty one, e.g. a guess transferred from a coarser mesh.
pub fn solve_obstacle_from<T: Real>(
    system: &SparseSystem<T>,
    chi: &[T],
    options: &PdasOptions<T>,
    start: &[bool],
) -> Result<(ObstacleSolution<T>, SolveReport<T>)> {
    let n = system.dim();
    for len in [chi.len(), start.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if chi.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("obstacle values must be finite".into()));
    }
    if !(options.c > T::zero()) {
        return Err(Error::InvalidParameter("c must be positive".into()));
    }
    let scale = system.scale();
    let tau = options.active_tol * scale;
    let factory = match options.backend {
        LinearBackend::Cholesky => Some(CholeskyFactory::new(&system.matrix)?),
        LinearBackend::ConjugateGradient => None,
    };

    let solve_with = |active: &[bool], warm: Option<&[T]>| -> Result<(Vec<T>, LinearStats<T>)> {
        let (k, rhs) = reduced_system(&system.matrix, &system.load, chi, active);
        let sol = match &factory {
            Some(f) => f.solve(&k, &rhs, options.linear_tol)?,
            None => {
                let x0 = warm.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
                solve_linear_from(&k, &rhs, x0, options.linear_tol)?
            }
        };
        let mut u = sol.x;
        for i in 0..n {
            if active[i] {
                u[i] = chi[i];
            }
        }
        Ok((u, sol.stats))
    };

    let multiplier = |u: &[T], active: &[bool]| -> Vec<T> {
        let au = system.matrix.mul_vec(u);
        (0..n)
            .map(|i| {
                if active[i] {
                    (au[i] - system.load[i]) / system.lumped_mass[i]
                } else {
                    T::zero()
                }
            })
            .collect()
    };

    let mut active = start.to_vec();
    let (mut u, stats) = solve_with(&active, None)?;
    let mut lambda = multiplier(&u, &active);
    let mut report = SolveReport {
        pdas_iterations: 1,
        active_sizes: vec![active.iter().filter(|&&a| a).count()],
        linear: vec![stats],
        converged: false,
        projection: T::zero(),
    };

    loop {
        let next: Vec<bool> = (0..n)
            .map(|i| lambda[i] + options.c * (chi[i] - u[i]) > tau)
            .collect();
        if next == active {
            report.converged = true;
            break;
        }
        if report.pdas_iterations >= options.max_iter {
            break;
        }
        active = next;
        let (u_new, stats) = solve_with(&active, Some(&u))?;
        u = u_new;
        lambda = multiplier(&u, &active);
        report.pdas_iterations += 1;
        report.active_sizes.push(active.iter().filter(|&&a| a).count());
        report.linear.push(stats);
    }

    // inactive DOFs may sit below the obstacle by at most τ / c
    for i in 0..n {
        if !active[i] && u[i] < chi[i] {
            report.projection = report.projection.max(chi[i] - u[i]);
            u[i] = chi[i];
        }
    }
    let sigma = lambda
        .iter()
        .zip(&active)
        .map(|(&l, &a)| if a { -l } else { T::zero() })
        .collect();
    Ok((ObstacleSolution { u, sigma, active }, report))
}
