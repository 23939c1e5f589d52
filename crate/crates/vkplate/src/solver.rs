//! Sparse direct linear solves and the Newton outer loop.
//!
//! The linearized systems are nonsymmetric (the trilinear form has no
//! first-slot symmetry), so each Newton step factors the block Jacobian with
//! a sparse LU. Solves run with sequential parallelism so repeated runs are
//! bit-identical.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};

use crate::forms::{self, DiscreteProblem, SparseMatrix};
use crate::mesh::Mesh;
use crate::morley::{self, DofMap, StateVector};
use crate::problems::ManufacturedProblem;
use crate::quadrature::QuadratureDegrees;
use crate::{Error, Result};

/// Newton stopping rule and start policy.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Absolute ℓ₂ tolerance applied to both the increment and the residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialGuess {
    /// Start from zero; the first iteration is then the decoupled linear
    /// plate solve (the trilinear terms vanish at zero).
    ZeroStart,
    /// Start from the Morley interpolant of the exact solution pair.
    ExactInterpolant,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20,
            initial_guess: InitialGuess::ZeroStart,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonIteration {
    /// ℓ₂ norm of the DOF increment taken this iteration.
    pub increment_norm: f64,
    /// ℓ₂ norm of the nonlinear residual at the new iterate.
    pub residual_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewtonStatus {
    Converged,
    MaxIterations,
    Diverged,
}

/// Per-iteration history of one Newton solve.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonLog {
    pub iterations: Vec<NewtonIteration>,
    pub status: NewtonStatus,
}

impl NewtonLog {
    pub fn converged(&self) -> bool {
        self.status == NewtonStatus::Converged
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

static FORCE_SEQUENTIAL: Once = Once::new();

/// Direct sparse LU solve of a (generally nonsymmetric) system.
///
/// Fails with pivot diagnostics on structural singularity and with the
/// residual on numerical breakdown; a returned solution satisfies
/// `‖Ax − b‖ ≤ 1e−10 ‖b‖`.
pub fn solve_linear(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    FORCE_SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));

    let n = a.nrows();
    let triplets: Vec<Triplet<usize, usize, f64>> = a
        .triplets()
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::LinearSolve(format!("building sparse matrix: {e:?}")))?;
    let symbolic = SymbolicLu::try_new(matrix.symbolic())
        .map_err(|e| Error::LinearSolve(format!("symbolic factorization: {e:?}")))?;
    let lu = Lu::try_new_with_symbolic(symbolic, matrix.as_ref()).map_err(|e| {
        Error::LinearSolve(match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                format!("structurally singular: no pivot at elimination step {index}")
            }
            other => format!("numeric factorization: {other:?}"),
        })
    })?;

    let rhs = faer::Mat::from_fn(n, 1, |i, _| b[i]);
    let solution = lu.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| solution[(i, 0)]).collect();

    // breakdown without an error from the factorization shows up here
    let ax = a.matvec(&x);
    let residual = l2(&ax
        .iter()
        .zip(b)
        .map(|(axi, bi)| axi - bi)
        .collect::<Vec<f64>>());
    let scale = l2(b);
    let tol = if scale > 0.0 { 1e-10 * scale } else { 1e-12 };
    if !residual.is_finite() || residual > tol {
        return Err(Error::LinearSolve(format!(
            "numerically singular: residual {residual:e} exceeds tolerance {tol:e}"
        )));
    }
    Ok(x)
}

/// Newton iteration for the discrete plate system on one mesh.
///
/// Stops when both the increment and the residual drop below the tolerance;
/// aborts with status `Diverged` after three consecutive residual increases.
/// Non-convergence is reported in the log, not as an `Err`.
pub fn newton_solve(
    mesh: &Mesh,
    dofmap: &DofMap,
    problem: &ManufacturedProblem,
    quad: &QuadratureDegrees,
    options: &NewtonOptions,
) -> Result<(StateVector, NewtonLog)> {
    if dofmap.n_free == 0 {
        return Err(Error::NoFreeDofs);
    }
    let dp = forms::discretize(mesh, dofmap, problem, quad)?;
    newton_solve_discretized(mesh, dofmap, problem, &dp, quad, options)
}

/// Newton iteration reusing an already assembled [`DiscreteProblem`].
pub fn newton_solve_discretized(
    mesh: &Mesh,
    dofmap: &DofMap,
    problem: &ManufacturedProblem,
    dp: &DiscreteProblem,
    quad: &QuadratureDegrees,
    options: &NewtonOptions,
) -> Result<(StateVector, NewtonLog)> {
    let n = dofmap.n_free;
    if n == 0 {
        return Err(Error::NoFreeDofs);
    }
    let mut state = match options.initial_guess {
        InitialGuess::ZeroStart => StateVector::zeros(n),
        InitialGuess::ExactInterpolant => {
            let u = morley::interpolate(
                mesh,
                dofmap,
                |p| problem.exact_u.value(p),
                |p| problem.exact_u.gradient(p),
            );
            let v = morley::interpolate(
                mesh,
                dofmap,
                |p| problem.exact_v.value(p),
                |p| problem.exact_v.gradient(p),
            );
            StateVector { u, v }
        }
    };

    let mut log = NewtonLog {
        iterations: Vec::new(),
        status: NewtonStatus::MaxIterations,
    };
    let mut previous_residual = f64::INFINITY;
    let mut growth_streak = 0;

    for _ in 0..options.max_iterations {
        let system = forms::newton_system(mesh, dofmap, dp, &state, quad.assembly)?;
        let next_flat = solve_linear(&system.jacobian, &system.rhs)?;
        let increment_norm = l2(&next_flat
            .iter()
            .zip(state.flat().iter())
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>());
        let next = StateVector::from_flat(&next_flat, n)?;
        let residual_norm = l2(&forms::residual(mesh, dofmap, dp, &next, quad.assembly)?);
        log.iterations.push(NewtonIteration {
            increment_norm,
            residual_norm,
        });
        state = next;

        if increment_norm <= options.tolerance && residual_norm <= options.tolerance {
            log.status = NewtonStatus::Converged;
            break;
        }
        if residual_norm > previous_residual {
            growth_streak += 1;
            if growth_streak >= 3 {
                log.status = NewtonStatus::Diverged;
                break;
            }
        } else {
            growth_streak = 0;
        }
        previous_residual = residual_norm;
    }

    if !state.is_finite() {
        log.status = NewtonStatus::Diverged;
    }
    Ok((state, log))
}
