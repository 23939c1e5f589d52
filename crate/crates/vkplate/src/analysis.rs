//! Broken-norm errors against the exact solution and experimental orders of
//! convergence.

use crate::mesh::Mesh;
use crate::morley::{element_basis, DofMap};
use crate::problems::Field2d;
use crate::quadrature::{triangle_rule, QuadratureDegrees};
use crate::Result;

/// Errors of one scalar field in the broken H², broken H¹ and L² norms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorTriple {
    pub h2: f64,
    pub h1: f64,
    pub l2: f64,
}

/// Experimental orders between two consecutive levels; `None` on the first
/// level or when an error is not positive.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RateTriple {
    pub h2: Option<f64>,
    pub h1: Option<f64>,
    pub l2: Option<f64>,
}

/// Broken-norm error `|exact − discrete|_{m,h}` of one coefficient vector.
///
/// `order` 2 integrates the Frobenius norm of the Hessian difference, 1 the
/// gradient difference, 0 the value difference; the square root of the sum
/// over triangles is returned.
pub fn broken_error(
    mesh: &Mesh,
    dofmap: &DofMap,
    coefs: &[f64],
    exact: &dyn Field2d,
    order: usize,
    quad_degree: usize,
) -> Result<f64> {
    let triple = broken_errors(mesh, dofmap, coefs, exact, quad_degree)?;
    Ok(match order {
        0 => triple.l2,
        1 => triple.h1,
        2 => triple.h2,
        other => return Err(crate::Error::UnsupportedOrder(other)),
    })
}

/// All three broken errors in a single sweep over the quadrature points.
pub fn broken_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    coefs: &[f64],
    exact: &dyn Field2d,
    quad_degree: usize,
) -> Result<ErrorTriple> {
    let rule = triangle_rule(quad_degree)?;
    let mut sq = ErrorTriple::default();
    for t in 0..mesh.triangles.len() {
        let basis = element_basis(mesh, t)?;
        let local = dofmap.gather(mesh, t, coefs);
        let hessians = basis.hessians();
        let mut dh = [0.0; 3];
        for (c, h) in local.iter().zip(&hessians) {
            dh[0] += c * h[0];
            dh[1] += c * h[1];
            dh[2] += c * h[2];
        }
        let [a, b, c] = mesh.triangle_vertices(t);
        let area = mesh.triangle_area(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let p = a * l[0] + b * l[1] + c * l[2];
            let jet = exact.jet4(p);
            let scale = w * area;

            let values = basis.values(p);
            let dv: f64 = local.iter().zip(&values).map(|(c, v)| c * v).sum();
            let e0 = jet.value() - dv;
            sq.l2 += scale * e0 * e0;

            let grads = basis.gradients(p);
            let mut dg = [0.0; 2];
            for (c, g) in local.iter().zip(&grads) {
                dg[0] += c * g[0];
                dg[1] += c * g[1];
            }
            let eg = jet.gradient();
            let (gx, gy) = (eg[0] - dg[0], eg[1] - dg[1]);
            sq.h1 += scale * (gx * gx + gy * gy);

            let eh = jet.hessian();
            let (hxx, hxy, hyy) = (eh[0] - dh[0], eh[1] - dh[1], eh[2] - dh[2]);
            sq.h2 += scale * (hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
        }
    }
    Ok(ErrorTriple {
        h2: sq.h2.sqrt(),
        h1: sq.h1.sqrt(),
        l2: sq.l2.sqrt(),
    })
}

/// Experimental order between consecutive levels with h halving:
/// `α = log₂(e_prev / e_next)`; `None` unless both errors are positive.
pub fn rate(previous: f64, next: f64) -> Option<f64> {
    (previous > 0.0 && next > 0.0).then(|| (previous / next).log2())
}

/// Orders for a whole error column; index 0 is always `None`.
pub fn rates(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        out[i] = rate(errors[i - 1], errors[i]);
    }
    out
}

/// Least-squares slope of log₂(error) against the level index, negated so a
/// first-order column yields ≈1; `None` with fewer than two valid points.
pub fn fitted_order(errors: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0)
        .map(|(i, &e)| (i as f64, e.log2()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    (denom != 0.0).then(|| -(n * sxy - sx * sy) / denom)
}

/// One row of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub level: usize,
    /// Mesh subdivision parameter.
    pub n: usize,
    /// Free DOFs per scalar field.
    pub unknowns: usize,
    pub h: f64,
    pub err_u: ErrorTriple,
    pub err_v: ErrorTriple,
    pub rate_u: RateTriple,
    pub rate_v: RateTriple,
}

/// Solve metadata recorded with every report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportMetadata {
    pub example: u32,
    pub p_over_d: f64,
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    pub quad: QuadratureDegrees,
    pub deterministic: bool,
}

/// Per-level errors and orders of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<LevelRow>,
}

impl ConvergenceReport {
    pub fn new(metadata: ReportMetadata) -> Self {
        Self {
            metadata,
            rows: Vec::new(),
        }
    }

    /// Appends a level and fills in the orders against the previous level.
    pub fn push_level(
        &mut self,
        level: usize,
        n: usize,
        unknowns: usize,
        h: f64,
        err_u: ErrorTriple,
        err_v: ErrorTriple,
    ) {
        if let Some(last) = self.rows.last() {
            assert!(
                unknowns > last.unknowns,
                "unknowns must increase across levels"
            );
        }
        let (rate_u, rate_v) = match self.rows.last() {
            Some(prev) => (
                RateTriple {
                    h2: rate(prev.err_u.h2, err_u.h2),
                    h1: rate(prev.err_u.h1, err_u.h1),
                    l2: rate(prev.err_u.l2, err_u.l2),
                },
                RateTriple {
                    h2: rate(prev.err_v.h2, err_v.h2),
                    h1: rate(prev.err_v.h1, err_v.h1),
                    l2: rate(prev.err_v.l2, err_v.l2),
                },
            ),
            None => (RateTriple::default(), RateTriple::default()),
        };
        self.rows.push(LevelRow {
            level,
            n,
            unknowns,
            h,
            err_u,
            err_v,
            rate_u,
            rate_v,
        });
    }

    /// One error column as a vector, for rate fitting.
    pub fn column(&self, field: char, order: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let triple = if field == 'u' { row.err_u } else { row.err_v };
                match order {
                    2 => triple.h2,
                    1 => triple.h1,
                    _ => triple.l2,
                }
            })
            .collect()
    }
}
