//! Assembly of the discrete forms over the Morley space: the biharmonic
//! form `a_h(η,χ) = Σ_T ∫_T D²η : D²χ`, the trilinear form
//! `b_h(η,χ,φ) = ½ Σ_T ∫_T cof(D²η)∇χ·∇φ`, the broken-gradient form
//! `−(p/D) Σ_T ∫_T ∇θ₁·∇φ₁`, the load functional, and the Newton-linearized
//! block systems built from them.
//!
//! Element loops are deterministic (triangle order, serial accumulation), so
//! repeated assembly of the same problem is bit-identical.

use crate::mesh::{Mesh, Point2};
use crate::morley::{element_basis, DofMap, StateVector};
use crate::problems::ManufacturedProblem;
use crate::quadrature::{triangle_rule, QuadratureDegrees, TriangleRule};
use crate::{Error, Result};

/// Triplet-accumulating sparse matrix; duplicates sum on [`compress`].
///
/// [`compress`]: SparseMatrix::compress
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
    compressed: bool,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            triplets: Vec::new(),
            compressed: false,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.triplets.push((row, col, value));
        self.compressed = false;
    }

    /// Appends `factor · other` into the block at `(row_offset, col_offset)`.
    pub fn push_block(&mut self, other: &SparseMatrix, row_offset: usize, col_offset: usize, factor: f64) {
        debug_assert!(row_offset + other.nrows <= self.nrows);
        debug_assert!(col_offset + other.ncols <= self.ncols);
        for &(r, c, v) in &other.triplets {
            self.triplets.push((r + row_offset, c + col_offset, factor * v));
        }
        self.compressed = false;
    }

    /// Sorts row-major and accumulates duplicate entries.
    pub fn compress(&mut self) {
        self.triplets
            .sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.triplets.len());
        for &(r, c, v) in &self.triplets {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        self.triplets = out;
        self.compressed = true;
    }

    pub fn is_compressed(&self) -> bool {
        self.compressed
    }

    /// Raw (row, col, value) entries; sorted row-major once compressed.
    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Row-wise iteration over a compressed matrix.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[(usize, usize, f64)])> {
        assert!(self.compressed, "rows() requires a compressed matrix");
        RowIter {
            triplets: &self.triplets,
            start: 0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    /// Dense copy for small matrices in tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for &(r, c, v) in &self.triplets {
            dense[r][c] += v;
        }
        dense
    }
}

struct RowIter<'a> {
    triplets: &'a [(usize, usize, f64)],
    start: usize,
}

impl<'a> Iterator for RowIter<'a> {
    type Item = (usize, &'a [(usize, usize, f64)]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.start >= self.triplets.len() {
            return None;
        }
        let row = self.triplets[self.start].0;
        let mut end = self.start;
        while end < self.triplets.len() && self.triplets[end].0 == row {
            end += 1;
        }
        let slice = &self.triplets[self.start..end];
        self.start = end;
        Some((row, slice))
    }
}

/// Which argument of `b_h` the fixed coefficient vector occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrilinearSlot {
    /// `N₁(w)[χ,φ] = b_h(w, χ, φ)`: w supplies the cofactor matrix.
    Cofactor,
    /// `N₂(w)[η,φ] = b_h(η, w, φ)`: w supplies the transported gradient.
    Gradient,
}

/// Stiffness matrix of the broken biharmonic form on the free DOFs.
///
/// Morley Hessians are constant per triangle, so the element matrix is
/// exactly `|T| · (D²φᵢ : D²φⱼ)`; no quadrature is involved.
pub fn assemble_biharmonic(mesh: &Mesh, dofmap: &DofMap) -> Result<SparseMatrix> {
    let n = dofmap.n_free;
    let mut matrix = SparseMatrix::new(n, n);
    for t in 0..mesh.triangles.len() {
        let basis = element_basis(mesh, t)?;
        let hess = basis.hessians();
        let area = mesh.triangle_area(t);
        let dofs = dofmap.local_dofs(mesh, t);
        for (i, di) in dofs.iter().enumerate() {
            let Some(row) = di else { continue };
            for (j, dj) in dofs.iter().enumerate() {
                let Some(col) = dj else { continue };
                let frob = hess[i][0] * hess[j][0]
                    + 2.0 * hess[i][1] * hess[j][1]
                    + hess[i][2] * hess[j][2];
                matrix.push(*row, *col, area * frob);
            }
        }
    }
    matrix.compress();
    Ok(matrix)
}

fn cofactor(h: &[f64; 3]) -> [f64; 3] {
    // cof [[a, b], [b, c]] = [[c, −b], [−b, a]] stored as (xx, xy, yy)
    [h[2], -h[1], h[0]]
}

fn apply_sym(m: &[f64; 3], g: &[f64; 2]) -> [f64; 2] {
    [m[0] * g[0] + m[1] * g[1], m[1] * g[0] + m[2] * g[1]]
}

/// Matrix of the trilinear form with `w` frozen in the given slot; the
/// integrand is quadratic, so the assembly rule integrates it exactly.
pub fn assemble_trilinear(
    mesh: &Mesh,
    dofmap: &DofMap,
    w: &[f64],
    slot: TrilinearSlot,
    degree: usize,
) -> Result<SparseMatrix> {
    let n = dofmap.n_free;
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let rule = triangle_rule(degree)?;
    let mut matrix = SparseMatrix::new(n, n);
    let mut element = [[0.0; 6]; 6];
    for t in 0..mesh.triangles.len() {
        let basis = element_basis(mesh, t)?;
        let hess = basis.hessians();
        let area = mesh.triangle_area(t);
        let dofs = dofmap.local_dofs(mesh, t);
        let w_local = dofmap.gather(mesh, t, w);

        for row in &mut element {
            row.fill(0.0);
        }
        match slot {
            TrilinearSlot::Cofactor => {
                let mut hw = [0.0; 3];
                for (c, h) in w_local.iter().zip(&hess) {
                    hw[0] += c * h[0];
                    hw[1] += c * h[1];
                    hw[2] += c * h[2];
                }
                let cof = cofactor(&hw);
                for (point, weight) in rule_points(&rule, mesh, t) {
                    let grads = basis.gradients(point);
                    let scale = 0.5 * weight * area;
                    for j in 0..6 {
                        let transported = apply_sym(&cof, &grads[j]);
                        for i in 0..6 {
                            element[i][j] +=
                                scale * (transported[0] * grads[i][0] + transported[1] * grads[i][1]);
                        }
                    }
                }
            }
            TrilinearSlot::Gradient => {
                for (point, weight) in rule_points(&rule, mesh, t) {
                    let grads = basis.gradients(point);
                    let mut grad_w = [0.0; 2];
                    for (c, g) in w_local.iter().zip(&grads) {
                        grad_w[0] += c * g[0];
                        grad_w[1] += c * g[1];
                    }
                    let scale = 0.5 * weight * area;
                    for j in 0..6 {
                        let transported = apply_sym(&cofactor(&hess[j]), &grad_w);
                        for i in 0..6 {
                            element[i][j] +=
                                scale * (transported[0] * grads[i][0] + transported[1] * grads[i][1]);
                        }
                    }
                }
            }
        }

        scatter(&mut matrix, &dofs, &element);
    }
    matrix.compress();
    Ok(matrix)
}

/// The membrane form `−(p/D) Σ_T ∫_T ∇φⱼ·∇φᵢ` on the free DOFs.
pub fn assemble_gradient(
    mesh: &Mesh,
    dofmap: &DofMap,
    p_over_d: f64,
    degree: usize,
) -> Result<SparseMatrix> {
    let n = dofmap.n_free;
    let rule = triangle_rule(degree)?;
    let mut matrix = SparseMatrix::new(n, n);
    let mut element = [[0.0; 6]; 6];
    for t in 0..mesh.triangles.len() {
        let basis = element_basis(mesh, t)?;
        let area = mesh.triangle_area(t);
        let dofs = dofmap.local_dofs(mesh, t);
        for row in &mut element {
            row.fill(0.0);
        }
        for (point, weight) in rule_points(&rule, mesh, t) {
            let grads = basis.gradients(point);
            let scale = -p_over_d * weight * area;
            for i in 0..6 {
                for j in 0..6 {
                    element[i][j] += scale * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                }
            }
        }
        scatter(&mut matrix, &dofs, &element);
    }
    matrix.compress();
    Ok(matrix)
}

fn rule_points<'a>(
    rule: &'a TriangleRule,
    mesh: &'a Mesh,
    t: usize,
) -> impl Iterator<Item = (Point2, f64)> + 'a {
    let [a, b, c] = mesh.triangle_vertices(t);
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(move |(l, &w)| (a * l[0] + b * l[1] + c * l[2], w))
}

fn scatter(matrix: &mut SparseMatrix, dofs: &[Option<usize>; 6], element: &[[f64; 6]; 6]) {
    for (i, di) in dofs.iter().enumerate() {
        let Some(row) = di else { continue };
        for (j, dj) in dofs.iter().enumerate() {
            let Some(col) = dj else { continue };
            matrix.push(*row, *col, element[i][j]);
        }
    }
}

/// Load vector `[(f₁, φᵢ); (f₂, φᵢ)]` over the block layout, evaluating both
/// components with a single callback per quadrature point.
pub fn assemble_load_pair<F>(
    mesh: &Mesh,
    dofmap: &DofMap,
    rhs: F,
    degree: usize,
) -> Result<Vec<f64>>
where
    F: Fn(Point2) -> (f64, f64),
{
    let n = dofmap.n_free;
    let rule = triangle_rule(degree)?;
    let mut load = vec![0.0; 2 * n];
    for t in 0..mesh.triangles.len() {
        let basis = element_basis(mesh, t)?;
        let area = mesh.triangle_area(t);
        let dofs = dofmap.local_dofs(mesh, t);
        for (point, weight) in rule_points(&rule, mesh, t) {
            let (f1, f2) = rhs(point);
            if !f1.is_finite() || !f2.is_finite() {
                return Err(Error::NonFiniteValue {
                    context: "load integrand".into(),
                    x: point.x,
                    y: point.y,
                });
            }
            let values = basis.values(point);
            let scale = weight * area;
            for (val, dof) in values.iter().zip(&dofs) {
                if let Some(d) = dof {
                    load[*d] += scale * f1 * val;
                    load[n + *d] += scale * f2 * val;
                }
            }
        }
    }
    Ok(load)
}

/// Load vector from two independent scalar fields.
pub fn assemble_load<F1, F2>(
    mesh: &Mesh,
    dofmap: &DofMap,
    f1: F1,
    f2: F2,
    degree: usize,
) -> Result<Vec<f64>>
where
    F1: Fn(Point2) -> f64,
    F2: Fn(Point2) -> f64,
{
    assemble_load_pair(mesh, dofmap, |p| (f1(p), f2(p)), degree)
}

/// State-independent parts of the discrete problem: stiffness, membrane
/// matrix (if p/D ≠ 0) and load vector.
pub struct DiscreteProblem {
    pub stiffness: SparseMatrix,
    pub membrane: Option<SparseMatrix>,
    pub load: Vec<f64>,
}

/// Assembles the state-independent operators for a manufactured problem.
pub fn discretize(
    mesh: &Mesh,
    dofmap: &DofMap,
    problem: &ManufacturedProblem,
    quad: &QuadratureDegrees,
) -> Result<DiscreteProblem> {
    let stiffness = assemble_biharmonic(mesh, dofmap)?;
    let membrane = if problem.p_over_d != 0.0 {
        Some(assemble_gradient(
            mesh,
            dofmap,
            problem.p_over_d,
            quad.assembly,
        )?)
    } else {
        None
    };
    let load = assemble_load_pair(mesh, dofmap, |p| problem.rhs_pair(p), quad.load)?;
    Ok(DiscreteProblem {
        stiffness,
        membrane,
        load,
    })
}

/// One Newton step's linear system.
pub struct AssembledSystem {
    /// Block Jacobian over `2·n_free` unknowns, u-DOFs then v-DOFs.
    pub jacobian: SparseMatrix,
    pub rhs: Vec<f64>,
}

/// Builds the Newton system linearized at `prev = (ū, v̄)`:
///
/// ```text
/// row u:  K·u + C·u + [N₁(v̄)+N₂(v̄)]·u + [N₁(ū)+N₂(ū)]·v = b_h(ū,v̄,·) + b_h(v̄,ū,·) + load_u
/// row v:  K·v − [N₁(ū)+N₂(ū)]·u                          = −b_h(ū,ū,·) + load_v
/// ```
///
/// which is the derivative of [`residual`] at `prev` applied to the new
/// iterate, with the quadratic remainder moved to the right-hand side.
pub fn newton_system(
    mesh: &Mesh,
    dofmap: &DofMap,
    problem: &DiscreteProblem,
    prev: &StateVector,
    assembly_degree: usize,
) -> Result<AssembledSystem> {
    let n = dofmap.n_free;
    if prev.n_free() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: prev.n_free(),
        });
    }
    let n1_u = assemble_trilinear(mesh, dofmap, &prev.u, TrilinearSlot::Cofactor, assembly_degree)?;
    let n1_v = assemble_trilinear(mesh, dofmap, &prev.v, TrilinearSlot::Cofactor, assembly_degree)?;
    let n2_u = assemble_trilinear(mesh, dofmap, &prev.u, TrilinearSlot::Gradient, assembly_degree)?;
    let n2_v = assemble_trilinear(mesh, dofmap, &prev.v, TrilinearSlot::Gradient, assembly_degree)?;

    let mut jacobian = SparseMatrix::new(2 * n, 2 * n);
    jacobian.push_block(&problem.stiffness, 0, 0, 1.0);
    if let Some(c) = &problem.membrane {
        jacobian.push_block(c, 0, 0, 1.0);
    }
    jacobian.push_block(&n1_v, 0, 0, 1.0);
    jacobian.push_block(&n2_v, 0, 0, 1.0);
    jacobian.push_block(&n1_u, 0, n, 1.0);
    jacobian.push_block(&n2_u, 0, n, 1.0);
    jacobian.push_block(&n1_u, n, 0, -1.0);
    jacobian.push_block(&n2_u, n, 0, -1.0);
    jacobian.push_block(&problem.stiffness, n, n, 1.0);
    jacobian.compress();

    let b_uv = n1_u.matvec(&prev.v); // b_h(ū, v̄, φᵢ)
    let b_vu = n1_v.matvec(&prev.u); // b_h(v̄, ū, φᵢ)
    let b_uu = n1_u.matvec(&prev.u); // b_h(ū, ū, φᵢ)
    let mut rhs = problem.load.clone();
    for i in 0..n {
        rhs[i] += b_uv[i] + b_vu[i];
        rhs[n + i] -= b_uu[i];
    }

    Ok(AssembledSystem { jacobian, rhs })
}

/// Residual of the discrete nonlinear system at `state`:
/// `ρ = A_h Ψ + B_h(Ψ,Ψ,·) + 𝔠_h Ψ − L_h` in the block layout.
pub fn residual(
    mesh: &Mesh,
    dofmap: &DofMap,
    problem: &DiscreteProblem,
    state: &StateVector,
    assembly_degree: usize,
) -> Result<Vec<f64>> {
    let n = dofmap.n_free;
    if state.n_free() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.n_free(),
        });
    }
    let n1_u = assemble_trilinear(mesh, dofmap, &state.u, TrilinearSlot::Cofactor, assembly_degree)?;
    let n1_v = assemble_trilinear(mesh, dofmap, &state.v, TrilinearSlot::Cofactor, assembly_degree)?;
    let ku = problem.stiffness.matvec(&state.u);
    let kv = problem.stiffness.matvec(&state.v);
    let b_uv = n1_u.matvec(&state.v);
    let b_vu = n1_v.matvec(&state.u);
    let b_uu = n1_u.matvec(&state.u);
    let cu = problem
        .membrane
        .as_ref()
        .map(|c| c.matvec(&state.u));

    let mut rho = vec![0.0; 2 * n];
    for i in 0..n {
        rho[i] = ku[i] + b_uv[i] + b_vu[i] - problem.load[i];
        if let Some(cu) = &cu {
            rho[i] += cu[i];
        }
        rho[n + i] = kv[i] - b_uu[i] - problem.load[n + i];
    }
    Ok(rho)
}
