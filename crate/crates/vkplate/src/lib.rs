//! Nonconforming Morley finite element solver for the clamped von Kármán
//! plate equations
//!
//! ```text
//!     Δ²u = [u,v] − (p/D)Δu + f₁
//!     Δ²v = −½[u,u]        + f₂     in Ω,    u = ∂u/∂ν = v = ∂v/∂ν = 0 on ∂Ω
//! ```
//!
//! where `u` is the vertical displacement, `v` the Airy stress function and
//! `[η,χ] = η_xx χ_yy + η_yy χ_xx − 2η_xy χ_xy` the von Kármán bracket.
//! The discrete spaces are Morley triangles (piecewise quadratics with vertex
//! values and edge-midpoint normal derivatives as degrees of freedom), the
//! nonlinear system is solved by Newton's method, and the crate ships a
//! convergence-study harness with manufactured solutions on the unit square
//! and on an L-shaped domain with a reentrant corner singularity.
//!
//! Module map:
//! - [`mesh`]: criss-cross triangulations, uniform red refinement, connectivity
//! - [`quadrature`]: symmetric Gaussian rules on triangles
//! - [`morley`]: DOF management, element basis, interpolation, evaluation
//! - [`forms`]: assembly of the discrete bilinear/trilinear forms and the
//!   Newton-linearized systems
//! - [`solver`]: sparse direct solves and the Newton outer loop
//! - [`problems`]: manufactured exact solutions and derived right-hand sides
//! - [`analysis`]: broken-norm errors and experimental convergence orders
//! - [`cli`]: experiment driver, CSV/metadata output, plot scripts

pub mod analysis;
pub mod cli;
pub mod forms;
pub mod mesh;
pub mod morley;
pub mod problems;
pub mod quadrature;
pub mod solver;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh parameter n must be at least 1")]
    InvalidMeshParameter,
    #[error("triangle {triangle} is invalid: {reason}")]
    InvalidTriangle { triangle: usize, reason: String },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("vertex index {0} out of range")]
    VertexIndexOutOfRange(usize),
    #[error("triangle {0} is degenerate: Morley interpolation system is singular")]
    DegenerateTriangle(usize),
    #[error("unsupported quadrature degree {0}; supported range is 1..=10")]
    UnsupportedQuadratureDegree(usize),
    #[error("derivative order {0} not supported (expected 0, 1 or 2)")]
    UnsupportedOrder(usize),
    #[error("point ({0}, {1}) lies outside triangle {2}")]
    PointOutsideTriangle(f64, f64, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {context} at ({x}, {y})")]
    NonFiniteValue { context: String, x: f64, y: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("problem has no free degrees of freedom")]
    NoFreeDofs,
    #[error("clamped boundary conditions violated by {field} at ({x}, {y}): |value| = {value:e}")]
    BoundaryConditionViolated { field: String, x: f64, y: f64, value: f64 },
    #[error("Newton iteration failed to converge: {0}")]
    NewtonDidNotConverge(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed CSV report: {0}")]
    MalformedCsv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
