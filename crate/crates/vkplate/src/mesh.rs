//! Triangulations of the unit square and the L-shaped domain.
//!
//! Meshes are criss-cross patterns (each square cell split into four
//! triangles by both diagonals, with a center vertex) plus uniform red
//! refinement. Connectivity conventions:
//! - triangles are counterclockwise vertex triples
//! - edges store their vertices with the lower index first
//! - the global unit normal of an edge is the direction from the
//!   lower-indexed to the higher-indexed endpoint rotated by +90°
//! - local edge `k` of a triangle is the edge opposite local vertex `k`
//!
//! Generated meshes index grid vertices lexicographically by (y, x) with the
//! cell-center vertices appended afterwards, so DOF numbering is reproducible.

use std::collections::HashMap;
use std::io::Write;
use std::ops::{Add, Mul, Sub};

use crate::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// z-component of the cross product `self × other`.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Rotation by +90° (counterclockwise).
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// An edge of the triangulation.
#[derive(Clone, Debug)]
pub struct Edge {
    /// Endpoint vertex indices, lower index first.
    pub vertices: [usize; 2],
    pub midpoint: Point2,
    /// Edge length h_e.
    pub length: f64,
    /// Global unit normal: (higher − lower) endpoint direction rotated +90°.
    pub normal: Point2,
    /// Adjacent triangle indices; the second entry is `None` on the boundary.
    pub triangles: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1].is_none()
    }
}

/// An immutable triangulation with full edge connectivity.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// For each triangle, the edge index opposite each local vertex.
    pub triangle_edges: Vec<[usize; 3]>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
    /// Mesh size: max over triangles of diam(T).
    pub h: f64,
}

/// Summary counts reported by [`mesh_stats`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub boundary_vertices: usize,
    pub boundary_edges: usize,
}

impl Mesh {
    /// Builds a mesh from vertices and counterclockwise triangles, deriving
    /// the edge table, boundary flags and mesh size.
    pub fn from_raw(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for tri in &triangles {
            for &v in tri {
                if v >= nv {
                    return Err(Error::VertexIndexOutOfRange(v));
                }
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            let area = signed_area(&vertices, tri);
            if !(area > 0.0) {
                return Err(Error::InvalidTriangle {
                    triangle: t,
                    reason: format!("signed area {area} is not positive"),
                });
            }
        }

        // Edge table, indexed in order of first encounter over triangles.
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    let (lo, hi) = key;
                    let p = vertices[lo];
                    let q = vertices[hi];
                    let length = (q - p).norm();
                    let dir = (q - p) * (1.0 / length);
                    edges.push(Edge {
                        vertices: [lo, hi],
                        midpoint: p.midpoint(q),
                        length,
                        normal: dir.perp(),
                        triangles: [None, None],
                    });
                    edges.len() - 1
                });
                let slots = &mut edges[e].triangles;
                if slots[0].is_none() {
                    slots[0] = Some(t);
                } else if slots[1].is_none() {
                    slots[1] = Some(t);
                } else {
                    let [lo, hi] = edges[e].vertices;
                    return Err(Error::NonManifoldEdge(lo, hi));
                }
                triangle_edges[t][k] = e;
            }
        }

        let boundary_edge: Vec<bool> = edges.iter().map(Edge::is_boundary).collect();
        let mut boundary_vertex = vec![false; nv];
        for (e, edge) in edges.iter().enumerate() {
            if boundary_edge[e] {
                boundary_vertex[edge.vertices[0]] = true;
                boundary_vertex[edge.vertices[1]] = true;
            }
        }

        let mut h: f64 = 0.0;
        for tri in &triangles {
            h = h.max(triangle_diam(&vertices, tri));
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            boundary_vertex,
            boundary_edge,
            h,
        })
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn triangle_diam(&self, t: usize) -> f64 {
        triangle_diam(&self.vertices, &self.triangles[t])
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangle_vertices(t);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Plain-text dump: header `V E T`, vertex lines `x y`, triangle lines
    /// `i j k`, edge lines `i j boundary_flag`.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "{} {} {}",
            self.vertices.len(),
            self.edges.len(),
            self.triangles.len()
        )?;
        for p in &self.vertices {
            writeln!(w, "{} {}", p.x, p.y)?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for (e, edge) in self.edges.iter().enumerate() {
            writeln!(
                w,
                "{} {} {}",
                edge.vertices[0],
                edge.vertices[1],
                u8::from(self.boundary_edge[e])
            )?;
        }
        Ok(())
    }
}

fn signed_area(vertices: &[Point2], tri: &[usize; 3]) -> f64 {
    let a = vertices[tri[0]];
    let b = vertices[tri[1]];
    let c = vertices[tri[2]];
    0.5 * (b - a).cross(c - a)
}

fn triangle_diam(vertices: &[Point2], tri: &[usize; 3]) -> f64 {
    let a = vertices[tri[0]];
    let b = vertices[tri[1]];
    let c = vertices[tri[2]];
    (b - a).norm().max((c - b).norm()).max((a - c).norm())
}

/// Read-out of mesh counts.
pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    MeshStats {
        vertices: mesh.vertices.len(),
        edges: mesh.edges.len(),
        triangles: mesh.triangles.len(),
        boundary_vertices: mesh.boundary_vertex.iter().filter(|&&b| b).count(),
        boundary_edges: mesh.boundary_edge.iter().filter(|&&b| b).count(),
    }
}

/// Criss-cross triangulation of the unit square: n×n congruent cells, each
/// split into 4 triangles by both diagonals.
///
/// Counts: V = (n+1)² + n², T = 4n², E = V + T − 1.
pub fn unit_square_crisscross(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMeshParameter);
    }
    let step = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * step, j as f64 * step));
        }
    }
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let center_base = vertices.len();
    for cj in 0..n {
        for ci in 0..n {
            vertices.push(Point2::new(
                (ci as f64 + 0.5) * step,
                (cj as f64 + 0.5) * step,
            ));
        }
    }
    let mut triangles = Vec::with_capacity(4 * n * n);
    for cj in 0..n {
        for ci in 0..n {
            let sw = grid(ci, cj);
            let se = grid(ci + 1, cj);
            let ne = grid(ci + 1, cj + 1);
            let nw = grid(ci, cj + 1);
            let c = center_base + cj * n + ci;
            triangles.push([sw, se, c]);
            triangles.push([se, ne, c]);
            triangles.push([ne, nw, c]);
            triangles.push([nw, sw, c]);
        }
    }
    Mesh::from_raw(vertices, triangles)
}

/// Criss-cross triangulation of the L-shaped domain
/// Ω = (−1,1)² ∖ ([0,1)×(−1,0]): each of the three unit squares composing
/// the L is split into n×n criss-crossed cells. The reentrant corner at the
/// origin is a boundary vertex.
pub fn l_shape_crisscross(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMeshParameter);
    }
    let step = 1.0 / n as f64;
    let m = 2 * n; // cells per side of the bounding square
    let cell_in_domain = |ci: usize, cj: usize| !(ci >= n && cj < n);

    // Grid vertices of included cells, lexicographic by (y, x).
    let mut vertices = Vec::new();
    let mut grid_index = HashMap::new();
    for j in 0..=m {
        for i in 0..=m {
            let corner_of_domain_cell =
                ci_range(i, m).any(|ci| cj_range(j, m).any(|cj| cell_in_domain(ci, cj)));
            if corner_of_domain_cell {
                grid_index.insert((i, j), vertices.len());
                vertices.push(Point2::new(-1.0 + i as f64 * step, -1.0 + j as f64 * step));
            }
        }
    }
    let mut centers = HashMap::new();
    for cj in 0..m {
        for ci in 0..m {
            if cell_in_domain(ci, cj) {
                centers.insert((ci, cj), vertices.len());
                vertices.push(Point2::new(
                    -1.0 + (ci as f64 + 0.5) * step,
                    -1.0 + (cj as f64 + 0.5) * step,
                ));
            }
        }
    }

    let mut triangles = Vec::new();
    for cj in 0..m {
        for ci in 0..m {
            if !cell_in_domain(ci, cj) {
                continue;
            }
            let sw = grid_index[&(ci, cj)];
            let se = grid_index[&(ci + 1, cj)];
            let ne = grid_index[&(ci + 1, cj + 1)];
            let nw = grid_index[&(ci, cj + 1)];
            let c = centers[&(ci, cj)];
            triangles.push([sw, se, c]);
            triangles.push([se, ne, c]);
            triangles.push([ne, nw, c]);
            triangles.push([nw, sw, c]);
        }
    }
    Mesh::from_raw(vertices, triangles)
}

fn ci_range(i: usize, m: usize) -> std::ops::Range<usize> {
    i.saturating_sub(1)..(i + 1).min(m)
}

fn cj_range(j: usize, m: usize) -> std::ops::Range<usize> {
    j.saturating_sub(1)..(j + 1).min(m)
}

/// Uniform red refinement: each triangle is divided into four similar
/// triangles through its edge midpoints. The new vertex set is the old
/// vertices followed by one midpoint per old edge (in edge order); the mesh
/// size halves exactly and boundary flags carry over through the rebuilt
/// connectivity.
pub fn red_refine(mesh: &Mesh) -> Mesh {
    let old_nv = mesh.vertices.len();
    let mut vertices = mesh.vertices.clone();
    vertices.extend(mesh.edges.iter().map(|e| e.midpoint));

    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = *tri;
        // Midpoint opposite local vertex k lies on local edge k.
        let mab = old_nv + mesh.triangle_edges[t][2];
        let mbc = old_nv + mesh.triangle_edges[t][0];
        let mca = old_nv + mesh.triangle_edges[t][1];
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }
    Mesh::from_raw(vertices, triangles).expect("red refinement of a valid mesh is valid")
}
