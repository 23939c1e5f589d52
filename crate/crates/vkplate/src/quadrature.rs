//! Symmetric Gaussian quadrature rules on triangles.
//!
//! Rules are stored as symmetry orbits in barycentric coordinates with
//! weights normalized to sum to one; integrals are scaled by the triangle
//! area on use. Every rule has positive weights and strictly interior
//! points, which keeps singular manufactured right-hand sides (finite away
//! from the corner vertex) evaluable.

use crate::mesh::{Mesh, Point2};
use crate::{Error, Result};

/// A quadrature rule on the (arbitrary) triangle in barycentric form.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    /// Barycentric coordinates (λ₁, λ₂, λ₃) of each node, all strictly positive.
    pub points: Vec<[f64; 3]>,
    /// Weights normalized so that Σ wᵢ = 1.
    pub weights: Vec<f64>,
    /// All bivariate polynomials up to this total degree integrate exactly.
    pub degree: usize,
}

/// Quadrature degrees used by the assembly and analysis pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureDegrees {
    /// Bilinear/trilinear form assembly (integrands are at most quadratic).
    pub assembly: usize,
    /// Load functional (f, φ).
    pub load: usize,
    /// Broken-norm error integrals.
    pub error: usize,
}

impl Default for QuadratureDegrees {
    fn default() -> Self {
        Self {
            assembly: 4,
            load: 6,
            error: 6,
        }
    }
}

enum Orbit {
    /// The centroid.
    Centroid(f64),
    /// Permutations of (1−2b, b, b): 3 points.
    S3 { w: f64, b: f64 },
    /// Permutations of (1−b−c, b, c): 6 points.
    S6 { w: f64, b: f64, c: f64 },
}

use Orbit::{Centroid, S3, S6};

/// Verified orbit tables; moment residuals are below 1e-16 for each rule.
fn orbits(degree: usize) -> Option<(usize, Vec<Orbit>)> {
    let sqrt15 = 15.0_f64.sqrt();
    match degree {
        1 => Some((1, vec![Centroid(1.0)])),
        2 => Some((
            2,
            vec![S3 {
                w: 1.0 / 3.0,
                b: 1.0 / 6.0,
            }],
        )),
        4 => Some((
            4,
            vec![
                S3 {
                    w: 1.0995174365532195e-1,
                    b: 9.1576213509770757e-2,
                },
                S3 {
                    w: 2.2338158967801139e-1,
                    b: 4.4594849091596483e-1,
                },
            ],
        )),
        5 => Some((
            5,
            vec![
                Centroid(9.0 / 40.0),
                S3 {
                    w: (155.0 + sqrt15) / 1200.0,
                    b: (6.0 + sqrt15) / 21.0,
                },
                S3 {
                    w: (155.0 - sqrt15) / 1200.0,
                    b: (6.0 - sqrt15) / 21.0,
                },
            ],
        )),
        6 => Some((
            6,
            vec![
                S3 {
                    w: 1.1678627572641531e-1,
                    b: 2.4928674517088953e-1,
                },
                S3 {
                    w: 5.0844906370212835e-2,
                    b: 6.3089014491506515e-2,
                },
                S6 {
                    w: 8.2851075618352615e-2,
                    b: 3.1035245103380010e-1,
                    c: 6.3650249912139800e-1,
                },
            ],
        )),
        8 => Some((
            8,
            vec![
                Centroid(1.4431560767772109e-1),
                S3 {
                    w: 9.5091634267330569e-2,
                    b: 4.5929258829267405e-1,
                },
                S3 {
                    w: 1.0321737053472606e-1,
                    b: 1.7056930775170226e-1,
                },
                S3 {
                    w: 3.2458497623203818e-2,
                    b: 5.0547228317031630e-2,
                },
                S6 {
                    w: 2.7230314174416275e-2,
                    b: 2.6311282963480609e-1,
                    c: 7.2849239295530732e-1,
                },
            ],
        )),
        10 => Some((
            10,
            vec![
                Centroid(9.0817990382941124e-2),
                S3 {
                    w: 3.6725957756372669e-2,
                    b: 4.8557763338372373e-1,
                },
                S3 {
                    w: 4.5321059435512866e-2,
                    b: 1.0948157548501861e-1,
                },
                S6 {
                    w: 7.2757916845492127e-2,
                    b: 1.4170721941470749e-1,
                    c: 3.0793983876417164e-1,
                },
                S6 {
                    w: 2.8327242531014225e-2,
                    b: 2.5003534762643831e-2,
                    c: 2.4667256063979609e-1,
                },
                S6 {
                    w: 9.4216669637273553e-3,
                    b: 9.5408154003081176e-3,
                    c: 6.6803251012169468e-2,
                },
            ],
        )),
        _ => None,
    }
}

/// A rule exact for all polynomials up to total degree `degree`.
///
/// Requests in `1..=10` are supported; when no symmetric positive-interior
/// rule of the exact degree exists, the next stronger rule is returned, so
/// `rule.degree >= degree` always holds.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if degree == 0 || degree > 10 {
        return Err(Error::UnsupportedQuadratureDegree(degree));
    }
    // no symmetric positive-interior rule of exactly these degrees: round up
    let lookup = match degree {
        3 => 4,
        7 => 8,
        9 => 10,
        d => d,
    };
    let (exact_degree, orbit_list) = orbits(lookup).expect("supported degree");
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in &orbit_list {
        match *orbit {
            Centroid(w) => {
                points.push([1.0 / 3.0; 3]);
                weights.push(w);
            }
            S3 { w, b } => {
                let a = 1.0 - 2.0 * b;
                for p in [[a, b, b], [b, a, b], [b, b, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            S6 { w, b, c } => {
                let a = 1.0 - b - c;
                for p in [
                    [a, b, c],
                    [a, c, b],
                    [b, a, c],
                    [b, c, a],
                    [c, a, b],
                    [c, b, a],
                ] {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        degree: exact_degree.max(degree),
    })
}

impl TriangleRule {
    /// Physical node positions on triangle `t` of `mesh`.
    pub fn physical_points(&self, mesh: &Mesh, t: usize) -> Vec<Point2> {
        let [a, b, c] = mesh.triangle_vertices(t);
        self.points
            .iter()
            .map(|l| a * l[0] + b * l[1] + c * l[2])
            .collect()
    }

    /// Integrates `f` over triangle `t`.
    pub fn integrate<F: FnMut(Point2) -> f64>(&self, mesh: &Mesh, t: usize, mut f: F) -> f64 {
        let [a, b, c] = mesh.triangle_vertices(t);
        let area = mesh.triangle_area(t);
        let mut sum = 0.0;
        for (l, w) in self.points.iter().zip(&self.weights) {
            sum += w * f(a * l[0] + b * l[1] + c * l[2]);
        }
        area * sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use rand::{Rng, SeedableRng};

    /// Exact ∫_T x^i y^j over an arbitrary triangle, computed by expanding
    /// the affine map onto the reference triangle with small dense bivariate
    /// polynomials (independent of the quadrature rules under test).
    fn exact_monomial_integral(tri: [Point2; 3], i: usize, j: usize) -> f64 {
        const N: usize = 22;
        type Poly = Vec<[f64; N]>; // coeffs[p][q] multiplies s^p t^q

        fn mul(a: &Poly, b: &Poly) -> Poly {
            let mut out: Poly = vec![[0.0; N]; N];
            for p1 in 0..N {
                for q1 in 0..N {
                    if a[p1][q1] == 0.0 {
                        continue;
                    }
                    for p2 in 0..N - p1 {
                        for q2 in 0..N - q1 {
                            if b[p2][q2] != 0.0 {
                                out[p1 + p2][q1 + q2] += a[p1][q1] * b[p2][q2];
                            }
                        }
                    }
                }
            }
            out
        }

        fn affine(c0: f64, cs: f64, ct: f64) -> Poly {
            let mut p: Poly = vec![[0.0; N]; N];
            p[0][0] = c0;
            p[1][0] = cs;
            p[0][1] = ct;
            p
        }

        fn factorial(k: usize) -> f64 {
            (1..=k).map(|v| v as f64).product()
        }

        let [a, b, c] = tri;
        // x(s,t) and y(s,t) on the reference triangle
        let x = affine(a.x, b.x - a.x, c.x - a.x);
        let y = affine(a.y, b.y - a.y, c.y - a.y);
        let mut poly = affine(1.0, 0.0, 0.0);
        for _ in 0..i {
            poly = mul(&poly, &x);
        }
        for _ in 0..j {
            poly = mul(&poly, &y);
        }
        let jac = (b - a).cross(c - a); // 2·area, sign included
        let mut total = 0.0;
        for p in 0..N {
            for q in 0..N {
                if poly[p][q] != 0.0 {
                    // ∫_ref s^p t^q = p! q! / (p+q+2)!
                    total += poly[p][q] * factorial(p) * factorial(q) / factorial(p + q + 2);
                }
            }
        }
        jac * total
    }

    fn random_ccw_triangle(rng: &mut impl Rng) -> [Point2; 3] {
        loop {
            let mut pts = [Point2::default(); 3];
            for p in &mut pts {
                *p = Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            }
            let doubled_area = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
            if doubled_area > 0.3 {
                return pts;
            }
        }
    }

    fn single_triangle_mesh(tri: [Point2; 3]) -> Mesh {
        Mesh::from_raw(tri.to_vec(), vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn degree_one_is_centroid_rule() {
        let rule = triangle_rule(1).unwrap();
        assert_eq!(rule.points.len(), 1);
        assert_eq!(rule.weights, vec![1.0]);
        assert_eq!(rule.points[0], [1.0 / 3.0; 3]);
    }

    #[test]
    fn unsupported_degrees_rejected() {
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(11).is_err());
    }

    #[test]
    fn weights_positive_points_interior_sum_one() {
        for degree in 1..=10 {
            let rule = triangle_rule(degree).unwrap();
            assert!(rule.degree >= degree);
            let sum: f64 = rule.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14, "degree {degree}: Σw = {sum}");
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                assert!(*w > 0.0);
                assert!(l.iter().all(|&li| li > 1e-3), "node {l:?} not interior");
                assert!((l[0] + l[1] + l[2] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exactness_sweep_against_analytic_moments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for degree in 1..=10 {
            let rule = triangle_rule(degree).unwrap();
            for _ in 0..5 {
                let tri = random_ccw_triangle(&mut rng);
                let mesh = single_triangle_mesh(tri);
                for i in 0..=rule.degree {
                    for j in 0..=(rule.degree - i) {
                        let exact = exact_monomial_integral(tri, i, j);
                        let approx =
                            rule.integrate(&mesh, 0, |p| p.x.powi(i as i32) * p.y.powi(j as i32));
                        // relative to the integrand scale: the quadrature sum
                        // cancels when the monomial is large but the integral
                        // is small
                        let mut magnitude: f64 = 0.0;
                        rule.integrate(&mesh, 0, |p| {
                            magnitude = magnitude.max((p.x.powi(i as i32) * p.y.powi(j as i32)).abs());
                            0.0
                        });
                        let scale = exact.abs().max(mesh.triangle_area(0) * magnitude);
                        assert!(
                            (approx - exact).abs() <= 1e-12 * scale,
                            "degree {degree} monomial x^{i} y^{j}: {approx} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reference_triangle_x2y2() {
        // ∫ x²y² over the triangle (0,0),(1,0),(0,1) equals 1/180.
        let tri = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = single_triangle_mesh(tri);
        for degree in 4..=10 {
            let rule = triangle_rule(degree).unwrap();
            let val = rule.integrate(&mesh, 0, |p| p.x * p.x * p.y * p.y);
            assert!((val - 1.0 / 180.0).abs() < 1e-15, "degree {degree}: {val}");
        }
    }

    #[test]
    fn constant_integrates_to_area() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rule = triangle_rule(4).unwrap();
        for _ in 0..100 {
            let tri = random_ccw_triangle(&mut rng);
            let mesh = single_triangle_mesh(tri);
            let area = mesh.triangle_area(0);
            let val = rule.integrate(&mesh, 0, |_| 1.0);
            assert!((val - area).abs() < 1e-13 * area);
        }
    }
}
