//! Manufactured problems: exact solution pairs with closed-form derivatives
//! to fourth order, and the right-hand sides derived from the plate system.
//!
//! The L-shape solution is a Cartesian bubble times a corner-singular
//! biharmonic function `r^{1+α} g(θ)`. Its derivatives are computed through
//! an exact term algebra on sums of `c·r^β·cos(kθ)` / `c·r^β·sin(kθ)`
//! (closed under Cartesian differentiation), because finite differences with
//! a fixed step cannot resolve third derivatives scaling like `r^{α−2}` near
//! the corner. Finite differences remain as an independent test oracle.

use std::sync::Arc;

use crate::mesh::Point2;
use crate::{Error, Result};

/// All partial derivatives `∂x^i ∂y^j f` with `i + j ≤ 4` at one point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Jet4 {
    pub d: [[f64; 5]; 5],
}

impl Jet4 {
    pub fn value(&self) -> f64 {
        self.d[0][0]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.d[1][0], self.d[0][1]]
    }

    /// `(∂xx, ∂xy, ∂yy)`.
    pub fn hessian(&self) -> [f64; 3] {
        [self.d[2][0], self.d[1][1], self.d[0][2]]
    }

    pub fn laplacian(&self) -> f64 {
        self.d[2][0] + self.d[0][2]
    }

    pub fn biharmonic(&self) -> f64 {
        self.d[4][0] + 2.0 * self.d[2][2] + self.d[0][4]
    }
}

/// The von Kármán bracket `[η,χ] = η_xx χ_yy + η_yy χ_xx − 2 η_xy χ_xy`.
pub fn bracket(a: &Jet4, b: &Jet4) -> f64 {
    a.d[2][0] * b.d[0][2] + a.d[0][2] * b.d[2][0] - 2.0 * a.d[1][1] * b.d[1][1]
}

/// A scalar field with derivatives to fourth order.
pub trait Field2d: Send + Sync {
    fn jet4(&self, p: Point2) -> Jet4;

    fn value(&self, p: Point2) -> f64 {
        self.jet4(p).value()
    }

    fn gradient(&self, p: Point2) -> [f64; 2] {
        self.jet4(p).gradient()
    }

    fn hessian(&self, p: Point2) -> [f64; 3] {
        self.jet4(p).hessian()
    }
}

// ---------------------------------------------------------------------------
// Unit-square fields
// ---------------------------------------------------------------------------

/// `x²(1−x)² y²(1−y)²`, the displacement of the square experiments.
pub struct QuarticBubble;

fn quartic_factor(t: f64) -> [f64; 5] {
    [
        t * t * (1.0 - t) * (1.0 - t),
        2.0 * t - 6.0 * t * t + 4.0 * t * t * t,
        2.0 - 12.0 * t + 12.0 * t * t,
        -12.0 + 24.0 * t,
        24.0,
    ]
}

impl Field2d for QuarticBubble {
    fn jet4(&self, p: Point2) -> Jet4 {
        separable(quartic_factor(p.x), quartic_factor(p.y))
    }
}

/// `sin²(πx) sin²(πy)`, the Airy stress function of the square experiments.
pub struct SineSquared;

fn sine_squared_factor(t: f64) -> [f64; 5] {
    use std::f64::consts::PI;
    let s = (PI * t).sin();
    let (s2, c2) = (2.0 * PI * t).sin_cos();
    [
        s * s,
        PI * s2,
        2.0 * PI * PI * c2,
        -4.0 * PI * PI * PI * s2,
        -8.0 * PI * PI * PI * PI * c2,
    ]
}

impl Field2d for SineSquared {
    fn jet4(&self, p: Point2) -> Jet4 {
        separable(sine_squared_factor(p.x), sine_squared_factor(p.y))
    }
}

fn separable(fx: [f64; 5], gy: [f64; 5]) -> Jet4 {
    let mut jet = Jet4::default();
    for i in 0..5 {
        for j in 0..5 - i {
            jet.d[i][j] = fx[i] * gy[j];
        }
    }
    jet
}

// ---------------------------------------------------------------------------
// Polar term algebra for the corner singularity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// One term `coef · r^r_pow · trig(freq·θ)`.
#[derive(Clone, Copy, Debug)]
pub struct PolarTerm {
    pub coef: f64,
    pub r_pow: f64,
    pub freq: f64,
    pub trig: Trig,
}

/// A sum of polar terms; closed under `∂x` and `∂y`
/// (via `∂x = cosθ ∂r − (sinθ/r) ∂θ`, `∂y = sinθ ∂r + (cosθ/r) ∂θ`,
/// with products of trigonometric factors rewritten as sums).
#[derive(Clone, Debug, Default)]
pub struct PolarTermSum {
    pub terms: Vec<PolarTerm>,
}

fn push_normalized(out: &mut Vec<PolarTerm>, mut term: PolarTerm) {
    if term.coef == 0.0 {
        return;
    }
    if term.freq < 0.0 {
        term.freq = -term.freq;
        if term.trig == Trig::Sin {
            term.coef = -term.coef;
        }
    }
    if term.trig == Trig::Sin && term.freq == 0.0 {
        return;
    }
    out.push(term);
}

impl PolarTermSum {
    pub fn new(terms: Vec<PolarTerm>) -> Self {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            push_normalized(&mut out, t);
        }
        Self { terms: out }
    }

    pub fn dx(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let (c, b, k) = (t.coef, t.r_pow, t.freq);
            push_normalized(
                &mut out,
                PolarTerm {
                    coef: 0.5 * c * (b + k),
                    r_pow: b - 1.0,
                    freq: k - 1.0,
                    trig: t.trig,
                },
            );
            push_normalized(
                &mut out,
                PolarTerm {
                    coef: 0.5 * c * (b - k),
                    r_pow: b - 1.0,
                    freq: k + 1.0,
                    trig: t.trig,
                },
            );
        }
        Self { terms: out }
    }

    pub fn dy(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let (c, b, k) = (t.coef, t.r_pow, t.freq);
            let (trig, sign_lo, sign_hi) = match t.trig {
                Trig::Cos => (Trig::Sin, -1.0, 1.0),
                Trig::Sin => (Trig::Cos, 1.0, -1.0),
            };
            push_normalized(
                &mut out,
                PolarTerm {
                    coef: sign_lo * 0.5 * c * (b + k),
                    r_pow: b - 1.0,
                    freq: k - 1.0,
                    trig,
                },
            );
            push_normalized(
                &mut out,
                PolarTerm {
                    coef: sign_hi * 0.5 * c * (b - k),
                    r_pow: b - 1.0,
                    freq: k + 1.0,
                    trig,
                },
            );
        }
        Self { terms: out }
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let angle = t.freq * theta;
                let trig = match t.trig {
                    Trig::Cos => angle.cos(),
                    Trig::Sin => angle.sin(),
                };
                t.coef * r.powf(t.r_pow) * trig
            })
            .sum()
    }
}

// ---------------------------------------------------------------------------
// L-shape corner singularity
// ---------------------------------------------------------------------------

/// Reentrant-corner opening angle of the L-shaped domain.
pub const CORNER_ANGLE: f64 = 3.0 * std::f64::consts::PI / 2.0;

/// Index of elliptic regularity reported for the L-shape experiments.
pub const CORNER_EXPONENT: f64 = 0.5444837367;

/// The same root of `sin²(αω) = α² sin²(ω)`, polished to machine precision;
/// used to build the singular solution so that the clamped conditions on the
/// reentrant edges hold to rounding accuracy.
const CORNER_EXPONENT_FULL: f64 = 0.544_483_736_782_463_9;

struct CompiledTerm {
    coef: f64,
    pow_idx: usize,
    freq_idx: usize,
    trig: Trig,
}

/// `(x²−1)²(y²−1)² · r^{1+α} g_{α,ω}(θ)` on the L-shaped domain, with the
/// angular factor transcribed term by term and all derivatives taken through
/// the polar term algebra combined with the bubble by the Leibniz rule.
///
/// Evaluation exactly at the origin is singular (derivatives carry negative
/// powers of r) and yields non-finite values; quadrature nodes and boundary
/// samples never request it.
pub struct CornerSingularField {
    jets: Vec<PolarTermSum>, // jets[i*5 + j] = ∂x^i ∂y^j of the singular factor
    pows: Vec<f64>,
    freqs: Vec<f64>,
    compiled: Vec<Vec<CompiledTerm>>,
}

/// The singular factor `s(r,θ) = r^{1+α} g_{α,ω}(θ)` as a polar term sum.
pub fn corner_singular_factor() -> PolarTermSum {
    let alpha = CORNER_EXPONENT_FULL;
    let omega = CORNER_ANGLE;
    let a = ((alpha - 1.0) * omega).sin() / (alpha - 1.0)
        - ((alpha + 1.0) * omega).sin() / (alpha + 1.0);
    let b = ((alpha - 1.0) * omega).cos() - ((alpha + 1.0) * omega).cos();
    PolarTermSum::new(vec![
        PolarTerm {
            coef: a,
            r_pow: 1.0 + alpha,
            freq: alpha - 1.0,
            trig: Trig::Cos,
        },
        PolarTerm {
            coef: -a,
            r_pow: 1.0 + alpha,
            freq: alpha + 1.0,
            trig: Trig::Cos,
        },
        PolarTerm {
            coef: -b / (alpha - 1.0),
            r_pow: 1.0 + alpha,
            freq: alpha - 1.0,
            trig: Trig::Sin,
        },
        PolarTerm {
            coef: b / (alpha + 1.0),
            r_pow: 1.0 + alpha,
            freq: alpha + 1.0,
            trig: Trig::Sin,
        },
    ])
}

impl CornerSingularField {
    pub fn new() -> Self {
        let mut jets = vec![PolarTermSum::default(); 25];
        jets[0] = corner_singular_factor();
        for i in 0..5usize {
            for j in 0..5 - i {
                if i > 0 {
                    jets[i * 5 + j] = jets[(i - 1) * 5 + j].dx();
                } else if j > 0 {
                    jets[j] = jets[j - 1].dy();
                }
            }
        }

        // share r-powers and angular frequencies across all jet terms
        let mut pows: Vec<f64> = Vec::new();
        let mut freqs: Vec<f64> = Vec::new();
        fn intern(list: &mut Vec<f64>, v: f64) -> usize {
            if let Some(idx) = list.iter().position(|&x| (x - v).abs() < 1e-9) {
                idx
            } else {
                list.push(v);
                list.len() - 1
            }
        }
        let mut compiled = Vec::with_capacity(25);
        for jet in &jets {
            let terms = jet
                .terms
                .iter()
                .map(|t| CompiledTerm {
                    coef: t.coef,
                    pow_idx: intern(&mut pows, t.r_pow),
                    freq_idx: intern(&mut freqs, t.freq),
                    trig: t.trig,
                })
                .collect();
            compiled.push(terms);
        }

        Self {
            jets,
            pows,
            freqs,
            compiled,
        }
    }

    /// Jet of the singular factor alone (used by the biharmonicity check).
    pub fn singular_jet4(&self, p: Point2) -> Jet4 {
        let (r, theta) = to_polar(p);
        let mut jet = Jet4::default();
        for i in 0..5 {
            for j in 0..5 - i {
                jet.d[i][j] = self.jets[i * 5 + j].eval(r, theta);
            }
        }
        jet
    }

    fn singular_jet4_fast(&self, r: f64, theta: f64) -> [[f64; 5]; 5] {
        let pow_cache: Vec<f64> = self.pows.iter().map(|&b| r.powf(b)).collect();
        let trig_cache: Vec<(f64, f64)> =
            self.freqs.iter().map(|&f| (f * theta).sin_cos()).collect();
        let mut out = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 - i {
                let mut sum = 0.0;
                for t in &self.compiled[i * 5 + j] {
                    let (sin, cos) = trig_cache[t.freq_idx];
                    let trig = match t.trig {
                        Trig::Cos => cos,
                        Trig::Sin => sin,
                    };
                    sum += t.coef * pow_cache[t.pow_idx] * trig;
                }
                out[i][j] = sum;
            }
        }
        out
    }
}

impl Default for CornerSingularField {
    fn default() -> Self {
        Self::new()
    }
}

fn to_polar(p: Point2) -> (f64, f64) {
    let r = p.x.hypot(p.y);
    let mut theta = p.y.atan2(p.x);
    if theta < 0.0 {
        theta += 2.0 * std::f64::consts::PI;
    }
    (r, theta)
}

const BINOMIAL: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

fn lshape_bubble_factor(t: f64) -> [f64; 5] {
    let q = t * t - 1.0;
    [
        q * q,
        4.0 * t * t * t - 4.0 * t,
        12.0 * t * t - 4.0,
        24.0 * t,
        24.0,
    ]
}

impl Field2d for CornerSingularField {
    fn jet4(&self, p: Point2) -> Jet4 {
        let (r, theta) = to_polar(p);
        let s = self.singular_jet4_fast(r, theta);
        let bx = lshape_bubble_factor(p.x);
        let by = lshape_bubble_factor(p.y);
        let mut jet = Jet4::default();
        for i in 0..5 {
            for j in 0..5 - i {
                let mut sum = 0.0;
                for pi in 0..=i {
                    for qi in 0..=j {
                        sum += BINOMIAL[i][pi]
                            * BINOMIAL[j][qi]
                            * bx[pi]
                            * by[qi]
                            * s[i - pi][j - qi];
                    }
                }
                jet.d[i][j] = sum;
            }
        }
        jet
    }
}

// ---------------------------------------------------------------------------
// Manufactured problems
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    UnitSquare,
    LShape,
}

/// An exact solution pair with its derived right-hand sides.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub domain: Domain,
    pub exact_u: Arc<dyn Field2d>,
    pub exact_v: Arc<dyn Field2d>,
    /// Membrane-force coefficient p/D (0 disables the −(p/D)Δu term).
    pub p_over_d: f64,
    /// Expected convergence index: 1 on convex domains, ≈0.544 on the L-shape.
    pub alpha_expected: f64,
}

/// Right-hand sides reproducing the exact pair:
/// `f₁ = Δ²u − [u,v] + (p/D)Δu` and `f₂ = Δ²v + ½[u,u]`.
pub fn rhs_from_exact(u: &dyn Field2d, v: &dyn Field2d, p_over_d: f64, p: Point2) -> (f64, f64) {
    let ju = u.jet4(p);
    let jv = v.jet4(p);
    rhs_from_jets(&ju, &jv, p_over_d)
}

fn rhs_from_jets(ju: &Jet4, jv: &Jet4, p_over_d: f64) -> (f64, f64) {
    let f1 = ju.biharmonic() - bracket(ju, jv) + p_over_d * ju.laplacian();
    let f2 = jv.biharmonic() + 0.5 * bracket(ju, ju);
    (f1, f2)
}

impl ManufacturedProblem {
    pub fn rhs_f1(&self, p: Point2) -> f64 {
        self.rhs_pair(p).0
    }

    pub fn rhs_f2(&self, p: Point2) -> f64 {
        self.rhs_pair(p).1
    }

    pub fn rhs_pair(&self, p: Point2) -> (f64, f64) {
        let ju = self.exact_u.jet4(p);
        if Arc::ptr_eq(&self.exact_u, &self.exact_v) {
            rhs_from_jets(&ju, &ju, self.p_over_d)
        } else {
            let jv = self.exact_v.jet4(p);
            rhs_from_jets(&ju, &jv, self.p_over_d)
        }
    }

    /// Boundary segments of the domain, counterclockwise.
    pub fn boundary_segments(&self) -> Vec<(Point2, Point2)> {
        match self.domain {
            Domain::UnitSquare => vec![
                (Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)),
                (Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)),
                (Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)),
                (Point2::new(0.0, 1.0), Point2::new(0.0, 0.0)),
            ],
            Domain::LShape => vec![
                (Point2::new(-1.0, -1.0), Point2::new(0.0, -1.0)),
                (Point2::new(0.0, -1.0), Point2::new(0.0, 0.0)),
                (Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)),
                (Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)),
                (Point2::new(1.0, 1.0), Point2::new(-1.0, 1.0)),
                (Point2::new(-1.0, 1.0), Point2::new(-1.0, -1.0)),
            ],
        }
    }
}

/// Square-domain problem: `u = x²(1−x)² y²(1−y)²`, `v = sin²(πx) sin²(πy)`.
pub fn example1() -> ManufacturedProblem {
    ManufacturedProblem {
        domain: Domain::UnitSquare,
        exact_u: Arc::new(QuarticBubble),
        exact_v: Arc::new(SineSquared),
        p_over_d: 0.0,
        alpha_expected: 1.0,
    }
}

/// L-shape problem with the corner-singular exact pair `v = u`.
pub fn example2() -> ManufacturedProblem {
    let field: Arc<dyn Field2d> = Arc::new(CornerSingularField::new());
    ManufacturedProblem {
        domain: Domain::LShape,
        exact_u: field.clone(),
        exact_v: field,
        p_over_d: 0.0,
        alpha_expected: CORNER_EXPONENT,
    }
}

/// Square-domain problem with the membrane term, p/D = 10; same exact pair
/// as [`example1`].
pub fn example3() -> ManufacturedProblem {
    ManufacturedProblem {
        p_over_d: 10.0,
        ..example1()
    }
}

/// Verifies that the exact pair satisfies the clamped conditions on sampled
/// boundary points; aborts the experiment with a diagnostic if violated.
pub fn validate_clamped_boundary(problem: &ManufacturedProblem) -> Result<()> {
    const SAMPLES: usize = 25;
    const TOL: f64 = 1e-8;
    for (a, b) in problem.boundary_segments() {
        let dir = b - a;
        let normal = Point2::new(-dir.y, dir.x) * (1.0 / dir.norm());
        for k in 0..SAMPLES {
            let t = (k as f64 + 0.5) / SAMPLES as f64;
            let p = a + dir * t;
            for (name, field) in [("u", &problem.exact_u), ("v", &problem.exact_v)] {
                let value = field.value(p);
                let g = field.gradient(p);
                let normal_derivative = g[0] * normal.x + g[1] * normal.y;
                for (what, val) in [
                    (name.to_string(), value),
                    (format!("d{name}/dnu"), normal_derivative),
                ] {
                    if !(val.abs() <= TOL) {
                        return Err(Error::BoundaryConditionViolated {
                            field: what,
                            x: p.x,
                            y: p.y,
                            value: val,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}
